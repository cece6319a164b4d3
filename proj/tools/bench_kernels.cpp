// Times the OpenMP kernels against their serial reference implementations on
// training-shaped workloads.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dsic/kernels.hpp"
#include "dsic/reference.hpp"
#include "dsic/rng.hpp"

using namespace dsic;
namespace chrono = std::chrono;

namespace {

template <typename F>
double time_ms(F&& fn, int reps) {
  // warm once, then time
  fn();
  const auto t0 = chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = chrono::steady_clock::now();
  return chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double kernel_ms, double diff) {
  std::printf("%-28s %10.3f ms %10.3f ms %7.2fx   max|diff| %.3g\n", name, serial_ms, kernel_ms,
              serial_ms / kernel_ms, diff);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; kernels run serially\n");
#endif
  std::printf("%-28s %13s %13s %9s\n", "workload", "serial", "parallel", "speedup");

  Rng rng(7);
  const int reps = 5;

  {
    Tensor4 x = Tensor4::random_uniform({4, 32, 32, 32}, rng, -1.0, 1.0);
    Tensor4 w = Tensor4::random_uniform({32, 32, 3, 3}, rng, -0.2, 0.2);
    Tensor4 b = Tensor4::random_uniform({1, 32, 1, 1}, rng, -0.1, 0.1);
    Tensor4 serial_out, kernel_out;
    const double serial_ms = time_ms([&] { serial_out = reference::conv2d(x, w, b, 1, 1); }, reps);
    const double kernel_ms =
        time_ms([&] { kernel_out = kernels::conv2d_forward(x, w, b, 1, 1); }, reps);
    report("conv2d 3x3 (4,32,32,32)", serial_ms, kernel_ms, serial_out.max_abs_diff(kernel_out));
  }
  {
    Tensor4 x = Tensor4::random_uniform({4, 32, 32, 32}, rng, -1.0, 1.0);
    Tensor4 w = Tensor4::random_uniform({32, 32, 3, 3}, rng, -0.2, 0.2);
    Tensor4 gout = Tensor4::random_uniform({4, 32, 16, 16}, rng, -1.0, 1.0);
    const double grad_in_ms =
        time_ms([&] { kernels::conv2d_grad_input(gout, w, x.shape(), 2, 1); }, reps);
    const double grad_w_ms =
        time_ms([&] { kernels::conv2d_grad_weight(gout, x, w.shape(), 2, 1); }, reps);
    std::printf("%-28s %10.3f ms (input)  %8.3f ms (weight)\n", "conv2d stride-2 backward",
                grad_in_ms, grad_w_ms);
  }
  {
    Tensor4 x = Tensor4::random_uniform({4, 32, 16, 16}, rng, -1.0, 1.0);
    Tensor4 serial_out, kernel_out;
    const double serial_ms = time_ms([&] { serial_out = reference::upsample2(x); }, reps);
    const double kernel_ms = time_ms([&] { kernel_out = kernels::upsample2_forward(x); }, reps);
    report("bilinear x2 (4,32,16,16)", serial_ms, kernel_ms, serial_out.max_abs_diff(kernel_out));
  }
  {
    Tensor4 x = Tensor4::random_uniform({4, 64, 16, 16}, rng, -1.0, 1.0);
    Tensor4 serial_out, kernel_out;
    std::vector<int> argmax;
    const double serial_ms = time_ms([&] { serial_out = reference::global_max(x); }, reps);
    const double kernel_ms =
        time_ms([&] { kernel_out = kernels::global_max_forward(x, argmax); }, reps);
    report("global max (4,64,16,16)", serial_ms, kernel_ms, serial_out.max_abs_diff(kernel_out));
  }
  return 0;
}
