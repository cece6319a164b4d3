#include "dsic/kernels.hpp"

#include <algorithm>

#include "dsic/fault.hpp"

namespace dsic {

namespace {
Fault g_fault = Fault::None;
}

void set_fault(Fault f) { g_fault = f; }
Fault active_fault() { return g_fault; }

}  // namespace dsic

namespace dsic::kernels {

Tensor4 conv2d_forward(const Tensor4& x, const Tensor4& weight, const Tensor4& bias,
                       int stride, int padding) {
  const Shape4 xs = x.shape();
  const Shape4 ws = weight.shape();
  const int out_c = ws.n, in_c = ws.c, kh = ws.h, kw = ws.w;
  const int oh = (xs.h + 2 * padding - kh) / stride + 1;
  const int ow = (xs.w + 2 * padding - kw) / stride + 1;
  Tensor4 out(xs.n, out_c, oh, ow);
  const bool has_bias = !bias.empty();

  const long long total = static_cast<long long>(xs.n) * out_c;
#pragma omp parallel for schedule(static)
  for (long long plane = 0; plane < total; ++plane) {
    const int n = static_cast<int>(plane / out_c);
    const int oc = static_cast<int>(plane % out_c);
    const double b = has_bias ? bias.at(0, oc, 0, 0) : 0.0;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = b;
        for (int ic = 0; ic < in_c; ++ic) {
          for (int ky = 0; ky < kh; ++ky) {
            const int iy = oy * stride - padding + ky;
            if (iy < 0 || iy >= xs.h) continue;
            for (int kx = 0; kx < kw; ++kx) {
              const int ix = ox * stride - padding + kx;
              if (ix < 0 || ix >= xs.w) continue;
              acc += x.at(n, ic, iy, ix) * weight.at(oc, ic, ky, kx);
            }
          }
        }
        out.at(n, oc, oy, ox) = acc;
      }
    }
  }
  return out;
}

Tensor4 conv2d_grad_input(const Tensor4& gout, const Tensor4& weight, Shape4 x_shape,
                          int stride, int padding) {
  const Shape4 gs = gout.shape();
  const Shape4 ws = weight.shape();
  Tensor4 gx(x_shape);

  const long long total = static_cast<long long>(x_shape.n) * x_shape.c;
#pragma omp parallel for schedule(static)
  for (long long plane = 0; plane < total; ++plane) {
    const int n = static_cast<int>(plane / x_shape.c);
    const int ic = static_cast<int>(plane % x_shape.c);
    for (int iy = 0; iy < x_shape.h; ++iy) {
      for (int ix = 0; ix < x_shape.w; ++ix) {
        double acc = 0.0;
        for (int oc = 0; oc < ws.n; ++oc) {
          for (int ky = 0; ky < ws.h; ++ky) {
            const int num_y = iy + padding - ky;
            if (num_y < 0 || num_y % stride != 0) continue;
            const int oy = num_y / stride;
            if (oy >= gs.h) continue;
            for (int kx = 0; kx < ws.w; ++kx) {
              const int num_x = ix + padding - kx;
              if (num_x < 0 || num_x % stride != 0) continue;
              const int ox = num_x / stride;
              if (ox >= gs.w) continue;
              acc += gout.at(n, oc, oy, ox) * weight.at(oc, ic, ky, kx);
            }
          }
        }
        gx.at(n, ic, iy, ix) = acc;
      }
    }
  }
  return gx;
}

Tensor4 conv2d_grad_weight(const Tensor4& gout, const Tensor4& x, Shape4 w_shape,
                           int stride, int padding) {
  const Shape4 gs = gout.shape();
  const Shape4 xs = x.shape();
  Tensor4 gw(w_shape);

  const long long total = w_shape.count();
#pragma omp parallel for schedule(static)
  for (long long idx = 0; idx < total; ++idx) {
    const int kw_ = w_shape.w, kh_ = w_shape.h, ic_n = w_shape.c;
    const int kx = static_cast<int>(idx % kw_);
    const int ky = static_cast<int>((idx / kw_) % kh_);
    const int ic = static_cast<int>((idx / (static_cast<long long>(kw_) * kh_)) % ic_n);
    const int oc = static_cast<int>(idx / (static_cast<long long>(kw_) * kh_ * ic_n));
    double acc = 0.0;
    for (int n = 0; n < gs.n; ++n) {
      for (int oy = 0; oy < gs.h; ++oy) {
        const int iy = oy * stride - padding + ky;
        if (iy < 0 || iy >= xs.h) continue;
        for (int ox = 0; ox < gs.w; ++ox) {
          const int ix = ox * stride - padding + kx;
          if (ix < 0 || ix >= xs.w) continue;
          acc += gout.at(n, oc, oy, ox) * x.at(n, ic, iy, ix);
        }
      }
    }
    gw[static_cast<std::size_t>(idx)] = acc;
  }
  return gw;
}

Tensor4 conv2d_grad_bias(const Tensor4& gout) {
  const Shape4 gs = gout.shape();
  Tensor4 gb(1, gs.c, 1, 1);
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < gs.c; ++oc) {
    double acc = 0.0;
    for (int n = 0; n < gs.n; ++n) {
      for (int oy = 0; oy < gs.h; ++oy) {
        for (int ox = 0; ox < gs.w; ++ox) {
          acc += gout.at(n, oc, oy, ox);
        }
      }
    }
    gb.at(0, oc, 0, 0) = acc;
  }
  return gb;
}

namespace {

struct Interp {
  int lo, hi;
  double w_lo, w_hi;
};

// src coordinate for output index i at factor 2, edge-clamped
inline Interp interp_x2(int i, int in_dim) {
  const double p = (i + 0.5) / 2.0 - 0.5;
  const int base = static_cast<int>(std::floor(p));
  double frac = p - base;
  Interp r;
  r.lo = std::clamp(base, 0, in_dim - 1);
  r.hi = std::clamp(base + 1, 0, in_dim - 1);
  r.w_lo = 1.0 - frac;
  r.w_hi = frac;
  if (active_fault() == Fault::BilinearKernel) r.w_lo += 0.01;
  return r;
}

}  // namespace

Tensor4 upsample2_forward(const Tensor4& x) {
  const Shape4 xs = x.shape();
  Tensor4 out(xs.n, xs.c, xs.h * 2, xs.w * 2);

  const long long planes = static_cast<long long>(xs.n) * xs.c;
#pragma omp parallel for schedule(static)
  for (long long plane = 0; plane < planes; ++plane) {
    const int n = static_cast<int>(plane / xs.c);
    const int c = static_cast<int>(plane % xs.c);
    for (int oy = 0; oy < xs.h * 2; ++oy) {
      const Interp ry = interp_x2(oy, xs.h);
      for (int ox = 0; ox < xs.w * 2; ++ox) {
        const Interp rx = interp_x2(ox, xs.w);
        out.at(n, c, oy, ox) = ry.w_lo * (rx.w_lo * x.at(n, c, ry.lo, rx.lo) +
                                          rx.w_hi * x.at(n, c, ry.lo, rx.hi)) +
                               ry.w_hi * (rx.w_lo * x.at(n, c, ry.hi, rx.lo) +
                                          rx.w_hi * x.at(n, c, ry.hi, rx.hi));
      }
    }
  }
  return out;
}

Tensor4 upsample2_grad_input(const Tensor4& gout, Shape4 x_shape) {
  Tensor4 gx(x_shape);
  const long long planes = static_cast<long long>(x_shape.n) * x_shape.c;
  // scatter is confined to one (n, c) plane per iteration, so planes can run
  // in parallel without write conflicts
#pragma omp parallel for schedule(static)
  for (long long plane = 0; plane < planes; ++plane) {
    const int n = static_cast<int>(plane / x_shape.c);
    const int c = static_cast<int>(plane % x_shape.c);
    for (int oy = 0; oy < x_shape.h * 2; ++oy) {
      const Interp ry = interp_x2(oy, x_shape.h);
      for (int ox = 0; ox < x_shape.w * 2; ++ox) {
        const Interp rx = interp_x2(ox, x_shape.w);
        const double g = gout.at(n, c, oy, ox);
        gx.at(n, c, ry.lo, rx.lo) += ry.w_lo * rx.w_lo * g;
        gx.at(n, c, ry.lo, rx.hi) += ry.w_lo * rx.w_hi * g;
        gx.at(n, c, ry.hi, rx.lo) += ry.w_hi * rx.w_lo * g;
        gx.at(n, c, ry.hi, rx.hi) += ry.w_hi * rx.w_hi * g;
      }
    }
  }
  return gx;
}

Tensor4 global_avg_forward(const Tensor4& x) {
  const Shape4 xs = x.shape();
  Tensor4 out(xs.n, xs.c, 1, 1);
  const double inv = 1.0 / (static_cast<double>(xs.h) * xs.w);
  const long long planes = static_cast<long long>(xs.n) * xs.c;
#pragma omp parallel for schedule(static)
  for (long long plane = 0; plane < planes; ++plane) {
    const int n = static_cast<int>(plane / xs.c);
    const int c = static_cast<int>(plane % xs.c);
    double acc = 0.0;
    for (int y = 0; y < xs.h; ++y)
      for (int x_ = 0; x_ < xs.w; ++x_) acc += x.at(n, c, y, x_);
    out.at(n, c, 0, 0) = acc * inv;
  }
  return out;
}

Tensor4 global_avg_grad_input(const Tensor4& gout, Shape4 x_shape) {
  Tensor4 gx(x_shape);
  const double inv = 1.0 / (static_cast<double>(x_shape.h) * x_shape.w);
  const long long planes = static_cast<long long>(x_shape.n) * x_shape.c;
#pragma omp parallel for schedule(static)
  for (long long plane = 0; plane < planes; ++plane) {
    const int n = static_cast<int>(plane / x_shape.c);
    const int c = static_cast<int>(plane % x_shape.c);
    const double g = gout.at(n, c, 0, 0) * inv;
    for (int y = 0; y < x_shape.h; ++y)
      for (int x_ = 0; x_ < x_shape.w; ++x_) gx.at(n, c, y, x_) = g;
  }
  return gx;
}

Tensor4 global_max_forward(const Tensor4& x, std::vector<int>& argmax) {
  const Shape4 xs = x.shape();
  Tensor4 out(xs.n, xs.c, 1, 1);
  argmax.assign(static_cast<std::size_t>(xs.n) * xs.c, 0);
  const long long planes = static_cast<long long>(xs.n) * xs.c;
#pragma omp parallel for schedule(static)
  for (long long plane = 0; plane < planes; ++plane) {
    const int n = static_cast<int>(plane / xs.c);
    const int c = static_cast<int>(plane % xs.c);
    double best = x.at(n, c, 0, 0);
    int best_idx = 0;
    for (int y = 0; y < xs.h; ++y) {
      for (int x_ = 0; x_ < xs.w; ++x_) {
        const double v = x.at(n, c, y, x_);
        if (v > best) {  // strict: ties keep the first index
          best = v;
          best_idx = y * xs.w + x_;
        }
      }
    }
    out.at(n, c, 0, 0) = best;
    argmax[static_cast<std::size_t>(plane)] = best_idx;
  }
  return out;
}

Tensor4 global_max_grad_input(const Tensor4& gout, const std::vector<int>& argmax,
                              Shape4 x_shape) {
  Tensor4 gx(x_shape);
  const long long planes = static_cast<long long>(x_shape.n) * x_shape.c;
#pragma omp parallel for schedule(static)
  for (long long plane = 0; plane < planes; ++plane) {
    const int n = static_cast<int>(plane / x_shape.c);
    const int c = static_cast<int>(plane % x_shape.c);
    const int idx = argmax[static_cast<std::size_t>(plane)];
    gx.at(n, c, idx / x_shape.w, idx % x_shape.w) = gout.at(n, c, 0, 0);
  }
  return gx;
}

}  // namespace dsic::kernels
