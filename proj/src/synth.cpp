#include "dsic/synth.hpp"

#include <algorithm>
#include <cmath>

#include "dsic/rng.hpp"

namespace dsic {

int level_for_radius(double radius) {
  if (radius < 4.0) return 2;
  if (radius < 8.0) return 3;
  if (radius < 16.0) return 4;
  return 5;
}

double circle_overlap_fraction(double r1, double r2, double d) {
  const double rs = std::min(r1, r2);
  const double rl = std::max(r1, r2);
  if (d >= rs + rl) return 0.0;
  if (d <= rl - rs) return 1.0;  // smaller circle contained
  const double a1 = rs * rs * std::acos(std::clamp((d * d + rs * rs - rl * rl) / (2 * d * rs), -1.0, 1.0));
  const double a2 = rl * rl * std::acos(std::clamp((d * d + rl * rl - rs * rs) / (2 * d * rl), -1.0, 1.0));
  const double t = (-d + rs + rl) * (d + rs - rl) * (d - rs + rl) * (d + rs + rl);
  const double lens = a1 + a2 - 0.5 * std::sqrt(std::max(t, 0.0));
  return lens / (M_PI * rs * rs);
}

SynthSample generate_sample(std::uint64_t seed, const BlobSpec& spec, int image_size) {
  Rng rng(seed * 0x2545f4914f6cdd1dull + 0x9e3779b97f4a7c15ull);
  SynthSample sample;
  sample.seed = seed;

  const int count = rng.uniform_int(spec.min_count, spec.max_count);
  for (int b = 0; b < count; ++b) {
    bool placed = false;
    for (int attempt = 0; attempt < 40 && !placed; ++attempt) {
      double radius = rng.log_uniform(spec.radius_min, spec.radius_max);
      radius = std::min(radius, 31.999);
      const int level = level_for_radius(radius);
      const int stride = 1 << level;
      const int grid = image_size / stride;
      const int ix = rng.uniform_int(0, grid - 1);
      const int iy = rng.uniform_int(0, grid - 1);
      Blob blob;
      blob.cx = (ix + 0.5) * stride;  // snapped to the assigned level's cell center
      blob.cy = (iy + 0.5) * stride;
      blob.radius = radius;
      blob.level = level;

      bool ok = true;
      for (const Blob& other : sample.blobs) {
        const double d = std::hypot(blob.cx - other.cx, blob.cy - other.cy);
        if (circle_overlap_fraction(blob.radius, other.radius, d) > 0.5) {
          ok = false;
          break;
        }
        // same-level peaks must stay separable under 3x3 suppression
        if (other.level == level && d < 2.0 * stride) {
          ok = false;
          break;
        }
      }
      if (ok) {
        sample.blobs.push_back(blob);
        placed = true;
      }
    }
  }

  sample.image = Tensor4(1, 1, image_size, image_size);
  for (int y = 0; y < image_size; ++y) {
    for (int x = 0; x < image_size; ++x) {
      double v = 0.0;
      for (const Blob& blob : sample.blobs) {
        const double dx = (x + 0.5) - blob.cx;
        const double dy = (y + 0.5) - blob.cy;
        const double sigma = blob.radius / 2.0;
        v += std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      }
      sample.image.at(0, 0, y, x) = v;
    }
  }

  for (int k = 0; k < 4; ++k) {
    const int level = k + 2;
    const int stride = 1 << level;
    const int grid = image_size / stride;
    Tensor4 target(1, 1, grid, grid);
    for (const Blob& blob : sample.blobs) {
      if (blob.level != level) continue;
      const double ccx = blob.cx / stride;  // cell units
      const double ccy = blob.cy / stride;
      const double sigma = blob.radius / stride;
      for (int y = 0; y < grid; ++y) {
        for (int x = 0; x < grid; ++x) {
          const double dx = (x + 0.5) - ccx;
          const double dy = (y + 0.5) - ccy;
          const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
          target.at(0, 0, y, x) = std::max(target.at(0, 0, y, x), v);
        }
      }
    }
    sample.targets[static_cast<std::size_t>(k)] = std::move(target);
  }
  return sample;
}

}  // namespace dsic
