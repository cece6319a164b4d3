#include "dsic/reference.hpp"

#include <algorithm>
#include <cmath>

namespace dsic::reference {

Tensor4 conv2d(const Tensor4& x, const Tensor4& weight, const Tensor4& bias,
               int stride, int padding) {
  const Shape4 xs = x.shape();
  const Shape4 ws = weight.shape();
  const int oh = (xs.h + 2 * padding - ws.h) / stride + 1;
  const int ow = (xs.w + 2 * padding - ws.w) / stride + 1;
  Tensor4 out(xs.n, ws.n, oh, ow);
  for (int n = 0; n < xs.n; ++n) {
    for (int oc = 0; oc < ws.n; ++oc) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          double acc = bias.empty() ? 0.0 : bias.at(0, oc, 0, 0);
          for (int ic = 0; ic < ws.c; ++ic) {
            for (int ky = 0; ky < ws.h; ++ky) {
              for (int kx = 0; kx < ws.w; ++kx) {
                const int iy = oy * stride - padding + ky;
                const int ix = ox * stride - padding + kx;
                if (iy < 0 || iy >= xs.h || ix < 0 || ix >= xs.w) continue;
                acc += x.at(n, ic, iy, ix) * weight.at(oc, ic, ky, kx);
              }
            }
          }
          out.at(n, oc, oy, ox) = acc;
        }
      }
    }
  }
  return out;
}

Tensor4 upsample2(const Tensor4& x) {
  const Shape4 xs = x.shape();
  Tensor4 out(xs.n, xs.c, xs.h * 2, xs.w * 2);
  auto sample = [](const Tensor4& t, int n, int c, int y, int xx, const Shape4& s) {
    return t.at(n, c, std::clamp(y, 0, s.h - 1), std::clamp(xx, 0, s.w - 1));
  };
  for (int n = 0; n < xs.n; ++n) {
    for (int c = 0; c < xs.c; ++c) {
      for (int oy = 0; oy < xs.h * 2; ++oy) {
        const double py = (oy + 0.5) / 2.0 - 0.5;
        const int y0 = static_cast<int>(std::floor(py));
        const double fy = py - y0;
        for (int ox = 0; ox < xs.w * 2; ++ox) {
          const double px = (ox + 0.5) / 2.0 - 0.5;
          const int x0 = static_cast<int>(std::floor(px));
          const double fx = px - x0;
          const double top = (1.0 - fx) * sample(x, n, c, y0, x0, xs) +
                             fx * sample(x, n, c, y0, x0 + 1, xs);
          const double bot = (1.0 - fx) * sample(x, n, c, y0 + 1, x0, xs) +
                             fx * sample(x, n, c, y0 + 1, x0 + 1, xs);
          out.at(n, c, oy, ox) = (1.0 - fy) * top + fy * bot;
        }
      }
    }
  }
  return out;
}

Tensor4 global_avg(const Tensor4& x) {
  const Shape4 xs = x.shape();
  Tensor4 out(xs.n, xs.c, 1, 1);
  for (int n = 0; n < xs.n; ++n) {
    for (int c = 0; c < xs.c; ++c) {
      double acc = 0.0;
      for (int y = 0; y < xs.h; ++y)
        for (int xx = 0; xx < xs.w; ++xx) acc += x.at(n, c, y, xx);
      out.at(n, c, 0, 0) = acc / (static_cast<double>(xs.h) * xs.w);
    }
  }
  return out;
}

Tensor4 global_max(const Tensor4& x) {
  const Shape4 xs = x.shape();
  Tensor4 out(xs.n, xs.c, 1, 1);
  for (int n = 0; n < xs.n; ++n) {
    for (int c = 0; c < xs.c; ++c) {
      double best = x.at(n, c, 0, 0);
      for (int y = 0; y < xs.h; ++y)
        for (int xx = 0; xx < xs.w; ++xx) best = std::max(best, x.at(n, c, y, xx));
      out.at(n, c, 0, 0) = best;
    }
  }
  return out;
}

}  // namespace dsic::reference
