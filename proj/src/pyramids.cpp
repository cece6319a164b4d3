#include "dsic/pyramids.hpp"

#include <cmath>

namespace dsic {

FpnParams make_fpn_params(ParamStore& store, const std::array<int, 4>& in_channels, int d,
                          bool smooth, Rng& rng) {
  FpnParams params;
  params.smooth = smooth;
  const ConvInit linear_init{std::sqrt(3.0), true};
  for (int i = 0; i < 4; ++i) {
    params.lateral[static_cast<std::size_t>(i)] =
        make_conv(store, "fpn.lateral" + std::to_string(i + 2),
                  d, in_channels[static_cast<std::size_t>(i)], 1, 1, 0, rng, linear_init);
    if (smooth) {
      params.smooth_conv[static_cast<std::size_t>(i)] =
          make_conv(store, "fpn.smooth" + std::to_string(i + 2), d, d, 3, 1, 1, rng,
                    linear_init);
    }
  }
  return params;
}

std::array<Var, 4> fpn_forward(const std::array<Var, 4>& pyramid, const FpnParams& params,
                               const BoundParams& p) {
  std::array<Var, 4> lateral;
  for (int i = 0; i < 4; ++i) {
    lateral[static_cast<std::size_t>(i)] =
        apply_conv(params.lateral[static_cast<std::size_t>(i)], p,
                   pyramid[static_cast<std::size_t>(i)]);
  }
  std::array<Var, 4> out = top_down_merge(lateral);
  if (params.smooth) {
    for (int i = 0; i < 4; ++i) {
      out[static_cast<std::size_t>(i)] =
          apply_conv(params.smooth_conv[static_cast<std::size_t>(i)], p,
                     out[static_cast<std::size_t>(i)]);
    }
  }
  return out;
}

std::array<Var, 4> top_down_merge(const std::array<Var, 4>& laterals) {
  std::array<Var, 4> out;
  out[3] = laterals[3];
  for (int k = 2; k >= 0; --k) {
    out[static_cast<std::size_t>(k)] =
        add(laterals[static_cast<std::size_t>(k)], f_up(out[static_cast<std::size_t>(k + 1)], 1));
  }
  return out;
}

std::array<Var, 4> fc_fpn_forward(const std::array<Var, 4>& pyramid,
                                  const LatticeParams& lattice, const BoundParams& p) {
  std::array<Var, 4> projected = project_inputs(pyramid, lattice, p);
  auto m = build_lattice(projected, lattice, p);
  std::array<Var, 4> out;
  for (int k = 0; k < 4; ++k) {
    Var acc;
    for (int i = 0; i < 4; ++i) {
      Var cell = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      acc = acc ? add(acc, cell) : cell;
    }
    out[static_cast<std::size_t>(k)] = acc;
  }
  return out;
}

}  // namespace dsic
