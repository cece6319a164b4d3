#include "dsic/csg.hpp"

namespace dsic {

LatticeParams make_lattice_params(ParamStore& store, const std::string& prefix,
                                  const std::array<int, 4>& in_channels, int d, Rng& rng) {
  LatticeParams lp;
  lp.d = d;
  // variance-preserving bounds sqrt(3 / fan_in) for the linear resampling path
  const ConvInit linear_init{std::sqrt(3.0), true};
  for (int i = 0; i < 4; ++i) {
    lp.proj[static_cast<std::size_t>(i)] =
        make_conv(store, prefix + ".proj" + std::to_string(i + 2),
                  d, in_channels[static_cast<std::size_t>(i)], 1, 1, 0, rng, linear_init);
    for (int k = i + 1; k < 4; ++k) {
      auto& stack = lp.down[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      for (int step = 0; step < k - i; ++step) {
        stack.push_back(make_conv(store,
                                  prefix + ".down" + std::to_string(i + 2) + "_" +
                                      std::to_string(k + 2) + "_" + std::to_string(step),
                                  d, d, 3, 2, 1, rng, linear_init));
      }
    }
  }
  return lp;
}

CsgParams make_csg_params(ParamStore& store, const std::array<int, 4>& in_channels, int d,
                          const CsgOptions& opts, Rng& rng, double gate_head_scale) {
  CsgParams params;
  params.opts = opts;
  params.lattice = make_lattice_params(store, "csg", in_channels, d, rng);
  // Emitting heads get positive biases so paths start open enough to carry
  // gradient; a cold start under the rectified mode leaves half the paths
  // dead. The w biases favor the classic top-down topology (lateral and
  // top-down paths well open, down paths barely open but trainable) and the
  // selection maps start saturated-open so the connector begins as a clean
  // pass-through instead of modulating features with head noise.
  const bool warm = gate_head_scale != 0.0;
  for (int k = 0; k < 4; ++k) {
    const std::string base = "csg.ccu" + std::to_string(k + 2);
    CcuHeadParams& head = params.heads[static_cast<std::size_t>(k)];
    // the w trunk keeps full-scale weights: path gates are driven by pooled
    // sample statistics, not just their biases
    const ConvInit trunk_init{warm ? 2.5 : 0.0, true};
    const ConvInit emit_init{warm ? 0.2 : 0.0, true};
    head.w_reduce = make_conv(store, base + ".w_reduce", d, 4 * d, 1, 1, 0, rng, trunk_init);
    head.w_out = make_conv(store, base + ".w_out", 4, d, 1, 1, 0, rng, trunk_init);
    if (warm) {
      // heavily used top-down/lateral paths start bias-stable; the quiet down
      // paths carry the input-driven variation
      Tensor4& wb = store.value(head.w_out.bias);
      Tensor4& ww = store.value(head.w_out.weight);
      for (int i = 0; i < 4; ++i) {
        wb.at(0, i, 0, 0) = i >= k ? 1.0 : 0.1;
        if (i >= k) {
          for (int c = 0; c < d; ++c) ww.at(i, c, 0, 0) *= 0.15;
        }
      }
    }
    for (int i = 0; i < 4; ++i) {
      head.s_conv[static_cast<std::size_t>(i)] =
          make_conv(store, base + ".s" + std::to_string(i + 2), 1, d, 3, 1, 1, rng, emit_init);
      if (warm) store.value(head.s_conv[static_cast<std::size_t>(i)].bias) = Tensor4(1, 1, 1, 1, 1.5);
    }
    head.s_shared = make_conv(store, base + ".s_shared", 1, d, 3, 1, 1, rng, emit_init);
  }
  return params;
}

std::array<Var, 4> project_inputs(const std::array<Var, 4>& pyramid,
                                  const LatticeParams& lattice, const BoundParams& p) {
  std::array<Var, 4> out;
  for (int i = 0; i < 4; ++i) {
    out[static_cast<std::size_t>(i)] = apply_conv(lattice.proj[static_cast<std::size_t>(i)], p,
                                                  pyramid[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::array<std::array<Var, 4>, 4> build_lattice(const std::array<Var, 4>& projected,
                                                const LatticeParams& lattice,
                                                const BoundParams& p) {
  std::array<std::array<Var, 4>, 4> m;
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) {
      Var src = projected[static_cast<std::size_t>(i)];
      Var& cell = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      if (i == k) {
        cell = src;
      } else if (i < k) {
        const auto& stack = lattice.down[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        cell = f_down(src, std::span<const Conv>(stack.data(), stack.size()), p);
      } else {
        cell = f_up(src, i - k);
      }
    }
  }
  return m;
}

CcuColumnOutput ccu(const std::array<Var, 4>& column, int target_index,
                    const CcuHeadParams& head, const CsgOptions& opts, const BoundParams& p) {
  Tape& t = *column[0].tape;
  const Shape4 ref = t.value(column[0]).shape();
  for (const Var& m : column) {
    if (t.value(m).shape() != ref) {
      throw ShapeMismatch("ccu: column not at one resolution: " + to_string(ref) + " vs " +
                          to_string(t.value(m).shape()));
    }
  }

  CcuColumnOutput out;

  // w path: per-source, per-channel spatial variance, normalized so the trunk
  // reads the direction of the structure profile at any feature scale, then
  // two 1x1 convs down to one scalar per source. Variance rather than the
  // mean: learned bias offsets shift pooled means identically for every
  // sample and would drown the per-sample signal.
  std::vector<Var> pooled;
  pooled.reserve(4);
  for (const Var& m : column) {
    Var mean = global_pool(PoolKind::Avg, m);
    Var mean_sq = global_pool(PoolKind::Avg, hadamard(m, m));
    pooled.push_back(sub(mean_sq, hadamard(mean, mean)));
  }
  Var cat = channel_l2_normalize(concat_channels(pooled), opts.norm_eps);
  Var hidden = activation(Act::Tanh, apply_conv(head.w_reduce, p, cat));
  Var raw4 = apply_conv(head.w_out, p, hidden);
  std::vector<Var> w_raw;
  w_raw.reserve(4);
  for (int i = 0; i < 4; ++i) w_raw.push_back(slice_channels(raw4, i, 1));
  std::vector<Var> w_squashed = squash_group(opts.mode, w_raw);

  // s path: channel-normalized maps -> per-source 3x3 conv, summed with a
  // shared 3x3 conv of the target's own normalized map
  Var norm_target = channel_l2_normalize(column[static_cast<std::size_t>(target_index)],
                                         opts.norm_eps);
  Var shared = apply_conv(head.s_shared, p, norm_target);
  std::vector<Var> s_raw;
  s_raw.reserve(4);
  for (int i = 0; i < 4; ++i) {
    Var norm = (i == target_index)
                   ? norm_target
                   : channel_l2_normalize(column[static_cast<std::size_t>(i)], opts.norm_eps);
    s_raw.push_back(add(apply_conv(head.s_conv[static_cast<std::size_t>(i)], p, norm), shared));
  }
  std::vector<Var> s_squashed = squash_group(opts.mode, s_raw);

  for (int i = 0; i < 4; ++i) {
    out.w[static_cast<std::size_t>(i)] = w_squashed[static_cast<std::size_t>(i)];
    out.w_raw[static_cast<std::size_t>(i)] = w_raw[static_cast<std::size_t>(i)];
    out.s[static_cast<std::size_t>(i)] = s_squashed[static_cast<std::size_t>(i)];
  }
  return out;
}

CsgOutput csg_forward(const std::array<Var, 4>& pyramid, const CsgParams& params,
                      const BoundParams& p) {
  Tape& t = *pyramid[0].tape;
  for (int i = 1; i < 4; ++i) {
    const Shape4& hi = t.value(pyramid[static_cast<std::size_t>(i - 1)]).shape();
    const Shape4& lo = t.value(pyramid[static_cast<std::size_t>(i)]).shape();
    if (hi.h != lo.h * 2 || hi.w != lo.w * 2) {
      throw ShapeMismatch("csg_forward: pyramid must be octave-spaced");
    }
  }

  const CsgOptions& opts = params.opts;
  std::array<Var, 4> projected = project_inputs(pyramid, params.lattice, p);
  auto lattice = build_lattice(projected, params.lattice, p);

  CsgOutput out;
  for (int k = 0; k < 4; ++k) {
    std::array<Var, 4> column;
    for (int i = 0; i < 4; ++i) {
      column[static_cast<std::size_t>(i)] =
          lattice[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
    CcuColumnOutput cc = ccu(column, k, params.heads[static_cast<std::size_t>(k)], opts, p);

    Var acc;
    for (int i = 0; i < 4; ++i) {
      Var w = cc.w[static_cast<std::size_t>(i)];
      switch (opts.w_force) {
        case WForce::None: break;
        case WForce::AllOpen: w = constant_like(w, 1.0); break;
        case WForce::AllClosed: w = constant_like(w, 0.0); break;
        case WForce::Diagonal: w = constant_like(w, i == k ? 1.0 : 0.0); break;
        case WForce::TopDown: w = constant_like(w, i >= k ? 1.0 : 0.0); break;
      }
      Var s = cc.s[static_cast<std::size_t>(i)];
      if (opts.s_force_open) s = constant_like(s, 1.0);

      Var term;
      if (opts.placement == GatePlacement::Signal || opts.w_force != WForce::None) {
        term = hadamard(hadamard(column[static_cast<std::size_t>(i)], w), s);
      } else {
        // literal placement: squash the gated product
        term = hadamard(squash_signal(opts.mode, gate(cc.w_raw[static_cast<std::size_t>(i)],
                                                      column[static_cast<std::size_t>(i)])),
                        s);
      }
      acc = acc ? add(acc, term) : term;

      out.w[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = w;
      out.s[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = s;
    }
    out.pyramid[static_cast<std::size_t>(k)] = acc;
  }
  return out;
}

}  // namespace dsic
