#include "dsic/verify.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "dsic/gradcheck.hpp"
#include "dsic/kernels.hpp"
#include "dsic/model.hpp"
#include "dsic/reference.hpp"
#include "dsic/train.hpp"

namespace dsic {

namespace {

struct Suite {
  std::vector<CheckResult> results;

  void check(const std::string& name, const std::function<std::string()>& body) {
    CheckResult r;
    r.name = name;
    try {
      r.detail = body();  // empty string means pass
      r.pass = r.detail.empty();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = e.what();
    }
    results.push_back(std::move(r));
  }
};

std::string expect_near(double got, double want, double tol, const std::string& what) {
  if (std::abs(got - want) <= tol) return "";
  std::ostringstream os;
  os << what << ": got " << got << ", want " << want;
  return os.str();
}

std::string expect_true(bool ok, const std::string& what) { return ok ? "" : what; }

Tensor4 random_tensor(Shape4 s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return Tensor4::random_uniform(s, rng, lo, hi);
}

std::string grad_result(const GradCheckResult& r) {
  if (r.pass) return "";
  return r.detail;
}

// shared conv builder for the gradient checks
Var conv_loss(Tape&, const std::vector<Var>& v, int stride, int padding, Rng& rng) {
  Var out = conv2d(v[0], v[1], v[2], stride, padding);
  return weighted_sum(out, rng);
}

}  // namespace

std::vector<CheckResult> run_verification() {
  Suite suite;

  // --- value oracles ---------------------------------------------------
  suite.check("softmax_group_normalization", [] {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      Tape t;
      std::vector<Var> group;
      const int k = 2 + trial % 3;
      for (int g = 0; g < k; ++g) {
        group.push_back(t.leaf(random_tensor({2, 3, 2, 2}, rng, -1e6, 1e6)));
      }
      auto out = softmax_over_group(group);
      const long long count = t.value(out[0]).size();
      for (long long i = 0; i < count; ++i) {
        double sum = 0.0;
        for (const Var& o : out) sum += t.value(o)[static_cast<std::size_t>(i)];
        if (std::abs(sum - 1.0) > 1e-12) {
          return std::string("softmax outputs sum to ") + std::to_string(sum);
        }
      }
    }
    return std::string();
  });

  suite.check("softmax_group_oracle_values", [] {
    Tape t;
    Var a = t.leaf(Tensor4::scalar(0.0));
    Var b = t.leaf(Tensor4::scalar(std::log(2.0)));
    auto out = softmax_over_group({a, b});
    std::string err = expect_near(t.value(out[0])[0], 1.0 / 3.0, 1e-12, "softmax([0, ln2])[0]");
    if (!err.empty()) return err;
    return expect_near(t.value(out[1])[0], 2.0 / 3.0, 1e-12, "softmax([0, ln2])[1]");
  });

  suite.check("rectified_tanh_oracle", [] {
    Tape t;
    auto eval = [&](double x) {
      Var v = activation(Act::RectifiedTanh, t.leaf(Tensor4::scalar(x)));
      return t.value(v)[0];
    };
    std::string err = expect_near(eval(0.0), 0.0, 0.0, "rectified_tanh(0)");
    if (!err.empty()) return err;
    err = expect_near(eval(-5.0), 0.0, 0.0, "rectified_tanh(-5)");
    if (!err.empty()) return err;
    return expect_near(eval(1.0), 0.7615941559557649, 1e-12, "rectified_tanh(1)");
  });

  suite.check("gate_operator_oracle", [] {
    // open gate on a scalar flow: 2 * tanh(1)
    Tape t;
    BoundParams none;
    Var raw = t.leaf(Tensor4::scalar(1.0));
    Var x = t.leaf(Tensor4::scalar(2.0));
    Var out = gate_apply(raw, x, AdapterSet{}, none, GateMode::RectifiedTanh,
                         GatePlacement::Signal);
    std::string err = expect_near(t.value(out)[0], 1.5231883119115297, 1e-12, "gate(1, 2)");
    if (!err.empty()) return err;
    // saturated gate openness
    Var sat = activation(Act::RectifiedTanh, t.leaf(Tensor4::scalar(10.0)));
    const double openness = gate_openness(t.value(sat))[0];
    return expect_true(openness > 0.99 && openness < 1.0, "openness(raw=10) not in (0.99, 1)");
  });

  suite.check("hadamard_broadcast_semantics", [] {
    Tape t;
    Var x = t.leaf(Tensor4({1, 2, 2, 2}, 1.0));
    Var sig = t.leaf(Tensor4::from_values({1, 2, 1, 1}, {0.0, 1.0}));
    Var out = hadamard(x, sig);
    for (int y = 0; y < 2; ++y) {
      for (int xx = 0; xx < 2; ++xx) {
        if (t.value(out).at(0, 0, y, xx) != 0.0) return std::string("channel 0 not zeroed");
        if (t.value(out).at(0, 1, y, xx) != 1.0) return std::string("channel 1 not identity");
      }
    }
    try {
      Rng rng(1);
      Var bad = t.leaf(random_tensor({1, 3, 4, 4}, rng));
      Var sig2 = t.leaf(random_tensor({1, 2, 1, 1}, rng));
      hadamard(bad, sig2);
      return std::string("channel-mismatched broadcast accepted");
    } catch (const ShapeMismatch&) {
      return std::string();
    }
  });

  // --- production kernels vs serial reference ---------------------------
  suite.check("conv2d_kernel_vs_reference", [] {
    Rng rng(21);
    for (int trial = 0; trial < 8; ++trial) {
      const int k = trial % 2 == 0 ? 3 : 1;
      const int stride = trial % 3 == 0 ? 2 : 1;
      const int pad = k == 3 ? 1 : 0;
      Tensor4 x = random_tensor({2, 1 + trial % 8, 16, 16}, rng);
      Tensor4 w = random_tensor({3, x.shape().c, k, k}, rng);
      Tensor4 b = random_tensor({1, 3, 1, 1}, rng);
      Tensor4 got = kernels::conv2d_forward(x, w, b, stride, pad);
      Tensor4 want = reference::conv2d(x, w, b, stride, pad);
      if (got.max_abs_diff(want) > 1e-10) {
        return "kernel deviates from serial reference by " +
               std::to_string(got.max_abs_diff(want));
      }
    }
    return std::string();
  });

  suite.check("bilinear_kernel_vs_reference", [] {
    Rng rng(22);
    for (int trial = 0; trial < 8; ++trial) {
      Tensor4 x = random_tensor({1 + trial % 2, 3, 4 + trial % 5, 6}, rng);
      Tensor4 got = kernels::upsample2_forward(x);
      Tensor4 want = reference::upsample2(x);
      if (got.max_abs_diff(want) > 1e-12) {
        return "kernel deviates from serial reference by " +
               std::to_string(got.max_abs_diff(want));
      }
    }
    return std::string();
  });

  suite.check("bilinear_frozen_oracle", [] {
    Tape t;
    Var x = t.leaf(Tensor4::from_values({1, 1, 2, 2}, {0, 1, 2, 3}));
    Var up = bilinear_upsample(x, 2);
    const double want[16] = {0, 0.25, 0.75, 1, 0.5, 0.75, 1.25, 1.5,
                             1.5, 1.75, 2.25, 2.5, 2, 2.25, 2.75, 3};
    for (int i = 0; i < 16; ++i) {
      const double got = t.value(up)[static_cast<std::size_t>(i)];
      if (std::abs(got - want[i]) > 1e-12) {
        return "position " + std::to_string(i) + ": got " + std::to_string(got) + ", want " +
               std::to_string(want[i]);
      }
    }
    return std::string();
  });

  suite.check("pool_kernel_vs_reference", [] {
    Rng rng(23);
    Tensor4 x = random_tensor({2, 4, 7, 5}, rng);
    if (kernels::global_avg_forward(x).max_abs_diff(reference::global_avg(x)) > 1e-12) {
      return std::string("avg pool deviates from reference");
    }
    std::vector<int> argmax;
    if (kernels::global_max_forward(x, argmax).max_abs_diff(reference::global_max(x)) > 0.0) {
      return std::string("max pool deviates from reference");
    }
    return std::string();
  });

  // --- gradient suite ----------------------------------------------------
  GradCheckOptions unit;  // defaults: eps 1e-3, rel tol 1e-4, 10 probes

  suite.check("grad_elementwise", [&] {
    Rng rng(31);
    Rng wrng(32);
    for (int pattern = 0; pattern < 3; ++pattern) {
      Shape4 bshape = pattern == 0 ? Shape4{2, 3, 4, 4}
                                   : (pattern == 1 ? Shape4{1, 3, 1, 1} : Shape4{2, 1, 4, 4});
      std::vector<Tensor4> inputs{random_tensor({2, 3, 4, 4}, rng), random_tensor(bshape, rng)};
      for (int op = 0; op < 3; ++op) {
        if (pattern == 2 && op != 2) continue;  // spatial maps only gate via hadamard
        const std::uint64_t wseed = wrng.next_u64();
        auto res = check_gradients(
            inputs,
            [op, wseed](Tape&, const std::vector<Var>& v) {
              Rng wr(wseed);
              Var out = op == 0 ? add(v[0], v[1]) : (op == 1 ? sub(v[0], v[1]) : hadamard(v[0], v[1]));
              return weighted_sum(out, wr);
            },
            unit, rng);
        if (!res.pass) return grad_result(res);
      }
    }
    return std::string();
  });

  suite.check("grad_activations", [&] {
    Rng rng(33);
    for (Act kind : {Act::Tanh, Act::Sigmoid, Act::Relu, Act::RectifiedTanh}) {
      std::vector<Tensor4> inputs{random_tensor({2, 3, 4, 4}, rng, -2.0, 2.0)};
      const std::uint64_t wseed = rng.next_u64();
      auto res = check_gradients(
          inputs,
          [kind, wseed](Tape&, const std::vector<Var>& v) {
            Rng wr(wseed);
            return weighted_sum(activation(kind, v[0]), wr);
          },
          unit, rng);
      if (!res.pass) return grad_result(res);
    }
    return std::string();
  });

  suite.check("grad_softmax_group", [&] {
    Rng rng(34);
    std::vector<Tensor4> inputs;
    for (int g = 0; g < 4; ++g) inputs.push_back(random_tensor({2, 2, 1, 1}, rng));
    const std::uint64_t wseed = rng.next_u64();
    auto res = check_gradients(
        inputs,
        [wseed](Tape&, const std::vector<Var>& v) {
          Rng wr(wseed);
          auto out = softmax_over_group(v);
          Var acc;
          for (const Var& o : out) {
            Var term = weighted_sum(o, wr);
            acc = acc ? add(acc, term) : term;
          }
          return acc;
        },
        unit, rng);
    return grad_result(res);
  });

  suite.check("grad_concat_slice", [&] {
    Rng rng(35);
    std::vector<Tensor4> inputs{random_tensor({2, 2, 3, 3}, rng), random_tensor({2, 3, 3, 3}, rng)};
    const std::uint64_t wseed = rng.next_u64();
    auto res = check_gradients(
        inputs,
        [wseed](Tape&, const std::vector<Var>& v) {
          Rng wr(wseed);
          Var cat = concat_channels({v[0], v[1]});
          Var sliced = slice_channels(cat, 1, 3);
          return weighted_sum(sliced, wr);
        },
        unit, rng);
    return grad_result(res);
  });

  suite.check("grad_conv2d", [&] {
    Rng rng(36);
    for (int trial = 0; trial < 2; ++trial) {
      const int k = trial == 0 ? 3 : 1;
      const int stride = trial == 0 ? 2 : 1;
      const int pad = k == 3 ? 1 : 0;
      std::vector<Tensor4> inputs{random_tensor({2, 3, 8, 8}, rng),
                                  random_tensor({4, 3, k, k}, rng),
                                  random_tensor({1, 4, 1, 1}, rng)};
      const std::uint64_t wseed = rng.next_u64();
      auto res = check_gradients(
          inputs,
          [stride, pad, wseed](Tape& t, const std::vector<Var>& v) {
            Rng wr(wseed);
            return conv_loss(t, v, stride, pad, wr);
          },
          unit, rng);
      if (!res.pass) return grad_result(res);
    }
    return std::string();
  });

  suite.check("grad_bilinear", [&] {
    Rng rng(37);
    for (int factor : {2, 4, 8}) {
      std::vector<Tensor4> inputs{random_tensor({1, 2, 4, 4}, rng)};
      const std::uint64_t wseed = rng.next_u64();
      auto res = check_gradients(
          inputs,
          [factor, wseed](Tape&, const std::vector<Var>& v) {
            Rng wr(wseed);
            return weighted_sum(bilinear_upsample(v[0], factor), wr);
          },
          unit, rng);
      if (!res.pass) return grad_result(res);
    }
    return std::string();
  });

  suite.check("grad_global_pools", [&] {
    Rng rng(38);
    for (PoolKind kind : {PoolKind::Avg, PoolKind::Max}) {
      std::vector<Tensor4> inputs{random_tensor({2, 3, 4, 4}, rng)};
      const std::uint64_t wseed = rng.next_u64();
      auto res = check_gradients(
          inputs,
          [kind, wseed](Tape&, const std::vector<Var>& v) {
            Rng wr(wseed);
            return weighted_sum(global_pool(kind, v[0]), wr);
          },
          unit, rng);
      if (!res.pass) return grad_result(res);
    }
    return std::string();
  });

  suite.check("grad_channel_normalize", [&] {
    Rng rng(39);
    std::vector<Tensor4> inputs{random_tensor({2, 4, 3, 3}, rng, 0.5, 2.0)};
    const std::uint64_t wseed = rng.next_u64();
    auto res = check_gradients(
        inputs,
        [wseed](Tape&, const std::vector<Var>& v) {
          Rng wr(wseed);
          return weighted_sum(channel_l2_normalize(v[0], 1e-6), wr);
        },
        unit, rng);
    return grad_result(res);
  });

  suite.check("grad_isg_module", [&] {
    Rng rng(41);
    ParamStore store;
    IsgOptions opts;
    IsgParams params = make_isg_params(store, {4, 4, 4, 4}, {2, 2, 2, 2}, opts, rng, 0.5);
    const int n_params = store.count();
    // differentiate w.r.t. every parameter and every block; parameters are
    // re-randomized so gate signals sit away from the rectification kink,
    // which finite differences cannot probe
    std::vector<Tensor4> inputs;
    for (int i = 0; i < n_params; ++i) {
      inputs.push_back(random_tensor(store.value(i).shape(), rng, -0.6, 0.6));
    }
    for (int s = 0; s < 4; ++s) {
      const int dim = 16 >> s;
      for (int b = 0; b < 2; ++b) inputs.push_back(random_tensor({1, 4, dim, dim}, rng));
    }
    const std::uint64_t wseed = rng.next_u64();
    auto res = check_gradients(
        inputs,
        [&params, n_params, wseed](Tape&, const std::vector<Var>& v) {
          Rng wr(wseed);
          BoundParams bound(std::vector<Var>(v.begin(), v.begin() + n_params));
          std::array<StageBlocksV, 4> stages;
          for (int s = 0; s < 4; ++s) {
            stages[static_cast<std::size_t>(s)].stage = s + 2;
            for (int b = 0; b < 2; ++b) {
              stages[static_cast<std::size_t>(s)].blocks.push_back(
                  v[static_cast<std::size_t>(n_params + s * 2 + b)]);
            }
          }
          IsgOutput out = isg_forward(stages, params, bound);
          Var acc;
          for (int s = 0; s < 4; ++s) {
            Var term = weighted_sum(out.selected[static_cast<std::size_t>(s)], wr);
            acc = acc ? add(acc, term) : term;
          }
          return acc;
        },
        unit, rng);
    return grad_result(res);
  });

  suite.check("grad_csg_ccu", [&] {
    Rng rng(42);
    ParamStore store;
    CsgOptions opts;
    CsgParams params = make_csg_params(store, {3, 3, 3, 3}, 4, opts, rng, 0.5);
    // move gate signals off the rectification kink (see grad_isg_module)
    for (int i = 0; i < store.count(); ++i) {
      store.value(i) = random_tensor(store.value(i).shape(), rng, -0.6, 0.6);
    }
    std::vector<Tensor4> pyramid_inputs;
    for (int i = 0; i < 4; ++i) {
      const int dim = 16 >> i;
      pyramid_inputs.push_back(random_tensor({1, 3, dim, dim}, rng));
    }
    const std::uint64_t wseed = rng.next_u64();
    GradCheckOptions mid = unit;
    mid.tolerance = 1e-3;  // deeper chains accumulate finite-difference error
    auto res = check_gradients(
        pyramid_inputs,
        [&store, &params, wseed](Tape& t, const std::vector<Var>& v) {
          Rng wr(wseed);
          BoundParams bound(t, store, false);
          std::array<Var, 4> pyr{v[0], v[1], v[2], v[3]};
          CsgOutput out = csg_forward(pyr, params, bound);
          Var acc;
          for (int k = 0; k < 4; ++k) {
            Var term = weighted_sum(out.pyramid[static_cast<std::size_t>(k)], wr);
            acc = acc ? add(acc, term) : term;
          }
          return acc;
        },
        mid, rng);
    return grad_result(res);
  });

  // --- pyramid oracles ---------------------------------------------------
  suite.check("fpn_unrolled_oracle", [] {
    Rng rng(51);
    ParamStore store;
    FpnParams params = make_fpn_params(store, {3, 3, 3, 3}, 4, false, rng);
    for (int trial = 0; trial < 3; ++trial) {
      Tape t;
      BoundParams bound(t, store, false);
      std::array<Var, 4> pyr;
      for (int i = 0; i < 4; ++i) {
        const int dim = 16 >> i;
        pyr[static_cast<std::size_t>(i)] = t.leaf(random_tensor({1, 3, dim, dim}, rng));
      }
      auto got = fpn_forward(pyr, params, bound);
      // independent route: unrolled sum of repeatedly x2-upsampled laterals
      std::array<Var, 4> lateral;
      for (int i = 0; i < 4; ++i) {
        lateral[static_cast<std::size_t>(i)] =
            apply_conv(params.lateral[static_cast<std::size_t>(i)], bound,
                       pyr[static_cast<std::size_t>(i)]);
      }
      for (int k = 0; k < 4; ++k) {
        Var want = lateral[static_cast<std::size_t>(k)];
        for (int i = k + 1; i < 4; ++i) {
          Var up = lateral[static_cast<std::size_t>(i)];
          for (int step = 0; step < i - k; ++step) up = f_up(up, 1);
          want = add(want, up);
        }
        if (t.value(got[static_cast<std::size_t>(k)]).max_abs_diff(t.value(want)) > 1e-10) {
          return "level " + std::to_string(k + 2) + " deviates from unrolled sum";
        }
      }
    }
    return std::string();
  });

  suite.check("fpn_subset_equivalence", [] {
    Rng rng(52);
    for (int trial = 0; trial < 3; ++trial) {
      ParamStore store;
      // identity projections in both connectors; forcing removes the gates
      CsgOptions opts;
      opts.w_force = WForce::TopDown;
      opts.s_force_open = true;
      CsgParams csg = make_csg_params(store, {4, 4, 4, 4}, 4, opts, rng, 0.5);
      for (int i = 0; i < 4; ++i) {
        Tensor4& w = store.value(csg.lattice.proj[static_cast<std::size_t>(i)].weight);
        w = Tensor4(w.shape());
        for (int c = 0; c < 4; ++c) w.at(c, c, 0, 0) = 1.0;
      }
      FpnParams fpn;
      for (int i = 0; i < 4; ++i) {
        fpn.lateral[static_cast<std::size_t>(i)] =
            make_identity_conv1x1(store, "ref.lateral" + std::to_string(i), 4);
      }
      Tape t;
      BoundParams bound(t, store, false);
      std::array<Var, 4> pyr;
      for (int i = 0; i < 4; ++i) {
        const int dim = 16 >> i;
        pyr[static_cast<std::size_t>(i)] = t.leaf(random_tensor({1, 4, dim, dim}, rng));
      }
      auto gated = csg_forward(pyr, csg, bound);
      auto ref = fpn_forward(pyr, fpn, bound);
      for (int k = 0; k < 4; ++k) {
        const double diff = t.value(gated.pyramid[static_cast<std::size_t>(k)])
                                .max_abs_diff(t.value(ref[static_cast<std::size_t>(k)]));
        if (diff > 1e-9) {
          return "level " + std::to_string(k + 2) + " differs from reference by " +
                 std::to_string(diff);
        }
      }
    }
    return std::string();
  });

  suite.check("fc_fpn_superset_equivalence", [] {
    Rng rng(53);
    for (int trial = 0; trial < 3; ++trial) {
      ParamStore store;
      CsgOptions opts;
      opts.w_force = WForce::AllOpen;
      opts.s_force_open = true;
      CsgParams csg = make_csg_params(store, {3, 3, 3, 3}, 4, opts, rng, 0.5);
      Tape t;
      BoundParams bound(t, store, false);
      std::array<Var, 4> pyr;
      for (int i = 0; i < 4; ++i) {
        const int dim = 16 >> i;
        pyr[static_cast<std::size_t>(i)] = t.leaf(random_tensor({1, 3, dim, dim}, rng));
      }
      auto gated = csg_forward(pyr, csg, bound);
      auto ref = fc_fpn_forward(pyr, csg.lattice, bound);
      for (int k = 0; k < 4; ++k) {
        const double diff = t.value(gated.pyramid[static_cast<std::size_t>(k)])
                                .max_abs_diff(t.value(ref[static_cast<std::size_t>(k)]));
        if (diff > 1e-9) {
          return "level " + std::to_string(k + 2) + " differs from all-pairs sum by " +
                 std::to_string(diff);
        }
      }
    }
    return std::string();
  });

  suite.check("isg_closed_gate_degeneracy", [] {
    Rng rng(54);
    ParamStore store;
    IsgOptions opts;
    opts.force_coarse = GateForce::Closed;
    IsgParams params = make_isg_params(store, {3, 3, 3, 3}, {3, 3, 3, 3}, opts, rng, 0.5);
    Tape t;
    BoundParams bound(t, store, false);
    std::array<StageBlocksV, 4> stages;
    for (int s = 0; s < 4; ++s) {
      stages[static_cast<std::size_t>(s)].stage = s + 2;
      const int dim = 16 >> s;
      for (int b = 0; b < 3; ++b) {
        stages[static_cast<std::size_t>(s)].blocks.push_back(
            t.leaf(random_tensor({2, 3, dim, dim}, rng)));
      }
    }
    IsgOutput out = isg_forward(stages, params, bound);
    for (int s = 0; s < 4; ++s) {
      const Tensor4& got = t.value(out.selected[static_cast<std::size_t>(s)]);
      const Tensor4& want = t.value(stages[static_cast<std::size_t>(s)].blocks.back());
      if (got.max_abs_diff(want) != 0.0) {
        return "stage " + std::to_string(s + 2) + " is not bit-equal to its last block";
      }
    }
    return std::string();
  });

  suite.check("closed_gate_gradient_deadness", [] {
    Tape t;
    BoundParams none;
    Rng rng(55);
    Var x = t.leaf(random_tensor({1, 3, 2, 2}, rng), true);
    Var raw = t.leaf(Tensor4({1, 3, 1, 1}, -5.0));  // deeply negative: squashes to exactly 0
    Var out = gate_apply(raw, x, AdapterSet{}, none, GateMode::RectifiedTanh,
                         GatePlacement::Signal);
    GradStore grads = t.backward(sum_all(out));
    Tensor4 gx = grads.get_or_zero(x.id, t.value(x).shape());
    for (long long i = 0; i < gx.size(); ++i) {
      if (gx[static_cast<std::size_t>(i)] != 0.0) return std::string("closed gate leaks gradient");
    }
    return std::string();
  });

  suite.check("csg_sample_independence", [] {
    Rng rng(56);
    ParamStore store;
    CsgParams csg = make_csg_params(store, {3, 3, 3, 3}, 4, CsgOptions{}, rng, 0.5);
    std::array<Tensor4, 4> base;
    for (int i = 0; i < 4; ++i) {
      const int dim = 16 >> i;
      base[static_cast<std::size_t>(i)] = random_tensor({2, 3, dim, dim}, rng);
    }
    auto run = [&](const std::array<Tensor4, 4>& levels) {
      Tape t;
      BoundParams bound(t, store, false);
      std::array<Var, 4> pyr;
      for (int i = 0; i < 4; ++i) pyr[static_cast<std::size_t>(i)] = t.leaf(levels[static_cast<std::size_t>(i)]);
      CsgOutput out = csg_forward(pyr, csg, bound);
      // snapshot sample 1's gates and outputs
      std::vector<double> snap;
      for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 4; ++k) {
          const Tensor4& w = t.value(out.w[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
          snap.push_back(w.at(1, 0, 0, 0));
          const Tensor4& s = t.value(out.s[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
          for (int y = 0; y < s.shape().h; ++y)
            for (int x = 0; x < s.shape().w; ++x) snap.push_back(s.at(1, 0, y, x));
        }
      }
      for (int k = 0; k < 4; ++k) {
        const Tensor4& p = t.value(out.pyramid[static_cast<std::size_t>(k)]);
        for (int c = 0; c < p.shape().c; ++c)
          for (int y = 0; y < p.shape().h; ++y)
            for (int x = 0; x < p.shape().w; ++x) snap.push_back(p.at(1, c, y, x));
      }
      return snap;
    };
    auto snap1 = run(base);
    std::array<Tensor4, 4> altered = base;
    for (int i = 0; i < 4; ++i) {
      Tensor4& t0 = altered[static_cast<std::size_t>(i)];
      const Shape4& s = t0.shape();
      for (int c = 0; c < s.c; ++c)
        for (int y = 0; y < s.h; ++y)
          for (int x = 0; x < s.w; ++x) t0.at(0, c, y, x) += rng.uniform(-1.0, 1.0);
    }
    auto snap2 = run(altered);
    if (snap1 != snap2) return std::string("sample 0 perturbation leaked into sample 1");
    return std::string();
  });

  suite.check("forward_replay_determinism", [] {
    RunConfig config;
    config.steps = 0;
    config.batch_size = 2;
    auto run = [&] {
      ModelParams model = build_model(config);
      std::vector<SynthSample> batch;
      batch.push_back(generate_sample(7, BlobSpec{}, config.image_size));
      batch.push_back(generate_sample(8, BlobSpec{}, config.image_size));
      Tape tape;
      BoundParams bound(tape, model.store, false);
      ModelForward fwd = model_forward(tape, bound, model, batch);
      std::vector<double> values;
      values.push_back(tape.value(fwd.loss)[0]);
      for (int k = 0; k < 4; ++k) {
        const Tensor4& p = tape.value(fwd.pyramid[static_cast<std::size_t>(k)]);
        for (long long i = 0; i < p.size(); ++i) values.push_back(p[static_cast<std::size_t>(i)]);
      }
      return values;
    };
    auto a = run();
    auto b = run();
    if (a != b) return std::string("two replays of one configuration diverge");
    return std::string();
  });

  suite.check("finite_outputs_at_extremes", [] {
    Rng rng(57);
    Tape t;
    Var x = t.leaf(random_tensor({1, 3, 4, 4}, rng, -1e6, 1e6));
    Var sig = t.leaf(random_tensor({1, 3, 1, 1}, rng, -1e6, 1e6));
    std::vector<Var> outs;
    outs.push_back(add(x, sig));
    outs.push_back(sub(x, sig));
    outs.push_back(hadamard(x, sig));
    outs.push_back(activation(Act::Tanh, x));
    outs.push_back(activation(Act::Sigmoid, x));
    outs.push_back(activation(Act::RectifiedTanh, x));
    outs.push_back(channel_l2_normalize(x, 1e-6));
    for (Var o : softmax_over_group({x, hadamard(x, sig)})) outs.push_back(o);
    Rng wrng(58);
    Tensor4 w = random_tensor({3, 3, 3, 3}, wrng);
    outs.push_back(conv2d(x, t.leaf(w), Var{}, 1, 1));
    outs.push_back(bilinear_upsample(x, 2));
    outs.push_back(global_pool(PoolKind::Avg, x));
    outs.push_back(global_pool(PoolKind::Max, x));
    for (const Var& o : outs) {
      if (!t.value(o).all_finite()) return std::string("non-finite output from finite input");
    }
    return std::string();
  });

  return suite.results;
}

}  // namespace dsic
