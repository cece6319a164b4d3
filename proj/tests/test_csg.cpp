#include "doctest.h"
#include "dsic/csg.hpp"
#include "dsic/gradcheck.hpp"
#include "dsic/pyramids.hpp"

using namespace dsic;

namespace {

Tensor4 rand_t(Shape4 s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return Tensor4::random_uniform(s, rng, lo, hi);
}

std::array<Var, 4> make_pyramid(Tape& t, Rng& rng, int channels, int top_dim = 16,
                                int batch = 1) {
  std::array<Var, 4> pyr;
  for (int i = 0; i < 4; ++i) {
    pyr[static_cast<std::size_t>(i)] = t.leaf(rand_t({batch, channels, top_dim >> i, top_dim >> i}, rng));
  }
  return pyr;
}

}  // namespace

TEST_CASE("projection controls the channel width") {
  ParamStore store;
  Rng rng(61);
  LatticeParams lattice = make_lattice_params(store, "lat", {8, 8, 8, 8}, 4, rng);
  Tape t;
  BoundParams p(t, store, false);
  auto pyr = make_pyramid(t, rng, 8);
  auto projected = project_inputs(pyr, lattice, p);
  for (int i = 0; i < 4; ++i) {
    CHECK(t.value(projected[static_cast<std::size_t>(i)]).shape().c == 4);
  }
  // identity projection leaves the pyramid unchanged
  ParamStore store2;
  LatticeParams id_lat;
  id_lat.d = 8;
  for (int i = 0; i < 4; ++i) {
    id_lat.proj[static_cast<std::size_t>(i)] =
        make_identity_conv1x1(store2, "id" + std::to_string(i), 8);
  }
  Tape t2;
  BoundParams p2(t2, store2, false);
  auto pyr2 = make_pyramid(t2, rng, 8);
  auto projected2 = project_inputs(pyr2, id_lat, p2);
  for (int i = 0; i < 4; ++i) {
    CHECK(t2.value(projected2[static_cast<std::size_t>(i)])
              .max_abs_diff(t2.value(pyr2[static_cast<std::size_t>(i)])) == 0.0);
  }
}

TEST_CASE("lattice cells land on the target resolution") {
  ParamStore store;
  Rng rng(62);
  LatticeParams lattice = make_lattice_params(store, "lat", {3, 3, 3, 3}, 4, rng);
  Tape t;
  BoundParams p(t, store, false);
  auto pyr = make_pyramid(t, rng, 3);  // dims 16, 8, 4, 2
  auto m = build_lattice(project_inputs(pyr, lattice, p), lattice, p);
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) {
      const Shape4& s = t.value(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]).shape();
      CHECK(s.h == 16 >> k);
      CHECK(s.w == 16 >> k);
      CHECK(s.c == 4);
    }
  }
  // spot checks from the shape table: M[3][5] is 8 -> 4 -> 2, M[5][2] is 2 -> 16
  CHECK(t.value(m[1][3]).shape().h == 2);
  CHECK(t.value(m[3][0]).shape().h == 16);
}

TEST_CASE("constant pyramid with identity-center down kernels gives a constant lattice") {
  ParamStore store;
  Rng rng(63);
  LatticeParams lattice = make_lattice_params(store, "lat", {3, 3, 3, 3}, 3, rng);
  // identity projections and identity-center 3x3 stacks
  for (int i = 0; i < 4; ++i) {
    Tensor4& w = store.value(lattice.proj[static_cast<std::size_t>(i)].weight);
    w = Tensor4(w.shape());
    for (int c = 0; c < 3; ++c) w.at(c, c, 0, 0) = 1.0;
    for (int k = i + 1; k < 4; ++k) {
      for (const Conv& conv : lattice.down[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]) {
        Tensor4& dw = store.value(conv.weight);
        dw = Tensor4(dw.shape());
        for (int c = 0; c < 3; ++c) dw.at(c, c, 1, 1) = 1.0;
      }
    }
  }
  Tape t;
  BoundParams p(t, store, false);
  std::array<Var, 4> pyr;
  for (int i = 0; i < 4; ++i) pyr[static_cast<std::size_t>(i)] = t.leaf(Tensor4(1, 3, 16 >> i, 16 >> i, 1.25));
  auto m = build_lattice(project_inputs(pyr, lattice, p), lattice, p);
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) {
      const Tensor4& cell = t.value(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
      CHECK(cell.max_abs_diff(Tensor4(cell.shape(), 1.25)) <= 1e-12);
    }
  }
}

TEST_CASE("softmax mode normalizes the four path gates per level") {
  ParamStore store;
  Rng rng(64);
  CsgOptions opts;
  opts.mode = GateMode::SoftmaxGroup;
  CsgParams params = make_csg_params(store, {3, 3, 3, 3}, 4, opts, rng, 0.5);
  Tape t;
  BoundParams p(t, store, false);
  auto pyr = make_pyramid(t, rng, 3, 16, 2);
  CsgOutput out = csg_forward(pyr, params, p);
  for (int k = 0; k < 4; ++k) {
    for (int n = 0; n < 2; ++n) {
      double sum = 0.0;
      for (int i = 0; i < 4; ++i) {
        sum += t.value(out.w[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]).at(n, 0, 0, 0);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("zero input column closes every tanh-mode gate") {
  ParamStore store;
  Rng rng(65);
  CsgParams params = make_csg_params(store, {3, 3, 3, 3}, 4, CsgOptions{}, rng, 0.5);
  // the default init opens gates through their biases; this example is about
  // signals that are exactly zero, so zero the emitting biases
  for (int k = 0; k < 4; ++k) {
    const CcuHeadParams& head = params.heads[static_cast<std::size_t>(k)];
    store.value(head.w_out.bias) = Tensor4(1, 4, 1, 1);
    for (int i = 0; i < 4; ++i) {
      store.value(head.s_conv[static_cast<std::size_t>(i)].bias) = Tensor4(1, 1, 1, 1);
    }
  }
  Tape t;
  BoundParams p(t, store, false);
  std::array<Var, 4> pyr;
  for (int i = 0; i < 4; ++i) pyr[static_cast<std::size_t>(i)] = t.leaf(Tensor4(1, 3, 16 >> i, 16 >> i));
  CsgOutput out = csg_forward(pyr, params, p);
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) {
      // zero features, zero biases: raw signals are exactly zero and rectify to closed
      CHECK(t.value(out.w[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]).at(0, 0, 0, 0) == 0.0);
    }
    CHECK(t.value(out.pyramid[static_cast<std::size_t>(i)])
              .max_abs_diff(Tensor4(1, 4, 16 >> i, 16 >> i)) == 0.0);
  }
}

TEST_CASE("all-closed forcing empties the output pyramid") {
  ParamStore store;
  Rng rng(66);
  CsgOptions opts;
  opts.w_force = WForce::AllClosed;
  CsgParams params = make_csg_params(store, {3, 3, 3, 3}, 4, opts, rng, 0.5);
  Tape t;
  BoundParams p(t, store, false);
  auto pyr = make_pyramid(t, rng, 3);
  CsgOutput out = csg_forward(pyr, params, p);
  for (int k = 0; k < 4; ++k) {
    const Tensor4& pk = t.value(out.pyramid[static_cast<std::size_t>(k)]);
    CHECK(pk.max_abs_diff(Tensor4(pk.shape())) == 0.0);
  }
}

TEST_CASE("diagonal forcing with open maps is a pure lateral pass") {
  ParamStore store;
  Rng rng(67);
  CsgOptions opts;
  opts.w_force = WForce::Diagonal;
  opts.s_force_open = true;
  CsgParams params = make_csg_params(store, {3, 3, 3, 3}, 4, opts, rng, 0.5);
  Tape t;
  BoundParams p(t, store, false);
  auto pyr = make_pyramid(t, rng, 3);
  CsgOutput out = csg_forward(pyr, params, p);
  auto projected = project_inputs(pyr, params.lattice, p);
  for (int k = 0; k < 4; ++k) {
    CHECK(t.value(out.pyramid[static_cast<std::size_t>(k)])
              .max_abs_diff(t.value(projected[static_cast<std::size_t>(k)])) == 0.0);
  }
}

TEST_CASE("per-sample independence inside a batch") {
  ParamStore store;
  Rng rng(68);
  CsgParams params = make_csg_params(store, {3, 3, 3, 3}, 4, CsgOptions{}, rng, 0.5);
  std::array<Tensor4, 4> levels;
  for (int i = 0; i < 4; ++i) levels[static_cast<std::size_t>(i)] = rand_t({2, 3, 16 >> i, 16 >> i}, rng);
  auto forward_sample1 = [&](const std::array<Tensor4, 4>& lv) {
    Tape t;
    BoundParams p(t, store, false);
    std::array<Var, 4> pyr;
    for (int i = 0; i < 4; ++i) pyr[static_cast<std::size_t>(i)] = t.leaf(lv[static_cast<std::size_t>(i)]);
    CsgOutput out = csg_forward(pyr, params, p);
    std::vector<double> snapshot;
    for (int i = 0; i < 4; ++i) {
      for (int k = 0; k < 4; ++k) {
        snapshot.push_back(t.value(out.w[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]).at(1, 0, 0, 0));
      }
    }
    for (int k = 0; k < 4; ++k) {
      const Tensor4& pk = t.value(out.pyramid[static_cast<std::size_t>(k)]);
      for (int c = 0; c < pk.shape().c; ++c)
        for (int y = 0; y < pk.shape().h; ++y)
          for (int x = 0; x < pk.shape().w; ++x) snapshot.push_back(pk.at(1, c, y, x));
    }
    return snapshot;
  };
  auto base = forward_sample1(levels);
  for (int i = 0; i < 4; ++i) {
    Tensor4& lv = levels[static_cast<std::size_t>(i)];
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < lv.shape().h; ++y)
        for (int x = 0; x < lv.shape().w; ++x) lv.at(0, c, y, x) = rng.uniform(-3.0, 3.0);
  }
  CHECK(forward_sample1(levels) == base);
}

TEST_CASE("closed paths pass no gradient into their lattice cell") {
  ParamStore store;
  Rng rng(69);
  CsgOptions opts;
  opts.w_force = WForce::Diagonal;  // off-diagonal paths carry exact zeros
  CsgParams params = make_csg_params(store, {2, 2, 2, 2}, 3, opts, rng, 0.5);
  Tape t;
  BoundParams p(t, store, true);
  auto pyr = make_pyramid(t, rng, 2, 8);
  CsgOutput out = csg_forward(pyr, params, p);
  // loss touches only level 2's output; with diagonal forcing, gradients
  // cannot reach the down stacks that feed other levels
  Rng wr(70);
  GradStore grads = t.backward(weighted_sum(out.pyramid[0], wr));
  const Conv& unused_down = params.lattice.down[0][3][0];
  Tensor4 g = grads.get_or_zero(p[unused_down.weight].id, store.value(unused_down.weight).shape());
  for (long long i = 0; i < g.size(); ++i) CHECK(g[static_cast<std::size_t>(i)] == 0.0);
}

TEST_CASE("ccu gradients match finite differences") {
  Rng rng(71);
  ParamStore store;
  CsgOptions opts;
  CsgParams params = make_csg_params(store, {2, 2, 2, 2}, 3, opts, rng, 0.5);
  for (int i = 0; i < store.count(); ++i) {
    store.value(i) = rand_t(store.value(i).shape(), rng, -0.6, 0.6);
  }
  // column of four maps at one resolution; positive offsets keep channel
  // norms away from zero, where the modulus operator's curvature would
  // swamp the finite-difference probes
  std::vector<Tensor4> inputs;
  for (int i = 0; i < 4; ++i) inputs.push_back(rand_t({1, 3, 4, 4}, rng, 0.25, 1.25));
  GradCheckOptions gopts;
  auto res = check_gradients(
      inputs,
      [&store, &params, &opts](Tape& t, const std::vector<Var>& v) {
        Rng wr(72);
        BoundParams bound(t, store, false);
        std::array<Var, 4> column{v[0], v[1], v[2], v[3]};
        CcuColumnOutput out = ccu(column, 2, params.heads[2], opts, bound);
        Var loss;
        for (int i = 0; i < 4; ++i) {
          Var wt = weighted_sum(out.w[static_cast<std::size_t>(i)], wr);
          Var st = weighted_sum(out.s[static_cast<std::size_t>(i)], wr);
          Var term = add(wt, st);
          loss = loss ? add(loss, term) : term;
        }
        return loss;
      },
      gopts, rng);
  CHECK_MESSAGE(res.pass, res.detail);
}

TEST_CASE("non-octave pyramids are rejected") {
  ParamStore store;
  Rng rng(73);
  CsgParams params = make_csg_params(store, {2, 2, 2, 2}, 3, CsgOptions{}, rng, 0.5);
  Tape t;
  BoundParams p(t, store, false);
  std::array<Var, 4> pyr;
  for (int i = 0; i < 4; ++i) pyr[static_cast<std::size_t>(i)] = t.leaf(rand_t({1, 2, 8, 8}, rng));
  CHECK_THROWS_AS(csg_forward(pyr, params, p), ShapeMismatch);
}
