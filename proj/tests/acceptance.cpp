// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line each. argv[1] (optional) is the dsic CLI binary, used by
// the command-level criteria; when omitted those fall back to a library-level
// equivalent where possible.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "dsic/gradcheck.hpp"
#include "dsic/model.hpp"
#include "dsic/train.hpp"
#include "dsic/verify.hpp"

namespace fs = std::filesystem;
using namespace dsic;
namespace chrono = std::chrono;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail = "") {
  std::printf("%s %s%s%s\n", pass ? "PASS" : "FAIL", name.c_str(),
              detail.empty() ? "" : " — ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

Tensor4 rand_t(Shape4 s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return Tensor4::random_uniform(s, rng, lo, hi);
}

double elapsed_s(chrono::steady_clock::time_point t0) {
  return chrono::duration<double>(chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- criterion 1

bool unit_gradients(Rng& rng, std::string& detail) {
  GradCheckOptions unit;  // eps 1e-3, rel tol 1e-4
  auto fail = [&](const GradCheckResult& r, const char* what) {
    detail = std::string(what) + ": " + r.detail;
    return false;
  };

  for (int op = 0; op < 3; ++op) {
    for (int pattern = 0; pattern < 3; ++pattern) {
      if (pattern == 2 && op != 2) continue;
      Shape4 bshape = pattern == 0 ? Shape4{2, 3, 4, 4}
                                   : (pattern == 1 ? Shape4{1, 3, 1, 1} : Shape4{2, 1, 4, 4});
      std::vector<Tensor4> inputs{rand_t({2, 3, 4, 4}, rng), rand_t(bshape, rng)};
      const std::uint64_t ws = rng.next_u64();
      auto r = check_gradients(
          inputs,
          [op, ws](Tape&, const std::vector<Var>& v) {
            Rng wr(ws);
            Var out = op == 0 ? add(v[0], v[1])
                              : (op == 1 ? sub(v[0], v[1]) : hadamard(v[0], v[1]));
            return weighted_sum(out, wr);
          },
          unit, rng);
      if (!r.pass) return fail(r, "elementwise");
    }
  }
  for (Act kind : {Act::Tanh, Act::Sigmoid, Act::Relu, Act::RectifiedTanh}) {
    std::vector<Tensor4> inputs{rand_t({2, 3, 4, 4}, rng, -2.0, 2.0)};
    const std::uint64_t ws = rng.next_u64();
    auto r = check_gradients(
        inputs,
        [kind, ws](Tape&, const std::vector<Var>& v) {
          Rng wr(ws);
          return weighted_sum(activation(kind, v[0]), wr);
        },
        unit, rng);
    if (!r.pass) return fail(r, "activation");
  }
  {
    std::vector<Tensor4> inputs;
    for (int g = 0; g < 4; ++g) inputs.push_back(rand_t({2, 2, 1, 1}, rng));
    const std::uint64_t ws = rng.next_u64();
    auto r = check_gradients(
        inputs,
        [ws](Tape&, const std::vector<Var>& v) {
          Rng wr(ws);
          Var loss;
          for (const Var& o : softmax_over_group(v)) {
            Var term = weighted_sum(o, wr);
            loss = loss ? add(loss, term) : term;
          }
          return loss;
        },
        unit, rng);
    if (!r.pass) return fail(r, "softmax_over_group");
  }
  {
    std::vector<Tensor4> inputs{rand_t({2, 2, 3, 3}, rng), rand_t({2, 3, 3, 3}, rng)};
    const std::uint64_t ws = rng.next_u64();
    auto r = check_gradients(
        inputs,
        [ws](Tape&, const std::vector<Var>& v) {
          Rng wr(ws);
          return weighted_sum(slice_channels(concat_channels({v[0], v[1]}), 1, 3), wr);
        },
        unit, rng);
    if (!r.pass) return fail(r, "concat/slice");
  }
  for (int variant = 0; variant < 2; ++variant) {
    const int k = variant == 0 ? 3 : 1;
    const int stride = variant == 0 ? 2 : 1;
    const int pad = k == 3 ? 1 : 0;
    std::vector<Tensor4> inputs{rand_t({2, 3, 8, 8}, rng), rand_t({4, 3, k, k}, rng),
                                rand_t({1, 4, 1, 1}, rng)};
    const std::uint64_t ws = rng.next_u64();
    auto r = check_gradients(
        inputs,
        [stride, pad, ws](Tape&, const std::vector<Var>& v) {
          Rng wr(ws);
          return weighted_sum(conv2d(v[0], v[1], v[2], stride, pad), wr);
        },
        unit, rng);
    if (!r.pass) return fail(r, "conv2d");
  }
  for (int factor : {2, 4, 8}) {
    std::vector<Tensor4> inputs{rand_t({1, 2, 4, 4}, rng)};
    const std::uint64_t ws = rng.next_u64();
    auto r = check_gradients(
        inputs,
        [factor, ws](Tape&, const std::vector<Var>& v) {
          Rng wr(ws);
          return weighted_sum(bilinear_upsample(v[0], factor), wr);
        },
        unit, rng);
    if (!r.pass) return fail(r, "bilinear_upsample");
  }
  for (PoolKind kind : {PoolKind::Avg, PoolKind::Max}) {
    std::vector<Tensor4> inputs{rand_t({2, 3, 4, 4}, rng)};
    const std::uint64_t ws = rng.next_u64();
    auto r = check_gradients(
        inputs,
        [kind, ws](Tape&, const std::vector<Var>& v) {
          Rng wr(ws);
          return weighted_sum(global_pool(kind, v[0]), wr);
        },
        unit, rng);
    if (!r.pass) return fail(r, "global_pool");
  }
  {
    std::vector<Tensor4> inputs{rand_t({2, 4, 3, 3}, rng, 0.25, 1.25)};
    const std::uint64_t ws = rng.next_u64();
    auto r = check_gradients(
        inputs,
        [ws](Tape&, const std::vector<Var>& v) {
          Rng wr(ws);
          return weighted_sum(channel_l2_normalize(v[0], 1e-6), wr);
        },
        unit, rng);
    if (!r.pass) return fail(r, "channel_l2_normalize");
  }
  return true;
}

bool end_to_end_gradients(std::uint64_t seed, std::string& detail) {
  RunConfig config;
  config.image_size = 32;
  config.channels = 8;
  config.blocks = {2, 2, 2, 2};
  config.batch_size = 1;
  config.seed = seed;
  ModelParams model = build_model(config);

  // a short burn-in moves parameters off the zero-init point, where dead
  // units pin rectifier kinks exactly at the probe center
  model.config.steps = 25;
  train_model(model);
  model.config.steps = 0;

  std::vector<SynthSample> batch{generate_sample(seed * 13 + 5, BlobSpec{}, config.image_size)};

  auto loss_value = [&] {
    Tape tape;
    BoundParams bound(tape, model.store, false);
    return tape.value(model_forward(tape, bound, model, batch).loss)[0];
  };

  Tape tape;
  BoundParams bound(tape, model.store, true);
  ModelForward fwd = model_forward(tape, bound, model, batch);
  GradStore grads = tape.backward(fwd.loss);

  Rng pick(seed * 7919 + 3);
  const double eps = 1e-3;
  auto fd_at = [&](int pidx, std::size_t coord, double step) {
    Tensor4& theta = model.store.value(pidx);
    const double saved = theta[coord];
    theta[coord] = saved + step;
    const double plus = loss_value();
    theta[coord] = saved - step;
    const double minus = loss_value();
    theta[coord] = saved;
    return (plus - minus) / (2.0 * step);
  };

  // The composed loss is piecewise smooth; a probe interval that straddles a
  // rectifier kink invalidates the difference oracle itself. Such probes are
  // detected by disagreement between the eps and eps/8 estimates and are
  // resampled; a wrong analytic gradient fails against consistent estimates.
  int valid = 0, drawn = 0;
  while (valid < 20 && drawn < 60) {
    ++drawn;
    const int pidx = pick.uniform_int(0, model.store.count() - 1);
    Tensor4& theta = model.store.value(pidx);
    const auto coord =
        static_cast<std::size_t>(pick.next_u64() % static_cast<std::uint64_t>(theta.size()));
    const double numeric = fd_at(pidx, coord, eps);
    const double analytic =
        grads.has(bound[pidx].id) ? grads.at(bound[pidx].id)[coord] : 0.0;
    const double rel = relative_error(analytic, numeric);
    if (rel <= 1e-3) {
      ++valid;
      continue;
    }
    const double refined = fd_at(pidx, coord, eps / 8.0);
    if (relative_error(numeric, refined) > 5e-4) continue;  // kink inside the interval
    std::ostringstream os;
    os << "param " << model.store.name(pidx) << " coord " << coord << ": analytic " << analytic
       << " vs numeric " << numeric << " (rel " << rel << ")";
    detail = os.str();
    return false;
  }
  if (valid < 20) {
    detail = "only " + std::to_string(valid) + " smooth probes in 60 draws";
    return false;
  }
  return true;
}

// ------------------------------------------------------------ criteria 2 & 3

bool fpn_subset(std::string& detail) {
  Rng rng(2201);
  for (int trial = 0; trial < 10; ++trial) {
    ParamStore store;
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
          make_identity_conv1x1(store, "ref" + std::to_string(i), 4);
    }
    Tape t;
    BoundParams p(t, store, false);
    std::array<Var, 4> pyr;
    for (int i = 0; i < 4; ++i) {
      pyr[static_cast<std::size_t>(i)] = t.leaf(rand_t({2, 4, 16 >> i, 16 >> i}, rng));
    }
    auto gated = csg_forward(pyr, csg, p);
    auto ref = fpn_forward(pyr, fpn, p);
    for (int k = 0; k < 4; ++k) {
      const double diff = t.value(gated.pyramid[static_cast<std::size_t>(k)])
                              .max_abs_diff(t.value(ref[static_cast<std::size_t>(k)]));
      if (diff > 1e-9) {
        detail = "trial " + std::to_string(trial) + " level " + std::to_string(k + 2) +
                 " max-abs " + std::to_string(diff);
        return false;
      }
    }
  }
  return true;
}

bool fc_fpn_superset(std::string& detail) {
  Rng rng(2301);
  for (int trial = 0; trial < 10; ++trial) {
    ParamStore store;
    CsgOptions opts;
    opts.w_force = WForce::AllOpen;
    opts.s_force_open = true;
    CsgParams csg = make_csg_params(store, {3, 3, 3, 3}, 4, opts, rng, 0.5);
    Tape t;
    BoundParams p(t, store, false);
    std::array<Var, 4> pyr;
    for (int i = 0; i < 4; ++i) {
      pyr[static_cast<std::size_t>(i)] = t.leaf(rand_t({2, 3, 16 >> i, 16 >> i}, rng));
    }
    auto gated = csg_forward(pyr, csg, p);
    auto ref = fc_fpn_forward(pyr, csg.lattice, p);
    for (int k = 0; k < 4; ++k) {
      const double diff = t.value(gated.pyramid[static_cast<std::size_t>(k)])
                              .max_abs_diff(t.value(ref[static_cast<std::size_t>(k)]));
      if (diff > 1e-9) {
        detail = "trial " + std::to_string(trial) + " level " + std::to_string(k + 2) +
                 " max-abs " + std::to_string(diff);
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------- criterion 4

bool isg_degeneracy(std::string& detail) {
  Rng rng(2401);
  for (int trial = 0; trial < 10; ++trial) {
    ParamStore store;
    IsgOptions opts;
    opts.force_coarse = GateForce::Closed;
    IsgParams params = make_isg_params(store, {3, 3, 3, 3}, {3, 3, 3, 3}, opts, rng, 0.5);
    Tape t;
    BoundParams p(t, store, false);
    std::array<StageBlocksV, 4> stages;
    for (int s = 0; s < 4; ++s) {
      stages[static_cast<std::size_t>(s)].stage = s + 2;
      for (int b = 0; b < 3; ++b) {
        stages[static_cast<std::size_t>(s)].blocks.push_back(
            t.leaf(rand_t({2, 3, 16 >> s, 16 >> s}, rng)));
      }
    }
    IsgOutput out = isg_forward(stages, params, p);
    for (int s = 0; s < 4; ++s) {
      if (t.value(out.selected[static_cast<std::size_t>(s)])
              .max_abs_diff(t.value(stages[static_cast<std::size_t>(s)].blocks.back())) != 0.0) {
        detail = "trial " + std::to_string(trial) + " stage " + std::to_string(s + 2) +
                 " not bit-equal to its last block";
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------- criterion 5

bool softmax_normalization(std::string& detail) {
  Rng rng(2501);
  ParamStore store;
  CsgOptions opts;
  opts.mode = GateMode::SoftmaxGroup;
  CsgParams params = make_csg_params(store, {3, 3, 3, 3}, 4, opts, rng, 0.5);
  for (int trial = 0; trial < 100; ++trial) {
    Tape t;
    BoundParams p(t, store, false);
    std::array<Var, 4> pyr;
    for (int i = 0; i < 4; ++i) {
      pyr[static_cast<std::size_t>(i)] = t.leaf(rand_t({1, 3, 8 >> i, 8 >> i}, rng, -3.0, 3.0));
    }
    CsgOutput out = csg_forward(pyr, params, p);
    for (int k = 0; k < 4; ++k) {
      double sum = 0.0;
      for (int i = 0; i < 4; ++i) {
        sum += t.value(out.w[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)])[0];
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        detail = "trial " + std::to_string(trial) + " level " + std::to_string(k + 2) +
                 ": sum " + std::to_string(sum);
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------- criteria 6 & 7 plumbing

struct ArmResult {
  double val_mse = 0.0;
  double f1 = 0.0;
  double final_loss = 0.0;
  double seconds = 0.0;
  std::vector<MetricRow> metrics;
  std::vector<GateRecordRow> gate_rows;
};

ArmResult run_arm(RunConfig config, ModelParams* keep_model = nullptr) {
  config.validate();
  const auto t0 = chrono::steady_clock::now();
  ModelParams model = build_model(config);
  TrainResult tr = train_model(model);
  EvalMetrics em = evaluate(model, config.val_samples);
  ArmResult r;
  r.val_mse = em.mse;
  r.f1 = em.f1;
  r.final_loss = tr.metrics.empty() ? 0.0 : tr.metrics.back().loss;
  r.seconds = elapsed_s(t0);
  r.metrics = std::move(tr.metrics);
  r.gate_rows = std::move(tr.gate_rows);
  if (keep_model) *keep_model = std::move(model);
  return r;
}

double median3(double a, double b, double c) {
  std::array<double, 3> v{a, b, c};
  std::sort(v.begin(), v.end());
  return v[1];
}

// mean of the second half of each 500-step window must not exceed the first;
// windows are taken at 500-step alignment (batch losses are stochastic, so a
// per-row sliding window would demand monotonicity from noise)
bool loss_trend_ok(const std::vector<MetricRow>& metrics, std::string& where) {
  const int window = 50;  // logged every 10 steps
  if (static_cast<int>(metrics.size()) < window) return true;
  for (std::size_t s = 0; s + window <= metrics.size(); s += window) {
    double first = 0.0, second = 0.0;
    for (int i = 0; i < window / 2; ++i) {
      first += metrics[s + static_cast<std::size_t>(i)].loss;
      second += metrics[s + static_cast<std::size_t>(i + window / 2)].loss;
    }
    if (second > first) {
      where = "window at step " + std::to_string(metrics[s].step);
      return false;
    }
  }
  return true;
}

std::array<std::array<double, 4>, 4> export_matrix(const ModelParams& model,
                                                   std::uint64_t seed, const BlobSpec& spec) {
  SynthSample sample = generate_sample(seed, spec, model.config.image_size);
  Tape tape;
  BoundParams bound(tape, model.store, false);
  ModelForward fwd = model_forward(tape, bound, model,
                                   std::span<const SynthSample>(&sample, 1));
  return csg_state_matrix(fwd, 0);
}

// ------------------------------------------------------------- CLI criteria

int run_cmd(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const fs::path out_dir = fs::temp_directory_path() / "dsic_acceptance";
  fs::remove_all(out_dir);
  fs::create_directories(out_dir);

  // 1 — gradient suite
  {
    const auto t0 = chrono::steady_clock::now();
    bool pass = true;
    std::string detail;
    for (std::uint64_t seed : {201ull, 202ull, 203ull}) {
      Rng rng(seed);
      if (!unit_gradients(rng, detail)) {
        detail = "seed " + std::to_string(seed) + ", " + detail;
        pass = false;
        break;
      }
      if (!end_to_end_gradients(seed, detail)) {
        detail = "seed " + std::to_string(seed) + " end-to-end, " + detail;
        pass = false;
        break;
      }
    }
    const double secs = elapsed_s(t0);
    if (pass && secs >= 120.0) {
      pass = false;
      detail = "took " + std::to_string(secs) + " s";
    }
    std::ostringstream os;
    os << "(" << secs << " s)";
    report("criterion 1: gradient suite, unit 1e-4 / end-to-end 1e-3, seeds x3",
           pass, pass ? os.str() : detail);
  }

  // 2 — FPN subset
  {
    std::string detail;
    const bool pass = fpn_subset(detail);
    report("criterion 2: forced top-down gating equals the reference top-down pyramid (1e-9)",
           pass, detail);
  }

  // 3 — FC-FPN superset
  {
    std::string detail;
    const bool pass = fc_fpn_superset(detail);
    report("criterion 3: all-open gating equals the all-pairs reference pyramid (1e-9)", pass,
           detail);
  }

  // 4 — ISG degeneracy
  {
    std::string detail;
    const bool pass = isg_degeneracy(detail);
    report("criterion 4: closed coarse gates reproduce last-block inputs bit-exactly", pass,
           detail);
  }

  // 5 — softmax normalization
  {
    std::string detail;
    const bool pass = softmax_normalization(detail);
    report("criterion 5: softmax path gates sum to 1 within 1e-12 (100 inputs)", pass, detail);
  }

  // 6 & 7 — trained arms
  {
    RunConfig base;  // defaults: dsic, 2000 steps
    base.out = (out_dir / "arm").string();

    ModelParams dsic_seed1;
    std::array<ArmResult, 3> dsic_arms, fpn_arms;
    bool budget_ok = true;
    std::string budget_detail;
    for (int s = 0; s < 3; ++s) {
      RunConfig c = base;
      c.seed = static_cast<std::uint64_t>(s + 1);
      dsic_arms[static_cast<std::size_t>(s)] =
          run_arm(c, s == 0 ? &dsic_seed1 : nullptr);
      c.connector = "fpn";
      c.isg = false;
      fpn_arms[static_cast<std::size_t>(s)] = run_arm(c);
      for (const ArmResult* a : {&dsic_arms[static_cast<std::size_t>(s)],
                                 &fpn_arms[static_cast<std::size_t>(s)]}) {
        if (a->seconds >= 600.0) {
          budget_ok = false;
          budget_detail = "an arm took " + std::to_string(a->seconds) + " s";
        }
      }
    }

    // criterion 6 uses the default-config seed-1 model
    {
      auto small = export_matrix(dsic_seed1, 31, BlobSpec{2, 4, 2.0, 6.0});
      auto large = export_matrix(dsic_seed1, 32, BlobSpec{2, 4, 12.0, 32.0});
      double max_diff = 0.0;
      for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 4; ++k) {
          max_diff = std::max(max_diff,
                              std::abs(small[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] -
                                       large[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]));
        }
      }
      std::ostringstream os;
      os << "max gate difference " << max_diff;
      report("criterion 6: small-blob vs large-blob gate matrices differ by >= 0.05",
             max_diff >= 0.05, os.str());
    }

    // reported (not asserted) component arms at seed 1
    RunConfig isg_cfg = base;
    isg_cfg.seed = 1;
    isg_cfg.connector = "fpn";
    isg_cfg.isg = true;
    ArmResult isg_arm = run_arm(isg_cfg);
    RunConfig csg_cfg = base;
    csg_cfg.seed = 1;
    csg_cfg.connector = "dsic";
    csg_cfg.isg = false;
    ArmResult csg_arm = run_arm(csg_cfg);

    {
      std::ofstream os(out_dir / "ablation_component.csv", std::ios::binary);
      std::vector<AblationRow> rows{
          {"baseline", "fpn", false, fpn_arms[0].final_loss, fpn_arms[0].val_mse, fpn_arms[0].f1},
          {"isg", "fpn", true, isg_arm.final_loss, isg_arm.val_mse, isg_arm.f1},
          {"csg", "dsic", false, csg_arm.final_loss, csg_arm.val_mse, csg_arm.f1},
          {"isg_csg", "dsic", true, dsic_arms[0].final_loss, dsic_arms[0].val_mse,
           dsic_arms[0].f1},
      };
      write_ablation_csv(os, rows);
    }
    std::printf("  component table (seed 1): baseline %.6f | +isg %.6f | +csg %.6f | +both %.6f"
                " (csv: %s)\n",
                fpn_arms[0].val_mse, isg_arm.val_mse, csg_arm.val_mse, dsic_arms[0].val_mse,
                (out_dir / "ablation_component.csv").string().c_str());

    const double dsic_med = median3(dsic_arms[0].val_mse, dsic_arms[1].val_mse,
                                    dsic_arms[2].val_mse);
    const double fpn_med = median3(fpn_arms[0].val_mse, fpn_arms[1].val_mse,
                                   fpn_arms[2].val_mse);
    {
      std::ostringstream os;
      os << "median val MSE: gated " << dsic_med << " vs fixed " << fpn_med;
      bool pass = dsic_med <= fpn_med && budget_ok;
      report("criterion 7: gated connector matches or beats the fixed pyramid over seeds 1-3",
             pass, budget_ok ? os.str() : budget_detail);
    }

    // harness invariants tied to the same runs
    {
      bool trend = true;
      std::string where;
      for (int s = 0; s < 3 && trend; ++s) {
        trend = loss_trend_ok(dsic_arms[static_cast<std::size_t>(s)].metrics, where);
        if (!trend) where = "seed " + std::to_string(s + 1) + ", " + where;
      }
      report("invariant: training loss trend is non-increasing over 500-step windows", trend,
             where);
    }
    {
      bool in_range = true;
      for (const ArmResult& a : dsic_arms) {
        for (const GateRecordRow& row : a.gate_rows) {
          in_range = in_range && row.value >= 0.0 && row.value <= 1.0;
        }
      }
      report("invariant: exported gate-state values stay in [0, 1]", in_range);
    }
  }

  // 8 — byte-identical metrics from the command-line trainer
  if (!cli.empty()) {
    std::ofstream cfg(out_dir / "det.cfg");
    cfg << "steps = 50\nimage_size = 32\nchannels = 8\nblocks = 2\nbatch_size = 1\n"
           "val_samples = 2\n";
    cfg.close();
    const std::string base_cmd = cli + " train --config " + (out_dir / "det.cfg").string();
    bool pass = run_cmd(base_cmd + " --out " + (out_dir / "d1").string() +
                        " > /dev/null 2>&1") == 0;
    pass = pass && run_cmd(base_cmd + " --out " + (out_dir / "d2").string() +
                           " > /dev/null 2>&1") == 0;
    pass = pass && !slurp(out_dir / "d1" / "metrics.csv").empty() &&
           slurp(out_dir / "d1" / "metrics.csv") == slurp(out_dir / "d2" / "metrics.csv");
    report("criterion 8: identical configs produce byte-identical metrics", pass);
  } else {
    report("criterion 8: identical configs produce byte-identical metrics", false,
           "dsic binary path not supplied");
  }

  // 9 — verification exits 0 clean, 1 under each documented fault
  if (!cli.empty()) {
    bool pass = run_cmd(cli + " verify > /dev/null 2>&1") == 0;
    std::string detail;
    for (const char* fault : {"bilinear", "softmax", "gradient"}) {
      const int rc = run_cmd(cli + " verify --inject " + fault + " > /dev/null 2>&1");
      if (rc != 1) {
        pass = false;
        detail = std::string("inject ") + fault + " exited " + std::to_string(rc);
      }
    }
    report("criterion 9: verification passes clean and fails under each injected fault", pass,
           detail);
  } else {
    report("criterion 9: verification passes clean and fails under each injected fault", false,
           "dsic binary path not supplied");
  }

  std::printf("%d criterion line(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
