// Command-line front end: training, evaluation, verification, ablations, and
// gate-state export for the dynamic sample-individualized connector.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "dsic/fault.hpp"
#include "dsic/train.hpp"
#include "dsic/verify.hpp"

namespace fs = std::filesystem;
using namespace dsic;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailure = 1;
constexpr int kExitIoError = 2;
constexpr int kExitConfigError = 3;

RunConfig resolve_config(const std::string& config_path, const std::string& out_override,
                         std::int64_t seed_override, int workers_override) {
  RunConfig config;
  if (!config_path.empty()) config = load_config(config_path);
  if (!out_override.empty()) config.out = out_override;
  if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);
  if (workers_override > 0) config.workers = workers_override;
  config.validate();
  return config;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParseError("cannot write " + path.string());
  os << content;
}

int cmd_train(const RunConfig& config) {
  fs::create_directories(config.out);
  ModelParams model = build_model(config);
  TrainResult result = train_model(model);

  {
    std::ofstream os(fs::path(config.out) / "metrics.csv", std::ios::binary);
    write_metrics_csv(os, result.metrics);
  }
  {
    std::ofstream os(fs::path(config.out) / "gates.csv", std::ios::binary);
    write_gate_records_csv(os, result.gate_rows);
  }
  model.store.save((fs::path(config.out) / "snapshot.bin").string());
  write_file(fs::path(config.out) / "config.txt", serialize_config(config));

  std::cout << "trained " << config.connector << " for " << config.steps << " steps; final loss "
            << (result.metrics.empty() ? 0.0 : result.metrics.back().loss) << "\n";
  std::cout << "artifacts in " << config.out << "\n";
  return kExitOk;
}

int cmd_eval(const RunConfig& config, const std::string& snapshot, int samples) {
  ModelParams model = build_model(config);
  if (!snapshot.empty()) model.store.load(snapshot);
  EvalMetrics m = evaluate(model, samples > 0 ? samples : config.val_samples);
  std::printf("val_mse %.8g\n", m.mse);
  for (int k = 0; k < 4; ++k) {
    std::printf("level_%d_mse %.8g\n", k + 2, m.level_mse[static_cast<std::size_t>(k)]);
  }
  std::printf("f1 %.6g (tp %lld fp %lld fn %lld)\n", m.f1, m.true_pos, m.false_pos, m.false_neg);
  return kExitOk;
}

int cmd_verify(const std::string& inject) {
  if (inject == "bilinear") set_fault(Fault::BilinearKernel);
  else if (inject == "softmax") set_fault(Fault::SoftmaxNormalization);
  else if (inject == "gradient") set_fault(Fault::DetachedGradient);
  else if (!inject.empty()) throw ConfigError("unknown fault: " + inject);

  auto results = run_verification();
  int failures = 0;
  std::string first_failure;
  for (const CheckResult& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << " " << r.name;
    if (!r.pass) {
      std::cout << " — " << r.detail;
      if (first_failure.empty()) first_failure = r.name;
      ++failures;
    }
    std::cout << "\n";
  }
  std::cout << results.size() - static_cast<std::size_t>(failures) << "/" << results.size()
            << " checks passed\n";
  if (failures > 0) {
    std::cout << "first failing check: " << first_failure << "\n";
    return kExitVerifyFailure;
  }
  return kExitOk;
}

int cmd_ablate(const std::string& axis, const RunConfig& config) {
  fs::create_directories(config.out);
  auto rows = ablate(axis, config);
  {
    std::ofstream os(fs::path(config.out) / ("ablation_" + axis + ".csv"), std::ios::binary);
    write_ablation_csv(os, rows);
  }
  std::printf("%-16s %-16s %-4s %12s %12s %8s\n", "arm", "connector", "isg", "final_loss",
              "val_mse", "val_f1");
  for (const AblationRow& r : rows) {
    std::printf("%-16s %-16s %-4s %12.6f %12.6f %8.4f\n", r.arm.c_str(), r.connector.c_str(),
                r.isg ? "on" : "off", r.final_loss, r.val_mse, r.val_f1);
  }
  return kExitOk;
}

int cmd_export_gates(const RunConfig& config, const std::string& snapshot,
                     const std::vector<std::int64_t>& seeds, const std::string& blob_scale) {
  ModelParams model = build_model(config);
  if (!fs::exists(snapshot)) throw ParseError("snapshot not found: " + snapshot);
  model.store.load(snapshot);
  fs::create_directories(config.out);

  BlobSpec spec{config.blobs_min, config.blobs_max, 2.0, 32.0};
  if (blob_scale == "small") {
    spec.radius_min = 2.0;
    spec.radius_max = 6.0;
  } else if (blob_scale == "large") {
    spec.radius_min = 12.0;
    spec.radius_max = 32.0;
  } else if (blob_scale != "all") {
    throw ConfigError("blob-scale must be all, small or large");
  }

  for (std::int64_t seed : seeds) {
    SynthSample sample = generate_sample(static_cast<std::uint64_t>(seed), spec,
                                         config.image_size);
    Tape tape;
    BoundParams bound(tape, model.store, false);
    ModelForward fwd = model_forward(tape, bound, model,
                                     std::span<const SynthSample>(&sample, 1));

    const std::string stem = "sample_" + std::to_string(seed);
    auto matrix = csg_state_matrix(fwd, 0);
    {
      std::ofstream os(fs::path(config.out) / (stem + "_csg.csv"), std::ios::binary);
      char buf[32];
      for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 4; ++k) {
          std::snprintf(buf, sizeof(buf), "%.17g",
                        matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
          os << buf << (k == 3 ? '\n' : ',');
        }
      }
    }
    {
      std::ofstream os(fs::path(config.out) / (stem + "_csg.pgm"), std::ios::binary);
      os << "P5\n4 4\n255\n";
      for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 4; ++k) {
          const double v = matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
          os.put(static_cast<char>(
              static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)))));
        }
      }
    }
    {
      std::vector<GateRecordRow> rows = extract_gate_records(fwd, seed);
      std::vector<GateRecordRow> isg_rows;
      for (const auto& r : rows) {
        if (r.kind == "isg_b" || r.kind == "isg_a") isg_rows.push_back(r);
      }
      std::ofstream os(fs::path(config.out) / (stem + "_isg.csv"), std::ios::binary);
      write_gate_records_csv(os, isg_rows);
    }
    std::cout << "exported gate state for seed " << seed << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic sample-individualized connector workbench"};
  app.require_subcommand(1);

  std::string config_path, out_dir, snapshot, inject, axis = "component", blob_scale = "all";
  std::int64_t seed_override = -1;
  int workers_override = 0, eval_samples = 0;
  std::vector<std::int64_t> seeds{1};

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (flat key = value)");
    cmd->add_option("--out", out_dir, "output directory override");
    cmd->add_option("--seed", seed_override, "seed override");
    cmd->add_option("--workers", workers_override, "worker threads override");
  };

  CLI::App* train = app.add_subcommand("train", "train a connector and write artifacts");
  add_common(train);

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a snapshot on held-out samples");
  add_common(eval_cmd);
  eval_cmd->add_option("--snapshot", snapshot, "parameter snapshot (defaults to fresh init)");
  eval_cmd->add_option("--samples", eval_samples, "number of validation samples");

  CLI::App* verify = app.add_subcommand("verify", "run the oracle/property suite");
  verify->add_option("--inject", inject, "fault hook: bilinear | softmax | gradient");

  CLI::App* ablate_cmd = app.add_subcommand("ablate", "run one ablation axis");
  add_common(ablate_cmd);
  ablate_cmd->add_option("--axis", axis,
                         "component | stride | fs | csg_placement | mode");

  CLI::App* export_cmd = app.add_subcommand("export-gates", "export per-sample gate state");
  add_common(export_cmd);
  export_cmd->add_option("--snapshot", snapshot, "parameter snapshot")->required();
  export_cmd->add_option("--seeds", seeds, "sample seeds")->delimiter(',');
  export_cmd->add_option("--blob-scale", blob_scale, "all | small | large");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitIoError;
  }

  try {
    if (verify->parsed()) return cmd_verify(inject);
    RunConfig config = resolve_config(config_path, out_dir, seed_override, workers_override);
    if (train->parsed()) return cmd_train(config);
    if (eval_cmd->parsed()) return cmd_eval(config, snapshot, eval_samples);
    if (ablate_cmd->parsed()) return cmd_ablate(axis, config);
    if (export_cmd->parsed()) return cmd_export_gates(config, snapshot, seeds, blob_scale);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
  return kExitOk;
}
