#pragma once

#include "dsic/model.hpp"

namespace dsic {

// step, loss, lr at the logging cadence (every 10 steps plus the final step)
struct MetricRow {
  int step = 0;
  double loss = 0.0;
  double lr = 0.0;
};

void write_metrics_csv(std::ostream& os, std::span<const MetricRow> rows);

struct TrainResult {
  std::vector<MetricRow> metrics;
  std::vector<GateRecordRow> gate_rows;  // sampled every 100 steps
};

// SGD with momentum 0.9 and weight decay 1e-4; the base rate decays by 0.1 at
// 2/3 and 8/9 of the step budget. Deterministic for a fixed config, any
// worker count included: per-worker gradients merge in worker order.
TrainResult train_model(ModelParams& model);

double lr_at_step(double base_lr, int step, int total_steps);

// deterministic, disjoint seed streams for training and validation samples
std::uint64_t train_sample_seed(const RunConfig& config, long long sample_index);
std::uint64_t val_sample_seed(int index);

struct EvalMetrics {
  std::array<double, 4> level_mse{};
  double mse = 0.0;
  double f1 = 0.0;
  long long true_pos = 0, false_pos = 0, false_neg = 0;
};

// Center-detection matching: threshold 0.5, 3x3 strict local maxima, greedy
// matching to blob centers within 1.5 cells at the assigned level.
EvalMetrics compute_metrics(std::span<const std::array<Tensor4, 4>> preds,
                            std::span<const SynthSample> samples);

EvalMetrics evaluate(const ModelParams& model, int n_samples);

struct AblationRow {
  std::string arm;
  std::string connector;
  bool isg = false;
  double final_loss = 0.0;
  double val_mse = 0.0;
  double val_f1 = 0.0;
};

// axis: component | stride | fs | csg_placement | mode. Arms share the base
// config's seeds and budget. Throws ConfigError for an unknown axis.
std::vector<AblationRow> ablate(const std::string& axis, const RunConfig& base);

void write_ablation_csv(std::ostream& os, std::span<const AblationRow> rows);

}  // namespace dsic
