#include "dsic/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

namespace dsic {

void write_metrics_csv(std::ostream& os, std::span<const MetricRow> rows) {
  os << "step,loss,lr\n";
  char loss_buf[32], lr_buf[32];
  for (const MetricRow& r : rows) {
    std::snprintf(loss_buf, sizeof(loss_buf), "%.17g", r.loss);
    std::snprintf(lr_buf, sizeof(lr_buf), "%.17g", r.lr);
    os << r.step << ',' << loss_buf << ',' << lr_buf << '\n';
  }
}

double lr_at_step(double base_lr, int step, int total_steps) {
  double lr = base_lr;
  if (total_steps > 0) {
    if (step >= total_steps * 2 / 3) lr *= 0.1;
    if (step >= total_steps * 8 / 9) lr *= 0.1;
  }
  return lr;
}

std::uint64_t train_sample_seed(const RunConfig& config, long long sample_index) {
  return (config.seed + 1) * 0x100000000ull + static_cast<std::uint64_t>(sample_index);
}

std::uint64_t val_sample_seed(int index) {
  return 0x80000000ull + static_cast<std::uint64_t>(index);
}

namespace {

struct WorkerResult {
  std::vector<Tensor4> grads;  // per param, scaled by chunk/batch
  double loss = 0.0;           // chunk mean loss
  int count = 0;
};

// forward + backward for one contiguous chunk of the batch
WorkerResult run_chunk(const ModelParams& model, std::span<const SynthSample> chunk,
                       double weight) {
  WorkerResult result;
  result.count = static_cast<int>(chunk.size());
  Tape tape;
  BoundParams bound(tape, model.store, /*requires_grad=*/true);
  ModelForward fwd = model_forward(tape, bound, model, chunk);
  result.loss = tape.value(fwd.loss)[0];
  GradStore grads = tape.backward(fwd.loss);
  result.grads.reserve(static_cast<std::size_t>(model.store.count()));
  for (int i = 0; i < model.store.count(); ++i) {
    Tensor4 g = grads.get_or_zero(bound[i].id, model.store.value(i).shape());
    for (long long j = 0; j < g.size(); ++j) g[static_cast<std::size_t>(j)] *= weight;
    result.grads.push_back(std::move(g));
  }
  return result;
}

}  // namespace

TrainResult train_model(ModelParams& model) {
  const RunConfig& config = model.config;
  TrainResult result;

  std::vector<Tensor4> momentum;
  momentum.reserve(static_cast<std::size_t>(model.store.count()));
  for (int i = 0; i < model.store.count(); ++i) {
    momentum.emplace_back(model.store.value(i).shape());
  }
  constexpr double kMomentum = 0.9;
  constexpr double kWeightDecay = 1e-4;

  const int batch = config.batch_size;
  BlobSpec blob_spec{config.blobs_min, config.blobs_max, 2.0, 32.0};

  auto make_batch = [&](int step) {
    std::vector<SynthSample> samples;
    samples.reserve(static_cast<std::size_t>(batch));
    for (int b = 0; b < batch; ++b) {
      const long long idx = static_cast<long long>(step) * batch + b;
      samples.push_back(generate_sample(train_sample_seed(config, idx), blob_spec,
                                        config.image_size));
    }
    return samples;
  };

  auto forward_backward = [&](const std::vector<SynthSample>& samples,
                              std::vector<WorkerResult>& out) {
    const int workers = std::min(config.workers, batch);
    out.assign(static_cast<std::size_t>(workers), WorkerResult{});
    if (workers == 1) {
      out[0] = run_chunk(model, samples, 1.0);
      return;
    }
    std::vector<std::thread> threads;
    const int base = batch / workers, extra = batch % workers;
    int begin = 0;
    for (int w = 0; w < workers; ++w) {
      const int len = base + (w < extra ? 1 : 0);
      threads.emplace_back([&, w, begin, len] {
        out[static_cast<std::size_t>(w)] =
            run_chunk(model, std::span<const SynthSample>(samples.data() + begin,
                                                          static_cast<std::size_t>(len)),
                      static_cast<double>(len) / batch);
      });
      begin += len;
    }
    for (auto& t : threads) t.join();
  };

  auto merged_loss = [&](const std::vector<WorkerResult>& parts) {
    double loss = 0.0;
    for (const WorkerResult& p : parts) loss += p.loss * p.count;
    return loss / batch;
  };

  auto log_gates = [&](int step, const std::vector<SynthSample>& samples) {
    Tape tape;
    BoundParams bound(tape, model.store, /*requires_grad=*/false);
    ModelForward fwd = model_forward(tape, bound, model, samples);
    auto rows = extract_gate_records(fwd, static_cast<long long>(step) * batch);
    result.gate_rows.insert(result.gate_rows.end(), rows.begin(), rows.end());
  };

  // logged loss is the mean over the last ten steps; single-batch losses are
  // too noisy to read a trend from
  std::vector<double> recent;
  auto recent_mean = [&] {
    double acc = 0.0;
    for (double v : recent) acc += v;
    return acc / static_cast<double>(recent.size());
  };

  for (int step = 0; step < config.steps; ++step) {
    std::vector<SynthSample> samples = make_batch(step);
    std::vector<WorkerResult> parts;
    forward_backward(samples, parts);

    recent.push_back(merged_loss(parts));
    if (recent.size() > 10) recent.erase(recent.begin());
    if (step % 10 == 0) {
      result.metrics.push_back({step, recent_mean(), lr_at_step(config.lr, step, config.steps)});
    }
    if (step % 100 == 0 && (model.isg || model.csg)) log_gates(step, samples);

    const double lr = lr_at_step(config.lr, step, config.steps);
    for (int i = 0; i < model.store.count(); ++i) {
      Tensor4& theta = model.store.value(i);
      Tensor4& vel = momentum[static_cast<std::size_t>(i)];
      for (long long j = 0; j < theta.size(); ++j) {
        const auto idx = static_cast<std::size_t>(j);
        double g = 0.0;
        for (const WorkerResult& part : parts) g += part.grads[static_cast<std::size_t>(i)][idx];
        g += kWeightDecay * theta[idx];
        vel[idx] = kMomentum * vel[idx] + g;
        theta[idx] -= lr * vel[idx];
      }
    }
  }

  // closing row: loss of the next batch under the final parameters
  {
    std::vector<SynthSample> samples = make_batch(config.steps);
    Tape tape;
    BoundParams bound(tape, model.store, /*requires_grad=*/false);
    ModelForward fwd = model_forward(tape, bound, model, samples);
    recent.push_back(tape.value(fwd.loss)[0]);
    if (recent.size() > 10) recent.erase(recent.begin());
    result.metrics.push_back({config.steps, recent_mean(),
                              lr_at_step(config.lr, config.steps, config.steps)});
  }
  return result;
}

namespace {

struct Peak {
  int x = 0, y = 0;
  double score = 0.0;
};

std::vector<Peak> find_peaks(const Tensor4& pred, int n) {
  const Shape4& s = pred.shape();
  std::vector<Peak> peaks;
  for (int y = 0; y < s.h; ++y) {
    for (int x = 0; x < s.w; ++x) {
      const double v = pred.at(n, 0, y, x);
      if (v <= 0.5) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int yy = y + dy, xx = x + dx;
          if (yy < 0 || yy >= s.h || xx < 0 || xx >= s.w) continue;
          if (pred.at(n, 0, yy, xx) >= v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) peaks.push_back({x, y, v});
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.score > b.score; });
  return peaks;
}

}  // namespace

EvalMetrics compute_metrics(std::span<const std::array<Tensor4, 4>> preds,
                            std::span<const SynthSample> samples) {
  EvalMetrics m{};
  std::array<double, 4> sq_err{};
  std::array<long long, 4> counts{};

  for (std::size_t s = 0; s < samples.size(); ++s) {
    for (int k = 0; k < 4; ++k) {
      const Tensor4& pred = preds[s][static_cast<std::size_t>(k)];
      const Tensor4& target = samples[s].targets[static_cast<std::size_t>(k)];
      if (pred.shape().h != target.shape().h || pred.shape().w != target.shape().w) {
        throw ShapeMismatch("compute_metrics: prediction grid mismatch");
      }
      for (int y = 0; y < target.shape().h; ++y) {
        for (int x = 0; x < target.shape().w; ++x) {
          const double d = pred.at(0, 0, y, x) - target.at(0, 0, y, x);
          sq_err[static_cast<std::size_t>(k)] += d * d;
          ++counts[static_cast<std::size_t>(k)];
        }
      }

      // matching in level-cell coordinates
      const int level = k + 2;
      const int stride = 1 << level;
      std::vector<Peak> peaks = find_peaks(pred, 0);
      std::vector<const Blob*> gt;
      for (const Blob& b : samples[s].blobs) {
        if (b.level == level) gt.push_back(&b);
      }
      std::vector<bool> taken(gt.size(), false);
      for (const Peak& peak : peaks) {
        int best = -1;
        double best_d = 1.5;
        for (std::size_t g = 0; g < gt.size(); ++g) {
          if (taken[g]) continue;
          const double cx = gt[g]->cx / stride - 0.5;
          const double cy = gt[g]->cy / stride - 0.5;
          const double d = std::hypot(peak.x - cx, peak.y - cy);
          if (d <= best_d) {
            best_d = d;
            best = static_cast<int>(g);
          }
        }
        if (best >= 0) {
          taken[static_cast<std::size_t>(best)] = true;
          ++m.true_pos;
        } else {
          ++m.false_pos;
        }
      }
      for (bool t : taken) {
        if (!t) ++m.false_neg;
      }
    }
  }

  double total_mse = 0.0;
  for (int k = 0; k < 4; ++k) {
    m.level_mse[static_cast<std::size_t>(k)] =
        counts[static_cast<std::size_t>(k)] > 0
            ? sq_err[static_cast<std::size_t>(k)] / counts[static_cast<std::size_t>(k)]
            : 0.0;
    total_mse += m.level_mse[static_cast<std::size_t>(k)];
  }
  m.mse = total_mse / 4.0;
  const double denom = 2.0 * m.true_pos + m.false_pos + m.false_neg;
  m.f1 = denom > 0.0 ? 2.0 * m.true_pos / denom : 0.0;
  return m;
}

EvalMetrics evaluate(const ModelParams& model, int n_samples) {
  std::vector<SynthSample> samples;
  std::vector<std::array<Tensor4, 4>> preds;
  samples.reserve(static_cast<std::size_t>(n_samples));
  preds.reserve(static_cast<std::size_t>(n_samples));
  BlobSpec spec{model.config.blobs_min, model.config.blobs_max, 2.0, 32.0};
  for (int i = 0; i < n_samples; ++i) {
    samples.push_back(generate_sample(val_sample_seed(i), spec, model.config.image_size));
    Tape tape;
    BoundParams bound(tape, model.store, /*requires_grad=*/false);
    ModelForward fwd = model_forward(tape, bound, model,
                                     std::span<const SynthSample>(&samples.back(), 1));
    std::array<Tensor4, 4> sample_preds;
    for (int k = 0; k < 4; ++k) {
      sample_preds[static_cast<std::size_t>(k)] =
          tape.value(fwd.preds[static_cast<std::size_t>(k)]);
    }
    preds.push_back(std::move(sample_preds));
  }
  return compute_metrics(preds, samples);
}

namespace {

AblationRow run_arm(const std::string& name, RunConfig config) {
  config.validate();
  ModelParams model = build_model(config);
  TrainResult tr = train_model(model);
  EvalMetrics em = evaluate(model, config.val_samples);
  AblationRow row;
  row.arm = name;
  row.connector = config.connector;
  row.isg = config.isg;
  row.final_loss = tr.metrics.empty() ? 0.0 : tr.metrics.back().loss;
  row.val_mse = em.mse;
  row.val_f1 = em.f1;
  return row;
}

}  // namespace

std::vector<AblationRow> ablate(const std::string& axis, const RunConfig& base) {
  std::vector<AblationRow> rows;
  auto arm = [&](const std::string& name, auto mutate) {
    RunConfig config = base;
    mutate(config);
    rows.push_back(run_arm(name, config));
  };

  if (axis == "component") {
    arm("baseline", [](RunConfig& c) { c.connector = "fpn"; c.isg = false; });
    arm("isg", [](RunConfig& c) { c.connector = "fpn"; c.isg = true; });
    arm("csg", [](RunConfig& c) { c.connector = "dsic"; c.isg = false; });
    arm("isg_csg", [](RunConfig& c) { c.connector = "dsic"; c.isg = true; });
  } else if (axis == "stride") {
    arm("baseline", [](RunConfig& c) { c.connector = "fpn"; c.isg = false; });
    arm("stride_1", [](RunConfig& c) { c.connector = "fpn"; c.isg = true; c.sampling_stride = 1; });
    arm("stride_2", [](RunConfig& c) { c.connector = "fpn"; c.isg = true; c.sampling_stride = 2; });
  } else if (axis == "fs") {
    arm("baseline", [](RunConfig& c) { c.connector = "fpn"; c.isg = false; });
    arm("isg_without_fs",
        [](RunConfig& c) { c.connector = "fpn"; c.isg = true; c.fine_selection = false; });
    arm("isg_with_fs",
        [](RunConfig& c) { c.connector = "fpn"; c.isg = true; c.fine_selection = true; });
  } else if (axis == "csg_placement") {
    arm("baseline", [](RunConfig& c) { c.connector = "fpn"; c.isg = false; });
    arm("after_fpn", [](RunConfig& c) { c.connector = "dsic_after_fpn"; c.isg = false; });
    arm("inside_fpn", [](RunConfig& c) { c.connector = "dsic_inside_fpn"; c.isg = false; });
    arm("csg", [](RunConfig& c) { c.connector = "dsic"; c.isg = false; });
  } else if (axis == "mode") {
    for (const char* mode : {"softmax", "sigmoid", "tanh"}) {
      arm(std::string("isg_") + mode, [mode](RunConfig& c) {
        c.connector = "fpn";
        c.isg = true;
        c.isg_mode = mode;
      });
    }
    for (const char* mode : {"softmax", "sigmoid", "tanh"}) {
      arm(std::string("csg_") + mode, [mode](RunConfig& c) {
        c.connector = "dsic";
        c.isg = false;
        c.csg_mode = mode;
      });
    }
  } else {
    throw ConfigError("unknown ablation axis: " + axis);
  }
  return rows;
}

void write_ablation_csv(std::ostream& os, std::span<const AblationRow> rows) {
  os << "arm,connector,isg,final_loss,val_mse,val_f1\n";
  char buf[3][32];
  for (const AblationRow& r : rows) {
    std::snprintf(buf[0], sizeof(buf[0]), "%.17g", r.final_loss);
    std::snprintf(buf[1], sizeof(buf[1]), "%.17g", r.val_mse);
    std::snprintf(buf[2], sizeof(buf[2]), "%.17g", r.val_f1);
    os << r.arm << ',' << r.connector << ',' << (r.isg ? "on" : "off") << ',' << buf[0] << ','
       << buf[1] << ',' << buf[2] << '\n';
  }
}

}  // namespace dsic
