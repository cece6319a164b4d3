#include "dsic/ops.hpp"

#include <cmath>
#include <memory>

#include "dsic/fault.hpp"

namespace dsic {

namespace {

Tape& tape_of(Var a, Var b) {
  if (!a || !b || a.tape != b.tape) {
    throw std::invalid_argument("binary op: operands must live on one tape");
  }
  return *a.tape;
}

enum class BinOp { Add, Sub, Mul };

bool is_signal_shape(const Shape4& a, const Shape4& b, bool allow_scalar_channel) {
  if (b.h != 1 || b.w != 1) return false;
  if (b.n != 1 && b.n != a.n) return false;
  if (b.c == a.c) return true;
  return allow_scalar_channel && b.c == 1;
}

bool is_spatial_map(const Shape4& a, const Shape4& b) {
  return b.n == a.n && b.c == 1 && b.h == a.h && b.w == a.w;
}

void check_broadcast(const Shape4& a, const Shape4& b, bool hadamard_patterns,
                     const char* op) {
  if (a == b) return;
  if (is_signal_shape(a, b, hadamard_patterns)) return;
  if (hadamard_patterns && is_spatial_map(a, b)) return;
  throw ShapeMismatch(std::string(op) + ": " + to_string(a) + " with " + to_string(b));
}

// generic broadcast evaluation: b's unit axes follow a's index
Tensor4 eval_binary(const Tensor4& a, const Tensor4& b, BinOp op) {
  const Shape4& as = a.shape();
  const Shape4& bs = b.shape();
  Tensor4 out(as);
  for (int n = 0; n < as.n; ++n) {
    for (int c = 0; c < as.c; ++c) {
      for (int y = 0; y < as.h; ++y) {
        for (int x = 0; x < as.w; ++x) {
          const double bv = b.at(bs.n == 1 ? 0 : n, bs.c == 1 ? 0 : c,
                                 bs.h == 1 ? 0 : y, bs.w == 1 ? 0 : x);
          const double av = a.at(n, c, y, x);
          double r = 0.0;
          switch (op) {
            case BinOp::Add: r = av + bv; break;
            case BinOp::Sub: r = av - bv; break;
            case BinOp::Mul: r = av * bv; break;
          }
          out.at(n, c, y, x) = r;
        }
      }
    }
  }
  return out;
}

// sum `full` over the axes where `target` has extent 1
Tensor4 reduce_to(const Tensor4& full, const Shape4& target) {
  if (full.shape() == target) return full;
  Tensor4 out(target);
  const Shape4& fs = full.shape();
  for (int n = 0; n < fs.n; ++n) {
    for (int c = 0; c < fs.c; ++c) {
      for (int y = 0; y < fs.h; ++y) {
        for (int x = 0; x < fs.w; ++x) {
          out.at(target.n == 1 ? 0 : n, target.c == 1 ? 0 : c, target.h == 1 ? 0 : y,
                 target.w == 1 ? 0 : x) += full.at(n, c, y, x);
        }
      }
    }
  }
  return out;
}

Var make_binary(Var a, Var b, BinOp op, bool hadamard_patterns, const char* name) {
  Tape& t = tape_of(a, b);
  check_broadcast(t.value(a).shape(), t.value(b).shape(), hadamard_patterns, name);
  Tensor4 out = eval_binary(t.value(a), t.value(b), op);
  const NodeId aid = a.id, bid = b.id;
  return t.emplace(std::move(out), {aid, bid},
                   [aid, bid, op](const Tensor4& gout, Tape::BackCtx& ctx) {
                     const Tensor4& av = ctx.value(aid);
                     const Tensor4& bv = ctx.value(bid);
                     switch (op) {
                       case BinOp::Add:
                         ctx.add(aid, gout);
                         ctx.add(bid, reduce_to(gout, bv.shape()));
                         break;
                       case BinOp::Sub: {
                         ctx.add(aid, gout);
                         Tensor4 neg(gout.shape());
                         for (long long i = 0; i < neg.size(); ++i)
                           neg[static_cast<std::size_t>(i)] = -gout[static_cast<std::size_t>(i)];
                         ctx.add(bid, reduce_to(neg, bv.shape()));
                         break;
                       }
                       case BinOp::Mul:
                         ctx.add(aid, eval_binary(gout, bv, BinOp::Mul));
                         if (active_fault() != Fault::DetachedGradient) {
                           ctx.add(bid, reduce_to(eval_binary(gout, av, BinOp::Mul), bv.shape()));
                         }
                         break;
                     }
                   });
}

}  // namespace

Var add(Var a, Var b) { return make_binary(a, b, BinOp::Add, false, "add"); }
Var sub(Var a, Var b) { return make_binary(a, b, BinOp::Sub, false, "sub"); }
Var hadamard(Var a, Var b) { return make_binary(a, b, BinOp::Mul, true, "hadamard"); }

namespace {

double sigmoid_stable(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

Var activation(Act kind, Var x) {
  Tape& t = *x.tape;
  const Tensor4& xv = t.value(x);
  Tensor4 out(xv.shape());
  for (long long i = 0; i < xv.size(); ++i) {
    const double v = xv[static_cast<std::size_t>(i)];
    double r = 0.0;
    switch (kind) {
      case Act::Tanh: r = std::tanh(v); break;
      case Act::Sigmoid: r = sigmoid_stable(v); break;
      case Act::Relu: r = v > 0.0 ? v : 0.0; break;
      case Act::RectifiedTanh: r = std::max(std::tanh(v), 0.0); break;
    }
    out[static_cast<std::size_t>(i)] = r;
  }
  const NodeId xid = x.id;
  // derivative is recomputed from the input in backward
  Tape::BackFn back = [xid, kind](const Tensor4& gout, Tape::BackCtx& ctx) {
    const Tensor4& xv = ctx.value(xid);
    Tensor4 gx(xv.shape());
    for (long long i = 0; i < xv.size(); ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const double v = xv[idx];
      double d = 0.0;
      switch (kind) {
        case Act::Tanh: {
          const double th = std::tanh(v);
          d = 1.0 - th * th;
          break;
        }
        case Act::Sigmoid: {
          const double sg = sigmoid_stable(v);
          d = sg * (1.0 - sg);
          break;
        }
        case Act::Relu:
          d = v > 0.0 ? 1.0 : 0.0;
          break;
        case Act::RectifiedTanh: {
          const double th = std::tanh(v);
          d = th > 0.0 ? 1.0 - th * th : 0.0;
          break;
        }
      }
      gx[idx] = gout[idx] * d;
    }
    ctx.add(xid, gx);
  };
  return t.emplace(std::move(out), {xid}, std::move(back));
}

std::vector<Var> softmax_over_group(const std::vector<Var>& values) {
  if (values.empty()) throw std::invalid_argument("softmax_over_group: empty group");
  Tape& t = *values.front().tape;
  const Shape4 shape = t.value(values.front()).shape();
  for (const Var& v : values) {
    if (t.value(v).shape() != shape) {
      throw ShapeMismatch("softmax_over_group: " + to_string(shape) + " vs " +
                          to_string(t.value(v).shape()));
    }
  }
  const std::size_t k = values.size();
  auto outputs = std::make_shared<std::vector<Tensor4>>();
  outputs->reserve(k);
  for (std::size_t g = 0; g < k; ++g) outputs->emplace_back(shape);

  const long long count = shape.count();
  for (long long i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    double m = t.value(values[0])[idx];
    for (std::size_t g = 1; g < k; ++g) m = std::max(m, t.value(values[g])[idx]);
    double denom = 0.0;
    for (std::size_t g = 0; g < k; ++g) denom += std::exp(t.value(values[g])[idx] - m);
    if (active_fault() == Fault::SoftmaxNormalization) denom += 0.05;
    for (std::size_t g = 0; g < k; ++g) {
      (*outputs)[g][idx] = std::exp(t.value(values[g])[idx] - m) / denom;
    }
  }

  std::vector<NodeId> parent_ids;
  parent_ids.reserve(k);
  for (const Var& v : values) parent_ids.push_back(v.id);

  std::vector<Var> result;
  result.reserve(k);
  for (std::size_t g = 0; g < k; ++g) {
    // d out_g / d in_j = out_g (delta_gj - out_j)
    Tape::BackFn back = [outputs, parent_ids, g](const Tensor4& gout, Tape::BackCtx& ctx) {
      const Tensor4& og = (*outputs)[g];
      for (std::size_t j = 0; j < parent_ids.size(); ++j) {
        const Tensor4& oj = (*outputs)[j];
        Tensor4 gin(og.shape());
        for (long long i = 0; i < gin.size(); ++i) {
          const auto idx = static_cast<std::size_t>(i);
          const double delta = (j == g) ? 1.0 : 0.0;
          gin[idx] = gout[idx] * og[idx] * (delta - oj[idx]);
        }
        ctx.add(parent_ids[j], gin);
      }
    };
    result.push_back(t.emplace((*outputs)[g], parent_ids, std::move(back)));
  }
  return result;
}

Var concat_channels(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_channels: empty list");
  Tape& t = *parts.front().tape;
  const Shape4 first = t.value(parts.front()).shape();
  int total_c = 0;
  for (const Var& p : parts) {
    const Shape4& s = t.value(p).shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw ShapeMismatch("concat_channels: " + to_string(first) + " vs " + to_string(s));
    }
    total_c += s.c;
  }
  Tensor4 out(first.n, total_c, first.h, first.w);
  std::vector<NodeId> ids;
  std::vector<int> offsets;
  int off = 0;
  for (const Var& p : parts) {
    const Tensor4& pv = t.value(p);
    const Shape4& s = pv.shape();
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c)
        for (int y = 0; y < s.h; ++y)
          for (int x = 0; x < s.w; ++x) out.at(n, off + c, y, x) = pv.at(n, c, y, x);
    ids.push_back(p.id);
    offsets.push_back(off);
    off += s.c;
  }
  Tape::BackFn back = [ids, offsets](const Tensor4& gout, Tape::BackCtx& ctx) {
    for (std::size_t p = 0; p < ids.size(); ++p) {
      const Shape4 ps = ctx.value(ids[p]).shape();
      Tensor4 g(ps);
      for (int n = 0; n < ps.n; ++n)
        for (int c = 0; c < ps.c; ++c)
          for (int y = 0; y < ps.h; ++y)
            for (int x = 0; x < ps.w; ++x) g.at(n, c, y, x) = gout.at(n, offsets[p] + c, y, x);
      ctx.add(ids[p], g);
    }
  };
  return t.emplace(std::move(out), ids, std::move(back));
}

Var slice_channels(Var x, int first, int count) {
  Tape& t = *x.tape;
  const Shape4& s = t.value(x).shape();
  if (first < 0 || count < 1 || first + count > s.c) {
    throw ShapeMismatch("slice_channels: [" + std::to_string(first) + ", " +
                        std::to_string(first + count) + ") of " + to_string(s));
  }
  Tensor4 out(s.n, count, s.h, s.w);
  const Tensor4& xv = t.value(x);
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < count; ++c)
      for (int y = 0; y < s.h; ++y)
        for (int xx = 0; xx < s.w; ++xx) out.at(n, c, y, xx) = xv.at(n, first + c, y, xx);
  const NodeId xid = x.id;
  Tape::BackFn back = [xid, first, count](const Tensor4& gout, Tape::BackCtx& ctx) {
    const Shape4 xs = ctx.value(xid).shape();
    Tensor4 g(xs);
    for (int n = 0; n < xs.n; ++n)
      for (int c = 0; c < count; ++c)
        for (int y = 0; y < xs.h; ++y)
          for (int xx = 0; xx < xs.w; ++xx) g.at(n, first + c, y, xx) = gout.at(n, c, y, xx);
    ctx.add(xid, g);
  };
  return t.emplace(std::move(out), {xid}, std::move(back));
}

Var sum_all(Var x) {
  Tape& t = *x.tape;
  const Tensor4& xv = t.value(x);
  double acc = 0.0;
  for (long long i = 0; i < xv.size(); ++i) acc += xv[static_cast<std::size_t>(i)];
  const NodeId xid = x.id;
  Tape::BackFn back = [xid](const Tensor4& gout, Tape::BackCtx& ctx) {
    const double g = gout[0];
    Tensor4 gx(ctx.value(xid).shape(), g);
    ctx.add(xid, gx);
  };
  return t.emplace(Tensor4::scalar(acc), {xid}, std::move(back));
}

Var mean_all(Var x) {
  const long long count = x.tape->value(x).size();
  return scale(sum_all(x), 1.0 / static_cast<double>(count));
}

Var scale(Var x, double k) {
  Tape& t = *x.tape;
  const Tensor4& xv = t.value(x);
  Tensor4 out(xv.shape());
  for (long long i = 0; i < xv.size(); ++i)
    out[static_cast<std::size_t>(i)] = xv[static_cast<std::size_t>(i)] * k;
  const NodeId xid = x.id;
  Tape::BackFn back = [xid, k](const Tensor4& gout, Tape::BackCtx& ctx) {
    Tensor4 gx(gout.shape());
    for (long long i = 0; i < gx.size(); ++i)
      gx[static_cast<std::size_t>(i)] = gout[static_cast<std::size_t>(i)] * k;
    ctx.add(xid, gx);
  };
  return t.emplace(std::move(out), {xid}, std::move(back));
}

Var channel_l2_normalize(Var x, double eps) {
  Tape& t = *x.tape;
  const Tensor4& xv = t.value(x);
  const Shape4& s = xv.shape();
  Tensor4 out(s);
  for (int n = 0; n < s.n; ++n) {
    for (int y = 0; y < s.h; ++y) {
      for (int xx = 0; xx < s.w; ++xx) {
        double sq = 0.0;
        for (int c = 0; c < s.c; ++c) sq += xv.at(n, c, y, xx) * xv.at(n, c, y, xx);
        const double denom = std::sqrt(sq) + eps;
        for (int c = 0; c < s.c; ++c) out.at(n, c, y, xx) = xv.at(n, c, y, xx) / denom;
      }
    }
  }
  const NodeId xid = x.id;
  Tape::BackFn back = [xid, eps](const Tensor4& gout, Tape::BackCtx& ctx) {
    const Tensor4& xv = ctx.value(xid);
    const Shape4& s = xv.shape();
    Tensor4 gx(s);
    for (int n = 0; n < s.n; ++n) {
      for (int y = 0; y < s.h; ++y) {
        for (int xx = 0; xx < s.w; ++xx) {
          double sq = 0.0, dot = 0.0;
          for (int c = 0; c < s.c; ++c) {
            sq += xv.at(n, c, y, xx) * xv.at(n, c, y, xx);
            dot += gout.at(n, c, y, xx) * xv.at(n, c, y, xx);
          }
          const double r = std::sqrt(sq);
          const double denom = r + eps;
          for (int c = 0; c < s.c; ++c) {
            double g = gout.at(n, c, y, xx) / denom;
            if (r > 0.0) g -= xv.at(n, c, y, xx) * dot / (r * denom * denom);
            gx.at(n, c, y, xx) = g;
          }
        }
      }
    }
    ctx.add(xid, gx);
  };
  return t.emplace(std::move(out), {xid}, std::move(back));
}

Var constant_like(Var x, double fill) {
  Tape& t = *x.tape;
  return t.constant(Tensor4(t.value(x).shape(), fill));
}

Var one_minus(Var a) { return sub(constant_like(a, 1.0), a); }

}  // namespace dsic
