#include "dsic/nn.hpp"

#include <memory>

#include "dsic/kernels.hpp"

namespace dsic {

Var conv2d(Var x, Var weight, Var bias, int stride, int padding) {
  Tape& t = *x.tape;
  const Tensor4& xv = t.value(x);
  const Tensor4& wv = t.value(weight);
  const Shape4& xs = xv.shape();
  const Shape4& ws = wv.shape();
  if (ws.h != ws.w || (ws.h != 1 && ws.h != 3)) {
    throw ShapeMismatch("conv2d: kernel must be 1x1 or 3x3, got " + to_string(ws));
  }
  if (xs.c != ws.c) {
    throw ShapeMismatch("conv2d: input channels " + std::to_string(xs.c) +
                        " vs kernel in_c " + std::to_string(ws.c));
  }
  if (stride < 1 || padding < 0) throw std::invalid_argument("conv2d: bad stride/padding");
  const int oh = (xs.h + 2 * padding - ws.h) / stride + 1;
  const int ow = (xs.w + 2 * padding - ws.w) / stride + 1;
  if (oh < 1 || ow < 1) {
    throw DegenerateOutput("conv2d: output dims " + std::to_string(oh) + "x" +
                           std::to_string(ow));
  }
  const bool has_bias = static_cast<bool>(bias);
  if (has_bias) {
    const Shape4& bs = t.value(bias).shape();
    if (bs != Shape4{1, ws.n, 1, 1}) {
      throw ShapeMismatch("conv2d: bias shape " + to_string(bs) + " for out_c " +
                          std::to_string(ws.n));
    }
  }

  Tensor4 out = kernels::conv2d_forward(xv, wv, has_bias ? t.value(bias) : Tensor4{},
                                        stride, padding);
  std::vector<NodeId> parents{x.id, weight.id};
  if (has_bias) parents.push_back(bias.id);
  const NodeId xid = x.id, wid = weight.id;
  const NodeId bid = has_bias ? bias.id : -1;
  Tape::BackFn back = [xid, wid, bid, stride, padding](const Tensor4& gout,
                                                       Tape::BackCtx& ctx) {
    const Tensor4& xv = ctx.value(xid);
    const Tensor4& wv = ctx.value(wid);
    ctx.add(xid, kernels::conv2d_grad_input(gout, wv, xv.shape(), stride, padding));
    ctx.add(wid, kernels::conv2d_grad_weight(gout, xv, wv.shape(), stride, padding));
    if (bid >= 0) ctx.add(bid, kernels::conv2d_grad_bias(gout));
  };
  return t.emplace(std::move(out), std::move(parents), std::move(back));
}

namespace {

Var upsample2(Var x) {
  Tape& t = *x.tape;
  Tensor4 out = kernels::upsample2_forward(t.value(x));
  const NodeId xid = x.id;
  Tape::BackFn back = [xid](const Tensor4& gout, Tape::BackCtx& ctx) {
    ctx.add(xid, kernels::upsample2_grad_input(gout, ctx.value(xid).shape()));
  };
  return t.emplace(std::move(out), {xid}, std::move(back));
}

}  // namespace

Var bilinear_upsample(Var x, int factor) {
  int stages;
  switch (factor) {
    case 2: stages = 1; break;
    case 4: stages = 2; break;
    case 8: stages = 3; break;
    default:
      throw InvalidFactor("bilinear_upsample: factor " + std::to_string(factor));
  }
  Var y = x;
  for (int s = 0; s < stages; ++s) y = upsample2(y);
  return y;
}

Var f_up(Var x, int t) {
  if (t < 1 || t > 3) throw InvalidFactor("f_up: t = " + std::to_string(t));
  return bilinear_upsample(x, 1 << t);
}

Var global_pool(PoolKind kind, Var x) {
  Tape& t = *x.tape;
  const Tensor4& xv = t.value(x);
  const NodeId xid = x.id;
  if (kind == PoolKind::Avg) {
    Tensor4 out = kernels::global_avg_forward(xv);
    Tape::BackFn back = [xid](const Tensor4& gout, Tape::BackCtx& ctx) {
      ctx.add(xid, kernels::global_avg_grad_input(gout, ctx.value(xid).shape()));
    };
    return t.emplace(std::move(out), {xid}, std::move(back));
  }
  auto argmax = std::make_shared<std::vector<int>>();
  Tensor4 out = kernels::global_max_forward(xv, *argmax);
  Tape::BackFn back = [xid, argmax](const Tensor4& gout, Tape::BackCtx& ctx) {
    ctx.add(xid, kernels::global_max_grad_input(gout, *argmax, ctx.value(xid).shape()));
  };
  return t.emplace(std::move(out), {xid}, std::move(back));
}

}  // namespace dsic
