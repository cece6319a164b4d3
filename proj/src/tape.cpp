#include "dsic/tape.hpp"

namespace dsic {

const Tensor4& GradStore::at(NodeId id) const {
  if (!has(id)) throw std::out_of_range("GradStore: no gradient for node " + std::to_string(id));
  return grads_[static_cast<std::size_t>(id)];
}

Tensor4 GradStore::get_or_zero(NodeId id, Shape4 shape) const {
  if (has(id)) return grads_[static_cast<std::size_t>(id)];
  return Tensor4(shape);
}

void GradStore::accumulate(NodeId id, const Tensor4& contribution) {
  auto idx = static_cast<std::size_t>(id);
  if (!has_[idx]) {
    grads_[idx] = contribution;
    has_[idx] = 1;
    return;
  }
  Tensor4& g = grads_[idx];
  if (g.shape() != contribution.shape()) {
    throw ShapeMismatch("gradient accumulation: " + to_string(g.shape()) + " vs " +
                        to_string(contribution.shape()));
  }
  for (long long i = 0; i < g.size(); ++i) g[static_cast<std::size_t>(i)] += contribution[static_cast<std::size_t>(i)];
}

const Tensor4& Tape::BackCtx::value(NodeId id) const { return tape.value(id); }

void Tape::BackCtx::add(NodeId parent, const Tensor4& grad) {
  if (!tape.needs_grad(parent)) return;
  if (grad.shape() != tape.value(parent).shape()) {
    throw ShapeMismatch("gradient shape " + to_string(grad.shape()) + " does not match node " +
                        to_string(tape.value(parent).shape()));
  }
  grads.accumulate(parent, grad);
}

Var Tape::leaf(Tensor4 value, bool requires_grad) {
  Node node;
  node.value = std::move(value);
  node.needs_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<NodeId>(nodes_.size() - 1)};
}

Var Tape::emplace(Tensor4 value, std::vector<NodeId> parents, BackFn back) {
  Node node;
  node.value = std::move(value);
  node.needs_grad = false;
  for (NodeId p : parents) {
    if (p < 0 || p >= static_cast<NodeId>(nodes_.size())) {
      throw std::out_of_range("Tape::emplace: parent id out of range");
    }
    node.needs_grad = node.needs_grad || nodes_[static_cast<std::size_t>(p)].needs_grad;
  }
  node.parents = std::move(parents);
  node.back = std::move(back);
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<NodeId>(nodes_.size() - 1)};
}

GradStore Tape::backward(Var loss) const {
  if (loss.tape != this) throw std::invalid_argument("backward: loss from another tape");
  const Tensor4& lv = value(loss.id);
  if (lv.shape() != Shape4{1, 1, 1, 1}) {
    throw NonScalarLoss("backward: loss shape " + to_string(lv.shape()));
  }
  GradStore grads(nodes_.size());
  grads.accumulate(loss.id, Tensor4::scalar(1.0));
  BackCtx ctx{*this, grads};
  for (NodeId id = loss.id; id >= 0; --id) {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (!node.needs_grad || !node.back || !grads.has(id)) continue;
    node.back(grads.at(id), ctx);
  }
  return grads;
}

}  // namespace dsic
