#pragma once

#include <functional>
#include <vector>

#include "dsic/tensor.hpp"

namespace dsic {

class Tape;

using NodeId = int;

// Lightweight handle to a node on a tape. Cheap to copy; valid for the
// lifetime of the tape that produced it.
struct Var {
  Tape* tape = nullptr;
  NodeId id = -1;
  explicit operator bool() const { return tape != nullptr; }
};

// Gradients produced by Tape::backward, indexed by node id.
class GradStore {
 public:
  explicit GradStore(std::size_t n) : grads_(n), has_(n, 0) {}

  bool has(NodeId id) const { return has_[static_cast<std::size_t>(id)] != 0; }
  const Tensor4& at(NodeId id) const;
  const Tensor4& at(Var v) const { return at(v.id); }
  Tensor4 get_or_zero(NodeId id, Shape4 shape) const;

  void accumulate(NodeId id, const Tensor4& contribution);

 private:
  std::vector<Tensor4> grads_;
  std::vector<char> has_;
};

// Recording tape for reverse-mode differentiation. Nodes are appended in
// creation order, which is therefore a topological order of the graph.
// A tape and its tensors form a single-owner unit; cross-thread use means
// one tape per thread.
class Tape {
 public:
  struct BackCtx {
    const Tape& tape;
    GradStore& grads;

    const Tensor4& value(NodeId id) const;
    // Accumulates into a parent's gradient; no-op if the parent does not
    // participate in differentiation.
    void add(NodeId parent, const Tensor4& grad);
  };

  // Receives the upstream gradient of the node and pushes contributions to
  // its parents through ctx.add.
  using BackFn = std::function<void(const Tensor4& gout, BackCtx& ctx)>;

  Var leaf(Tensor4 value, bool requires_grad = false);
  Var constant(Tensor4 value) { return leaf(std::move(value), false); }
  Var emplace(Tensor4 value, std::vector<NodeId> parents, BackFn back);

  const Tensor4& value(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Tensor4& value(Var v) const { return value(v.id); }
  bool needs_grad(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
  bool needs_grad(Var v) const { return needs_grad(v.id); }
  std::size_t size() const { return nodes_.size(); }

  // Reverse sweep from a scalar-shaped loss node. Throws NonScalarLoss if the
  // loss is not (1,1,1,1). Gradients accumulate by summation across fan-out.
  GradStore backward(Var loss) const;

 private:
  struct Node {
    Tensor4 value;
    std::vector<NodeId> parents;
    BackFn back;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;
};

}  // namespace dsic
