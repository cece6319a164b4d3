#pragma once

#include <span>
#include <string>
#include <vector>

#include "dsic/nn.hpp"
#include "dsic/rng.hpp"

namespace dsic {

// Owns every trainable tensor of a model by index. One store per model;
// fresh tapes bind the current values as leaves each step, so parameter
// indices map to stable node ids within one tape.
class ParamStore {
 public:
  int add(std::string name, Tensor4 value);

  int count() const { return static_cast<int>(entries_.size()); }
  const std::string& name(int idx) const { return entries_[static_cast<std::size_t>(idx)].name; }
  Tensor4& value(int idx) { return entries_[static_cast<std::size_t>(idx)].value; }
  const Tensor4& value(int idx) const { return entries_[static_cast<std::size_t>(idx)].value; }

  void save(const std::string& path) const;
  void load(const std::string& path);  // shapes and names must match

 private:
  struct Entry {
    std::string name;
    Tensor4 value;
  };
  std::vector<Entry> entries_;
};

// Per-tape view of the store: leaf Vars in index order.
class BoundParams {
 public:
  BoundParams() = default;
  BoundParams(Tape& tape, const ParamStore& store, bool requires_grad);
  explicit BoundParams(std::vector<Var> vars) : vars_(std::move(vars)) {}
  Var operator[](int idx) const { return vars_[static_cast<std::size_t>(idx)]; }

 private:
  std::vector<Var> vars_;
};

// Handle to one convolution layer's parameters inside a store.
struct Conv {
  int weight = -1;
  int bias = -1;  // -1: no bias
  int stride = 1;
  int padding = 0;
  bool valid() const { return weight >= 0; }
};

struct ConvInit {
  // weight scale multiplier on top of 1/sqrt(fan_in); 0 zeroes the weights
  // (used by the gate-head zero-init hook)
  double weight_scale = 1.0;
  bool with_bias = true;
};

Conv make_conv(ParamStore& store, const std::string& name, int out_c, int in_c, int k,
               int stride, int padding, Rng& rng, ConvInit init = {});

// 1x1 channel map that reproduces its input exactly (identity weights); used
// by tests and topology-forcing oracles.
Conv make_identity_conv1x1(ParamStore& store, const std::string& name, int c);

Var apply_conv(const Conv& conv, const BoundParams& p, Var x);

// t successive stride-2 3x3 channel-preserving convolutions (one parameter
// set per step); spatial dims shrink by 2^t.
Var f_down(Var x, std::span<const Conv> steps, const BoundParams& p);

// Fixture format for one conv layer: weights blob + bias blob + two u32
// fields (stride, padding).
void write_conv(std::ostream& os, const ParamStore& store, const Conv& conv);

}  // namespace dsic
