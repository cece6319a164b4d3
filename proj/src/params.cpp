#include "dsic/params.hpp"

#include <cmath>
#include <fstream>

namespace dsic {

int ParamStore::add(std::string name, Tensor4 value) {
  entries_.push_back(Entry{std::move(name), std::move(value)});
  return static_cast<int>(entries_.size() - 1);
}

void ParamStore::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParseError("cannot open snapshot for writing: " + path);
  const std::uint32_t n = static_cast<std::uint32_t>(entries_.size());
  os.write(reinterpret_cast<const char*>(&n), 4);
  for (const Entry& e : entries_) {
    const std::uint32_t len = static_cast<std::uint32_t>(e.name.size());
    os.write(reinterpret_cast<const char*>(&len), 4);
    os.write(e.name.data(), len);
    write_tensor(os, e.value);
  }
}

void ParamStore::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open snapshot: " + path);
  std::uint32_t n = 0;
  is.read(reinterpret_cast<char*>(&n), 4);
  if (!is || n != entries_.size()) {
    throw ParseError("snapshot does not match model: expected " +
                     std::to_string(entries_.size()) + " parameters");
  }
  for (Entry& e : entries_) {
    std::uint32_t len = 0;
    is.read(reinterpret_cast<char*>(&len), 4);
    std::string name(len, '\0');
    is.read(name.data(), len);
    if (!is || name != e.name) throw ParseError("snapshot parameter mismatch at " + e.name);
    Tensor4 t = read_tensor(is);
    if (t.shape() != e.value.shape()) {
      throw ParseError("snapshot shape mismatch at " + e.name);
    }
    e.value = std::move(t);
  }
}

BoundParams::BoundParams(Tape& tape, const ParamStore& store, bool requires_grad) {
  vars_.reserve(static_cast<std::size_t>(store.count()));
  for (int i = 0; i < store.count(); ++i) {
    vars_.push_back(tape.leaf(store.value(i), requires_grad));
  }
}

Conv make_conv(ParamStore& store, const std::string& name, int out_c, int in_c, int k,
               int stride, int padding, Rng& rng, ConvInit init) {
  const double fan_in = static_cast<double>(in_c) * k * k;
  const double bound = init.weight_scale / std::sqrt(fan_in);
  Tensor4 w(out_c, in_c, k, k);
  for (long long i = 0; i < w.size(); ++i)
    w[static_cast<std::size_t>(i)] = init.weight_scale == 0.0 ? 0.0 : rng.uniform(-bound, bound);
  Conv conv;
  conv.weight = store.add(name + ".w", std::move(w));
  if (init.with_bias) conv.bias = store.add(name + ".b", Tensor4(1, out_c, 1, 1));
  conv.stride = stride;
  conv.padding = padding;
  return conv;
}

Conv make_identity_conv1x1(ParamStore& store, const std::string& name, int c) {
  Tensor4 w(c, c, 1, 1);
  for (int i = 0; i < c; ++i) w.at(i, i, 0, 0) = 1.0;
  Conv conv;
  conv.weight = store.add(name + ".w", std::move(w));
  conv.bias = store.add(name + ".b", Tensor4(1, c, 1, 1));
  conv.stride = 1;
  conv.padding = 0;
  return conv;
}

Var apply_conv(const Conv& conv, const BoundParams& p, Var x) {
  Var bias = conv.bias >= 0 ? p[conv.bias] : Var{};
  return conv2d(x, p[conv.weight], bias, conv.stride, conv.padding);
}

Var f_down(Var x, std::span<const Conv> steps, const BoundParams& p) {
  Var y = x;
  for (const Conv& step : steps) y = apply_conv(step, p, y);
  return y;
}

void write_conv(std::ostream& os, const ParamStore& store, const Conv& conv) {
  write_tensor(os, store.value(conv.weight));
  if (conv.bias >= 0) {
    write_tensor(os, store.value(conv.bias));
  } else {
    const Shape4 ws = store.value(conv.weight).shape();
    write_tensor(os, Tensor4(1, ws.n, 1, 1));
  }
  const std::uint32_t fields[2] = {static_cast<std::uint32_t>(conv.stride),
                                   static_cast<std::uint32_t>(conv.padding)};
  os.write(reinterpret_cast<const char*>(fields), 8);
}

}  // namespace dsic
