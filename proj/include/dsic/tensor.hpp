#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dsic/error.hpp"
#include "dsic/rng.hpp"

namespace dsic {

struct Shape4 {
  int n = 0, c = 0, h = 0, w = 0;

  long long count() const {
    return static_cast<long long>(n) * c * h * w;
  }
  bool operator==(const Shape4&) const = default;
};

std::string to_string(const Shape4& s);

// Dense rank-4 array (batch, channel, height, width) of f64, row-major.
// The universal value type of the library.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Shape4 s, double fill = 0.0)
      : shape_(s), data_(static_cast<std::size_t>(s.count()), fill) {}
  Tensor4(int n, int c, int h, int w, double fill = 0.0)
      : Tensor4(Shape4{n, c, h, w}, fill) {}

  static Tensor4 from_values(Shape4 s, std::vector<double> values);
  static Tensor4 scalar(double v) { return from_values({1, 1, 1, 1}, {v}); }
  static Tensor4 filled_like(const Tensor4& t, double v) { return Tensor4(t.shape(), v); }
  static Tensor4 random_uniform(Shape4 s, Rng& rng, double lo, double hi);

  const Shape4& shape() const { return shape_; }
  long long size() const { return shape_.count(); }
  bool empty() const { return data_.empty(); }

  double& at(int n, int c, int y, int x) { return data_[index(n, c, y, x)]; }
  double at(int n, int c, int y, int x) const { return data_[index(n, c, y, x)]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::size_t index(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }

  bool all_finite() const;
  double max_abs_diff(const Tensor4& other) const;  // shapes must match

 private:
  Shape4 shape_{};
  std::vector<double> data_;
};

// Binary fixture format: four u32 little-endian shape fields, then the
// row-major f64 payload, little-endian.
void write_tensor(std::ostream& os, const Tensor4& t);
Tensor4 read_tensor(std::istream& is);

// CSV for human inspection: one row per (batch, channel) plane, values in
// row-major spatial order.
void write_tensor_csv(std::ostream& os, const Tensor4& t);

}  // namespace dsic
