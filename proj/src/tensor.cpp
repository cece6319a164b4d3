#include "dsic/tensor.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

namespace dsic {

std::string to_string(const Shape4& s) {
  std::ostringstream os;
  os << "(" << s.n << "," << s.c << "," << s.h << "," << s.w << ")";
  return os.str();
}

Tensor4 Tensor4::from_values(Shape4 s, std::vector<double> values) {
  if (static_cast<long long>(values.size()) != s.count()) {
    throw ShapeMismatch("from_values: " + std::to_string(values.size()) +
                        " values for shape " + to_string(s));
  }
  Tensor4 t;
  t.shape_ = s;
  t.data_ = std::move(values);
  return t;
}

Tensor4 Tensor4::random_uniform(Shape4 s, Rng& rng, double lo, double hi) {
  Tensor4 t(s);
  for (long long i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

bool Tensor4::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Tensor4::max_abs_diff(const Tensor4& other) const {
  if (shape_ != other.shape_) {
    throw ShapeMismatch("max_abs_diff: " + to_string(shape_) + " vs " + to_string(other.shape_));
  }
  double m = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    m = std::max(m, std::abs(data_[i] - other.data_[i]));
  }
  return m;
}

namespace {

void put_u32le(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw ParseError("tensor blob: truncated shape header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_tensor(std::ostream& os, const Tensor4& t) {
  const Shape4& s = t.shape();
  put_u32le(os, static_cast<std::uint32_t>(s.n));
  put_u32le(os, static_cast<std::uint32_t>(s.c));
  put_u32le(os, static_cast<std::uint32_t>(s.h));
  put_u32le(os, static_cast<std::uint32_t>(s.w));
  for (long long i = 0; i < t.size(); ++i) {
    double v = t[static_cast<std::size_t>(i)];
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>((bits >> (8 * k)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
  }
}

Tensor4 read_tensor(std::istream& is) {
  Shape4 s;
  s.n = static_cast<int>(get_u32le(is));
  s.c = static_cast<int>(get_u32le(is));
  s.h = static_cast<int>(get_u32le(is));
  s.w = static_cast<int>(get_u32le(is));
  Tensor4 t(s);
  for (long long i = 0; i < t.size(); ++i) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw ParseError("tensor blob: truncated payload");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    double v;
    std::memcpy(&v, &bits, 8);
    t[static_cast<std::size_t>(i)] = v;
  }
  return t;
}

void write_tensor_csv(std::ostream& os, const Tensor4& t) {
  const Shape4& s = t.shape();
  char buf[32];
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      bool first = true;
      for (int y = 0; y < s.h; ++y) {
        for (int x = 0; x < s.w; ++x) {
          std::snprintf(buf, sizeof(buf), "%.17g", t.at(n, c, y, x));
          if (!first) os << ',';
          os << buf;
          first = false;
        }
      }
      os << '\n';
    }
  }
}

}  // namespace dsic
