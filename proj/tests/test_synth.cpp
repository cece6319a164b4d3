#include <cmath>

#include "doctest.h"
#include "dsic/synth.hpp"

using namespace dsic;

TEST_CASE("radius bins map to pyramid levels") {
  CHECK(level_for_radius(2.0) == 2);
  CHECK(level_for_radius(3.999) == 2);
  CHECK(level_for_radius(4.0) == 3);
  CHECK(level_for_radius(7.5) == 3);
  CHECK(level_for_radius(10.0) == 4);
  CHECK(level_for_radius(16.0) == 5);
  CHECK(level_for_radius(31.9) == 5);
}

TEST_CASE("generation is deterministic per seed") {
  BlobSpec spec;
  SynthSample a = generate_sample(42, spec);
  SynthSample b = generate_sample(42, spec);
  CHECK(a.image.max_abs_diff(b.image) == 0.0);
  REQUIRE(a.blobs.size() == b.blobs.size());
  for (std::size_t i = 0; i < a.blobs.size(); ++i) {
    CHECK(a.blobs[i].cx == b.blobs[i].cx);
    CHECK(a.blobs[i].cy == b.blobs[i].cy);
    CHECK(a.blobs[i].radius == b.blobs[i].radius);
  }
  SynthSample c = generate_sample(43, spec);
  CHECK(a.image.max_abs_diff(c.image) > 0.0);
}

TEST_CASE("a radius-10 blob writes only the level-4 heatmap") {
  BlobSpec spec{1, 1, 10.0, 10.0};
  SynthSample s = generate_sample(5, spec);
  REQUIRE(s.blobs.size() == 1);
  CHECK(s.blobs[0].level == 4);
  auto max_of = [&](int k) {
    double m = 0.0;
    const Tensor4& t = s.targets[static_cast<std::size_t>(k)];
    for (long long i = 0; i < t.size(); ++i) m = std::max(m, t[static_cast<std::size_t>(i)]);
    return m;
  };
  CHECK(max_of(0) == 0.0);
  CHECK(max_of(1) == 0.0);
  CHECK(max_of(2) == 1.0);
  CHECK(max_of(3) == 0.0);
}

TEST_CASE("rendered target peak at the blob center is exactly one") {
  BlobSpec spec;
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 9ull}) {
    SynthSample s = generate_sample(seed, spec);
    for (const Blob& b : s.blobs) {
      const int stride = 1 << b.level;
      const int cx = static_cast<int>(b.cx / stride - 0.5);
      const int cy = static_cast<int>(b.cy / stride - 0.5);
      const double peak = s.targets[static_cast<std::size_t>(b.level - 2)].at(0, 0, cy, cx);
      CHECK(std::abs(peak - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("circle overlap fraction: disjoint, contained, and the d = r oracle") {
  CHECK(circle_overlap_fraction(1.0, 1.0, 2.0) == 0.0);
  CHECK(circle_overlap_fraction(1.0, 1.0, 2.5) == 0.0);
  CHECK(circle_overlap_fraction(1.0, 3.0, 1.0) == 1.0);
  // equal circles at center distance r: lens = r^2 (2 pi / 3 - sqrt(3) / 2)
  const double want = (2.0 * M_PI / 3.0 - std::sqrt(3.0) / 2.0) / M_PI;
  CHECK(circle_overlap_fraction(2.0, 2.0, 2.0) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("placement constraints hold over many seeds") {
  BlobSpec spec;
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    SynthSample s = generate_sample(seed, spec);
    CHECK(s.image.all_finite());
    for (const Blob& b : s.blobs) {
      CHECK(b.radius >= 2.0);
      CHECK(b.radius < 32.0);
      CHECK(b.level == level_for_radius(b.radius));
    }
    for (std::size_t i = 0; i < s.blobs.size(); ++i) {
      for (std::size_t j = i + 1; j < s.blobs.size(); ++j) {
        const Blob& a = s.blobs[i];
        const Blob& b = s.blobs[j];
        const double d = std::hypot(a.cx - b.cx, a.cy - b.cy);
        CHECK(circle_overlap_fraction(a.radius, b.radius, d) <= 0.5);
        if (a.level == b.level) {
          CHECK(d >= 2.0 * (1 << a.level));
        }
      }
    }
  }
}
