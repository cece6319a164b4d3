#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dsic/tensor.hpp"

namespace dsic {

// Synthetic multi-scale task: Gaussian blobs rendered into a single-channel
// image, with per-level target heatmaps keyed to blob radius. The level
// binning is the scale stressor the connector has to resolve.

struct Blob {
  double cx = 0.0, cy = 0.0;  // image pixels
  double radius = 0.0;        // image pixels
  int level = 0;              // 2..5 by radius bin
};

struct BlobSpec {
  int min_count = 1;
  int max_count = 4;
  double radius_min = 2.0;
  double radius_max = 32.0;  // exclusive
};

struct SynthSample {
  Tensor4 image;                    // (1, 1, size, size)
  std::array<Tensor4, 4> targets;   // (1, 1, size/2^k, size/2^k), k = 2..5
  std::vector<Blob> blobs;
  std::uint64_t seed = 0;
};

// radius bins: [2,4) -> level 2, [4,8) -> 3, [8,16) -> 4, [16,32) -> 5
int level_for_radius(double radius);

// Deterministic per seed. Radii are log-uniform over the spec's range; blob
// centers snap to cell centers of the assigned level so the rendered target
// peak is exactly 1. Placements are rejection-sampled (no pair overlaps by
// more than half the smaller area, same-level centers at least two cells
// apart); after bounded retries the sample simply carries fewer blobs.
SynthSample generate_sample(std::uint64_t seed, const BlobSpec& spec, int image_size = 64);

// fraction of the smaller circle's area covered by the intersection
double circle_overlap_fraction(double r1, double r2, double center_distance);

}  // namespace dsic
