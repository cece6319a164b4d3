#pragma once

#include "dsic/tensor.hpp"

namespace dsic::reference {

// Serial reference implementations. Deliberately naive (straight loop nests,
// no parallelism, no fault hooks) so they can oracle the production kernels
// and anchor the kernel benchmark.

// Direct 6-loop cross-correlation.
Tensor4 conv2d(const Tensor4& x, const Tensor4& weight, const Tensor4& bias,
               int stride, int padding);

// One x2 bilinear stage, align-corners=false, edge-clamped.
Tensor4 upsample2(const Tensor4& x);

Tensor4 global_avg(const Tensor4& x);
Tensor4 global_max(const Tensor4& x);

}  // namespace dsic::reference
