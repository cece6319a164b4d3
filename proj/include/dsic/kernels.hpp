#pragma once

#include <vector>

#include "dsic/tensor.hpp"

namespace dsic::kernels {

// Production compute kernels. Hot loops are OpenMP-parallel; every loop is
// written gather-style (one writer per output element, fixed inner summation
// order) so results are bit-identical for any thread count. The serial
// counterparts in dsic::reference are kept as test oracles and benchmark
// baselines.

// Cross-correlation with bias. weight: (out_c, in_c, kh, kw), bias: (1, out_c, 1, 1)
// or empty. Preconditions are checked by the autodiff wrapper in nn.hpp.
Tensor4 conv2d_forward(const Tensor4& x, const Tensor4& weight, const Tensor4& bias,
                       int stride, int padding);
Tensor4 conv2d_grad_input(const Tensor4& gout, const Tensor4& weight, Shape4 x_shape,
                          int stride, int padding);
Tensor4 conv2d_grad_weight(const Tensor4& gout, const Tensor4& x, Shape4 w_shape,
                           int stride, int padding);
Tensor4 conv2d_grad_bias(const Tensor4& gout);

// One x2 bilinear stage, align-corners=false (sample centers at (i+0.5)/2 - 0.5),
// edge-clamped. Larger factors are compositions of this stage.
Tensor4 upsample2_forward(const Tensor4& x);
Tensor4 upsample2_grad_input(const Tensor4& gout, Shape4 x_shape);

Tensor4 global_avg_forward(const Tensor4& x);
Tensor4 global_avg_grad_input(const Tensor4& gout, Shape4 x_shape);
// argmax: first maximal spatial index in row-major order, one per (n, c)
Tensor4 global_max_forward(const Tensor4& x, std::vector<int>& argmax);
Tensor4 global_max_grad_input(const Tensor4& gout, const std::vector<int>& argmax,
                              Shape4 x_shape);

}  // namespace dsic::kernels
