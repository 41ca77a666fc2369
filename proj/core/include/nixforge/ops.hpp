#pragma once

#include "nixforge/tensor.hpp"

namespace nixforge {

// x * sigmoid(x)
Tensor silu(const Tensor& x);

Tensor leaky_relu(const Tensor& x, float slope);

Tensor tanh_op(const Tensor& x);

// Max-shifted softmax along the given axis.
Tensor softmax(const Tensor& x, int axis);

// Normalizes along the channel axis (rank 1: the whole vector; rank 2 [C,T]:
// axis 0; rank 3 [B,C,T]: axis 1), then applies per-channel gain and bias.
// Pass empty gain/bias for the identity affine.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-5);

// Sinusoidal table [length, dim]: PE[t,2i] = sin(t / 10000^(2i/dim)),
// PE[t,2i+1] = cos of the same argument. dim must be even.
Tensor positional_encoding(int length, int dim);

} // namespace nixforge
