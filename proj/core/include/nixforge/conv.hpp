#pragma once

#include "nixforge/tensor.hpp"

namespace nixforge {

// One convolution layer. Weight layouts:
//   conv1d / pointwise stage:  [out_channels, in_channels, kernel_size]
//   depthwise stage:           [in_channels, 1, kernel_size]
//   transposed_conv1d:         [in_channels, out_channels, kernel_size]
// Biases are rank-1 [out_channels] (depthwise stage: [in_channels]) and may
// be empty.
struct Conv1dSpec {
    int in_channels = 0;
    int out_channels = 0;
    int kernel_size = 1;
    int stride = 1;
    int dilation = 1;
    int padding = 0;
    bool separable = false;

    Tensor weight;
    Tensor bias;
    Tensor pointwise_weight;
    Tensor pointwise_bias;
};

// floor((T + 2p - d(K-1) - 1)/s) + 1
int conv1d_output_length(int t_in, const Conv1dSpec& spec);
// (T - 1)s - 2p + d(K-1) + 1
int transposed_conv1d_output_length(int t_in, const Conv1dSpec& spec);

// Zero padding that preserves time length for stride 1 and odd K: d(K-1)/2.
int same_padding(int kernel_size, int dilation);

// Cross-correlation over [batch, channels, time]. Accumulates in double per
// output cell with a fixed channel-major (in-channel outer, tap inner)
// summation order; cells may be computed in parallel without changing
// results.
Tensor conv1d(const Tensor& input, const Conv1dSpec& spec);

// Per-channel convolution, weight [C, 1, K].
Tensor depthwise_conv1d(const Tensor& input, const Conv1dSpec& spec);

// Depthwise stage followed by a pointwise 1x1 stage. Bit-equal to running
// the two stages through the kernels above.
Tensor depthwise_separable_conv1d(const Tensor& input, const Conv1dSpec& spec);

// Adjoint of conv1d: scatter-add of input frames through the kernel.
Tensor transposed_conv1d(const Tensor& input, const Conv1dSpec& spec);

} // namespace nixforge
