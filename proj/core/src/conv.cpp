#include "nixforge/conv.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "nixforge/error.hpp"
#include "nixforge/runtime.hpp"

namespace nixforge {

int conv1d_output_length(int t_in, const Conv1dSpec& spec) {
    int span = spec.dilation * (spec.kernel_size - 1) + 1;
    int usable = t_in + 2 * spec.padding - span;
    if (usable < 0) return 0;
    return usable / spec.stride + 1;
}

int transposed_conv1d_output_length(int t_in, const Conv1dSpec& spec) {
    return (t_in - 1) * spec.stride - 2 * spec.padding +
           spec.dilation * (spec.kernel_size - 1) + 1;
}

int same_padding(int kernel_size, int dilation) {
    if (kernel_size % 2 == 0)
        throw ConfigError("same padding requires odd kernel size, got " +
                          std::to_string(kernel_size));
    return dilation * (kernel_size - 1) / 2;
}

namespace {

void check_conv_input(const Tensor& input, const Conv1dSpec& spec,
                      const char* what) {
    require_rank(input, 3, what);
    if (input.dim(1) != spec.in_channels)
        throw ShapeError(std::string(what) + ": input shape " + input.shape_str() +
                         " does not carry " + std::to_string(spec.in_channels) +
                         " channels expected by weight " + spec.weight.shape_str());
    if (spec.stride < 1 || spec.dilation < 1 || spec.padding < 0)
        throw ConfigError(std::string(what) + ": bad stride/dilation/padding");
}

void check_bias(const Tensor& bias, int channels, const char* what) {
    if (bias.empty()) return;
    if (bias.rank() != 1 || bias.dim(0) != channels)
        throw ShapeError(std::string(what) + ": bias shape " + bias.shape_str() +
                         " vs expected [" + std::to_string(channels) + "]");
}

// Output cells are produced in tiles along the time axis so the double
// accumulator stays in L1 and the input tile stays in L2 across the
// out-channel sweep. Per output cell the summation order is fixed:
// in-channel outer, tap inner. Tiles partition independent cells, so the
// tiling (and any thread partitioning over tiles) never changes results.
constexpr int kTimeTile = 2048;

// 1x1 stride-1 kernel (the pointwise stage): a plain channel-mixing GEMM.
// In-channels are consumed in groups of four so the accumulator round-trip
// amortizes over four products; the per-cell order stays in-channel
// ascending.
void conv_tile_1x1(const float* x, const float* w, int c_in, int t_in,
                   double* acc, int t0, int t1) {
    int len = t1 - t0;
    int ic = 0;
    for (; ic + 4 <= c_in; ic += 4) {
        const float* x0 = x + static_cast<size_t>(ic) * t_in + t0;
        const float* x1 = x0 + t_in;
        const float* x2 = x1 + t_in;
        const float* x3 = x2 + t_in;
        double w0 = w[ic], w1 = w[ic + 1], w2 = w[ic + 2], w3 = w[ic + 3];
        for (int t = 0; t < len; ++t)
            acc[t] += w0 * x0[t] + w1 * x1[t] + w2 * x2[t] + w3 * x3[t];
    }
    for (; ic < c_in; ++ic) {
        const float* xc = x + static_cast<size_t>(ic) * t_in + t0;
        double wv = w[ic];
        for (int t = 0; t < len; ++t) acc[t] += wv * xc[t];
    }
}

// Two out-channel rows at once: the input tile loads are shared between both
// accumulators. Each cell still sums in the same in-channel-ascending order
// as the single-row kernel.
void conv_tile_1x1_x2(const float* x, const float* wa, const float* wb,
                      int c_in, int t_in, double* acc_a, double* acc_b, int t0,
                      int t1) {
    int len = t1 - t0;
    int ic = 0;
    for (; ic + 4 <= c_in; ic += 4) {
        const float* x0 = x + static_cast<size_t>(ic) * t_in + t0;
        const float* x1 = x0 + t_in;
        const float* x2 = x1 + t_in;
        const float* x3 = x2 + t_in;
        double a0 = wa[ic], a1 = wa[ic + 1], a2 = wa[ic + 2], a3 = wa[ic + 3];
        double b0 = wb[ic], b1 = wb[ic + 1], b2 = wb[ic + 2], b3 = wb[ic + 3];
        for (int t = 0; t < len; ++t) {
            double v0 = x0[t], v1 = x1[t], v2 = x2[t], v3 = x3[t];
            acc_a[t] += a0 * v0 + a1 * v1 + a2 * v2 + a3 * v3;
            acc_b[t] += b0 * v0 + b1 * v1 + b2 * v2 + b3 * v3;
        }
    }
    for (; ic < c_in; ++ic) {
        const float* xc = x + static_cast<size_t>(ic) * t_in + t0;
        double va = wa[ic], vb = wb[ic];
        for (int t = 0; t < len; ++t) {
            double v = xc[t];
            acc_a[t] += va * v;
            acc_b[t] += vb * v;
        }
    }
}

// Edge cells where some taps fall outside the input: per-tap bounded loops.
// A fixed cell still collects its taps in ascending k order.
void conv_edge(const float* xc, const float* wc, int t_in, int k_size,
               int stride, int dilation, int padding, double* acc, int lo_t,
               int hi_t, int t0) {
    for (int k = 0; k < k_size; ++k) {
        int offset = k * dilation - padding;
        int lo = offset < 0 ? (-offset + stride - 1) / stride : 0;
        int hi_excl = t_in - offset;
        int hi = hi_excl > 0 ? (hi_excl - 1) / stride + 1 : 0;
        if (lo < lo_t) lo = lo_t;
        if (hi > hi_t) hi = hi_t;
        double wv = wc[k];
        const float* src = xc + offset;
        double* dst = acc - t0;
        if (stride == 1) {
            for (int t = lo; t < hi; ++t) dst[t] += wv * src[t];
        } else {
            for (int t = lo; t < hi; ++t)
                dst[t] += wv * src[static_cast<size_t>(t) * stride];
        }
    }
}

// Accumulates one out-channel over [t0, t1). acc[0] corresponds to t0.
// Per output cell the summation order is always in-channel outer, tap
// ascending inner, independent of which code path produced it.
void conv_tile(const float* x, const float* w, int c_in, int t_in, int k_size,
               int stride, int dilation, int padding, double* acc, int t0,
               int t1, int t_out) {
    if (k_size == 1 && stride == 1 && padding == 0) {
        conv_tile_1x1(x, w, c_in, t_in, acc, t0, t1);
        return;
    }
    for (int ic = 0; ic < c_in; ++ic) {
        const float* xc = x + static_cast<size_t>(ic) * t_in;
        const float* wc = w + static_cast<size_t>(ic) * k_size;
        conv_edge(xc, wc, t_in, k_size, stride, dilation, padding, acc, t0, t1,
                  t0);
    }
}

} // namespace

Tensor conv1d(const Tensor& input, const Conv1dSpec& spec) {
    check_conv_input(input, spec, "conv1d");
    if (spec.weight.rank() != 3 || spec.weight.dim(0) != spec.out_channels ||
        spec.weight.dim(1) != spec.in_channels ||
        spec.weight.dim(2) != spec.kernel_size)
        throw ShapeError("conv1d: weight shape " + spec.weight.shape_str() +
                         " vs expected " +
                         shape_to_string({spec.out_channels, spec.in_channels,
                                          spec.kernel_size}));
    check_bias(spec.bias, spec.out_channels, "conv1d");

    int batch = input.dim(0);
    int t_in = input.dim(2);
    int t_out = conv1d_output_length(t_in, spec);
    if (t_out <= 0)
        throw ShapeError("conv1d: input shape " + input.shape_str() +
                         " too short for kernel span " +
                         std::to_string(spec.dilation * (spec.kernel_size - 1) + 1) +
                         " with padding " + std::to_string(spec.padding));

    Tensor out({batch, spec.out_channels, t_out});
    bool pointwise = spec.kernel_size == 1 && spec.stride == 1 &&
                     spec.padding == 0;
    int n_tiles = (t_out + kTimeTile - 1) / kTimeTile;
    parallel_for(batch * n_tiles, [&](int begin, int end) {
        std::vector<double> acc_a(kTimeTile), acc_b(kTimeTile);
        for (int unit = begin; unit < end; ++unit) {
            int b = unit / n_tiles;
            int t0 = (unit % n_tiles) * kTimeTile;
            int t1 = std::min(t_out, t0 + kTimeTile);
            int len = t1 - t0;
            const float* x = input.data() +
                             static_cast<size_t>(b) * spec.in_channels * t_in;
            auto weight_row = [&](int oc) {
                return spec.weight.data() +
                       static_cast<size_t>(oc) * spec.in_channels *
                           spec.kernel_size;
            };
            auto store = [&](int oc, const double* acc) {
                float* dst = out.data() +
                             (static_cast<size_t>(b) * spec.out_channels + oc) *
                                 t_out + t0;
                for (int t = 0; t < len; ++t) dst[t] = static_cast<float>(acc[t]);
            };
            int oc = 0;
            if (pointwise) {
                for (; oc + 2 <= spec.out_channels; oc += 2) {
                    std::fill(acc_a.begin(), acc_a.begin() + len,
                              spec.bias.empty() ? 0.0 : spec.bias(oc));
                    std::fill(acc_b.begin(), acc_b.begin() + len,
                              spec.bias.empty() ? 0.0 : spec.bias(oc + 1));
                    conv_tile_1x1_x2(x, weight_row(oc), weight_row(oc + 1),
                                     spec.in_channels, t_in, acc_a.data(),
                                     acc_b.data(), t0, t1);
                    store(oc, acc_a.data());
                    store(oc + 1, acc_b.data());
                }
            }
            for (; oc < spec.out_channels; ++oc) {
                std::fill(acc_a.begin(), acc_a.begin() + len,
                          spec.bias.empty() ? 0.0 : spec.bias(oc));
                conv_tile(x, weight_row(oc), spec.in_channels, t_in,
                          spec.kernel_size, spec.stride, spec.dilation,
                          spec.padding, acc_a.data(), t0, t1, t_out);
                store(oc, acc_a.data());
            }
        }
    });
    return out;
}

Tensor depthwise_conv1d(const Tensor& input, const Conv1dSpec& spec) {
    check_conv_input(input, spec, "depthwise_conv1d");
    if (spec.weight.rank() != 3 || spec.weight.dim(0) != spec.in_channels ||
        spec.weight.dim(1) != 1 || spec.weight.dim(2) != spec.kernel_size)
        throw ShapeError("depthwise_conv1d: weight shape " +
                         spec.weight.shape_str() + " vs expected " +
                         shape_to_string({spec.in_channels, 1, spec.kernel_size}));
    check_bias(spec.bias, spec.in_channels, "depthwise_conv1d");

    int batch = input.dim(0);
    int c = spec.in_channels;
    int t_in = input.dim(2);
    int t_out = conv1d_output_length(t_in, spec);
    if (t_out <= 0)
        throw ShapeError("depthwise_conv1d: input shape " + input.shape_str() +
                         " too short for kernel");

    Tensor out({batch, c, t_out});
    int rows = batch * c;
    parallel_for(rows, [&](int begin, int end) {
        std::vector<double> acc(static_cast<size_t>(t_out));
        for (int row = begin; row < end; ++row) {
            int b = row / c;
            int ch = row % c;
            double b0 = spec.bias.empty() ? 0.0 : spec.bias(ch);
            std::fill(acc.begin(), acc.end(), b0);
            const float* x = input.data() +
                             (static_cast<size_t>(b) * c + ch) * t_in;
            const float* w = spec.weight.data() +
                             static_cast<size_t>(ch) * spec.kernel_size;
            conv_tile(x, w, 1, t_in, spec.kernel_size, spec.stride,
                      spec.dilation, spec.padding, acc.data(), 0, t_out, t_out);
            float* dst = out.data() + (static_cast<size_t>(b) * c + ch) * t_out;
            for (int t = 0; t < t_out; ++t) dst[t] = static_cast<float>(acc[t]);
        }
    });
    return out;
}

Tensor depthwise_separable_conv1d(const Tensor& input, const Conv1dSpec& spec) {
    if (!spec.separable)
        throw ConfigError("depthwise_separable_conv1d: spec.separable is false");

    Conv1dSpec depthwise;
    depthwise.in_channels = spec.in_channels;
    depthwise.out_channels = spec.in_channels;
    depthwise.kernel_size = spec.kernel_size;
    depthwise.stride = spec.stride;
    depthwise.dilation = spec.dilation;
    depthwise.padding = spec.padding;
    depthwise.weight = spec.weight;
    depthwise.bias = spec.bias;
    Tensor mid = depthwise_conv1d(input, depthwise);

    Conv1dSpec pointwise;
    pointwise.in_channels = spec.in_channels;
    pointwise.out_channels = spec.out_channels;
    pointwise.kernel_size = 1;
    pointwise.weight = spec.pointwise_weight;
    pointwise.bias = spec.pointwise_bias;
    return conv1d(mid, pointwise);
}

Tensor transposed_conv1d(const Tensor& input, const Conv1dSpec& spec) {
    check_conv_input(input, spec, "transposed_conv1d");
    if (spec.weight.rank() != 3 || spec.weight.dim(0) != spec.in_channels ||
        spec.weight.dim(1) != spec.out_channels ||
        spec.weight.dim(2) != spec.kernel_size)
        throw ShapeError("transposed_conv1d: weight shape " +
                         spec.weight.shape_str() + " vs expected " +
                         shape_to_string({spec.in_channels, spec.out_channels,
                                          spec.kernel_size}));
    check_bias(spec.bias, spec.out_channels, "transposed_conv1d");

    int batch = input.dim(0);
    int t_in = input.dim(2);
    int t_out = transposed_conv1d_output_length(t_in, spec);
    if (t_out <= 0)
        throw ShapeError("transposed_conv1d: input shape " + input.shape_str() +
                         " yields non-positive output length");
    int k_span = spec.dilation * (spec.kernel_size - 1);

    Tensor out({batch, spec.out_channels, t_out});
    int rows = batch * spec.out_channels;

    if (spec.dilation == 1) {
        // Phase decomposition: output cells t = q*stride + r form, for each
        // phase r, a stride-1 correlation of the input with the sub-kernel
        // {k : k mod stride == (r + padding) mod stride}. Each phase runs
        // over a contiguous accumulator. Per output cell the order is
        // in-channel outer, sub-kernel tap ascending inner.
        int s = spec.stride;
        int q_len = (t_out - 1) / s + 1;
        parallel_for(rows, [&](int begin, int end) {
            std::vector<double> acc(static_cast<size_t>(q_len));
            for (int row = begin; row < end; ++row) {
                int b = row / spec.out_channels;
                int oc = row % spec.out_channels;
                double b0 = spec.bias.empty() ? 0.0 : spec.bias(oc);
                float* dst = out.data() +
                             (static_cast<size_t>(b) * spec.out_channels + oc) *
                                 t_out;
                for (int r = 0; r < s && r < t_out; ++r) {
                    int n_q = (t_out - 1 - r) / s + 1;
                    std::fill(acc.begin(), acc.begin() + n_q, b0);
                    for (int ic = 0; ic < spec.in_channels; ++ic) {
                        const float* x =
                            input.data() +
                            (static_cast<size_t>(b) * spec.in_channels + ic) *
                                t_in;
                        const float* w =
                            spec.weight.data() +
                            (static_cast<size_t>(ic) * spec.out_channels + oc) *
                                spec.kernel_size;
                        for (int k = (r + spec.padding) % s;
                             k < spec.kernel_size; k += s) {
                            // t = q*s + r = ti*s + k - padding
                            int off = (k - r - spec.padding) / s; // ti = q - off
                            double wv = w[k];
                            int lo = off > 0 ? off : 0;
                            int hi = t_in + off < n_q ? t_in + off : n_q;
                            const float* src = x - off;
                            for (int q = lo; q < hi; ++q)
                                acc[q] += wv * src[q];
                        }
                    }
                    for (int q = 0; q < n_q; ++q)
                        dst[static_cast<size_t>(q) * s + r] =
                            static_cast<float>(acc[q]);
                }
            }
        });
        return out;
    }

    // Dilated fallback: scatter-add of each input frame through the kernel.
    // Per output cell the order is in-channel outer, input-frame inner.
    parallel_for(rows, [&](int begin, int end) {
        std::vector<double> acc(static_cast<size_t>(t_out));
        for (int row = begin; row < end; ++row) {
            int b = row / spec.out_channels;
            int oc = row % spec.out_channels;
            double b0 = spec.bias.empty() ? 0.0 : spec.bias(oc);
            std::fill(acc.begin(), acc.end(), b0);
            for (int ic = 0; ic < spec.in_channels; ++ic) {
                const float* x = input.data() +
                                 (static_cast<size_t>(b) * spec.in_channels + ic) *
                                     t_in;
                const float* w = spec.weight.data() +
                                 (static_cast<size_t>(ic) * spec.out_channels + oc) *
                                     spec.kernel_size;
                for (int ti = 0; ti < t_in; ++ti) {
                    int base = ti * spec.stride - spec.padding;
                    double xv = x[ti];
                    double* dst = acc.data() + base;
                    if (base >= 0 && base + k_span < t_out) {
                        for (int k = 0; k < spec.kernel_size; ++k)
                            dst[static_cast<size_t>(k) * spec.dilation] +=
                                w[k] * xv;
                    } else {
                        for (int k = 0; k < spec.kernel_size; ++k) {
                            int pos = base + k * spec.dilation;
                            if (pos >= 0 && pos < t_out) acc[pos] += w[k] * xv;
                        }
                    }
                }
            }
            float* dst = out.data() + (static_cast<size_t>(b) * spec.out_channels +
                                       oc) * t_out;
            for (int t = 0; t < t_out; ++t) dst[t] = static_cast<float>(acc[t]);
        }
    });
    return out;
}

} // namespace nixforge
