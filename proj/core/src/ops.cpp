#include "nixforge/ops.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "nixforge/error.hpp"

namespace nixforge {

Tensor silu(const Tensor& x) {
    Tensor out = x;
    for (auto& v : out.values()) {
        double d = v;
        v = static_cast<float>(d / (1.0 + std::exp(-d)));
    }
    return out;
}

Tensor leaky_relu(const Tensor& x, float slope) {
    Tensor out = x;
    for (auto& v : out.values())
        if (v < 0.0f) v *= slope;
    return out;
}

Tensor tanh_op(const Tensor& x) {
    Tensor out = x;
    for (auto& v : out.values()) v = static_cast<float>(std::tanh(v));
    return out;
}

namespace {

// Decomposes the tensor into lines along `axis`: `outer` blocks, each with
// `lines` lines of `len` entries spaced `stride` apart.
struct AxisView {
    int outer, lines, len, stride;
};

AxisView axis_view(const Tensor& x, int axis) {
    if (axis < 0 || axis >= x.rank())
        throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                         x.shape_str());
    int before = 1, after = 1;
    for (int i = 0; i < axis; ++i) before *= x.dim(i);
    for (int i = axis + 1; i < x.rank(); ++i) after *= x.dim(i);
    return {before, after, x.dim(axis), after};
}

} // namespace

Tensor softmax(const Tensor& x, int axis) {
    AxisView v = axis_view(x, axis);
    Tensor out = x;
    for (int o = 0; o < v.outer; ++o) {
        for (int l = 0; l < v.lines; ++l) {
            float* base = out.data() + static_cast<size_t>(o) * v.len * v.lines + l;
            double mx = -HUGE_VAL;
            for (int i = 0; i < v.len; ++i) {
                double d = base[static_cast<size_t>(i) * v.stride];
                if (d > mx) mx = d;
            }
            double sum = 0.0;
            std::vector<double> e(static_cast<size_t>(v.len));
            for (int i = 0; i < v.len; ++i) {
                e[i] = std::exp(base[static_cast<size_t>(i) * v.stride] - mx);
                sum += e[i];
            }
            for (int i = 0; i < v.len; ++i)
                base[static_cast<size_t>(i) * v.stride] =
                    static_cast<float>(e[i] / sum);
        }
    }
    return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps) {
    int axis = x.rank() == 3 ? 1 : 0;
    AxisView v = axis_view(x, axis);
    int channels = v.len;
    if (!gain.empty() && (gain.rank() != 1 || gain.dim(0) != channels))
        throw ShapeError("layer_norm: gain shape " + gain.shape_str() +
                         " vs expected [" + std::to_string(channels) + "]");
    if (!bias.empty() && (bias.rank() != 1 || bias.dim(0) != channels))
        throw ShapeError("layer_norm: bias shape " + bias.shape_str() +
                         " vs expected [" + std::to_string(channels) + "]");

    Tensor out = x;
    for (int o = 0; o < v.outer; ++o) {
        for (int l = 0; l < v.lines; ++l) {
            float* base = out.data() + static_cast<size_t>(o) * v.len * v.lines + l;
            double mean = 0.0;
            for (int c = 0; c < channels; ++c)
                mean += base[static_cast<size_t>(c) * v.stride];
            mean /= channels;
            double var = 0.0;
            for (int c = 0; c < channels; ++c) {
                double d = base[static_cast<size_t>(c) * v.stride] - mean;
                var += d * d;
            }
            var /= channels;
            double inv = 1.0 / std::sqrt(var + eps);
            for (int c = 0; c < channels; ++c) {
                double n = (base[static_cast<size_t>(c) * v.stride] - mean) * inv;
                if (!gain.empty()) n *= gain(c);
                if (!bias.empty()) n += bias(c);
                base[static_cast<size_t>(c) * v.stride] = static_cast<float>(n);
            }
        }
    }
    return out;
}

Tensor positional_encoding(int length, int dim) {
    if (dim <= 0 || dim % 2 != 0)
        throw ConfigError("positional encoding dim must be even and positive, got " +
                          std::to_string(dim));
    if (length <= 0)
        throw ConfigError("positional encoding length must be positive");
    Tensor pe({length, dim});
    for (int t = 0; t < length; ++t) {
        for (int i = 0; i < dim / 2; ++i) {
            double freq = std::pow(10000.0, -2.0 * i / dim);
            double arg = t * freq;
            pe(t, 2 * i) = static_cast<float>(std::sin(arg));
            pe(t, 2 * i + 1) = static_cast<float>(std::cos(arg));
        }
    }
    return pe;
}

} // namespace nixforge
