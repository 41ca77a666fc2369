#include "nixforge/discriminator.hpp"

#include <string>

#include "nixforge/error.hpp"
#include "nixforge/ops.hpp"
#include "nixforge/runtime.hpp"

namespace nixforge {

Tensor period_reshape(const Tensor& wave, int period) {
    if (wave.rank() != 2 || wave.dim(0) != 1)
        throw ShapeError("period_reshape: waveform shape " + wave.shape_str() +
                         " vs expected [1 x T]");
    if (period < 1) throw InputError("period_reshape: period must be >= 1");
    int t = wave.dim(1);
    int rows = (t + period - 1) / period;
    Tensor out({rows, period});
    for (int i = 0; i < t; ++i)
        out(i / period, i % period) = wave.at(static_cast<size_t>(i));
    return out;
}

namespace {

// Conv along the row axis of [C, H, P], width-1 kernel, per-column weights
// shared. Same double-accumulation and in-channel-major order as conv1d.
Tensor conv_rows(const Tensor& x, const Tensor& weight, const Tensor& bias,
                 int stride, int padding) {
    int c_in = x.dim(0);
    int h_in = x.dim(1);
    int cols = x.dim(2);
    int c_out = weight.dim(0);
    int kernel = weight.dim(2);
    int h_out = (h_in + 2 * padding - kernel) / stride + 1;
    if (h_out <= 0)
        throw ShapeError("discriminator conv: " + std::to_string(h_in) +
                         " rows too short for kernel " + std::to_string(kernel));

    Tensor out({c_out, h_out, cols});
    parallel_for(c_out, [&](int begin, int end) {
        std::vector<double> acc(static_cast<size_t>(cols));
        for (int oc = begin; oc < end; ++oc) {
            double b0 = bias.empty() ? 0.0 : bias(oc);
            for (int h = 0; h < h_out; ++h) {
                std::fill(acc.begin(), acc.end(), b0);
                for (int ic = 0; ic < c_in; ++ic) {
                    for (int k = 0; k < kernel; ++k) {
                        int row = h * stride + k - padding;
                        if (row < 0 || row >= h_in) continue;
                        double w = weight(oc, ic, k);
                        const float* src =
                            x.data() + (static_cast<size_t>(ic) * h_in + row) * cols;
                        for (int p = 0; p < cols; ++p) acc[p] += w * src[p];
                    }
                }
                float* dst = out.data() +
                             (static_cast<size_t>(oc) * h_out + h) * cols;
                for (int p = 0; p < cols; ++p)
                    dst[p] = static_cast<float>(acc[p]);
            }
        }
    });
    return out;
}

} // namespace

Discriminator::Discriminator(const ModelConfig& cfg, const Checkpoint& ckpt)
    : cfg_(cfg) {
    const DiscriminatorConfig& d = cfg_.discriminator;
    for (int p : d.periods) {
        PeriodNet net;
        net.period = p;
        std::string stem = "discriminator.p" + std::to_string(p);
        size_t layers = d.layer_widths().size();
        for (size_t l = 0; l < layers; ++l) {
            Conv c;
            c.weight = ckpt.get(stem + ".conv" + std::to_string(l) + ".weight");
            c.bias = ckpt.get(stem + ".conv" + std::to_string(l) + ".bias");
            // last conv of the stack runs stride 1
            c.stride = l + 1 == layers ? 1 : d.stride;
            net.convs.push_back(std::move(c));
        }
        net.post.weight = ckpt.get(stem + ".post.weight");
        net.post.bias = ckpt.get(stem + ".post.bias");
        net.post.stride = 1;
        nets_.push_back(std::move(net));
    }
}

std::vector<PeriodOutput> Discriminator::discriminate(const Tensor& wave) const {
    if (wave.rank() != 2 || wave.dim(0) != 1)
        throw ShapeError("discriminate: waveform shape " + wave.shape_str() +
                         " vs expected [1 x T]");
    int max_period = 0;
    for (const auto& net : nets_)
        if (net.period > max_period) max_period = net.period;
    if (wave.dim(1) < max_period)
        throw InputError("discriminate: waveform of " +
                         std::to_string(wave.dim(1)) +
                         " samples is shorter than the largest period " +
                         std::to_string(max_period));

    std::vector<PeriodOutput> outputs;
    for (const auto& net : nets_) {
        Tensor grid = period_reshape(wave, net.period);
        Tensor x({1, grid.dim(0), grid.dim(1)}, grid.values());

        PeriodOutput out;
        out.period = net.period;
        for (const Conv& c : net.convs) {
            int pad = (c.weight.dim(2) - 1) / 2;
            x = leaky_relu(conv_rows(x, c.weight, c.bias, c.stride, pad), 0.1f);
            out.feature_maps.push_back(x);
        }
        int pad = (net.post.weight.dim(2) - 1) / 2;
        out.logits = conv_rows(x, net.post.weight, net.post.bias, 1, pad);
        outputs.push_back(std::move(out));
    }
    return outputs;
}

} // namespace nixforge
