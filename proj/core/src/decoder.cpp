#include "nixforge/decoder.hpp"

#include <cmath>

#include "nixforge/conv.hpp"
#include "nixforge/error.hpp"
#include "nixforge/ops.hpp"
#include "nixforge/rng.hpp"

namespace nixforge {

Tensor sample_latent(const GaussianParams& params, uint64_t seed,
                     double temperature) {
    params.validate();
    NormalSampler normal(seed);
    Tensor z = params.mu;
    for (size_t i = 0; i < z.size(); ++i) {
        double eps = normal.next();
        z.at(i) = static_cast<float>(
            static_cast<double>(params.mu.at(i)) +
            temperature * static_cast<double>(params.sigma.at(i)) * eps);
    }
    return z;
}

namespace {

Tensor as_batch(const Tensor& x) {
    return Tensor({1, x.dim(0), x.dim(1)}, x.values());
}

Tensor from_batch(const Tensor& x) {
    return Tensor({x.dim(1), x.dim(2)}, x.values());
}

void lrelu_inplace(Tensor& t, float slope) {
    for (auto& v : t.values())
        if (v < 0.0f) v *= slope;
}

} // namespace

StudentDecoder::StudentDecoder(const ModelConfig& cfg, const Checkpoint& ckpt)
    : cfg_(cfg) {
    cfg_.validate();
    const DecoderConfig& d = cfg_.decoder;
    auto dense = [&](const std::string& stem) {
        Conv c;
        c.weight = ckpt.get(stem + ".weight");
        c.bias = ckpt.get(stem + ".bias");
        return c;
    };
    auto maybe_separable = [&](const std::string& stem) {
        Conv c;
        if (d.separable) {
            c.separable = true;
            c.weight = ckpt.get(stem + ".dw.weight");
            c.bias = ckpt.get(stem + ".dw.bias");
            c.pw_weight = ckpt.get(stem + ".pw.weight");
            c.pw_bias = ckpt.get(stem + ".pw.bias");
        } else {
            c = dense(stem);
        }
        return c;
    };

    pre_ = dense("decoder.pre");
    int n_stages = static_cast<int>(d.upsample_rates.size());
    for (int s = 0; s < n_stages; ++s) {
        Stage stage;
        std::string up = "decoder.up" + std::to_string(s);
        stage.up_weight = ckpt.get(up + ".weight");
        stage.up_bias = ckpt.get(up + ".bias");
        stage.rate = d.upsample_rates[s];
        stage.kernel = d.upsample_kernels[s];
        for (size_t r = 0; r < d.mrf_kernels.size(); ++r) {
            ResBlock block;
            block.kernel = d.mrf_kernels[r];
            block.dilations = d.mrf_dilations;
            std::string res = "decoder.mrf" + std::to_string(s) + ".res" +
                              std::to_string(r);
            for (size_t i = 0; i < d.mrf_dilations.size(); ++i) {
                block.convs1.push_back(
                    maybe_separable(res + ".conv1_" + std::to_string(i)));
                block.convs2.push_back(
                    maybe_separable(res + ".conv2_" + std::to_string(i)));
            }
            stage.mrf.push_back(std::move(block));
        }
        stages_.push_back(std::move(stage));
    }
    post_ = dense("decoder.post");
}

Tensor StudentDecoder::run_conv(const Tensor& x, const Conv& c, int kernel,
                                int dilation) const {
    Conv1dSpec spec;
    spec.in_channels = x.dim(1);
    spec.kernel_size = kernel;
    spec.dilation = dilation;
    spec.padding = same_padding(kernel, dilation);
    if (c.separable) {
        spec.separable = true;
        spec.out_channels = c.pw_weight.dim(0);
        spec.weight = c.weight;
        spec.bias = c.bias;
        spec.pointwise_weight = c.pw_weight;
        spec.pointwise_bias = c.pw_bias;
        return depthwise_separable_conv1d(x, spec);
    }
    spec.out_channels = c.weight.dim(0);
    spec.weight = c.weight;
    spec.bias = c.bias;
    return conv1d(x, spec);
}

Tensor StudentDecoder::run_resblock(const Tensor& x, const ResBlock& block) const {
    Tensor acc = x;
    for (size_t i = 0; i < block.dilations.size(); ++i) {
        Tensor t = acc;
        lrelu_inplace(t, 0.1f);
        t = run_conv(t, block.convs1[i], block.kernel, block.dilations[i]);
        lrelu_inplace(t, 0.1f);
        t = run_conv(t, block.convs2[i], block.kernel, 1);
        for (size_t n = 0; n < acc.size(); ++n) acc.at(n) += t.at(n);
    }
    return acc;
}

Tensor StudentDecoder::decode(const Tensor& z) const {
    require_rank(z, 2, "decode");
    const DecoderConfig& d = cfg_.decoder;
    if (z.dim(0) != d.input_channels)
        throw ShapeError("decode: latent shape " + z.shape_str() +
                         " vs expected [" + std::to_string(d.input_channels) +
                         " x K]");

    Conv1dSpec pre;
    pre.in_channels = d.input_channels;
    pre.out_channels = d.upsample_initial;
    pre.kernel_size = d.pre_kernel;
    pre.padding = same_padding(d.pre_kernel, 1);
    pre.weight = pre_.weight;
    pre.bias = pre_.bias;
    Tensor x = conv1d(as_batch(z), pre);

    for (const Stage& stage : stages_) {
        lrelu_inplace(x, 0.1f);
        Conv1dSpec up;
        up.in_channels = x.dim(1);
        up.out_channels = stage.up_weight.dim(1);
        up.kernel_size = stage.kernel;
        up.stride = stage.rate;
        up.padding = (stage.kernel - stage.rate) / 2;
        up.weight = stage.up_weight;
        up.bias = stage.up_bias;
        x = transposed_conv1d(x, up);

        // Multi-receptive-field fusion: average of the parallel branches.
        Tensor fused;
        for (size_t r = 0; r < stage.mrf.size(); ++r) {
            Tensor branch = run_resblock(x, stage.mrf[r]);
            if (r == 0) {
                fused = std::move(branch);
            } else {
                for (size_t i = 0; i < fused.size(); ++i)
                    fused.at(i) += branch.at(i);
            }
        }
        float inv = 1.0f / static_cast<float>(stage.mrf.size());
        for (size_t i = 0; i < fused.size(); ++i) fused.at(i) *= inv;
        x = std::move(fused);
    }

    lrelu_inplace(x, 0.1f);
    Conv1dSpec post;
    post.in_channels = x.dim(1);
    post.out_channels = 1;
    post.kernel_size = d.post_kernel;
    post.padding = same_padding(d.post_kernel, 1);
    post.weight = post_.weight;
    post.bias = post_.bias;
    x = conv1d(x, post);
    return tanh_op(from_batch(x));
}

} // namespace nixforge
