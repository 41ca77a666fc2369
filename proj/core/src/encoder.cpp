#include "nixforge/encoder.hpp"

#include <cctype>
#include <cmath>

#include "nixforge/conv.hpp"
#include "nixforge/error.hpp"
#include "nixforge/ops.hpp"

namespace nixforge {

TokenSequence tokenize(const std::string& text, const std::string& symbols) {
    TokenSequence seq;
    for (char raw : text) {
        char c = static_cast<char>(
            std::tolower(static_cast<unsigned char>(raw)));
        size_t pos = symbols.find(c);
        seq.ids.push_back(pos == std::string::npos ? 0
                                                   : static_cast<int>(pos) + 1);
    }
    if (seq.ids.empty())
        throw InputError("tokenize: empty text");
    return seq;
}

namespace {

// [C x T] <-> [1 x C x T] wrappers around the rank-3 conv kernels.
Tensor as_batch(const Tensor& x) {
    return Tensor({1, x.dim(0), x.dim(1)}, x.values());
}

Tensor from_batch(const Tensor& x) {
    return Tensor({x.dim(1), x.dim(2)}, x.values());
}

Tensor transpose2d(const Tensor& x) {
    Tensor out({x.dim(1), x.dim(0)});
    for (int i = 0; i < x.dim(0); ++i)
        for (int j = 0; j < x.dim(1); ++j) out(j, i) = x(i, j);
    return out;
}

} // namespace

StudentEncoder::StudentEncoder(const ModelConfig& cfg, const Checkpoint& ckpt)
    : cfg_(cfg) {
    cfg_.validate();
    auto conv = [&](const std::string& stem) {
        Conv c;
        c.weight = ckpt.get(stem + ".weight");
        c.bias = ckpt.get(stem + ".bias");
        return c;
    };
    auto blocks = [&](const std::string& module, int count) {
        std::vector<Block> out;
        for (int i = 0; i < count; ++i) {
            std::string stem = module + ".block" + std::to_string(i);
            Block b;
            b.conv = conv(stem + ".conv");
            b.norm_gain = ckpt.get(stem + ".norm.gain");
            b.norm_bias = ckpt.get(stem + ".norm.bias");
            b.dilation = cfg_.encoder.dilations[i % cfg_.encoder.dilations.size()];
            out.push_back(std::move(b));
        }
        return out;
    };

    embedding_ = ckpt.get("text_encoder.embedding.weight");
    if (embedding_.dim(0) != cfg_.encoder.vocab_size() ||
        embedding_.dim(1) != cfg_.encoder.hidden)
        throw ShapeError("embedding shape " + embedding_.shape_str() +
                         " vs expected " +
                         shape_to_string({cfg_.encoder.vocab_size(),
                                          cfg_.encoder.hidden}));
    text_blocks_ = blocks("text_encoder", cfg_.encoder.n_blocks_text);
    aligner_text0_ = conv("aligner.text0");
    aligner_text1_ = conv("aligner.text1");
    aligner_spec0_ = conv("aligner.spec0");
    aligner_spec1_ = conv("aligner.spec1");
    duration_conv0_ = conv("duration_predictor.conv0");
    duration_conv1_ = conv("duration_predictor.conv1");
    duration_proj_ = conv("duration_predictor.proj");
    latent_blocks_ = blocks("latent_encoder", cfg_.encoder.n_blocks_latent);
    latent_proj_ = conv("latent_encoder.proj");
}

Tensor StudentEncoder::residual_stack(Tensor x,
                                      const std::vector<Block>& blocks) const {
    for (const Block& b : blocks) {
        Conv1dSpec spec;
        spec.in_channels = x.dim(0);
        spec.out_channels = b.conv.weight.dim(0);
        spec.kernel_size = b.conv.weight.dim(2);
        spec.dilation = b.dilation;
        spec.padding = same_padding(spec.kernel_size, spec.dilation);
        spec.weight = b.conv.weight;
        spec.bias = b.conv.bias;
        Tensor y = from_batch(conv1d(as_batch(x), spec));
        y = silu(y);
        y = layer_norm(y, b.norm_gain, b.norm_bias);
        for (size_t i = 0; i < x.size(); ++i) x.at(i) += y.at(i);
    }
    return x;
}

Tensor StudentEncoder::encode_text(const TokenSequence& tokens) const {
    int j_len = tokens.length();
    if (j_len == 0) throw InputError("encode_text: empty token sequence");
    int hidden = cfg_.encoder.hidden;
    for (int id : tokens.ids)
        if (id < 0 || id >= cfg_.encoder.vocab_size())
            throw InputError("encode_text: token id " + std::to_string(id) +
                             " outside vocab of " +
                             std::to_string(cfg_.encoder.vocab_size()));

    Tensor pe = positional_encoding(j_len, hidden);
    Tensor x({hidden, j_len});
    for (int j = 0; j < j_len; ++j)
        for (int h = 0; h < hidden; ++h)
            x(h, j) = embedding_(tokens.ids[j], h) + pe(j, h);
    return residual_stack(std::move(x), text_blocks_);
}

std::pair<Tensor, Tensor> StudentEncoder::aligner_encode(
    const Tensor& c_hidden, const Tensor& x_s) const {
    require_rank(c_hidden, 2, "aligner_encode c_hidden");
    if (x_s.rank() != 2)
        throw InputError("aligner_encode: teacher spectrogram required");

    auto stack2 = [&](const Tensor& in, const Conv& c0, const Conv& c1) {
        Conv1dSpec s0;
        s0.in_channels = in.dim(0);
        s0.out_channels = c0.weight.dim(0);
        s0.kernel_size = c0.weight.dim(2);
        s0.padding = same_padding(s0.kernel_size, 1);
        s0.weight = c0.weight;
        s0.bias = c0.bias;
        Tensor h = silu(from_batch(conv1d(as_batch(in), s0)));
        Conv1dSpec s1;
        s1.in_channels = h.dim(0);
        s1.out_channels = c1.weight.dim(0);
        s1.kernel_size = c1.weight.dim(2);
        s1.padding = same_padding(s1.kernel_size, 1);
        s1.weight = c1.weight;
        s1.bias = c1.bias;
        return from_batch(conv1d(as_batch(h), s1));
    };

    Tensor c_enc = stack2(c_hidden, aligner_text0_, aligner_text1_); // [A x J]
    Tensor x_enc = stack2(x_s, aligner_spec0_, aligner_spec1_);      // [A x K]
    return {transpose2d(c_enc), transpose2d(x_enc)};
}

Tensor StudentEncoder::predict_durations(const Tensor& c_hidden) const {
    require_rank(c_hidden, 2, "predict_durations");
    auto run = [&](const Tensor& in, const Conv& c, int dilation) {
        Conv1dSpec s;
        s.in_channels = in.dim(0);
        s.out_channels = c.weight.dim(0);
        s.kernel_size = c.weight.dim(2);
        s.dilation = dilation;
        s.padding = same_padding(s.kernel_size, dilation);
        s.weight = c.weight;
        s.bias = c.bias;
        return from_batch(conv1d(as_batch(in), s));
    };
    Tensor h = silu(run(c_hidden, duration_conv0_, 1));
    h = silu(run(h, duration_conv1_, 1));
    Tensor proj = run(h, duration_proj_, 1); // [1 x J]
    return Tensor({proj.dim(1)}, proj.values());
}

GaussianParams StudentEncoder::encode_latent(const Tensor& c_aligned) const {
    require_rank(c_aligned, 2, "encode_latent");
    if (c_aligned.dim(0) != cfg_.encoder.hidden)
        throw ShapeError("encode_latent: input shape " + c_aligned.shape_str() +
                         " vs expected [" + std::to_string(cfg_.encoder.hidden) +
                         " x K]");
    Tensor h = residual_stack(c_aligned, latent_blocks_);

    Conv1dSpec s;
    s.in_channels = h.dim(0);
    s.out_channels = latent_proj_.weight.dim(0);
    s.kernel_size = 1;
    s.weight = latent_proj_.weight;
    s.bias = latent_proj_.bias;
    Tensor proj = from_batch(conv1d(as_batch(h), s)); // [2C x K]

    int channels = cfg_.encoder.latent_channels;
    int frames = proj.dim(1);
    GaussianParams params{Tensor({channels, frames}), Tensor({channels, frames})};
    for (int c = 0; c < channels; ++c) {
        for (int k = 0; k < frames; ++k) {
            params.mu(c, k) = proj(c, k);
            double log_var = proj(c + channels, k);
            params.sigma(c, k) = static_cast<float>(std::exp(0.5 * log_var));
        }
    }
    return params;
}

StudentEncoder::InferResult StudentEncoder::infer(const TokenSequence& tokens,
                                                  double length_scale) const {
    Tensor c_hidden = encode_text(tokens); // [hidden x J]
    Tensor log_d = predict_durations(c_hidden);

    Durations durations;
    for (int j = 0; j < log_d.dim(0); ++j) {
        double scaled = std::exp(static_cast<double>(log_d(j))) * length_scale;
        long d = std::lround(scaled);
        durations.d.push_back(d < 1 ? 1 : static_cast<int>(d));
    }

    Tensor c_aligned = expand_by_durations(transpose2d(c_hidden), durations);
    GaussianParams params = encode_latent(transpose2d(c_aligned));
    return {std::move(params), std::move(durations)};
}

} // namespace nixforge
