#include "nixforge/manifest.hpp"

#include <cmath>

#include "nixforge/error.hpp"
#include "nixforge/rng.hpp"

namespace nixforge {

size_t TensorShape::param_count() const { return shape_product(dims); }

namespace {

using Init = TensorShape::Init;

void push_conv(std::vector<TensorShape>& m, const std::string& stem, int out,
               int in, int k, bool bias = true) {
    m.push_back({stem + ".weight", {out, in, k}, Init::fan_in});
    if (bias) m.push_back({stem + ".bias", {out}, Init::zero});
}

void push_separable(std::vector<TensorShape>& m, const std::string& stem,
                    int channels, int k) {
    m.push_back({stem + ".dw.weight", {channels, 1, k}, Init::fan_in});
    m.push_back({stem + ".dw.bias", {channels}, Init::zero});
    m.push_back({stem + ".pw.weight", {channels, channels, 1}, Init::fan_in});
    m.push_back({stem + ".pw.bias", {channels}, Init::zero});
}

void push_residual_block(std::vector<TensorShape>& m, const std::string& stem,
                         int hidden, int k) {
    push_conv(m, stem + ".conv", hidden, hidden, k);
    m.push_back({stem + ".norm.gain", {hidden}, Init::one});
    m.push_back({stem + ".norm.bias", {hidden}, Init::zero});
}

} // namespace

std::vector<TensorShape> decoder_manifest(const DecoderConfig& cfg,
                                          const std::string& prefix) {
    std::vector<TensorShape> m;
    push_conv(m, prefix + ".pre", cfg.upsample_initial, cfg.input_channels,
              cfg.pre_kernel);
    int stages = static_cast<int>(cfg.upsample_rates.size());
    for (int s = 0; s < stages; ++s) {
        int c_in = cfg.stage_channels(s);
        int c_out = cfg.stage_channels(s + 1);
        // transposed layout: [in, out, K]
        m.push_back({prefix + ".up" + std::to_string(s) + ".weight",
                     {c_in, c_out, cfg.upsample_kernels[s]},
                     Init::fan_in_transposed});
        m.push_back({prefix + ".up" + std::to_string(s) + ".bias", {c_out},
                     Init::zero});
        for (size_t r = 0; r < cfg.mrf_kernels.size(); ++r) {
            int k = cfg.mrf_kernels[r];
            std::string res = prefix + ".mrf" + std::to_string(s) + ".res" +
                              std::to_string(r);
            for (size_t d = 0; d < cfg.mrf_dilations.size(); ++d) {
                std::string c1 = res + ".conv1_" + std::to_string(d);
                std::string c2 = res + ".conv2_" + std::to_string(d);
                if (cfg.separable) {
                    push_separable(m, c1, c_out, k);
                    push_separable(m, c2, c_out, k);
                } else {
                    push_conv(m, c1, c_out, c_out, k);
                    push_conv(m, c2, c_out, c_out, k);
                }
            }
        }
    }
    push_conv(m, prefix + ".post", 1, cfg.output_stage_channels(),
              cfg.post_kernel);
    return m;
}

std::vector<TensorShape> discriminator_manifest(const DiscriminatorConfig& cfg) {
    std::vector<TensorShape> m;
    std::vector<int> widths = cfg.layer_widths();
    for (int p : cfg.periods) {
        std::string stem = "discriminator.p" + std::to_string(p);
        int in = 1;
        for (size_t l = 0; l < widths.size(); ++l) {
            push_conv(m, stem + ".conv" + std::to_string(l), widths[l], in,
                      cfg.kernel_size);
            in = widths[l];
        }
        push_conv(m, stem + ".post", 1, in, cfg.post_kernel);
    }
    return m;
}

std::vector<TensorShape> student_manifest(const ModelConfig& cfg) {
    const EncoderConfig& e = cfg.encoder;
    int bins = cfg.spectrogram.n_fft / 2 + 1;
    std::vector<TensorShape> m;

    m.push_back({"text_encoder.embedding.weight", {e.vocab_size(), e.hidden},
                 Init::fan_in});
    for (int i = 0; i < e.n_blocks_text; ++i)
        push_residual_block(m, "text_encoder.block" + std::to_string(i),
                            e.hidden, e.kernel_size);

    push_conv(m, "aligner.text0", e.aligner_hidden, e.hidden, 3);
    push_conv(m, "aligner.text1", e.aligner_dim, e.aligner_hidden, 3);
    push_conv(m, "aligner.spec0", e.aligner_hidden, bins, 3);
    push_conv(m, "aligner.spec1", e.aligner_dim, e.aligner_hidden, 3);

    push_conv(m, "duration_predictor.conv0", e.duration_hidden, e.hidden,
              e.duration_kernel);
    push_conv(m, "duration_predictor.conv1", e.duration_hidden,
              e.duration_hidden, e.duration_kernel);
    push_conv(m, "duration_predictor.proj", 1, e.duration_hidden, 1);

    for (int i = 0; i < e.n_blocks_latent; ++i)
        push_residual_block(m, "latent_encoder.block" + std::to_string(i),
                            e.hidden, e.kernel_size);
    push_conv(m, "latent_encoder.proj", 2 * e.latent_channels, e.hidden, 1);

    std::vector<TensorShape> dec = decoder_manifest(cfg.decoder);
    m.insert(m.end(), dec.begin(), dec.end());
    return m;
}

size_t manifest_param_count(const std::vector<TensorShape>& manifest) {
    size_t total = 0;
    for (const auto& t : manifest) total += t.param_count();
    return total;
}

DecoderConfig vanilla_fullwidth_decoder(const DecoderConfig& base) {
    DecoderConfig v = base;
    v.upsample_initial = 512;
    v.separable = false;
    return v;
}

DiscriminatorConfig teacher_discriminator(const DiscriminatorConfig& base) {
    DiscriminatorConfig t = base;
    t.channel_scale = 1.0;
    return t;
}

ReductionReport count_reduction(const std::vector<TensorShape>& small,
                                const std::vector<TensorShape>& baseline) {
    ReductionReport r;
    r.params_small = manifest_param_count(small);
    r.params_baseline = manifest_param_count(baseline);
    r.ratio = r.params_baseline == 0
                  ? 0.0
                  : 1.0 - static_cast<double>(r.params_small) /
                              static_cast<double>(r.params_baseline);
    return r;
}

ParamCounts count_parameters(const Checkpoint& ckpt,
                             const std::string& module_filter) {
    ParamCounts counts;
    for (const auto& [name, tensor] : ckpt.tensors) {
        if (name.rfind("__", 0) == 0) continue;
        std::string module = name.substr(0, name.find('.'));
        if (!module_filter.empty() && module != module_filter) continue;
        counts.by_module[module] += tensor.size();
        counts.total += tensor.size();
    }
    return counts;
}

namespace {

Tensor materialize(const TensorShape& shape, SplitMix64& rng) {
    Tensor t(shape.dims);
    switch (shape.init) {
    case Init::one:
        for (auto& v : t.values()) v = 1.0f;
        break;
    case Init::zero:
        break;
    case Init::fan_in:
    case Init::fan_in_transposed: {
        size_t fan;
        if (shape.dims.size() == 2) {
            fan = static_cast<size_t>(shape.dims[1]);
        } else if (shape.init == Init::fan_in_transposed) {
            fan = static_cast<size_t>(shape.dims[0]) * shape.dims[2];
        } else {
            fan = static_cast<size_t>(shape.dims[1]) * shape.dims[2];
        }
        double a = std::sqrt(1.0 / static_cast<double>(fan));
        for (auto& v : t.values())
            v = static_cast<float>(rng.uniform(-a, a));
        break;
    }
    }
    return t;
}

Checkpoint init_from_manifest(const std::vector<TensorShape>& manifest,
                              const ModelConfig& cfg, uint64_t seed) {
    Checkpoint ckpt;
    SplitMix64 rng(seed);
    for (const auto& shape : manifest) ckpt.put(shape.name, materialize(shape, rng));
    ckpt.set_config_text(cfg.to_config_text());
    return ckpt;
}

} // namespace

Checkpoint init_student_checkpoint(const ModelConfig& cfg, uint64_t seed) {
    cfg.validate();
    return init_from_manifest(student_manifest(cfg), cfg, seed);
}

Checkpoint init_discriminator_checkpoint(const ModelConfig& cfg, uint64_t seed) {
    cfg.validate();
    return init_from_manifest(discriminator_manifest(cfg.discriminator), cfg,
                              seed);
}

} // namespace nixforge
