#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nixforge/alignment.hpp"
#include "nixforge/checkpoint.hpp"
#include "nixforge/gaussian.hpp"
#include "nixforge/model_config.hpp"
#include "nixforge/tensor.hpp"

namespace nixforge {

struct TokenSequence {
    std::vector<int> ids;

    int length() const { return static_cast<int>(ids.size()); }
};

// Lowercasing character-level frontend over an ordered symbol table.
// Characters outside the table map to the reserved UNK id 0.
TokenSequence tokenize(const std::string& text, const std::string& symbols);

// Text encoder, text/spectrogram aligner encoders, duration predictor and
// latent encoder. Weights are bound once from a checkpoint and immutable
// afterwards; all methods are deterministic and safe to call concurrently.
class StudentEncoder {
public:
    StudentEncoder(const ModelConfig& cfg, const Checkpoint& ckpt);

    // Embedding + positional encoding + dilated residual stack, [hidden x J].
    Tensor encode_text(const TokenSequence& tokens) const;

    // Projects both modalities into the shared aligner space:
    // (c_enc [J x aligner_dim], x_enc [K x aligner_dim]). Training-time only,
    // x_s is the teacher's linear spectrogram [bins x K].
    std::pair<Tensor, Tensor> aligner_encode(const Tensor& c_hidden,
                                             const Tensor& x_s) const;

    // Log-domain duration regressor, [J].
    Tensor predict_durations(const Tensor& c_hidden) const;

    // Residual stack over the duration-expanded text representation
    // (c_aligned is [hidden x K]) projected to posterior parameters.
    GaussianParams encode_latent(const Tensor& c_aligned) const;

    struct InferResult {
        GaussianParams params;
        Durations durations;
    };
    // Full inference path: durations are exp(prediction) scaled, rounded and
    // clamped to >= 1; the frame count of params is their sum.
    InferResult infer(const TokenSequence& tokens,
                      double length_scale = 1.0) const;

    const ModelConfig& config() const { return cfg_; }

private:
    struct Conv {
        Tensor weight;
        Tensor bias;
    };
    struct Block {
        Conv conv;
        Tensor norm_gain;
        Tensor norm_bias;
        int dilation = 1;
    };

    Tensor residual_stack(Tensor x, const std::vector<Block>& blocks) const;

    ModelConfig cfg_;
    Tensor embedding_;
    std::vector<Block> text_blocks_;
    Conv aligner_text0_, aligner_text1_, aligner_spec0_, aligner_spec1_;
    Conv duration_conv0_, duration_conv1_, duration_proj_;
    std::vector<Block> latent_blocks_;
    Conv latent_proj_;
};

} // namespace nixforge
