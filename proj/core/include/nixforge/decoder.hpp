#pragma once

#include <cstdint>
#include <vector>

#include "nixforge/checkpoint.hpp"
#include "nixforge/gaussian.hpp"
#include "nixforge/model_config.hpp"
#include "nixforge/tensor.hpp"

namespace nixforge {

// z = mu + temperature * sigma * eps with eps drawn from the library's
// seeded polar-method sampler, so a (params, seed, temperature) triple pins
// the sample exactly.
Tensor sample_latent(const GaussianParams& params, uint64_t seed,
                     double temperature = 1.0);

// Upsampling generator: pre conv, transposed-conv stages with channel
// halving and multi-receptive-field fusion, post conv, tanh. Emits exactly
// hop_length samples per latent frame.
class StudentDecoder {
public:
    StudentDecoder(const ModelConfig& cfg, const Checkpoint& ckpt);

    // [C x K] -> [1 x hop*K]
    Tensor decode(const Tensor& z) const;

    const DecoderConfig& config() const { return cfg_.decoder; }

private:
    struct Conv {
        Tensor weight;
        Tensor bias;
        Tensor pw_weight; // separable only
        Tensor pw_bias;
        bool separable = false;
    };
    struct ResBlock {
        int kernel = 0;
        std::vector<int> dilations;
        std::vector<Conv> convs1;
        std::vector<Conv> convs2;
    };
    struct Stage {
        Tensor up_weight;
        Tensor up_bias;
        int rate = 0;
        int kernel = 0;
        std::vector<ResBlock> mrf;
    };

    Tensor run_conv(const Tensor& x, const Conv& c, int kernel,
                    int dilation) const;
    Tensor run_resblock(const Tensor& x, const ResBlock& block) const;

    ModelConfig cfg_;
    Conv pre_;
    std::vector<Stage> stages_;
    Conv post_;
};

} // namespace nixforge
