#pragma once

#include <vector>

#include "nixforge/checkpoint.hpp"
#include "nixforge/model_config.hpp"
#include "nixforge/tensor.hpp"

namespace nixforge {

// Waveform reshaped by one period: [rows x p] with the tail zero-padded to a
// whole row.
Tensor period_reshape(const Tensor& wave, int period);

struct PeriodOutput {
    int period = 0;
    Tensor logits;                    // [1 x rows' x p]
    std::vector<Tensor> feature_maps; // post-activation map of every conv layer
};

// Multi-period discriminator over width-1 2D kernels: each period's view is
// convolved along the row (time) axis only, per phase column.
class Discriminator {
public:
    Discriminator(const ModelConfig& cfg, const Checkpoint& ckpt);

    std::vector<PeriodOutput> discriminate(const Tensor& wave) const;

    const DiscriminatorConfig& config() const { return cfg_.discriminator; }

private:
    struct Conv {
        Tensor weight; // [out, in, kernel]
        Tensor bias;
        int stride = 1;
    };
    struct PeriodNet {
        int period = 0;
        std::vector<Conv> convs;
        Conv post;
    };

    ModelConfig cfg_;
    std::vector<PeriodNet> nets_;
};

} // namespace nixforge
