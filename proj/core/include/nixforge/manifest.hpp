#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nixforge/checkpoint.hpp"
#include "nixforge/model_config.hpp"

namespace nixforge {

// Declared weight tensor: the single source of truth for checkpoint naming
// ("module.layer.tensor"), initialization and parameter accounting.
struct TensorShape {
    enum class Init { fan_in, fan_in_transposed, one, zero };

    std::string name;
    std::vector<int> dims;
    Init init = Init::fan_in;

    size_t param_count() const;
};

// Every tensor of the deployable student (encoder + aligner + duration
// predictor + latent encoder + decoder).
std::vector<TensorShape> student_manifest(const ModelConfig& cfg);

std::vector<TensorShape> decoder_manifest(const DecoderConfig& cfg,
                                          const std::string& prefix = "decoder");
std::vector<TensorShape> discriminator_manifest(const DiscriminatorConfig& cfg);

size_t manifest_param_count(const std::vector<TensorShape>& manifest);

// Full-width dense decoder of the teacher lineage, used as the reduction
// baseline.
DecoderConfig vanilla_fullwidth_decoder(const DecoderConfig& base);
DiscriminatorConfig teacher_discriminator(const DiscriminatorConfig& base);

struct ReductionReport {
    size_t params_small = 0;
    size_t params_baseline = 0;
    double ratio = 0.0; // 1 - small/baseline
};
ReductionReport count_reduction(const std::vector<TensorShape>& small,
                                const std::vector<TensorShape>& baseline);

struct ParamCounts {
    std::map<std::string, size_t> by_module;
    size_t total = 0;
};
// Groups tensor sizes by the name prefix before the first '.'. Reserved
// "__" names are skipped. A non-empty filter keeps only that module.
ParamCounts count_parameters(const Checkpoint& ckpt,
                             const std::string& module_filter = "");

// Seeded uniform(-sqrt(1/fan_in), sqrt(1/fan_in)) weights over the manifest,
// layer-norm gains 1 and biases 0. Pure integer/uniform arithmetic, so the
// produced file bytes are identical across platforms for a given seed.
Checkpoint init_student_checkpoint(const ModelConfig& cfg, uint64_t seed);
Checkpoint init_discriminator_checkpoint(const ModelConfig& cfg, uint64_t seed);

} // namespace nixforge
