#pragma once

#include <string>
#include <vector>

#include "nixforge/dsp.hpp"

namespace nixforge {

// Character table of the default text frontend. Id 0 is reserved for UNK;
// character i maps to id i + 1.
extern const char* const kDefaultSymbols;

struct EncoderConfig {
    std::string symbols = kDefaultSymbols;
    int hidden = 192;
    int kernel_size = 5;
    std::vector<int> dilations = {1, 2, 4};
    int n_blocks_text = 6;
    int n_blocks_latent = 6;
    int aligner_dim = 80;
    int aligner_hidden = 256;
    int duration_kernel = 3;
    int duration_hidden = 192;
    int latent_channels = 192;

    int vocab_size() const { return static_cast<int>(symbols.size()) + 1; }
};

struct DecoderConfig {
    int input_channels = 192;
    int upsample_initial = 256;
    std::vector<int> upsample_rates = {8, 8, 2, 2};
    std::vector<int> upsample_kernels = {16, 16, 4, 4};
    std::vector<int> mrf_kernels = {3, 7, 11};
    std::vector<int> mrf_dilations = {1, 3, 5};
    int pre_kernel = 7;
    int post_kernel = 7;
    bool separable = true;

    int upsample_product() const;
    // Channel width entering upsample stage s (halved per stage).
    int stage_channels(int stage) const { return upsample_initial >> stage; }
    int output_stage_channels() const {
        return upsample_initial >> static_cast<int>(upsample_rates.size());
    }
};

// Multi-period discriminator: the teacher lineage runs widths
// {32,128,512,1024,1024}; channel_scale shrinks every layer from
// scale_start_layer on, which is where nearly all of its parameters sit.
struct DiscriminatorConfig {
    std::vector<int> periods = {2, 3, 5, 7, 11};
    double channel_scale = 0.5;
    int scale_start_layer = 3;
    int kernel_size = 5;
    int stride = 3;
    int post_kernel = 3;

    std::vector<int> layer_widths() const;
};

struct ModelConfig {
    EncoderConfig encoder;
    DecoderConfig decoder;
    DiscriminatorConfig discriminator;
    SpectrogramConfig spectrogram;

    void validate() const;

    // `key = value` text, one entry per line, '#' comments, UTF-8. Space and
    // backslash inside the symbol table are escaped as "\s" and "\\".
    std::string to_config_text() const;
    static ModelConfig from_config_text(const std::string& text);
};

} // namespace nixforge
