#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nixforge/model_config.hpp"
#include "nixforge/tensor.hpp"

namespace nixforge {

// Extracted teacher features for one utterance, stored in the checkpoint
// container under reserved names. All time axes share one frame count K:
// spectrograms are [bins x K] / [mels x K], Gaussian parameters [C x K],
// and the waveform is exactly hop_length * K samples.
struct TeacherDump {
    std::vector<int> tokens;
    Tensor x_s;     // linear magnitude spectrogram
    Tensor x_m;     // log-mel spectrogram
    Tensor mu_q;    // posterior mean
    Tensor sigma_q; // posterior std, strictly positive
    Tensor z_q;     // posterior sample
    Tensor x_w;     // waveform [1 x hop*K]

    int frames() const { return x_s.dim(1); }
    int latent_channels() const { return mu_q.dim(0); }
};

void save_teacher_dump(const std::string& path, const TeacherDump& dump);

// Loads and validates: missing tensors, mismatched time axes and
// non-positive sigma raise distinct checkpoint errors.
TeacherDump load_teacher_dump(const std::string& path);

// Deterministic invariant-satisfying stand-in for real teacher features:
// smooth posterior trajectories, filtered-noise audio, spectrograms computed
// from that audio. Requires 1 <= J <= K.
TeacherDump synth_teacher_dump(uint64_t seed, int tokens, int frames,
                               const ModelConfig& cfg = {});

} // namespace nixforge
