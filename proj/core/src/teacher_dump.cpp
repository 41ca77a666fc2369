#include "nixforge/teacher_dump.hpp"

#include <cmath>

#include "nixforge/checkpoint.hpp"
#include "nixforge/dsp.hpp"
#include "nixforge/error.hpp"
#include "nixforge/rng.hpp"

namespace nixforge {

namespace {

using Kind = CheckpointError::Kind;

void validate_dump(const TeacherDump& d) {
    int k = d.x_s.dim(1);
    auto check_frames = [&](const Tensor& t, const char* name) {
        if (t.rank() != 2 || t.dim(1) != k)
            throw CheckpointError(Kind::inconsistent_axes,
                                  std::string("teacher dump: ") + name +
                                      " has shape " + t.shape_str() +
                                      ", expected frame axis " +
                                      std::to_string(k));
    };
    check_frames(d.x_m, "x_m");
    check_frames(d.mu_q, "mu_q");
    check_frames(d.sigma_q, "sigma_q");
    check_frames(d.z_q, "z_q");
    if (!d.mu_q.same_shape(d.sigma_q) || !d.mu_q.same_shape(d.z_q))
        throw CheckpointError(Kind::inconsistent_axes,
                              "teacher dump: latent tensors disagree: mu_q " +
                                  d.mu_q.shape_str() + ", sigma_q " +
                                  d.sigma_q.shape_str() + ", z_q " +
                                  d.z_q.shape_str());
    if (d.x_w.rank() != 2 || d.x_w.dim(0) != 1 || d.x_w.dim(1) % k != 0)
        throw CheckpointError(Kind::inconsistent_axes,
                              "teacher dump: waveform shape " +
                                  d.x_w.shape_str() +
                                  " is not a whole number of frames of " +
                                  std::to_string(k));
    for (float s : d.sigma_q.values())
        if (!(s > 0.0f))
            throw CheckpointError(Kind::invalid_value,
                                  "teacher dump: sigma_q must be strictly positive");
    if (d.tokens.empty())
        throw CheckpointError(Kind::invalid_value, "teacher dump: no tokens");
    if (static_cast<int>(d.tokens.size()) > k)
        throw CheckpointError(Kind::inconsistent_axes,
                              "teacher dump: more tokens than frames");
}

} // namespace

void save_teacher_dump(const std::string& path, const TeacherDump& dump) {
    Checkpoint ckpt;
    Tensor tokens({static_cast<int>(dump.tokens.size())});
    for (size_t i = 0; i < dump.tokens.size(); ++i)
        tokens.at(i) = static_cast<float>(dump.tokens[i]);
    ckpt.put("tokens", std::move(tokens));
    ckpt.put("x_s", dump.x_s);
    ckpt.put("x_m", dump.x_m);
    ckpt.put("mu_q", dump.mu_q);
    ckpt.put("sigma_q", dump.sigma_q);
    ckpt.put("z_q", dump.z_q);
    ckpt.put("x_w", dump.x_w);
    save_checkpoint(path, ckpt);
}

TeacherDump load_teacher_dump(const std::string& path) {
    Checkpoint ckpt = load_checkpoint(path);
    TeacherDump d;
    const Tensor& tokens = ckpt.get("tokens");
    for (float v : tokens.values()) d.tokens.push_back(static_cast<int>(v));
    d.x_s = ckpt.get("x_s");
    d.x_m = ckpt.get("x_m");
    d.mu_q = ckpt.get("mu_q");
    d.sigma_q = ckpt.get("sigma_q");
    d.z_q = ckpt.get("z_q");
    d.x_w = ckpt.get("x_w");
    validate_dump(d);
    return d;
}

TeacherDump synth_teacher_dump(uint64_t seed, int tokens, int frames,
                               const ModelConfig& cfg) {
    if (tokens < 1 || frames < tokens)
        throw InputError("synth_teacher_dump: need 1 <= J <= K, got J=" +
                         std::to_string(tokens) + " K=" + std::to_string(frames));

    SplitMix64 rng(seed);
    NormalSampler normal(rng.next());
    int channels = cfg.encoder.latent_channels;
    int hop = cfg.spectrogram.hop_length;
    int samples = hop * frames;

    TeacherDump d;
    for (int j = 0; j < tokens; ++j)
        d.tokens.push_back(
            1 + static_cast<int>(rng.below(cfg.encoder.symbols.size())));

    // Smooth per-channel sinusoid trajectories for the posterior mean.
    d.mu_q = Tensor({channels, frames});
    d.sigma_q = Tensor({channels, frames});
    d.z_q = Tensor({channels, frames});
    for (int c = 0; c < channels; ++c) {
        double amp = rng.uniform(0.2, 1.0);
        double omega = rng.uniform(0.05, 0.5);
        double phase = rng.uniform(0.0, 2.0 * M_PI);
        double sig_base = rng.uniform(0.1, 0.6);
        for (int k = 0; k < frames; ++k) {
            double mu = amp * std::sin(omega * k + phase);
            double sigma = sig_base + 0.4 * (0.5 + 0.5 * std::sin(0.1 * k + phase));
            if (sigma > 1.0) sigma = 1.0;
            d.mu_q(c, k) = static_cast<float>(mu);
            d.sigma_q(c, k) = static_cast<float>(sigma);
            d.z_q(c, k) = static_cast<float>(mu + sigma * normal.next());
        }
    }

    // Filtered noise waveform: one-pole lowpass over white noise.
    d.x_w = Tensor({1, samples});
    double state = 0.0;
    double alpha = 0.6;
    for (int i = 0; i < samples; ++i) {
        double noise = rng.uniform(-1.0, 1.0);
        state = alpha * state + (1.0 - alpha) * noise;
        d.x_w.at(static_cast<size_t>(i)) = static_cast<float>(0.8 * state);
    }

    // Spectral features come from the waveform itself; the centered STFT
    // yields K+1 frames, the dump keeps the first K.
    Tensor mag = stft_magnitude(d.x_w, cfg.spectrogram);
    Tensor mel = mel_spectrogram(d.x_w, cfg.spectrogram);
    d.x_s = Tensor({mag.dim(0), frames});
    d.x_m = Tensor({mel.dim(0), frames});
    for (int b = 0; b < mag.dim(0); ++b)
        for (int k = 0; k < frames; ++k) d.x_s(b, k) = mag(b, k);
    for (int m = 0; m < mel.dim(0); ++m)
        for (int k = 0; k < frames; ++k) d.x_m(m, k) = mel(m, k);

    validate_dump(d);
    return d;
}

} // namespace nixforge
