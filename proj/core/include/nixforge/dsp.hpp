#pragma once

#include "nixforge/tensor.hpp"

namespace nixforge {

enum class MelScale { slaney, htk };

struct SpectrogramConfig {
    int sample_rate = 22050;
    int n_fft = 1024;
    int win_length = 1024;
    int hop_length = 256;
    int n_mels = 80;
    double fmin = 0.0;
    double fmax = 0.0; // 0 means sample_rate / 2
    MelScale mel_scale = MelScale::slaney;

    double fmax_or_default() const {
        return fmax > 0.0 ? fmax : sample_rate / 2.0;
    }
    void validate() const;
};

// Hann-windowed, centered (reflect-padded) magnitude spectrogram,
// [n_fft/2+1 x K] with K = floor(T / hop_length) + 1.
Tensor stft_magnitude(const Tensor& wave, const SpectrogramConfig& cfg);

// Triangular mel filterbank [n_mels x n_fft/2+1]; Slaney variant carries
// equal-area normalization.
Tensor mel_filterbank(const SpectrogramConfig& cfg);

// log(max(mel @ stft_magnitude, 1e-5)), [n_mels x K].
Tensor mel_spectrogram(const Tensor& wave, const SpectrogramConfig& cfg);

// Multi-scale spectrogram distance: sum over FFT sizes
// {64,128,256,512,1024,2048} of L1(|S_x|-|S_y|) + L1(log|S_x|-log|S_y|),
// logs floored at 1e-5. Hop is size/4.
double multiscale_spec_distance(const Tensor& x, const Tensor& y);

constexpr double kLogFloor = 1e-5;

} // namespace nixforge
