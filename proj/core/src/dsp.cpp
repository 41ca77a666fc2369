#include "nixforge/dsp.hpp"

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "nixforge/error.hpp"

namespace nixforge {

namespace {

void validate_stft_fields(const SpectrogramConfig& cfg) {
    if (cfg.n_fft <= 0 || (cfg.n_fft & (cfg.n_fft - 1)) != 0)
        throw ConfigError("n_fft must be a positive power of two, got " +
                          std::to_string(cfg.n_fft));
    if (!(cfg.hop_length > 0 && cfg.hop_length <= cfg.win_length &&
          cfg.win_length <= cfg.n_fft))
        throw ConfigError("need 0 < hop_length <= win_length <= n_fft");
}

} // namespace

void SpectrogramConfig::validate() const {
    validate_stft_fields(*this);
    if (n_mels <= 0 || n_mels >= n_fft / 2 + 1)
        throw ConfigError("need 0 < n_mels < n_fft/2 + 1");
    if (fmin < 0.0 || fmax_or_default() <= fmin)
        throw ConfigError("need 0 <= fmin < fmax");
}

namespace {

// Iterative radix-2 Cooley-Tukey, in place. n must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a) {
    size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = -2.0 * M_PI / static_cast<double>(len);
        std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Mirror index into [0, T): reflection without repeating the edge sample.
int reflect_index(int i, int t) {
    if (t == 1) return 0;
    int period = 2 * (t - 1);
    int m = i % period;
    if (m < 0) m += period;
    return m < t ? m : period - m;
}

std::vector<double> hann_window(int win_length) {
    std::vector<double> w(static_cast<size_t>(win_length));
    for (int n = 0; n < win_length; ++n)
        w[n] = 0.5 * (1.0 - std::cos(2.0 * M_PI * n / win_length));
    return w;
}

void check_wave(const Tensor& wave, const char* what) {
    if (wave.rank() != 2 || wave.dim(0) != 1)
        throw ShapeError(std::string(what) + ": waveform shape " +
                         wave.shape_str() + " vs expected [1 x T]");
    if (wave.dim(1) < 1)
        throw InputError(std::string(what) + ": empty waveform");
}

} // namespace

Tensor stft_magnitude(const Tensor& wave, const SpectrogramConfig& cfg) {
    check_wave(wave, "stft_magnitude");
    validate_stft_fields(cfg);

    int t_len = wave.dim(1);
    int bins = cfg.n_fft / 2 + 1;
    int frames = t_len / cfg.hop_length + 1;
    int pad = cfg.n_fft / 2;
    int win_off = (cfg.n_fft - cfg.win_length) / 2;

    std::vector<double> window = hann_window(cfg.win_length);
    const float* x = wave.data();

    Tensor out({bins, frames});
    std::vector<std::complex<double>> buf(static_cast<size_t>(cfg.n_fft));
    for (int f = 0; f < frames; ++f) {
        int start = f * cfg.hop_length - pad;
        for (int n = 0; n < cfg.n_fft; ++n) buf[n] = 0.0;
        for (int n = 0; n < cfg.win_length; ++n) {
            int idx = reflect_index(start + win_off + n, t_len);
            buf[win_off + n] = window[n] * static_cast<double>(x[idx]);
        }
        fft_inplace(buf);
        for (int b = 0; b < bins; ++b)
            out(b, f) = static_cast<float>(std::abs(buf[b]));
    }
    return out;
}

namespace {

double hz_to_mel(double hz, MelScale scale) {
    if (scale == MelScale::htk) return 2595.0 * std::log10(1.0 + hz / 700.0);
    // Slaney: linear below 1 kHz, logarithmic above.
    constexpr double f_sp = 200.0 / 3.0;
    constexpr double min_log_hz = 1000.0;
    constexpr double min_log_mel = min_log_hz / f_sp;
    const double logstep = std::log(6.4) / 27.0;
    if (hz < min_log_hz) return hz / f_sp;
    return min_log_mel + std::log(hz / min_log_hz) / logstep;
}

double mel_to_hz(double mel, MelScale scale) {
    if (scale == MelScale::htk)
        return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
    constexpr double f_sp = 200.0 / 3.0;
    constexpr double min_log_hz = 1000.0;
    constexpr double min_log_mel = min_log_hz / f_sp;
    const double logstep = std::log(6.4) / 27.0;
    if (mel < min_log_mel) return mel * f_sp;
    return min_log_hz * std::exp(logstep * (mel - min_log_mel));
}

} // namespace

Tensor mel_filterbank(const SpectrogramConfig& cfg) {
    cfg.validate();
    int bins = cfg.n_fft / 2 + 1;
    double fmax = cfg.fmax_or_default();

    std::vector<double> mel_pts(static_cast<size_t>(cfg.n_mels) + 2);
    double mel_lo = hz_to_mel(cfg.fmin, cfg.mel_scale);
    double mel_hi = hz_to_mel(fmax, cfg.mel_scale);
    for (int m = 0; m < cfg.n_mels + 2; ++m)
        mel_pts[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / (cfg.n_mels + 1),
                               cfg.mel_scale);

    Tensor fb({cfg.n_mels, bins});
    for (int m = 0; m < cfg.n_mels; ++m) {
        double f_lo = mel_pts[m], f_c = mel_pts[m + 1], f_hi = mel_pts[m + 2];
        double norm = cfg.mel_scale == MelScale::slaney ? 2.0 / (f_hi - f_lo) : 1.0;
        for (int b = 0; b < bins; ++b) {
            double f = static_cast<double>(b) * cfg.sample_rate / cfg.n_fft;
            double up = (f - f_lo) / (f_c - f_lo);
            double down = (f_hi - f) / (f_hi - f_c);
            double w = std::min(up, down);
            fb(m, b) = static_cast<float>(w > 0.0 ? w * norm : 0.0);
        }
    }
    return fb;
}

Tensor mel_spectrogram(const Tensor& wave, const SpectrogramConfig& cfg) {
    Tensor mag = stft_magnitude(wave, cfg);
    Tensor fb = mel_filterbank(cfg);
    int frames = mag.dim(1);
    int bins = mag.dim(0);

    Tensor out({cfg.n_mels, frames});
    for (int m = 0; m < cfg.n_mels; ++m) {
        for (int f = 0; f < frames; ++f) {
            double acc = 0.0;
            for (int b = 0; b < bins; ++b)
                acc += static_cast<double>(fb(m, b)) * mag(b, f);
            out(m, f) = static_cast<float>(std::log(std::max(acc, kLogFloor)));
        }
    }
    return out;
}

double multiscale_spec_distance(const Tensor& x, const Tensor& y) {
    check_wave(x, "multiscale_spec_distance");
    check_wave(y, "multiscale_spec_distance");
    if (x.dim(1) != y.dim(1))
        throw InputError("multiscale_spec_distance: length mismatch " +
                         std::to_string(x.dim(1)) + " vs " +
                         std::to_string(y.dim(1)));

    static const int sizes[] = {64, 128, 256, 512, 1024, 2048};
    double total = 0.0;
    for (int n_fft : sizes) {
        SpectrogramConfig cfg;
        cfg.n_fft = n_fft;
        cfg.win_length = n_fft;
        cfg.hop_length = n_fft / 4;
        Tensor sx = stft_magnitude(x, cfg);
        Tensor sy = stft_magnitude(y, cfg);
        double lin = 0.0, log_term = 0.0;
        for (size_t i = 0; i < sx.size(); ++i) {
            double a = sx.at(i), b = sy.at(i);
            lin += std::fabs(a - b);
            log_term += std::fabs(std::log(std::max(a, kLogFloor)) -
                                  std::log(std::max(b, kLogFloor)));
        }
        total += lin + log_term;
    }
    return total;
}

} // namespace nixforge
