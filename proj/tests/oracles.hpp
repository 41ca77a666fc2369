#pragma once

// Brute-force reference implementations the test suites check the library
// against. Everything here is written for clarity over speed and stays
// independent of the code paths under test.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include "nixforge/conv.hpp"
#include "nixforge/gaussian.hpp"
#include "nixforge/rng.hpp"
#include "nixforge/tensor.hpp"

namespace oracles {

using nixforge::Conv1dSpec;
using nixforge::GaussianParams;
using nixforge::SplitMix64;
using nixforge::Tensor;

inline Tensor random_tensor(std::vector<int> dims, SplitMix64& rng,
                            double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(dims));
    for (auto& v : t.values()) v = static_cast<float>(rng.uniform(lo, hi));
    return t;
}

// Direct triple-loop cross-correlation.
inline Tensor conv1d_naive(const Tensor& x, const Conv1dSpec& s) {
    int batch = x.dim(0), t_in = x.dim(2);
    int t_out = nixforge::conv1d_output_length(t_in, s);
    Tensor out({batch, s.out_channels, t_out});
    for (int b = 0; b < batch; ++b)
        for (int oc = 0; oc < s.out_channels; ++oc)
            for (int t = 0; t < t_out; ++t) {
                double acc = s.bias.empty() ? 0.0 : s.bias(oc);
                for (int ic = 0; ic < s.in_channels; ++ic)
                    for (int k = 0; k < s.kernel_size; ++k) {
                        int pos = t * s.stride + k * s.dilation - s.padding;
                        if (pos >= 0 && pos < t_in)
                            acc += static_cast<double>(s.weight(oc, ic, k)) *
                                   x(b, ic, pos);
                    }
                out(b, oc, t) = static_cast<float>(acc);
            }
    return out;
}

// Scatter-add adjoint, weight laid out [in, out, K].
inline Tensor transposed_conv1d_naive(const Tensor& x, const Conv1dSpec& s) {
    int batch = x.dim(0), t_in = x.dim(2);
    int t_out = nixforge::transposed_conv1d_output_length(t_in, s);
    Tensor out({batch, s.out_channels, t_out});
    std::vector<double> acc(static_cast<size_t>(t_out));
    for (int b = 0; b < batch; ++b)
        for (int oc = 0; oc < s.out_channels; ++oc) {
            std::fill(acc.begin(), acc.end(),
                      s.bias.empty() ? 0.0 : s.bias(oc));
            for (int ic = 0; ic < s.in_channels; ++ic)
                for (int ti = 0; ti < t_in; ++ti)
                    for (int k = 0; k < s.kernel_size; ++k) {
                        int pos = ti * s.stride + k * s.dilation - s.padding;
                        if (pos >= 0 && pos < t_out)
                            acc[pos] += static_cast<double>(s.weight(ic, oc, k)) *
                                        x(b, ic, ti);
                    }
            for (int t = 0; t < t_out; ++t)
                out(b, oc, t) = static_cast<float>(acc[t]);
        }
    return out;
}

inline double max_rel_error(const Tensor& got, const Tensor& want) {
    double scale = 0.0;
    for (float v : want.values())
        scale = std::max(scale, static_cast<double>(std::fabs(v)));
    if (scale == 0.0) scale = 1.0;
    double worst = 0.0;
    for (size_t i = 0; i < got.size(); ++i)
        worst = std::max(worst,
                         std::fabs(static_cast<double>(got.at(i)) - want.at(i)) /
                             scale);
    return worst;
}

// O(n^2) DFT magnitudes of one already-windowed frame.
inline std::vector<double> dft_magnitude(const std::vector<double>& frame) {
    size_t n = frame.size();
    std::vector<double> mags(n / 2 + 1);
    for (size_t k = 0; k < mags.size(); ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (size_t t = 0; t < n; ++t) {
            double ang = -2.0 * M_PI * static_cast<double>(k * t) /
                         static_cast<double>(n);
            acc += frame[t] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        mags[k] = std::abs(acc);
    }
    return mags;
}

// All monotonic complete paths through a [K x J] grid, generated in
// lexicographic order ("stay" explored before "advance").
inline void enumerate_paths(int frames, int tokens,
                            const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> path(static_cast<size_t>(frames));
    std::function<void(int, int)> rec = [&](int k, int j) {
        path[k] = j;
        if (k == frames - 1) {
            if (j == tokens - 1) visit(path);
            return;
        }
        // feasibility: remaining tokens must fit into remaining frames
        int remaining_frames = frames - 1 - k;
        if (tokens - 1 - j <= remaining_frames) rec(k + 1, j);
        if (j + 1 < tokens && tokens - 1 - (j + 1) <= remaining_frames - 0)
            rec(k + 1, j + 1);
    };
    rec(0, 0);
}

struct BestPath {
    std::vector<int> path;
    double score = -std::numeric_limits<double>::infinity();
};

// Exhaustive MAS: maximum log-probability monotonic complete path; ties keep
// the lexicographically smallest path (the first one generated).
inline BestPath mas_brute_force(const Tensor& probs) {
    int frames = probs.dim(0), tokens = probs.dim(1);
    BestPath best;
    enumerate_paths(frames, tokens, [&](const std::vector<int>& path) {
        double score = 0.0;
        for (int k = 0; k < frames; ++k)
            score += std::log(static_cast<double>(probs(k, path[k])));
        if (score > best.score) {
            best.score = score;
            best.path = path;
        }
    });
    return best;
}

// log-sum-exp over all monotonic complete path scores of log_probs [K x J].
inline double forward_sum_brute_force(const Tensor& log_probs) {
    int frames = log_probs.dim(0), tokens = log_probs.dim(1);
    std::vector<double> scores;
    enumerate_paths(frames, tokens, [&](const std::vector<int>& path) {
        double score = 0.0;
        for (int k = 0; k < frames; ++k)
            score += static_cast<double>(log_probs(k, path[k]));
        scores.push_back(score);
    });
    double mx = -std::numeric_limits<double>::infinity();
    for (double s : scores) mx = std::max(mx, s);
    double acc = 0.0;
    for (double s : scores) acc += std::exp(s - mx);
    return -(mx + std::log(acc));
}

// Simpson quadrature of KL(N(mu_h, sigma_h^2) || N(mu_q, sigma_q^2)) for one
// cell.
inline double kl_quadrature(double mu_q, double sigma_q, double mu_h,
                            double sigma_h) {
    double lo = std::min(mu_q - 12.0 * sigma_q, mu_h - 12.0 * sigma_h);
    double hi = std::max(mu_q + 12.0 * sigma_q, mu_h + 12.0 * sigma_h);
    int n = 20000; // even
    double h = (hi - lo) / n;
    auto integrand = [&](double x) {
        double zq = (x - mu_q) / sigma_q;
        double zh = (x - mu_h) / sigma_h;
        double log_qh = -0.5 * zh * zh - std::log(sigma_h);
        double log_qq = -0.5 * zq * zq - std::log(sigma_q);
        double qh = std::exp(log_qh) / std::sqrt(2.0 * M_PI);
        return qh * (log_qh - log_qq);
    };
    double acc = integrand(lo) + integrand(hi);
    for (int i = 1; i < n; ++i)
        acc += integrand(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

} // namespace oracles
