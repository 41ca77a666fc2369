#include "nixforge/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nixforge/error.hpp"
#include "nixforge/ops.hpp"

namespace nixforge {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

int Durations::total_frames() const {
    int k = 0;
    for (int v : d) k += v;
    return k;
}

SoftAlignment soft_alignment(const Tensor& c_enc, const Tensor& x_enc) {
    require_rank(c_enc, 2, "soft_alignment c_enc");
    require_rank(x_enc, 2, "soft_alignment x_enc");
    if (c_enc.dim(1) != x_enc.dim(1))
        throw ShapeError("soft_alignment: embedding dim mismatch " +
                         c_enc.shape_str() + " vs " + x_enc.shape_str());

    int tokens = c_enc.dim(0);
    int frames = x_enc.dim(0);
    int dim = c_enc.dim(1);

    Tensor logits({frames, tokens});
    for (int k = 0; k < frames; ++k) {
        for (int j = 0; j < tokens; ++j) {
            double dist = 0.0;
            for (int i = 0; i < dim; ++i) {
                double diff = static_cast<double>(c_enc(j, i)) - x_enc(k, i);
                dist += diff * diff;
            }
            logits(k, j) = static_cast<float>(-dist);
        }
    }
    return SoftAlignment{softmax(logits, 1)};
}

HardAlignment mas(const SoftAlignment& soft) {
    int frames = soft.frames();
    int tokens = soft.tokens();
    if (tokens < 1 || frames < 1)
        throw InputError("mas: empty alignment");
    if (frames < tokens)
        throw InputError("mas: infeasible, " + std::to_string(frames) +
                         " frames for " + std::to_string(tokens) + " tokens");

    // q[k][j]: best prefix log-score over paths ending at token j in frame k.
    std::vector<std::vector<double>> q(
        static_cast<size_t>(frames),
        std::vector<double>(static_cast<size_t>(tokens), kNegInf));
    auto logp = [&](int k, int j) {
        return std::log(static_cast<double>(soft.probs(k, j)));
    };
    q[0][0] = logp(0, 0);
    for (int k = 1; k < frames; ++k) {
        // feasible token range at frame k
        int j_lo = std::max(0, tokens - 1 - (frames - 1 - k));
        int j_hi = std::min(k, tokens - 1);
        for (int j = j_lo; j <= j_hi; ++j) {
            double stay = q[k - 1][j];
            double advance = j > 0 ? q[k - 1][j - 1] : kNegInf;
            double best = std::max(stay, advance);
            if (best != kNegInf) q[k][j] = logp(k, j) + best;
        }
    }

    HardAlignment hard{Tensor({frames, tokens})};
    int j = tokens - 1;
    for (int k = frames - 1; k >= 0; --k) {
        hard.mask(k, j) = 1.0f;
        if (k == 0) break;
        // Prefer the diagonal predecessor on ties: the transition into the
        // current token happens as late as possible.
        if (j > 0 && q[k - 1][j - 1] >= q[k - 1][j]) --j;
    }
    return hard;
}

Durations durations_from_hard(const HardAlignment& hard) {
    int frames = hard.frames();
    int tokens = hard.tokens();
    Durations out;
    out.d.assign(static_cast<size_t>(tokens), 0);
    for (int k = 0; k < frames; ++k)
        for (int j = 0; j < tokens; ++j)
            if (hard.mask(k, j) != 0.0f) out.d[j] += 1;
    return out;
}

Tensor expand_by_durations(const Tensor& c_hidden, const Durations& d) {
    require_rank(c_hidden, 2, "expand_by_durations");
    int tokens = c_hidden.dim(0);
    int width = c_hidden.dim(1);
    if (static_cast<int>(d.d.size()) != tokens)
        throw InputError("expand_by_durations: " + std::to_string(d.d.size()) +
                         " durations for " + std::to_string(tokens) + " tokens");
    for (int v : d.d)
        if (v < 1)
            throw InputError("expand_by_durations: durations must be >= 1");

    Tensor out({d.total_frames(), width});
    int row = 0;
    for (int j = 0; j < tokens; ++j) {
        for (int r = 0; r < d.d[j]; ++r, ++row)
            for (int i = 0; i < width; ++i) out(row, i) = c_hidden(j, i);
    }
    return out;
}

ForwardSumResult forward_sum_loss(const Tensor& log_probs) {
    require_rank(log_probs, 2, "forward_sum_loss");
    int frames = log_probs.dim(0);
    int tokens = log_probs.dim(1);
    if (frames < tokens)
        return {std::numeric_limits<double>::infinity(), false};

    auto log_add = [](double a, double b) {
        if (a == kNegInf) return b;
        if (b == kNegInf) return a;
        double m = std::max(a, b);
        return m + std::log1p(std::exp(std::min(a, b) - m));
    };

    std::vector<double> prev(static_cast<size_t>(tokens), kNegInf);
    std::vector<double> cur(static_cast<size_t>(tokens), kNegInf);
    prev[0] = log_probs(0, 0);
    for (int k = 1; k < frames; ++k) {
        int j_lo = std::max(0, tokens - 1 - (frames - 1 - k));
        int j_hi = std::min(k, tokens - 1);
        std::fill(cur.begin(), cur.end(), kNegInf);
        for (int j = j_lo; j <= j_hi; ++j) {
            double mass = j > 0 ? log_add(prev[j], prev[j - 1]) : prev[j];
            if (mass != kNegInf)
                cur[j] = static_cast<double>(log_probs(k, j)) + mass;
        }
        std::swap(prev, cur);
    }
    return {-prev[static_cast<size_t>(tokens) - 1], true};
}

double binarization_loss(const SoftAlignment& soft, const HardAlignment& hard) {
    require_same_shape(soft.probs, hard.mask, "binarization_loss");
    int frames = soft.frames();
    int tokens = soft.tokens();
    double acc = 0.0;
    for (int k = 0; k < frames; ++k)
        for (int j = 0; j < tokens; ++j)
            if (hard.mask(k, j) != 0.0f)
                acc += std::log(static_cast<double>(soft.probs(k, j)));
    return -acc / frames;
}

double duration_loss(const Tensor& predicted_log_d, const Durations& d) {
    require_rank(predicted_log_d, 1, "duration_loss");
    if (predicted_log_d.dim(0) != static_cast<int>(d.d.size()))
        throw InputError("duration_loss: " +
                         std::to_string(predicted_log_d.dim(0)) +
                         " predictions for " + std::to_string(d.d.size()) +
                         " durations");
    double acc = 0.0;
    for (size_t j = 0; j < d.d.size(); ++j) {
        double diff = static_cast<double>(predicted_log_d(static_cast<int>(j))) -
                      std::log(static_cast<double>(d.d[j]));
        acc += diff * diff;
    }
    return acc / static_cast<double>(d.d.size());
}

} // namespace nixforge
