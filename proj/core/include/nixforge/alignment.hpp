#pragma once

#include <vector>

#include "nixforge/tensor.hpp"

namespace nixforge {

// Frame-over-token probabilities, [K frames x J tokens], rows sum to 1.
struct SoftAlignment {
    Tensor probs;

    int frames() const { return probs.dim(0); }
    int tokens() const { return probs.dim(1); }
};

// Monotonic complete binarization of a SoftAlignment: one token per frame,
// non-decreasing, starting at token 0 and ending at the last token.
struct HardAlignment {
    Tensor mask; // [K x J], entries 0 or 1

    int frames() const { return mask.dim(0); }
    int tokens() const { return mask.dim(1); }
};

struct Durations {
    std::vector<int> d; // one entry per token, each >= 1

    int total_frames() const;
};

// probs[k,j] = softmax_j(-||c_enc[j] - x_enc[k]||^2). Inputs are [J x D] and
// [K x D] with a shared embedding dimension.
SoftAlignment soft_alignment(const Tensor& c_enc, const Tensor& x_enc);

// Viterbi-style dynamic program over log probs[k, path(k)] restricted to
// monotonic complete paths. Score ties are resolved toward advancing as late
// as possible (the pointwise-minimal optimal path). Requires K >= J.
HardAlignment mas(const SoftAlignment& soft);

Durations durations_from_hard(const HardAlignment& hard);

// Repeats row j of c_hidden [J x H] d[j] times; equals mask^T-free expansion
// of A_hard * c_hidden.
Tensor expand_by_durations(const Tensor& c_hidden, const Durations& d);

// Total log-probability mass over all monotonic complete paths through
// log_probs [K x J], negated. Computed with a log-space forward recursion.
// K < J has no feasible path: feasible=false and value +infinity.
struct ForwardSumResult {
    double value = 0.0;
    bool feasible = true;
};
ForwardSumResult forward_sum_loss(const Tensor& log_probs);

// -(1/K) sum of log probs over the hard path (KL between hard and soft).
double binarization_loss(const SoftAlignment& soft, const HardAlignment& hard);

// Mean squared error between predicted log-durations and log of the target
// durations.
double duration_loss(const Tensor& predicted_log_d, const Durations& d);

} // namespace nixforge
