#pragma once

#include "nixforge/error.hpp"
#include "nixforge/tensor.hpp"

namespace nixforge {

// Per-frame diagonal Gaussian parameters, both [channels x frames].
// sigma is strictly positive whenever produced by this library.
struct GaussianParams {
    Tensor mu;
    Tensor sigma;

    int channels() const { return mu.dim(0); }
    int frames() const { return mu.dim(1); }

    void validate() const {
        require_same_shape(mu, sigma, "GaussianParams");
        require_rank(mu, 2, "GaussianParams");
        for (float s : sigma.values())
            if (!(s > 0.0f))
                throw DomainError("GaussianParams: sigma must be strictly positive");
        if (!mu.all_finite() || !sigma.all_finite())
            throw DomainError("GaussianParams: non-finite values");
    }
};

} // namespace nixforge
