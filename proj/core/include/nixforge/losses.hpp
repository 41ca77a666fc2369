#pragma once

#include <utility>
#include <vector>

#include "nixforge/alignment.hpp"
#include "nixforge/discriminator.hpp"
#include "nixforge/gaussian.hpp"
#include "nixforge/tensor.hpp"

namespace nixforge {

struct EncoderLossReport {
    double l_forward_sum = 0.0;
    double l_bin = 0.0;
    double l_kl = 0.0;
    double total = 0.0;
};

struct DecoderLossReport {
    double l_adv_disc = 0.0;
    double l_adv_gen = 0.0;
    double l_fmatch = 0.0;
    double l_recon = 0.0;
    double l_ged = 0.0;
    double total = 0.0;
};

// Closed-form KL divergence N(student) || N(teacher), averaged over cells:
// mean[-1/2 + log(sigma_q/sigma_hat) + (sigma_hat^2 + (mu_hat-mu_q)^2) /
// (2 sigma_q^2)].
double kl_gaussian(const GaussianParams& teacher, const GaussianParams& student);

// Analytic gradient of kl_gaussian with respect to the student parameters,
// including the 1/N mean scaling: (d/dmu_hat, d/dsigma_hat).
std::pair<Tensor, Tensor> kl_gaussian_grad(const GaussianParams& teacher,
                                           const GaussianParams& student);

EncoderLossReport encoder_loss(const SoftAlignment& soft,
                               const HardAlignment& hard,
                               const GaussianParams& teacher,
                               const GaussianParams& student);

// Least-squares GAN objectives over per-period logits:
// disc: mean[(real-1)^2] + mean[fake^2]; gen: mean[(fake-1)^2].
std::pair<double, double> adversarial_losses(
    const std::vector<Tensor>& real_logits,
    const std::vector<Tensor>& fake_logits);
std::pair<double, double> adversarial_losses(
    const std::vector<PeriodOutput>& real, const std::vector<PeriodOutput>& fake);

// Sum over periods and layers of L1(real_l - fake_l) / n_l.
double feature_matching_loss(
    const std::vector<std::vector<Tensor>>& real_fmaps,
    const std::vector<std::vector<Tensor>>& fake_fmaps);
double feature_matching_loss(const std::vector<PeriodOutput>& real,
                             const std::vector<PeriodOutput>& fake);

// Mean absolute mel-spectrogram difference.
double recon_loss(const Tensor& x_m, const Tensor& y_m);

// Generalized energy distance over the multi-scale spectrogram metric:
// 2 d(x, a) - d(a, b).
double ged_loss(const Tensor& x_w, const Tensor& a, const Tensor& b);

DecoderLossReport decoder_loss(const Tensor& x_w, const Tensor& a,
                               const Tensor& b, const Tensor& x_m,
                               const Tensor& y_m,
                               const std::vector<PeriodOutput>& real,
                               const std::vector<PeriodOutput>& fake);

// Plain gradient descent on a 1x1 projection that maps `hidden` [H x K] to
// student Gaussian parameters, driven by kl_gaussian_grad chained through the
// projection. Returns the per-step loss, index 0 being the starting loss.
// Throws DomainError naming the step if the loss leaves the finite range.
std::vector<double> fit_kl_demo(const GaussianParams& teacher,
                                const Tensor& hidden, Tensor proj_weight,
                                Tensor proj_bias, int steps, double lr);

// Seeded default instance of the demo (small synthetic teacher and hidden).
std::vector<double> fit_kl_demo_default(uint64_t seed, int steps, double lr);

} // namespace nixforge
