#include "nixforge/losses.hpp"

#include <cmath>
#include <string>

#include "nixforge/error.hpp"
#include "nixforge/dsp.hpp"
#include "nixforge/rng.hpp"

namespace nixforge {

namespace {

void check_gaussian_pair(const GaussianParams& teacher,
                         const GaussianParams& student) {
    require_same_shape(teacher.mu, student.mu, "kl_gaussian");
    require_same_shape(teacher.mu, teacher.sigma, "kl_gaussian teacher");
    require_same_shape(student.mu, student.sigma, "kl_gaussian student");
    for (float s : teacher.sigma.values())
        if (!(s > 0.0f)) throw DomainError("kl_gaussian: teacher sigma <= 0");
    for (float s : student.sigma.values())
        if (!(s > 0.0f)) throw DomainError("kl_gaussian: student sigma <= 0");
}

} // namespace

double kl_gaussian(const GaussianParams& teacher, const GaussianParams& student) {
    check_gaussian_pair(teacher, student);
    size_t n = teacher.mu.size();
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double mu_q = teacher.mu.at(i);
        double sigma_q = teacher.sigma.at(i);
        double mu_h = student.mu.at(i);
        double sigma_h = student.sigma.at(i);
        double dmu = mu_h - mu_q;
        acc += -0.5 + std::log(sigma_q / sigma_h) +
               (sigma_h * sigma_h + dmu * dmu) / (2.0 * sigma_q * sigma_q);
    }
    return acc / static_cast<double>(n);
}

std::pair<Tensor, Tensor> kl_gaussian_grad(const GaussianParams& teacher,
                                           const GaussianParams& student) {
    check_gaussian_pair(teacher, student);
    size_t n = teacher.mu.size();
    double inv_n = 1.0 / static_cast<double>(n);
    Tensor d_mu = student.mu;
    Tensor d_sigma = student.sigma;
    for (size_t i = 0; i < n; ++i) {
        double mu_q = teacher.mu.at(i);
        double sigma_q = teacher.sigma.at(i);
        double mu_h = student.mu.at(i);
        double sigma_h = student.sigma.at(i);
        double var_q = sigma_q * sigma_q;
        d_mu.at(i) = static_cast<float>((mu_h - mu_q) / var_q * inv_n);
        d_sigma.at(i) =
            static_cast<float>((-1.0 / sigma_h + sigma_h / var_q) * inv_n);
    }
    return {std::move(d_mu), std::move(d_sigma)};
}

EncoderLossReport encoder_loss(const SoftAlignment& soft,
                               const HardAlignment& hard,
                               const GaussianParams& teacher,
                               const GaussianParams& student) {
    Tensor log_probs = soft.probs;
    for (auto& v : log_probs.values())
        v = static_cast<float>(std::log(static_cast<double>(v)));

    EncoderLossReport report;
    report.l_forward_sum = forward_sum_loss(log_probs).value;
    report.l_bin = binarization_loss(soft, hard);
    report.l_kl = kl_gaussian(teacher, student);
    report.total = report.l_forward_sum + report.l_bin + report.l_kl;
    return report;
}

std::pair<double, double> adversarial_losses(
    const std::vector<Tensor>& real_logits,
    const std::vector<Tensor>& fake_logits) {
    double real_acc = 0.0, fake_acc = 0.0, gen_acc = 0.0;
    size_t real_n = 0, fake_n = 0;
    for (const Tensor& t : real_logits) {
        for (float v : t.values()) {
            double d = static_cast<double>(v) - 1.0;
            real_acc += d * d;
        }
        real_n += t.size();
    }
    for (const Tensor& t : fake_logits) {
        for (float v : t.values()) {
            double d = v;
            fake_acc += d * d;
            double g = d - 1.0;
            gen_acc += g * g;
        }
        fake_n += t.size();
    }
    if (real_n == 0 || fake_n == 0)
        throw InputError("adversarial_losses: empty logits");
    double l_disc = real_acc / static_cast<double>(real_n) +
                    fake_acc / static_cast<double>(fake_n);
    double l_gen = gen_acc / static_cast<double>(fake_n);
    return {l_disc, l_gen};
}

std::pair<double, double> adversarial_losses(
    const std::vector<PeriodOutput>& real,
    const std::vector<PeriodOutput>& fake) {
    std::vector<Tensor> r, f;
    for (const auto& p : real) r.push_back(p.logits);
    for (const auto& p : fake) f.push_back(p.logits);
    return adversarial_losses(r, f);
}

double feature_matching_loss(
    const std::vector<std::vector<Tensor>>& real_fmaps,
    const std::vector<std::vector<Tensor>>& fake_fmaps) {
    if (real_fmaps.size() != fake_fmaps.size())
        throw InputError("feature_matching_loss: " +
                         std::to_string(real_fmaps.size()) + " vs " +
                         std::to_string(fake_fmaps.size()) + " period groups");
    double total = 0.0;
    for (size_t p = 0; p < real_fmaps.size(); ++p) {
        if (real_fmaps[p].size() != fake_fmaps[p].size())
            throw InputError("feature_matching_loss: layer count mismatch in "
                             "period group " + std::to_string(p));
        for (size_t l = 0; l < real_fmaps[p].size(); ++l) {
            const Tensor& a = real_fmaps[p][l];
            const Tensor& b = fake_fmaps[p][l];
            require_same_shape(a, b, "feature_matching_loss");
            double acc = 0.0;
            for (size_t i = 0; i < a.size(); ++i)
                acc += std::fabs(static_cast<double>(a.at(i)) - b.at(i));
            total += acc / static_cast<double>(a.size());
        }
    }
    return total;
}

double feature_matching_loss(const std::vector<PeriodOutput>& real,
                             const std::vector<PeriodOutput>& fake) {
    std::vector<std::vector<Tensor>> r, f;
    for (const auto& p : real) r.push_back(p.feature_maps);
    for (const auto& p : fake) f.push_back(p.feature_maps);
    return feature_matching_loss(r, f);
}

double recon_loss(const Tensor& x_m, const Tensor& y_m) {
    require_same_shape(x_m, y_m, "recon_loss");
    double acc = 0.0;
    for (size_t i = 0; i < x_m.size(); ++i)
        acc += std::fabs(static_cast<double>(x_m.at(i)) - y_m.at(i));
    return acc / static_cast<double>(x_m.size());
}

double ged_loss(const Tensor& x_w, const Tensor& a, const Tensor& b) {
    return 2.0 * multiscale_spec_distance(x_w, a) -
           multiscale_spec_distance(a, b);
}

DecoderLossReport decoder_loss(const Tensor& x_w, const Tensor& a,
                               const Tensor& b, const Tensor& x_m,
                               const Tensor& y_m,
                               const std::vector<PeriodOutput>& real,
                               const std::vector<PeriodOutput>& fake) {
    DecoderLossReport report;
    auto [l_disc, l_gen] = adversarial_losses(real, fake);
    report.l_adv_disc = l_disc;
    report.l_adv_gen = l_gen;
    report.l_fmatch = feature_matching_loss(real, fake);
    report.l_recon = recon_loss(x_m, y_m);
    report.l_ged = ged_loss(x_w, a, b);
    report.total = report.l_adv_disc + report.l_adv_gen + report.l_fmatch +
                   report.l_recon + report.l_ged;
    return report;
}

std::vector<double> fit_kl_demo(const GaussianParams& teacher,
                                const Tensor& hidden, Tensor proj_weight,
                                Tensor proj_bias, int steps, double lr) {
    require_rank(hidden, 2, "fit_kl_demo hidden");
    int channels = teacher.mu.dim(0);
    int frames = teacher.mu.dim(1);
    int width = hidden.dim(0);
    if (hidden.dim(1) != frames)
        throw ShapeError("fit_kl_demo: hidden shape " + hidden.shape_str() +
                         " vs teacher frames " + std::to_string(frames));
    if (proj_weight.rank() != 2 || proj_weight.dim(0) != 2 * channels ||
        proj_weight.dim(1) != width)
        throw ShapeError("fit_kl_demo: projection shape " +
                         proj_weight.shape_str() + " vs expected " +
                         shape_to_string({2 * channels, width}));
    if (proj_bias.rank() != 1 || proj_bias.dim(0) != 2 * channels)
        throw ShapeError("fit_kl_demo: bias shape " + proj_bias.shape_str());

    auto forward = [&](GaussianParams& student, Tensor& log_var) {
        for (int c = 0; c < channels; ++c) {
            for (int k = 0; k < frames; ++k) {
                double mu = proj_bias(c);
                double lv = proj_bias(c + channels);
                for (int h = 0; h < width; ++h) {
                    mu += static_cast<double>(proj_weight(c, h)) * hidden(h, k);
                    lv += static_cast<double>(proj_weight(c + channels, h)) *
                          hidden(h, k);
                }
                student.mu(c, k) = static_cast<float>(mu);
                log_var(c, k) = static_cast<float>(lv);
                student.sigma(c, k) = static_cast<float>(std::exp(0.5 * lv));
            }
        }
    };

    GaussianParams student{Tensor({channels, frames}), Tensor({channels, frames})};
    Tensor log_var({channels, frames});
    std::vector<double> trajectory;

    forward(student, log_var);
    trajectory.push_back(kl_gaussian(teacher, student));

    for (int step = 0; step < steps; ++step) {
        auto [d_mu, d_sigma] = kl_gaussian_grad(teacher, student);

        // Chain rule through sigma = exp(0.5 log_var) and the projection.
        for (int c = 0; c < channels; ++c) {
            double db_mu = 0.0, db_lv = 0.0;
            for (int k = 0; k < frames; ++k) {
                double g_mu = d_mu(c, k);
                double g_lv = static_cast<double>(d_sigma(c, k)) * 0.5 *
                              student.sigma(c, k);
                db_mu += g_mu;
                db_lv += g_lv;
            }
            for (int h = 0; h < width; ++h) {
                double dw_mu = 0.0, dw_lv = 0.0;
                for (int k = 0; k < frames; ++k) {
                    double g_mu = d_mu(c, k);
                    double g_lv = static_cast<double>(d_sigma(c, k)) * 0.5 *
                                  student.sigma(c, k);
                    dw_mu += g_mu * hidden(h, k);
                    dw_lv += g_lv * hidden(h, k);
                }
                proj_weight(c, h) -= static_cast<float>(lr * dw_mu);
                proj_weight(c + channels, h) -= static_cast<float>(lr * dw_lv);
            }
            proj_bias(c) -= static_cast<float>(lr * db_mu);
            proj_bias(c + channels) -= static_cast<float>(lr * db_lv);
        }

        forward(student, log_var);
        double loss = kl_gaussian(teacher, student);
        if (!std::isfinite(loss))
            throw DomainError("fit_kl_demo diverged at step " +
                              std::to_string(step + 1));
        trajectory.push_back(loss);
    }
    return trajectory;
}

std::vector<double> fit_kl_demo_default(uint64_t seed, int steps, double lr) {
    constexpr int channels = 4, width = 8, frames = 16;
    SplitMix64 rng(seed);

    GaussianParams teacher{Tensor({channels, frames}), Tensor({channels, frames})};
    for (size_t i = 0; i < teacher.mu.size(); ++i) {
        teacher.mu.at(i) = static_cast<float>(rng.uniform(-1.0, 1.0));
        teacher.sigma.at(i) = static_cast<float>(rng.uniform(0.5, 1.0));
    }
    Tensor hidden({width, frames});
    for (auto& v : hidden.values())
        v = static_cast<float>(rng.uniform(-1.0, 1.0));
    Tensor weight({2 * channels, width});
    double a = std::sqrt(1.0 / width);
    for (auto& v : weight.values())
        v = static_cast<float>(rng.uniform(-a, a));
    Tensor bias({2 * channels});

    return fit_kl_demo(teacher, hidden, std::move(weight), std::move(bias),
                       steps, lr);
}

} // namespace nixforge
