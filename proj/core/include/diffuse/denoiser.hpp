#pragma once

#include <memory>
#include <vector>

#include "diffuse/grid.hpp"
#include "diffuse/schedule.hpp"

namespace diffuse {

// Noise-prediction contract. Implementations must be deterministic in
// (x_t, t) and safe to call concurrently from parallel samplers.
class Denoiser {
public:
    virtual ~Denoiser() = default;
    virtual Image predict_eps(const Image& x_t, int t) const = 0;
};

// Isotropic Gaussian prior N(mean, variance * I) over clean images.
struct GaussianPrior {
    Image mean;
    real variance = 1.0;  // > 0
};

struct GmmComponent {
    real weight = 1.0;  // > 0, weights sum to 1
    Image mean;
    real variance = 1.0;  // > 0
};

struct GmmPrior {
    std::vector<GmmComponent> components;
};

// (x_t - sqrt(1 - alpha_hats[t]) * eps_hat) / sqrt(alpha_hats[t])
Image eps_to_x0(const Image& x_t, const Image& eps_hat, int t, const NoiseSchedule& sched);

// Exact posterior-mean noise prediction under a Gaussian prior. Per-pixel
// affine in x_t, so it factorizes across pixels.
Image predict_eps_gaussian(const GaussianPrior& prior, const Image& x_t, int t,
                           const NoiseSchedule& sched);

// Mixture version: per-component posterior means combined with
// responsibilities computed from whole-image marginal likelihoods
// (log-domain).
Image predict_eps_gmm(const GmmPrior& prior, const Image& x_t, int t,
                      const NoiseSchedule& sched);

// Denoiser wrappers around the analytic priors. They hold a copy of the
// schedule so predict_eps needs only (x_t, t).
class GaussianDenoiser final : public Denoiser {
public:
    GaussianDenoiser(GaussianPrior prior, NoiseSchedule sched)
        : prior_(std::move(prior)), sched_(std::move(sched)) {}
    Image predict_eps(const Image& x_t, int t) const override {
        return predict_eps_gaussian(prior_, x_t, t, sched_);
    }
    const GaussianPrior& prior() const { return prior_; }

private:
    GaussianPrior prior_;
    NoiseSchedule sched_;
};

class GmmDenoiser final : public Denoiser {
public:
    GmmDenoiser(GmmPrior prior, NoiseSchedule sched);
    Image predict_eps(const Image& x_t, int t) const override {
        return predict_eps_gmm(prior_, x_t, t, sched_);
    }
    const GmmPrior& prior() const { return prior_; }

private:
    GmmPrior prior_;
    NoiseSchedule sched_;
};

}  // namespace diffuse
