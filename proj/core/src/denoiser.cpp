#include "diffuse/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace diffuse {

namespace {

constexpr real kLog2Pi = 1.8378770664093454836;

void check_t(int t, const NoiseSchedule& sched, const char* what) {
    if (t < 0 || t >= sched.T) {
        throw ParameterError(std::string(what) + ": t out of range: " + std::to_string(t));
    }
}

}  // namespace

Image eps_to_x0(const Image& x_t, const Image& eps_hat, int t, const NoiseSchedule& sched) {
    if (!x_t.same_shape(eps_hat)) throw DimensionError("eps_to_x0: shape mismatch");
    check_t(t, sched, "eps_to_x0");
    const real ah = sched.alpha_hats[t];
    const real signal = std::sqrt(ah);
    const real noise = std::sqrt(1.0 - ah);
    Image out(x_t.height, x_t.width, x_t.channels);
    for (size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = (x_t.data[i] - noise * eps_hat.data[i]) / signal;
    }
    return out;
}

Image predict_eps_gaussian(const GaussianPrior& prior, const Image& x_t, int t,
                           const NoiseSchedule& sched) {
    if (!x_t.same_shape(prior.mean)) throw DimensionError("predict_eps_gaussian: shape mismatch");
    check_t(t, sched, "predict_eps_gaussian");
    const real ah = sched.alpha_hats[t];
    const real sa = std::sqrt(ah);
    const real noise = std::sqrt(1.0 - ah);
    const real s2 = prior.variance;
    // posterior mean of x0 given x_t: mu + gain * (x_t - sqrt(ah) mu)
    const real gain = sa * s2 / (ah * s2 + (1.0 - ah));
    Image out(x_t.height, x_t.width, x_t.channels);
    for (size_t i = 0; i < out.data.size(); ++i) {
        const real mu = prior.mean.data[i];
        const real x0_post = mu + gain * (x_t.data[i] - sa * mu);
        out.data[i] = (x_t.data[i] - sa * x0_post) / noise;
    }
    return out;
}

Image predict_eps_gmm(const GmmPrior& prior, const Image& x_t, int t,
                      const NoiseSchedule& sched) {
    if (prior.components.empty()) throw ParameterError("predict_eps_gmm: no components");
    check_t(t, sched, "predict_eps_gmm");
    for (const auto& comp : prior.components) {
        if (!x_t.same_shape(comp.mean)) throw DimensionError("predict_eps_gmm: shape mismatch");
    }
    const real ah = sched.alpha_hats[t];
    const real sa = std::sqrt(ah);
    const real noise = std::sqrt(1.0 - ah);
    const size_t n = x_t.data.size();
    const size_t n_comp = prior.components.size();

    // log marginal likelihood of x_t under each component:
    // x_t | k ~ N(sqrt(ah) mu_k, (ah s_k^2 + 1 - ah) I)
    std::vector<real> log_lik(n_comp);
    for (size_t k = 0; k < n_comp; ++k) {
        const auto& comp = prior.components[k];
        const real v = ah * comp.variance + (1.0 - ah);
        real quad = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const real d = x_t.data[i] - sa * comp.mean.data[i];
            quad += d * d;
        }
        log_lik[k] = std::log(comp.weight) -
                     0.5 * (quad / v + static_cast<real>(n) * (std::log(v) + kLog2Pi));
    }
    const real log_max = *std::max_element(log_lik.begin(), log_lik.end());
    std::vector<real> resp(n_comp);
    real norm = 0.0;
    for (size_t k = 0; k < n_comp; ++k) {
        resp[k] = std::exp(log_lik[k] - log_max);
        norm += resp[k];
    }
    for (real& r : resp) r /= norm;

    Image x0_post(x_t.height, x_t.width, x_t.channels, 0.0);
    for (size_t k = 0; k < n_comp; ++k) {
        const auto& comp = prior.components[k];
        const real gain = sa * comp.variance / (ah * comp.variance + (1.0 - ah));
        for (size_t i = 0; i < n; ++i) {
            const real mu = comp.mean.data[i];
            x0_post.data[i] += resp[k] * (mu + gain * (x_t.data[i] - sa * mu));
        }
    }
    Image out(x_t.height, x_t.width, x_t.channels);
    for (size_t i = 0; i < n; ++i) {
        out.data[i] = (x_t.data[i] - sa * x0_post.data[i]) / noise;
    }
    return out;
}

GmmDenoiser::GmmDenoiser(GmmPrior prior, NoiseSchedule sched)
    : prior_(std::move(prior)), sched_(std::move(sched)) {
    real total = 0.0;
    for (const auto& comp : prior_.components) {
        if (!(comp.weight > 0.0)) throw ParameterError("GmmDenoiser: weights must be positive");
        if (!(comp.variance > 0.0)) throw ParameterError("GmmDenoiser: variances must be positive");
        total += comp.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ParameterError("GmmDenoiser: weights must sum to 1");
    }
}

}  // namespace diffuse
