#include "diffuse/sampler.hpp"

#include <cmath>
#include <string>

namespace diffuse {

namespace {

void check_step_index(int t, const NoiseSchedule& sched, const char* what) {
    if (t < 0 || t >= sched.T) {
        throw ParameterError(std::string(what) + ": t out of range: " + std::to_string(t));
    }
}

void check_depth(int K, const NoiseSchedule& sched, const char* what) {
    if (K < 1 || K > sched.T) {
        throw ParameterError(std::string(what) + ": K out of range: " + std::to_string(K));
    }
}

// Shared body of the two reverse steps; sigma = 0 gives the deterministic one.
Image reverse_step(const Image& x_t, int t, const Denoiser& den, const NoiseSchedule& sched,
                   real sigma, StreamRng* rng) {
    const Image eps_hat = den.predict_eps(x_t, t);
    const real ah = sched.alpha_hats[t];
    const real ah_prev = sched.alpha_hat_prev(t);
    const real signal = std::sqrt(ah);
    const real noise = std::sqrt(1.0 - ah);
    real dir_sq = 1.0 - ah_prev - sigma * sigma;
    if (dir_sq < 0.0) {
        if (dir_sq < -1e-9) {
            throw InternalError("reverse step: sigma_t^2 exceeds 1 - alpha_hat_{t-1}");
        }
        dir_sq = 0.0;
    }
    const real prev_signal = std::sqrt(ah_prev);
    const real dir = std::sqrt(dir_sq);
    Image out(x_t.height, x_t.width, x_t.channels);
    for (size_t i = 0; i < out.data.size(); ++i) {
        const real x0_hat = (x_t.data[i] - noise * eps_hat.data[i]) / signal;
        out.data[i] = prev_signal * x0_hat + dir * eps_hat.data[i];
    }
    if (sigma > 0.0) {
        for (real& v : out.data) v += sigma * rng->next_normal();
    }
    return out;
}

}  // namespace

SamplerVariant parse_variant(const std::string& name) {
    if (name == "diffuse") return SamplerVariant::diffuse;
    if (name == "ddpm") return SamplerVariant::ddpm;
    if (name == "ddim") return SamplerVariant::ddim;
    if (name == "ddim_ddpm") return SamplerVariant::ddim_ddpm;
    if (name == "ddpm_ddim") return SamplerVariant::ddpm_ddim;
    throw ParameterError("unknown sampler variant: " + name);
}

std::string variant_name(SamplerVariant v) {
    switch (v) {
        case SamplerVariant::diffuse: return "diffuse";
        case SamplerVariant::ddpm: return "ddpm";
        case SamplerVariant::ddim: return "ddim";
        case SamplerVariant::ddim_ddpm: return "ddim_ddpm";
        case SamplerVariant::ddpm_ddim: return "ddpm_ddim";
    }
    throw InternalError("variant_name: bad enum value");
}

Image ddpm_step(const Image& x_t, int t, const Denoiser& den, const NoiseSchedule& sched,
                StreamRng& rng) {
    check_step_index(t, sched, "ddpm_step");
    return reverse_step(x_t, t, den, sched, sched.ddpm_sigmas[t], &rng);
}

Image ddim_step(const Image& x_t, int t, const Denoiser& den, const NoiseSchedule& sched) {
    check_step_index(t, sched, "ddim_step");
    return reverse_step(x_t, t, den, sched, 0.0, nullptr);
}

Image ddim_invert(const Image& x0, int K, const Denoiser& den, const NoiseSchedule& sched) {
    check_depth(K, sched, "ddim_invert");
    Image x = x0;
    for (int t = 0; t < K; ++t) {
        // climb level t -> t+1; eps_hat extrapolated from the current state
        const Image eps_hat = den.predict_eps(x, t);
        const real ah_cur = sched.alpha_hat_prev(t);  // 1 at t = 0
        const real ah_next = sched.alpha_hats[t];
        const real ratio = std::sqrt(ah_next / ah_cur);
        const real coef = std::sqrt(1.0 - ah_next) - ratio * std::sqrt(1.0 - ah_cur);
        for (size_t i = 0; i < x.data.size(); ++i) {
            x.data[i] = ratio * x.data[i] + coef * eps_hat.data[i];
        }
    }
    return x;
}

Image ddpm_chain(const Image& x_K, int K, const Denoiser& den, const NoiseSchedule& sched,
                 StreamRng& rng, const StepObserver& observe) {
    check_depth(K, sched, "ddpm_chain");
    Image x = x_K;
    for (int t = K - 1; t >= 0; --t) {
        x = ddpm_step(x, t, den, sched, rng);
        if (observe) observe(t, x);
    }
    return x;
}

Image ddim_chain(const Image& x_K, int K, const Denoiser& den, const NoiseSchedule& sched,
                 const StepObserver& observe) {
    check_depth(K, sched, "ddim_chain");
    Image x = x_K;
    for (int t = K - 1; t >= 0; --t) {
        x = ddim_step(x, t, den, sched);
        if (observe) observe(t, x);
    }
    return x;
}

Image diffuse_counterfactual(const Image& x0, const Mask& m, int K, const Denoiser& den,
                             const NoiseSchedule& sched, StreamRng& rng,
                             const StepObserver& observe) {
    check_depth(K, sched, "diffuse_counterfactual");
    if (m.height != x0.height || m.width != x0.width) {
        throw DimensionError("diffuse_counterfactual: mask does not match image");
    }
    Image x = ddim_invert(x0, K, den, sched);
    for (int t = K - 1; t >= 0; --t) {
        // both branches advance the same fused latent
        const Image stochastic = ddpm_step(x, t, den, sched, rng);
        const Image deterministic = ddim_step(x, t, den, sched);
        x = hadamard_mix(stochastic, deterministic, m);
        if (observe) observe(t, x);
    }
    require_finite(x, "diffuse_counterfactual");
    return x;
}

Image ablation_pipeline(SamplerVariant variant, const Image& x0, int K, const Denoiser& den,
                        const NoiseSchedule& sched, StreamRng& rng) {
    if (K == 0) return x0;  // identity, accepted for sweep convenience
    check_depth(K, sched, "ablation_pipeline");
    auto forward_noise = [&] {
        Image eps(x0.height, x0.width, x0.channels);
        for (real& v : eps.data) v = rng.next_normal();
        return q_sample(x0, K - 1, eps, sched);
    };
    switch (variant) {
        case SamplerVariant::ddpm:
            return ddpm_chain(forward_noise(), K, den, sched, rng);
        case SamplerVariant::ddim_ddpm:
            return ddpm_chain(ddim_invert(x0, K, den, sched), K, den, sched, rng);
        case SamplerVariant::ddpm_ddim:
            return ddim_chain(forward_noise(), K, den, sched);
        case SamplerVariant::ddim:
            return ddim_chain(ddim_invert(x0, K, den, sched), K, den, sched);
        case SamplerVariant::diffuse:
            throw ParameterError("ablation_pipeline: 'diffuse' needs a mask; use diffuse_counterfactual");
    }
    throw InternalError("ablation_pipeline: bad enum value");
}

}  // namespace diffuse
