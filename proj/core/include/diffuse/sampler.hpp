#pragma once

#include <functional>
#include <string>

#include "diffuse/denoiser.hpp"
#include "diffuse/grid.hpp"
#include "diffuse/rng.hpp"
#include "diffuse/schedule.hpp"

namespace diffuse {

enum class SamplerVariant { diffuse, ddpm, ddim, ddim_ddpm, ddpm_ddim };

SamplerVariant parse_variant(const std::string& name);  // ParameterError on unknown
std::string variant_name(SamplerVariant v);

// One stochastic (ancestral) reverse step, t in [0, T): maps a latent with
// signal factor alpha_hats[t] to one with factor alpha_hat_prev(t). The
// t = 0 step has sigma = 0, draws no noise, and lands on the clean estimate.
Image ddpm_step(const Image& x_t, int t, const Denoiser& den, const NoiseSchedule& sched,
                StreamRng& rng);

// Deterministic reverse step (sigma = 0).
Image ddim_step(const Image& x_t, int t, const Denoiser& den, const NoiseSchedule& sched);

// Deterministic inversion: climbs the same ladder the reverse steps descend,
// applying the forward recurrence for t = 0 .. K-1 and returning x_K.
// K in [1, T]; step t extrapolates with eps_hat evaluated at the current
// (less-noised) state, the usual inversion approximation.
Image ddim_invert(const Image& x0, int K, const Denoiser& den, const NoiseSchedule& sched);

// Optional per-step observer for trace dumps: called as (t, latent) after
// every reverse step.
using StepObserver = std::function<void(int, const Image&)>;

// Masked dual sampling: DDIM inversion to x_K, then for t = K-1 .. 0 both
// branch steps are computed from the same fused latent and recombined as
// ddpm*m + ddim*(1-m). Returns the counterfactual x_hat_0.
Image diffuse_counterfactual(const Image& x0, const Mask& m, int K, const Denoiser& den,
                             const NoiseSchedule& sched, StreamRng& rng,
                             const StepObserver& observe = nullptr);

// Unmasked pipelines used by the ablation study:
//   ddpm      - forward q_sample noising, then the stochastic chain
//   ddim_ddpm - DDIM inversion, then the stochastic chain
//   ddpm_ddim - forward q_sample noising, then the deterministic chain
//   ddim      - DDIM inversion, then the deterministic chain
// `variant` must be one of the four above; K = 0 is accepted as identity.
Image ablation_pipeline(SamplerVariant variant, const Image& x0, int K, const Denoiser& den,
                        const NoiseSchedule& sched, StreamRng& rng);

// Reverse chains from an explicit latent x_K (exposed for tests and the
// mask-degeneracy checks).
Image ddpm_chain(const Image& x_K, int K, const Denoiser& den, const NoiseSchedule& sched,
                 StreamRng& rng, const StepObserver& observe = nullptr);
Image ddim_chain(const Image& x_K, int K, const Denoiser& den, const NoiseSchedule& sched,
                 const StepObserver& observe = nullptr);

}  // namespace diffuse
