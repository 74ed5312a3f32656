#pragma once

#include <vector>

#include "diffuse/grid.hpp"

namespace diffuse {

// Precomputed diffusion noise schedule.
//
// Timesteps are 0-indexed: t in [0, T). alpha_hats[t] is the cumulative
// signal retention after t+1 noising factors; the clean image sits at the
// alpha_hat_prev(0) = 1 boundary. ddpm_sigmas[t] is the stochastic step
// width of the ancestral sampler; ddpm_sigmas[0] = 0, so the last reverse
// step is noiseless.
struct NoiseSchedule {
    int T = 0;
    std::vector<real> betas;
    std::vector<real> alphas;       // 1 - beta_t
    std::vector<real> alpha_hats;   // prod_{s<=t} alpha_s
    std::vector<real> ddpm_sigmas;  // sqrt((1-ah_{t-1})/(1-ah_t)) * sqrt(1 - ah_t/ah_{t-1})

    // alpha_hat with the -1 boundary: t=0 -> 1, else alpha_hats[t-1].
    real alpha_hat_prev(int t) const { return t == 0 ? 1.0 : alpha_hats[t - 1]; }
};

// Linear beta ramp from beta_first to beta_last inclusive, T >= 2.
NoiseSchedule linear_schedule(int T, real beta_first, real beta_last);

// Forward (noising) sample: sqrt(alpha_hats[t]) * x0 + sqrt(1 - alpha_hats[t]) * eps.
Image q_sample(const Image& x0, int t, const Image& eps, const NoiseSchedule& sched);

}  // namespace diffuse
