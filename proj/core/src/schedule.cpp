#include "diffuse/schedule.hpp"

#include <cmath>
#include <string>

namespace diffuse {

NoiseSchedule linear_schedule(int T, real beta_first, real beta_last) {
    if (T < 2) throw ParameterError("linear_schedule: T must be >= 2");
    if (!(beta_first > 0.0 && beta_first <= beta_last && beta_last < 1.0)) {
        throw ParameterError("linear_schedule: need 0 < beta_first <= beta_last < 1");
    }
    NoiseSchedule s;
    s.T = T;
    s.betas.resize(T);
    s.alphas.resize(T);
    s.alpha_hats.resize(T);
    s.ddpm_sigmas.resize(T);
    real prod = 1.0;
    for (int t = 0; t < T; ++t) {
        const real frac = static_cast<real>(t) / static_cast<real>(T - 1);
        s.betas[t] = beta_first + (beta_last - beta_first) * frac;
        s.alphas[t] = 1.0 - s.betas[t];
        prod *= s.alphas[t];
        s.alpha_hats[t] = prod;
    }
    for (int t = 0; t < T; ++t) {
        const real ah = s.alpha_hats[t];
        const real ah_prev = s.alpha_hat_prev(t);
        s.ddpm_sigmas[t] = std::sqrt((1.0 - ah_prev) / (1.0 - ah)) * std::sqrt(1.0 - ah / ah_prev);
    }
    return s;
}

Image q_sample(const Image& x0, int t, const Image& eps, const NoiseSchedule& sched) {
    if (!x0.same_shape(eps)) throw DimensionError("q_sample: eps shape differs from x0");
    if (t < 0 || t >= sched.T) {
        throw ParameterError("q_sample: t out of range: " + std::to_string(t));
    }
    const real signal = std::sqrt(sched.alpha_hats[t]);
    const real noise = std::sqrt(1.0 - sched.alpha_hats[t]);
    Image out(x0.height, x0.width, x0.channels);
    for (size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = signal * x0.data[i] + noise * eps.data[i];
    }
    return out;
}

}  // namespace diffuse
