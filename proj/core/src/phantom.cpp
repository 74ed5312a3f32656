#include "diffuse/phantom.hpp"

#include <algorithm>
#include <cmath>

#include "diffuse/rng.hpp"

namespace diffuse {

namespace {

constexpr real kTwoPi = 6.283185307179586477;

struct LowFreqField {
    // smooth texture as a short sum of random plane cosines
    struct Wave {
        real kx, ky, phase, amp;
    };
    std::vector<Wave> waves;

    static LowFreqField sample(StreamRng& rng, int side, real amplitude) {
        LowFreqField f;
        f.waves.resize(4);
        real total = 0.0;
        for (auto& w : f.waves) {
            const real cycles = 0.5 + 1.5 * rng.next_unit();  // <= 2 cycles across the image
            const real angle = kTwoPi * rng.next_unit();
            w.kx = kTwoPi * cycles * std::cos(angle) / side;
            w.ky = kTwoPi * cycles * std::sin(angle) / side;
            w.phase = kTwoPi * rng.next_unit();
            w.amp = 0.5 + rng.next_unit();
            total += w.amp;
        }
        for (auto& w : f.waves) w.amp *= amplitude / total;
        return f;
    }

    real at(real x, real y) const {
        real v = 0.0;
        for (const auto& w : waves) v += w.amp * std::cos(w.kx * x + w.ky * y + w.phase);
        return v;
    }
};

void validate(const PhantomParams& p) {
    if (p.side < 16) throw ParameterError("phantom: side must be >= 16");
    if (p.channels < 1) throw ParameterError("phantom: channels must be positive");
    if (p.lesion_radius_min < 2.0 || p.lesion_radius_max < p.lesion_radius_min) {
        throw ParameterError("phantom: lesion radius range invalid (min >= 2)");
    }
    if (!(p.lesion_contrast_min > p.texture_amplitude)) {
        throw ParameterError("phantom: lesion contrast must exceed texture amplitude");
    }
    if (!(p.lesion_probability >= 0.0 && p.lesion_probability <= 1.0)) {
        throw ParameterError("phantom: lesion probability outside [0, 1]");
    }
}

}  // namespace

LabeledSample generate_sample(const PhantomParams& params, std::uint64_t index) {
    validate(params);
    StreamRng rng(params.seed, "phantom", index);
    const int side = params.side;

    // skull ellipse
    const real cx = side * (0.5 + 0.02 * (rng.next_unit() - 0.5));
    const real cy = side * (0.5 + 0.02 * (rng.next_unit() - 0.5));
    const real span = params.skull_axis_max - params.skull_axis_min;
    const real ax = side * (params.skull_axis_min + span * rng.next_unit());
    const real ay = side * (params.skull_axis_min + span * rng.next_unit());

    LowFreqField texture = LowFreqField::sample(rng, side, params.texture_amplitude);

    // per-channel contrast factors; channel 0 is the reference modality
    std::vector<real> channel_gain(static_cast<size_t>(params.channels), 1.0);
    for (size_t ch = 1; ch < channel_gain.size(); ++ch) {
        channel_gain[ch] = 0.6 + 0.4 * rng.next_unit();
    }

    const bool diseased = rng.next_unit() < params.lesion_probability;

    // lesion geometry: disc with an angularly modulated radius, centered so
    // that even the largest modulated radius stays inside the skull
    real lesion_cx = 0.0, lesion_cy = 0.0, lesion_r = 0.0, lesion_contrast = 0.0;
    real harmonics[3] = {0.0, 0.0, 0.0};
    real phases[3] = {0.0, 0.0, 0.0};
    if (diseased) {
        lesion_r = params.lesion_radius_min +
                   (params.lesion_radius_max - params.lesion_radius_min) * rng.next_unit();
        lesion_contrast = params.lesion_contrast_min +
                          (params.lesion_contrast_max - params.lesion_contrast_min) * rng.next_unit();
        for (int k = 0; k < 3; ++k) {
            harmonics[k] = 0.05 * rng.next_unit();
            phases[k] = kTwoPi * rng.next_unit();
        }
        // center inside the ellipse scaled by lambda: any point within
        // `margin` of it stays inside the skull (elliptic-norm triangle
        // inequality), so the blob is never clipped
        const real margin = 1.25 * lesion_r;
        const real lambda = std::max(0.0, 1.0 - margin / std::min(ax, ay));
        const real rho = std::sqrt(rng.next_unit());
        const real theta = kTwoPi * rng.next_unit();
        lesion_cx = cx + ax * lambda * rho * std::cos(theta);
        lesion_cy = cy + ay * lambda * rho * std::sin(theta);
    }

    LabeledSample sample;
    sample.image = Image(side, side, params.channels);
    sample.label = diseased ? Label::diseased : Label::healthy;
    sample.gt_mask = Mask(side, side, 0);

    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            const real dx = (c - cx) / ax;
            const real dy = (r - cy) / ay;
            const bool inside = dx * dx + dy * dy <= 1.0;
            if (!inside) continue;  // background stays exactly 0

            real base = params.tissue_base + texture.at(c, r);
            real lesion_add = 0.0;
            if (diseased) {
                const real lx = c - lesion_cx;
                const real ly = r - lesion_cy;
                const real dist = std::sqrt(lx * lx + ly * ly);
                const real angle = std::atan2(ly, lx);
                real mod = 1.0;
                for (int k = 0; k < 3; ++k) {
                    mod += harmonics[k] * std::cos((k + 2) * angle + phases[k]);
                }
                if (dist <= lesion_r * mod) {
                    lesion_add = lesion_contrast;
                    sample.gt_mask.at(r, c) = 1;
                }
            }
            for (int ch = 0; ch < params.channels; ++ch) {
                const real v = (base + lesion_add) * channel_gain[static_cast<size_t>(ch)];
                sample.image.at(r, c, ch) = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return sample;
}

DatasetSplit generate_split(const PhantomParams& params, int n_train, int n_val, int n_test) {
    if (n_train < 0 || n_val < 0 || n_test < 0) {
        throw ParameterError("generate_split: negative counts");
    }
    DatasetSplit split;
    std::uint64_t index = 0;
    auto fill = [&](std::vector<LabeledSample>& out, int n) {
        out.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) out.push_back(generate_sample(params, index++));
    };
    fill(split.train, n_train);
    fill(split.val, n_val);
    fill(split.test, n_test);
    return split;
}

std::vector<Image> healthy_images(const std::vector<LabeledSample>& samples) {
    std::vector<Image> out;
    for (const auto& s : samples) {
        if (s.label == Label::healthy) out.push_back(s.image);
    }
    return out;
}

}  // namespace diffuse
