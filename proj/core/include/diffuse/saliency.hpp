#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "diffuse/grid.hpp"
#include "diffuse/rng.hpp"

namespace diffuse {

// Logistic lesion-presence classifier over 4x4 average-pooled intensities.
struct LesionScorer {
    int height = 0, width = 0, channels = 0;
    int pool = 4;
    std::vector<real> weights;  // one per pooled feature
    real bias = 0.0;

    // Lesion probability in (0, 1).
    real score(const Image& x) const;
    std::vector<real> pooled_features(const Image& x) const;
};

struct SaliencyConfig {
    int patch = 8;        // occlusion window side
    int stride = 4;
    real fill = 0.0;      // occlusion fill value
    real sigma = 1.0;     // smoothing Gaussian sigma (5x5 kernel)
    real percentile = 90; // binarization percentile
};

struct ScorerTrainResult {
    LesionScorer scorer;
    real holdout_accuracy = 0.0;
};

// Logistic regression by gradient descent on image-level labels.
// Throws DataError when either class is missing.
ScorerTrainResult train_lesion_scorer(const std::vector<Image>& healthy,
                                      const std::vector<Image>& diseased,
                                      std::uint64_t seed);

// Occlusion saliency: max over covering windows of the score drop caused by
// occluding that window, floored at zero. Windows slide by cfg.stride and
// are clamped so the whole image is covered.
GrayMap occlusion_saliency(const Image& x, const LesionScorer& scorer,
                           const SaliencyConfig& cfg);

// Smooth with a normalized 5x5 Gaussian, threshold strictly above the
// cfg.percentile value of the smoothed map.
Mask make_mask(const GrayMap& saliency, const SaliencyConfig& cfg);

// Reads a channels=1 RFI file whose values are 0/1 up to 1e-3 tolerance.
Mask load_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const Mask& mask);

// Scorer persistence (JSON).
void save_scorer(const std::filesystem::path& path, const LesionScorer& scorer);
LesionScorer load_scorer(const std::filesystem::path& path);

}  // namespace diffuse
