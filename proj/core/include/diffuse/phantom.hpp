#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diffuse/grid.hpp"

namespace diffuse {

// Procedural brain-like phantom: elliptical "skull" boundary, smooth tissue
// texture inside, exact-zero background, optional bright lesion blob with
// an irregular boundary recorded in gt_mask.
struct PhantomParams {
    int side = 32;
    int channels = 1;
    real skull_axis_min = 0.32;  // fraction of side
    real skull_axis_max = 0.42;
    real tissue_base = 0.45;
    real texture_amplitude = 0.08;
    real lesion_probability = 0.5;
    real lesion_radius_min = 3.0;  // pixels, >= 2
    real lesion_radius_max = 5.0;
    real lesion_contrast_min = 0.30;  // must exceed texture_amplitude
    real lesion_contrast_max = 0.45;
    std::uint64_t seed = 0;
};

enum class Label { healthy, diseased };

struct LabeledSample {
    Image image;
    Label label = Label::healthy;
    Mask gt_mask;  // empty for healthy samples
};

// Deterministic function of (params.seed, index).
LabeledSample generate_sample(const PhantomParams& params, std::uint64_t index);

struct DatasetSplit {
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> val;
    std::vector<LabeledSample> test;
};

// Disjoint index ranges: train gets [0, n_train), val the next n_val, ...
DatasetSplit generate_split(const PhantomParams& params, int n_train, int n_val, int n_test);

// Images of the healthy samples only (denoiser training view).
std::vector<Image> healthy_images(const std::vector<LabeledSample>& samples);

}  // namespace diffuse
