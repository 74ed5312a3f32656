#pragma once

#include <vector>

#include "diffuse/grid.hpp"

namespace diffuse {

// 2|a n b| / (|a| + |b|); 1.0 when both masks are empty.
real dice(const Mask& a, const Mask& b);

// |a n b| / |a u b|; 1.0 when both masks are empty.
real iou(const Mask& a, const Mask& b);

using FeatureVector = std::vector<real>;

// Deterministic per-image features: 8x8 average-pooled intensities (64,
// averaged over channels) + per-channel mean, variance and 8-bin histogram
// over [0, 1].
FeatureVector extract_features(const Image& img);
std::vector<FeatureVector> extract_features(const std::vector<Image>& images);

// Unbiased MMD^2 with the cubic polynomial kernel k(x,y) = (x.y/d + 1)^3:
// off-diagonal within-set means minus twice the full cross mean.
real kid(const std::vector<FeatureVector>& features_a,
         const std::vector<FeatureVector>& features_b);

struct MeanSe {
    real mean = 0.0;
    real se = 0.0;
};

// Sample mean and its standard error.
MeanSe mean_se(const std::vector<real>& values);

}  // namespace diffuse
