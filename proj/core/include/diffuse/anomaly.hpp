#pragma once

#include <optional>
#include <string>

#include "diffuse/grid.hpp"

namespace diffuse {

// Binarization rule for the cleaned anomaly map.
struct SegmentStrategy {
    enum class Kind { percentile, fixed, otsu };
    Kind kind = Kind::fixed;
    real percentile = 95.0;  // for Kind::percentile
    real threshold = 0.15;   // for Kind::fixed

    static SegmentStrategy parse(const std::string& text);  // "percentile:95" | "fixed:0.15" | "otsu"
    std::string describe() const;
};

struct AnomalyReport {
    Image counterfactual;
    GrayMap raw_diff;
    GrayMap cleaned;
    Mask segmentation;
    real threshold_used = 0.0;
    std::string strategy;
    std::optional<real> dice;  // present when ground truth was supplied
    std::optional<real> iou;
};

// Per-pixel mean over channels of |x0 - xhat0|.
GrayMap difference_map(const Image& x0, const Image& xhat0);

// Grayscale opening then closing with a flat square structuring element,
// edge-replicated borders.
GrayMap open_close(const GrayMap& map, int kernel_side = 5);

// Min/max sliding-window filters (exposed for tests and composition).
GrayMap erode(const GrayMap& map, int kernel_side);
GrayMap dilate(const GrayMap& map, int kernel_side);

struct SegmentResult {
    Mask mask;
    real threshold = 0.0;
};

SegmentResult segment(const GrayMap& cleaned, const SegmentStrategy& strategy);

// Full post-processing: difference, morphology, segmentation; fills metric
// fields when gt is non-null.
AnomalyReport make_report(const Image& x0, const Image& counterfactual,
                          const SegmentStrategy& strategy, const Mask* gt = nullptr,
                          int morph_kernel = 5);

}  // namespace diffuse
