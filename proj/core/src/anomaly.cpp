#include "diffuse/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "diffuse/metrics.hpp"

namespace diffuse {

namespace {

enum class WindowOp { min, max };

GrayMap window_filter(const GrayMap& map, int kernel_side, WindowOp op) {
    if (kernel_side <= 0 || kernel_side % 2 == 0) {
        throw ParameterError("morphology: kernel side must be odd and positive");
    }
    const int half = kernel_side / 2;
    GrayMap out(map.height, map.width);
    for (int r = 0; r < map.height; ++r) {
        for (int c = 0; c < map.width; ++c) {
            // edge replication: clamping the window into the grid is
            // equivalent to filtering the replicated extension
            real acc = map.at(std::clamp(r - half, 0, map.height - 1),
                              std::clamp(c - half, 0, map.width - 1));
            for (int i = -half; i <= half; ++i) {
                const int rr = std::clamp(r + i, 0, map.height - 1);
                for (int j = -half; j <= half; ++j) {
                    const int cc = std::clamp(c + j, 0, map.width - 1);
                    const real v = map.at(rr, cc);
                    acc = op == WindowOp::min ? std::min(acc, v) : std::max(acc, v);
                }
            }
            out.at(r, c) = acc;
        }
    }
    return out;
}

}  // namespace

GrayMap erode(const GrayMap& map, int kernel_side) {
    return window_filter(map, kernel_side, WindowOp::min);
}

GrayMap dilate(const GrayMap& map, int kernel_side) {
    return window_filter(map, kernel_side, WindowOp::max);
}

GrayMap difference_map(const Image& x0, const Image& xhat0) {
    if (!x0.same_shape(xhat0)) throw DimensionError("difference_map: shape mismatch");
    GrayMap out(x0.height, x0.width);
    for (int r = 0; r < x0.height; ++r) {
        for (int c = 0; c < x0.width; ++c) {
            real acc = 0.0;
            for (int ch = 0; ch < x0.channels; ++ch) {
                acc += std::abs(x0.at(r, c, ch) - xhat0.at(r, c, ch));
            }
            out.at(r, c) = acc / x0.channels;
        }
    }
    return out;
}

GrayMap open_close(const GrayMap& map, int kernel_side) {
    const GrayMap opened = dilate(erode(map, kernel_side), kernel_side);
    return erode(dilate(opened, kernel_side), kernel_side);
}

SegmentStrategy SegmentStrategy::parse(const std::string& text) {
    SegmentStrategy s;
    if (text == "otsu") {
        s.kind = Kind::otsu;
        return s;
    }
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    try {
        if (head == "percentile") {
            s.kind = Kind::percentile;
            if (!arg.empty()) s.percentile = std::stod(arg);
            if (!(s.percentile >= 0.0 && s.percentile <= 100.0)) throw std::out_of_range("p");
            return s;
        }
        if (head == "fixed") {
            s.kind = Kind::fixed;
            if (!arg.empty()) s.threshold = std::stod(arg);
            return s;
        }
    } catch (const std::exception&) {
        throw ParameterError("bad segmentation strategy argument: " + text);
    }
    throw ParameterError("unknown segmentation strategy: " + text);
}

std::string SegmentStrategy::describe() const {
    switch (kind) {
        case Kind::percentile: return "percentile:" + std::to_string(percentile);
        case Kind::fixed: return "fixed:" + std::to_string(threshold);
        case Kind::otsu: return "otsu";
    }
    return "?";
}

namespace {

// Otsu threshold over 256 levels between min and max; returns the level
// value (mask = strictly greater). Falls back to max on constant maps.
real otsu_threshold(const GrayMap& map) {
    const auto [lo_it, hi_it] = std::minmax_element(map.data.begin(), map.data.end());
    const real lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) return hi;
    constexpr int kBins = 256;
    std::vector<long> hist(kBins, 0);
    const real scale = (kBins - 1) / (hi - lo);
    for (real v : map.data) {
        int bin = static_cast<int>((v - lo) * scale);
        bin = std::clamp(bin, 0, kBins - 1);
        ++hist[static_cast<size_t>(bin)];
    }
    const real total = static_cast<real>(map.data.size());
    real sum_all = 0.0;
    for (int b = 0; b < kBins; ++b) sum_all += b * static_cast<real>(hist[static_cast<size_t>(b)]);

    real best_between = -1.0;
    int best_bin = 0;
    real w0 = 0.0, sum0 = 0.0;
    for (int b = 0; b < kBins - 1; ++b) {
        w0 += static_cast<real>(hist[static_cast<size_t>(b)]);
        sum0 += b * static_cast<real>(hist[static_cast<size_t>(b)]);
        const real w1 = total - w0;
        if (w0 <= 0.0 || w1 <= 0.0) continue;
        const real mu0 = sum0 / w0;
        const real mu1 = (sum_all - sum0) / w1;
        const real between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (between > best_between) {
            best_between = between;
            best_bin = b;
        }
    }
    // midpoint of the chosen bin; everything in later bins is selected
    return lo + (static_cast<real>(best_bin) + 0.5) / scale;
}

}  // namespace

SegmentResult segment(const GrayMap& cleaned, const SegmentStrategy& strategy) {
    if (cleaned.data.empty()) throw ParameterError("segment: empty map");
    real threshold = 0.0;
    switch (strategy.kind) {
        case SegmentStrategy::Kind::percentile:
            threshold = percentile_value(cleaned, strategy.percentile);
            break;
        case SegmentStrategy::Kind::fixed:
            threshold = strategy.threshold;
            break;
        case SegmentStrategy::Kind::otsu:
            threshold = otsu_threshold(cleaned);
            break;
    }
    Mask mask(cleaned.height, cleaned.width, 0);
    for (size_t i = 0; i < cleaned.data.size(); ++i) {
        mask.data[i] = cleaned.data[i] > threshold ? 1 : 0;
    }
    return {std::move(mask), threshold};
}

AnomalyReport make_report(const Image& x0, const Image& counterfactual,
                          const SegmentStrategy& strategy, const Mask* gt, int morph_kernel) {
    AnomalyReport report;
    report.counterfactual = counterfactual;
    report.raw_diff = difference_map(x0, counterfactual);
    report.cleaned = open_close(report.raw_diff, morph_kernel);
    auto [mask, threshold] = segment(report.cleaned, strategy);
    report.segmentation = std::move(mask);
    report.threshold_used = threshold;
    report.strategy = strategy.describe();
    if (gt) {
        report.dice = dice(report.segmentation, *gt);
        report.iou = iou(report.segmentation, *gt);
    }
    return report;
}

}  // namespace diffuse
