#include "diffuse/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace diffuse {

namespace {

void check_mask_shapes(const Mask& a, const Mask& b, const char* what) {
    if (a.height != b.height || a.width != b.width) {
        throw DimensionError(std::string(what) + ": mask shapes differ");
    }
}

struct Overlap {
    size_t a = 0, b = 0, both = 0;
};

Overlap overlap(const Mask& a, const Mask& b) {
    Overlap o;
    for (size_t i = 0; i < a.data.size(); ++i) {
        o.a += a.data[i];
        o.b += b.data[i];
        o.both += static_cast<size_t>(a.data[i] & b.data[i]);
    }
    return o;
}

}  // namespace

real dice(const Mask& a, const Mask& b) {
    check_mask_shapes(a, b, "dice");
    const Overlap o = overlap(a, b);
    if (o.a + o.b == 0) return 1.0;  // both empty: perfect agreement
    return 2.0 * static_cast<real>(o.both) / static_cast<real>(o.a + o.b);
}

real iou(const Mask& a, const Mask& b) {
    check_mask_shapes(a, b, "iou");
    const Overlap o = overlap(a, b);
    const size_t uni = o.a + o.b - o.both;
    if (uni == 0) return 1.0;
    return static_cast<real>(o.both) / static_cast<real>(uni);
}

FeatureVector extract_features(const Image& img) {
    constexpr int kPoolGrid = 8;
    constexpr int kHistBins = 8;
    FeatureVector features;
    features.reserve(static_cast<size_t>(kPoolGrid * kPoolGrid) +
                     static_cast<size_t>(img.channels) * (2 + kHistBins));

    // 8x8 pooled grid, averaged over channels
    for (int gr = 0; gr < kPoolGrid; ++gr) {
        const int r0 = gr * img.height / kPoolGrid;
        const int r1 = std::max(r0 + 1, (gr + 1) * img.height / kPoolGrid);
        for (int gc = 0; gc < kPoolGrid; ++gc) {
            const int c0 = gc * img.width / kPoolGrid;
            const int c1 = std::max(c0 + 1, (gc + 1) * img.width / kPoolGrid);
            real acc = 0.0;
            long count = 0;
            for (int r = r0; r < r1 && r < img.height; ++r) {
                for (int c = c0; c < c1 && c < img.width; ++c) {
                    for (int ch = 0; ch < img.channels; ++ch) acc += img.at(r, c, ch);
                    count += img.channels;
                }
            }
            features.push_back(count > 0 ? acc / static_cast<real>(count) : 0.0);
        }
    }

    // per-channel mean, variance, and 8-bin histogram over [0, 1]
    const long pixels = static_cast<long>(img.height) * img.width;
    for (int ch = 0; ch < img.channels; ++ch) {
        real mean = 0.0;
        for (int r = 0; r < img.height; ++r) {
            for (int c = 0; c < img.width; ++c) mean += img.at(r, c, ch);
        }
        mean /= static_cast<real>(pixels);
        real var = 0.0;
        std::vector<real> hist(kHistBins, 0.0);
        for (int r = 0; r < img.height; ++r) {
            for (int c = 0; c < img.width; ++c) {
                const real v = img.at(r, c, ch);
                var += (v - mean) * (v - mean);
                int bin = static_cast<int>(std::clamp(v, 0.0, 1.0) * kHistBins);
                bin = std::min(bin, kHistBins - 1);
                hist[static_cast<size_t>(bin)] += 1.0;
            }
        }
        var /= static_cast<real>(pixels);
        features.push_back(mean);
        features.push_back(var);
        for (real h : hist) features.push_back(h / static_cast<real>(pixels));
    }
    return features;
}

std::vector<FeatureVector> extract_features(const std::vector<Image>& images) {
    if (images.empty()) throw DataError("extract_features: empty dataset");
    std::vector<FeatureVector> out;
    out.reserve(images.size());
    for (const auto& img : images) {
        if (!img.same_shape(images.front())) {
            throw DimensionError("extract_features: images must share one shape");
        }
        out.push_back(extract_features(img));
    }
    return out;
}

namespace {

real poly3_kernel(const FeatureVector& x, const FeatureVector& y) {
    real dot = 0.0;
    for (size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
    const real base = dot / static_cast<real>(x.size()) + 1.0;
    return base * base * base;
}

}  // namespace

real kid(const std::vector<FeatureVector>& features_a,
         const std::vector<FeatureVector>& features_b) {
    if (features_a.size() < 2 || features_b.size() < 2) {
        throw ParameterError("kid: each set needs at least 2 feature vectors");
    }
    const size_t dim = features_a.front().size();
    for (const auto* set : {&features_a, &features_b}) {
        for (const auto& f : *set) {
            if (f.size() != dim) throw DimensionError("kid: feature dimensions differ");
        }
    }
    const size_t m = features_a.size();
    const size_t n = features_b.size();

    real within_a = 0.0;
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < m; ++j) {
            if (i != j) within_a += poly3_kernel(features_a[i], features_a[j]);
        }
    }
    within_a /= static_cast<real>(m) * static_cast<real>(m - 1);

    real within_b = 0.0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (i != j) within_b += poly3_kernel(features_b[i], features_b[j]);
        }
    }
    within_b /= static_cast<real>(n) * static_cast<real>(n - 1);

    real cross = 0.0;
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) cross += poly3_kernel(features_a[i], features_b[j]);
    }
    cross /= static_cast<real>(m) * static_cast<real>(n);

    return within_a + within_b - 2.0 * cross;
}

MeanSe mean_se(const std::vector<real>& values) {
    MeanSe result;
    if (values.empty()) return result;
    real sum = 0.0;
    for (real v : values) sum += v;
    result.mean = sum / static_cast<real>(values.size());
    if (values.size() > 1) {
        real ss = 0.0;
        for (real v : values) ss += (v - result.mean) * (v - result.mean);
        result.se = std::sqrt(ss / (static_cast<real>(values.size() - 1))) /
                    std::sqrt(static_cast<real>(values.size()));
    }
    return result;
}

}  // namespace diffuse
