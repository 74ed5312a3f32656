#include "diffuse/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "diffuse/io.hpp"

namespace diffuse {

namespace {

real sigmoid(real z) { return 1.0 / (1.0 + std::exp(-z)); }

// Window origins covering [0, extent) with the given stride; the trailing
// origin is clamped so the last window touches the edge.
std::vector<int> window_origins(int extent, int patch, int stride) {
    std::vector<int> origins;
    for (int o = 0; o + patch <= extent; o += stride) origins.push_back(o);
    if (origins.empty() || origins.back() != extent - patch) {
        origins.push_back(extent - patch);
    }
    return origins;
}

}  // namespace

std::vector<real> LesionScorer::pooled_features(const Image& x) const {
    if (x.height != height || x.width != width || x.channels != channels) {
        throw DimensionError("LesionScorer: image shape differs from training shape");
    }
    const int ph = (height + pool - 1) / pool;
    const int pw = (width + pool - 1) / pool;
    std::vector<real> features(static_cast<size_t>(ph) * pw * channels, 0.0);
    std::vector<int> counts(features.size(), 0);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const int cell = (r / pool) * pw + (c / pool);
            for (int ch = 0; ch < channels; ++ch) {
                const size_t f = static_cast<size_t>(cell) * channels + ch;
                features[f] += x.at(r, c, ch);
                counts[f] += 1;
            }
        }
    }
    for (size_t i = 0; i < features.size(); ++i) {
        if (counts[i] > 0) features[i] /= counts[i];
    }
    return features;
}

real LesionScorer::score(const Image& x) const {
    const std::vector<real> f = pooled_features(x);
    real z = bias;
    for (size_t i = 0; i < f.size(); ++i) z += weights[i] * f[i];
    return sigmoid(z);
}

ScorerTrainResult train_lesion_scorer(const std::vector<Image>& healthy,
                                      const std::vector<Image>& diseased, std::uint64_t seed) {
    if (healthy.empty() || diseased.empty()) {
        throw DataError("train_lesion_scorer: need samples of both classes");
    }
    const Image& ref = healthy.front();
    for (const auto* set : {&healthy, &diseased}) {
        for (const auto& img : *set) {
            if (!img.same_shape(ref)) {
                throw DataError("train_lesion_scorer: images must share one shape");
            }
        }
    }

    LesionScorer scorer;
    scorer.height = ref.height;
    scorer.width = ref.width;
    scorer.channels = ref.channels;
    scorer.weights.assign(scorer.pooled_features(ref).size(), 0.0);
    scorer.bias = 0.0;

    struct Example {
        std::vector<real> features;
        real label;
    };
    std::vector<Example> examples;
    examples.reserve(healthy.size() + diseased.size());
    for (const auto& img : healthy) examples.push_back({scorer.pooled_features(img), 0.0});
    for (const auto& img : diseased) examples.push_back({scorer.pooled_features(img), 1.0});

    // deterministic shuffle, then hold out 20% for the accuracy report
    StreamRng rng(seed, "scorer");
    for (size_t i = examples.size(); i > 1; --i) {
        std::swap(examples[i - 1], examples[rng.next_below(i)]);
    }
    const size_t n_holdout = std::max<size_t>(1, examples.size() / 5);
    const size_t n_train = examples.size() - n_holdout;

    const int epochs = 400;
    const real lr = 0.5;
    const size_t dim = scorer.weights.size();
    std::vector<real> grad(dim);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        real grad_bias = 0.0;
        for (size_t i = 0; i < n_train; ++i) {
            const auto& ex = examples[i];
            real z = scorer.bias;
            for (size_t j = 0; j < dim; ++j) z += scorer.weights[j] * ex.features[j];
            const real err = sigmoid(z) - ex.label;  // d(cross-entropy)/dz
            for (size_t j = 0; j < dim; ++j) grad[j] += err * ex.features[j];
            grad_bias += err;
        }
        const real scale = lr / static_cast<real>(n_train);
        for (size_t j = 0; j < dim; ++j) scorer.weights[j] -= scale * grad[j];
        scorer.bias -= scale * grad_bias;
    }

    size_t correct = 0;
    for (size_t i = n_train; i < examples.size(); ++i) {
        real z = scorer.bias;
        for (size_t j = 0; j < dim; ++j) z += scorer.weights[j] * examples[i].features[j];
        const real predicted = sigmoid(z) > 0.5 ? 1.0 : 0.0;
        if (predicted == examples[i].label) ++correct;
    }
    return {scorer, static_cast<real>(correct) / static_cast<real>(n_holdout)};
}

GrayMap occlusion_saliency(const Image& x, const LesionScorer& scorer,
                           const SaliencyConfig& cfg) {
    if (cfg.patch < 1 || cfg.stride < 1) {
        throw ParameterError("occlusion_saliency: patch and stride must be >= 1");
    }
    if (cfg.patch > std::min(x.height, x.width)) {
        throw ParameterError("occlusion_saliency: patch exceeds image size");
    }
    const real base_score = scorer.score(x);
    const std::vector<int> rows = window_origins(x.height, cfg.patch, cfg.stride);
    const std::vector<int> cols = window_origins(x.width, cfg.patch, cfg.stride);

    GrayMap saliency(x.height, x.width, 0.0);
    Image occluded = x;
    for (int r0 : rows) {
        for (int c0 : cols) {
            for (int r = r0; r < r0 + cfg.patch; ++r) {
                for (int c = c0; c < c0 + cfg.patch; ++c) {
                    for (int ch = 0; ch < x.channels; ++ch) occluded.at(r, c, ch) = cfg.fill;
                }
            }
            const real drop = std::max(0.0, base_score - scorer.score(occluded));
            for (int r = r0; r < r0 + cfg.patch; ++r) {
                for (int c = c0; c < c0 + cfg.patch; ++c) {
                    saliency.at(r, c) = std::max(saliency.at(r, c), drop);
                    for (int ch = 0; ch < x.channels; ++ch) occluded.at(r, c, ch) = x.at(r, c, ch);
                }
            }
        }
    }
    return saliency;
}

Mask make_mask(const GrayMap& saliency, const SaliencyConfig& cfg) {
    if (saliency.data.empty()) throw ParameterError("make_mask: empty saliency map");
    const GrayMap smoothed = convolve_same(saliency, gaussian_kernel(5, cfg.sigma));
    const real threshold = percentile_value(smoothed, cfg.percentile);
    Mask mask(saliency.height, saliency.width, 0);
    for (size_t i = 0; i < smoothed.data.size(); ++i) {
        mask.data[i] = smoothed.data[i] > threshold ? 1 : 0;
    }
    return mask;
}

Mask load_mask(const std::filesystem::path& path) {
    const GrayMap raw = read_rfi_graymap(path);
    Mask mask(raw.height, raw.width, 0);
    for (size_t i = 0; i < raw.data.size(); ++i) {
        const real v = raw.data[i];
        const real rounded = v >= 0.5 ? 1.0 : 0.0;
        if (std::abs(v - rounded) > 1e-3) {
            throw FormatError("load_mask: non-binary value " + std::to_string(v) + " in " +
                              path.string());
        }
        mask.data[i] = static_cast<std::uint8_t>(rounded);
    }
    return mask;
}

void write_mask(const std::filesystem::path& path, const Mask& mask) { write_rfi(path, mask); }

void save_scorer(const std::filesystem::path& path, const LesionScorer& scorer) {
    nlohmann::json j;
    j["height"] = scorer.height;
    j["width"] = scorer.width;
    j["channels"] = scorer.channels;
    j["pool"] = scorer.pool;
    j["weights"] = scorer.weights;
    j["bias"] = scorer.bias;
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open for writing: " + path.string());
    os << j.dump(2) << "\n";
}

LesionScorer load_scorer(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open: " + path.string());
    nlohmann::json j;
    try {
        is >> j;
        LesionScorer scorer;
        scorer.height = j.at("height").get<int>();
        scorer.width = j.at("width").get<int>();
        scorer.channels = j.at("channels").get<int>();
        scorer.pool = j.at("pool").get<int>();
        scorer.weights = j.at("weights").get<std::vector<real>>();
        scorer.bias = j.at("bias").get<real>();
        return scorer;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad scorer file " + path.string() + ": " + e.what());
    }
}

}  // namespace diffuse
