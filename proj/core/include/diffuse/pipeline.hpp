#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "diffuse/anomaly.hpp"
#include "diffuse/dataset.hpp"
#include "diffuse/metrics.hpp"
#include "diffuse/saliency.hpp"
#include "diffuse/sampler.hpp"

namespace diffuse {

// Variant set of the comparison study: the masked dual sampler, the raw
// editing mask used as the anomaly segmentation, and the four unmasked
// pipelines.
inline const std::vector<std::string>& all_eval_variants() {
    static const std::vector<std::string> v = {"diffuse", "saliency_mask", "ddpm",
                                               "ddim_ddpm", "ddpm_ddim", "ddim"};
    return v;
}

struct RunParams {
    int K = 500;
    SaliencyConfig saliency;
    SegmentStrategy segment;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    int morph_kernel = 5;
    std::filesystem::path trace_dir;  // when set, per-step latents are dumped
};

// Editing-mask source for one sample (occlusion saliency, external file, ...).
using MaskProvider = std::function<Mask(const Image&, std::size_t index)>;

MaskProvider occlusion_mask_provider(const LesionScorer& scorer, const SaliencyConfig& cfg);
MaskProvider external_mask_provider(const std::filesystem::path& mask_dir);
MaskProvider constant_mask_provider(Mask m);

struct EvalItem {
    AnomalyReport report;
    Mask editing_mask;
    bool failed = false;
    std::string error;
};

struct EvalBatch {
    std::string variant;
    int K = 0;
    real percentile = 0.0;
    std::vector<EvalItem> items;

    MeanSe dice_stats() const;  // over non-failed items with ground truth
    MeanSe iou_stats() const;
    std::vector<Image> counterfactuals() const;
};

// Runs one variant over a dataset; images are processed in parallel and
// merged by index, each with its own (seed, "sample", index) noise stream.
// Per-image failures are recorded and the run continues.
EvalBatch evaluate_variant(const std::string& variant, const std::vector<LabeledSample>& samples,
                           const Denoiser& den, const NoiseSchedule& sched,
                           const MaskProvider& masks, const RunParams& params);

// Per-image report directory: counterfactual.rfi, diff.rfi, cleaned.rfi,
// seg.rfi, metrics.json (keys: dice, iou, threshold, strategy).
void save_report(const std::filesystem::path& dir, const AnomalyReport& report);

struct AggregateRow {
    std::string run_id;
    std::string variant;
    int K = 0;
    real percentile = 0.0;
    MeanSe dice;
    MeanSe iou;
    std::optional<real> kid;
};

void write_aggregate_csv(const std::filesystem::path& path, const std::vector<AggregateRow>& rows);

struct SweepPoint {
    int K = 0;
    real percentile = 0.0;
    MeanSe dice;
    int n = 0;
};

// Dice over the grid of (K, percentile) pairs with the dual sampler.
std::vector<SweepPoint> run_sweep(const std::vector<LabeledSample>& samples, const Denoiser& den,
                                  const NoiseSchedule& sched, const LesionScorer& scorer,
                                  const std::vector<int>& k_grid,
                                  const std::vector<real>& percentile_grid,
                                  const RunParams& base_params);

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepPoint>& points);

}  // namespace diffuse
