#include "diffuse/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "diffuse/io.hpp"
#include "diffuse/parallel.hpp"

namespace diffuse {

MaskProvider occlusion_mask_provider(const LesionScorer& scorer, const SaliencyConfig& cfg) {
    return [&scorer, cfg](const Image& img, std::size_t) {
        return make_mask(occlusion_saliency(img, scorer, cfg), cfg);
    };
}

MaskProvider external_mask_provider(const std::filesystem::path& mask_dir) {
    return [mask_dir](const Image&, std::size_t index) {
        char name[32];
        std::snprintf(name, sizeof name, "mask_%05zu.rfi", index);
        return load_mask(mask_dir / name);
    };
}

MaskProvider constant_mask_provider(Mask m) {
    return [m = std::move(m)](const Image&, std::size_t) { return m; };
}

MeanSe EvalBatch::dice_stats() const {
    std::vector<real> values;
    for (const auto& item : items) {
        if (!item.failed && item.report.dice) values.push_back(*item.report.dice);
    }
    return mean_se(values);
}

MeanSe EvalBatch::iou_stats() const {
    std::vector<real> values;
    for (const auto& item : items) {
        if (!item.failed && item.report.iou) values.push_back(*item.report.iou);
    }
    return mean_se(values);
}

std::vector<Image> EvalBatch::counterfactuals() const {
    std::vector<Image> out;
    for (const auto& item : items) {
        if (!item.failed) out.push_back(item.report.counterfactual);
    }
    return out;
}

EvalBatch evaluate_variant(const std::string& variant, const std::vector<LabeledSample>& samples,
                           const Denoiser& den, const NoiseSchedule& sched,
                           const MaskProvider& masks, const RunParams& params) {
    EvalBatch batch;
    batch.variant = variant;
    batch.K = params.K;
    batch.percentile = params.saliency.percentile;
    batch.items.resize(samples.size());

    const bool needs_mask = variant == "diffuse" || variant == "saliency_mask";
    if (needs_mask && !masks) {
        throw ParameterError("variant '" + variant + "' needs an editing-mask source");
    }

    parallel_for_index(samples.size(), params.threads, [&](std::size_t i) {
        EvalItem& item = batch.items[i];
        const auto& sample = samples[i];
        const Mask* gt = &sample.gt_mask;
        try {
            StreamRng rng(params.seed, "sample", i);
            if (variant == "saliency_mask") {
                // the editing mask itself is the predicted segmentation
                item.editing_mask = masks(sample.image, i);
                item.report.counterfactual = sample.image;
                item.report.raw_diff = GrayMap(sample.image.height, sample.image.width, 0.0);
                item.report.cleaned = item.report.raw_diff;
                item.report.segmentation = item.editing_mask;
                item.report.strategy = "saliency_mask";
                item.report.dice = dice(item.report.segmentation, *gt);
                item.report.iou = iou(item.report.segmentation, *gt);
                return;
            }

            Image counterfactual;
            StepObserver observer;
            if (!params.trace_dir.empty()) {
                const auto dir = params.trace_dir / ("img_" + std::to_string(i));
                std::filesystem::create_directories(dir);
                observer = [dir](int t, const Image& latent) {
                    char name[32];
                    std::snprintf(name, sizeof name, "step_%04d.rfi", t);
                    write_rfi(dir / name, latent);
                };
            }
            if (variant == "diffuse") {
                item.editing_mask = masks(sample.image, i);
                counterfactual = diffuse_counterfactual(sample.image, item.editing_mask, params.K,
                                                        den, sched, rng, observer);
            } else {
                counterfactual =
                    ablation_pipeline(parse_variant(variant), sample.image, params.K, den, sched, rng);
            }
            item.report = make_report(sample.image, counterfactual, params.segment, gt,
                                      params.morph_kernel);
        } catch (const std::exception& e) {
            item.failed = true;
            item.error = e.what();
        }
    });
    return batch;
}

void save_report(const std::filesystem::path& dir, const AnomalyReport& report) {
    std::filesystem::create_directories(dir);
    write_rfi(dir / "counterfactual.rfi", report.counterfactual);
    write_rfi(dir / "diff.rfi", report.raw_diff);
    write_rfi(dir / "cleaned.rfi", report.cleaned);
    write_rfi(dir / "seg.rfi", report.segmentation);
    write_pgm(dir / "counterfactual.pgm", report.counterfactual);
    write_pgm(dir / "cleaned.pgm", report.cleaned);
    nlohmann::json metrics;
    metrics["dice"] = report.dice ? nlohmann::json(*report.dice) : nlohmann::json();
    metrics["iou"] = report.iou ? nlohmann::json(*report.iou) : nlohmann::json();
    metrics["threshold"] = report.threshold_used;
    metrics["strategy"] = report.strategy;
    std::ofstream os(dir / "metrics.json");
    if (!os) throw FormatError("cannot write metrics.json under " + dir.string());
    os << metrics.dump(2) << "\n";
}

void write_aggregate_csv(const std::filesystem::path& path, const std::vector<AggregateRow>& rows) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open for writing: " + path.string());
    os << "run_id,variant,K,percentile,dice_mean,dice_se,iou_mean,iou_se,kid\n";
    char buf[256];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%d,%g,%.6f,%.6f,%.6f,%.6f,", row.run_id.c_str(),
                      row.variant.c_str(), row.K, row.percentile, row.dice.mean, row.dice.se,
                      row.iou.mean, row.iou.se);
        os << buf;
        if (row.kid) {
            std::snprintf(buf, sizeof buf, "%.8f", *row.kid);
            os << buf;
        }
        os << "\n";
    }
}

std::vector<SweepPoint> run_sweep(const std::vector<LabeledSample>& samples, const Denoiser& den,
                                  const NoiseSchedule& sched, const LesionScorer& scorer,
                                  const std::vector<int>& k_grid,
                                  const std::vector<real>& percentile_grid,
                                  const RunParams& base_params) {
    std::vector<SweepPoint> points;
    for (int k : k_grid) {
        for (real p : percentile_grid) {
            RunParams params = base_params;
            params.K = k;
            params.saliency.percentile = p;
            const EvalBatch batch = evaluate_variant(
                "diffuse", samples, den, sched,
                occlusion_mask_provider(scorer, params.saliency), params);
            SweepPoint point;
            point.K = k;
            point.percentile = p;
            point.dice = batch.dice_stats();
            for (const auto& item : batch.items) {
                if (!item.failed && item.report.dice) ++point.n;
            }
            points.push_back(point);
        }
    }
    return points;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepPoint>& points) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open for writing: " + path.string());
    os << "K,percentile,dice_mean,dice_se,n\n";
    char buf[128];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%d,%g,%.6f,%.6f,%d\n", p.K, p.percentile, p.dice.mean,
                      p.dice.se, p.n);
        os << buf;
    }
}

}  // namespace diffuse
