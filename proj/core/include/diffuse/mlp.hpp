#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "diffuse/denoiser.hpp"
#include "diffuse/rng.hpp"

namespace diffuse {

struct DenseLayer {
    int out_dim = 0;
    int in_dim = 0;
    std::vector<real> weights;  // row-major out_dim x in_dim
    std::vector<real> bias;     // out_dim
};

// Flattened-image noise predictor: input is the flattened image
// concatenated with a sinusoidal embedding of t, followed by ReLU hidden
// layers and a linear output of image size.
class MlpDenoiser final : public Denoiser {
public:
    MlpDenoiser() = default;

    static MlpDenoiser create(int height, int width, int channels,
                              const std::vector<int>& hidden_dims,
                              int time_embed_dim, StreamRng& rng);

    Image predict_eps(const Image& x_t, int t) const override;

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    int time_embed_dim() const { return time_embed_dim_; }

    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }
    size_t parameter_count() const;

    // Sinusoidal embedding of a timestep index, length time_embed_dim.
    std::vector<real> time_embedding(int t) const;

private:
    int height_ = 0, width_ = 0, channels_ = 0;
    int time_embed_dim_ = 0;
    std::vector<DenseLayer> layers_;
};

struct TrainConfig {
    long iterations = 5000;
    int batch_size = 10;
    real learning_rate = 1e-4;
    real ema_decay = 0.99;
    std::uint64_t seed = 0;
    std::vector<int> hidden_dims = {256, 256};
    int time_embed_dim = 32;
};

struct TrainResult {
    MlpDenoiser model;      // EMA parameters; what inference should use
    MlpDenoiser raw_model;  // last optimizer iterate, kept for resuming
    std::vector<real> loss_history;
    long start_iteration = 0;  // first iteration index of this run
};

// Minimizes E ||eps - eps_hat(q_sample(x0, t, eps), t)||^2 over uniform t
// and standard-normal eps with Adam, tracking an EMA of the parameters.
// Throws DataError on an empty dataset, TrainingError on NaN loss.
TrainResult train_denoiser(const std::vector<Image>& dataset, const NoiseSchedule& sched,
                           const TrainConfig& cfg);

// Continues training from existing raw/EMA parameters.
TrainResult train_denoiser(const std::vector<Image>& dataset, const NoiseSchedule& sched,
                           const TrainConfig& cfg, MlpDenoiser raw, MlpDenoiser ema,
                           long start_iteration);

// Mean squared eps-prediction error on an explicit batch. grads, when
// non-null, receives dLoss/dParam in layer layout (used for training and
// for finite-difference verification).
real mlp_batch_loss(const MlpDenoiser& model, const std::vector<Image>& x_t,
                    const std::vector<int>& ts, const std::vector<Image>& eps_target,
                    std::vector<DenseLayer>* grads = nullptr);

// Checkpoint: magic "DNZ1", u32 layer count, per-layer {u32 out, u32 in},
// u32 height/width/channels/time_embed_dim, u64 iteration, then float32
// parameter blocks (raw copy, then EMA copy), all little-endian.
struct Checkpoint {
    MlpDenoiser raw;
    MlpDenoiser ema;
    std::uint64_t iteration = 0;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace diffuse
