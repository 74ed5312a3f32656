#include "diffuse/mlp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

namespace diffuse {

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMutMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

RowMajorMap weight_map(const DenseLayer& layer) {
    return RowMajorMap(layer.weights.data(), layer.out_dim, layer.in_dim);
}

Eigen::Map<const Vector> bias_map(const DenseLayer& layer) {
    return Eigen::Map<const Vector>(layer.bias.data(), layer.out_dim);
}

// Forward pass over a batch held as columns; returns activations per layer
// (a[0] = input). ReLU on all but the last layer.
std::vector<Matrix> forward_batch(const std::vector<DenseLayer>& layers, Matrix input) {
    std::vector<Matrix> acts;
    acts.reserve(layers.size() + 1);
    acts.push_back(std::move(input));
    for (size_t l = 0; l < layers.size(); ++l) {
        Matrix z = (weight_map(layers[l]) * acts.back()).colwise() + bias_map(layers[l]);
        if (l + 1 < layers.size()) z = z.cwiseMax(0.0);
        acts.push_back(std::move(z));
    }
    return acts;
}

void check_finite(real v, long step) {
    if (!std::isfinite(v)) {
        throw TrainingError("training loss diverged at step " + std::to_string(step), step);
    }
}

struct AdamState {
    std::vector<DenseLayer> m;  // reuse the layer layout for moment buffers
    std::vector<DenseLayer> v;
    long step = 0;
};

std::vector<DenseLayer> zeros_like(const std::vector<DenseLayer>& layers) {
    std::vector<DenseLayer> out = layers;
    for (auto& l : out) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
    return out;
}

void adam_update(std::vector<DenseLayer>& params, const std::vector<DenseLayer>& grads,
                 AdamState& state, real lr) {
    constexpr real beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    ++state.step;
    const real c1 = 1.0 - std::pow(beta1, static_cast<real>(state.step));
    const real c2 = 1.0 - std::pow(beta2, static_cast<real>(state.step));
    for (size_t l = 0; l < params.size(); ++l) {
        auto update = [&](std::vector<real>& p, const std::vector<real>& g, std::vector<real>& m,
                          std::vector<real>& v) {
            for (size_t i = 0; i < p.size(); ++i) {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
            }
        };
        update(params[l].weights, grads[l].weights, state.m[l].weights, state.v[l].weights);
        update(params[l].bias, grads[l].bias, state.m[l].bias, state.v[l].bias);
    }
}

void ema_update(std::vector<DenseLayer>& ema, const std::vector<DenseLayer>& raw, real decay) {
    for (size_t l = 0; l < ema.size(); ++l) {
        for (size_t i = 0; i < ema[l].weights.size(); ++i) {
            ema[l].weights[i] = decay * ema[l].weights[i] + (1.0 - decay) * raw[l].weights[i];
        }
        for (size_t i = 0; i < ema[l].bias.size(); ++i) {
            ema[l].bias[i] = decay * ema[l].bias[i] + (1.0 - decay) * raw[l].bias[i];
        }
    }
}

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

void write_block(std::ostream& os, const std::vector<real>& values) {
    std::vector<float> buf(values.begin(), values.end());
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

void read_block(std::istream& is, std::vector<real>& values) {
    std::vector<float> buf(values.size());
    is.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    std::copy(buf.begin(), buf.end(), values.begin());
}

}  // namespace

MlpDenoiser MlpDenoiser::create(int height, int width, int channels,
                                const std::vector<int>& hidden_dims, int time_embed_dim,
                                StreamRng& rng) {
    if (height <= 0 || width <= 0 || channels <= 0 || time_embed_dim <= 0 ||
        time_embed_dim % 2 != 0) {
        throw ParameterError("MlpDenoiser::create: bad shape or embedding dimension");
    }
    MlpDenoiser model;
    model.height_ = height;
    model.width_ = width;
    model.channels_ = channels;
    model.time_embed_dim_ = time_embed_dim;
    const int image_dim = height * width * channels;
    int in_dim = image_dim + time_embed_dim;
    std::vector<int> dims = hidden_dims;
    dims.push_back(image_dim);
    for (int out_dim : dims) {
        DenseLayer layer;
        layer.in_dim = in_dim;
        layer.out_dim = out_dim;
        layer.weights.resize(static_cast<size_t>(in_dim) * out_dim);
        layer.bias.assign(static_cast<size_t>(out_dim), 0.0);
        const real scale = std::sqrt(2.0 / static_cast<real>(in_dim));
        for (real& w : layer.weights) w = scale * rng.next_normal();
        model.layers_.push_back(std::move(layer));
        in_dim = out_dim;
    }
    return model;
}

std::vector<real> MlpDenoiser::time_embedding(int t) const {
    const int half = time_embed_dim_ / 2;
    std::vector<real> emb(static_cast<size_t>(time_embed_dim_));
    for (int i = 0; i < half; ++i) {
        const real freq = std::exp(-std::log(10000.0) * static_cast<real>(i) / half);
        emb[static_cast<size_t>(2 * i)] = std::sin(t * freq);
        emb[static_cast<size_t>(2 * i + 1)] = std::cos(t * freq);
    }
    return emb;
}

size_t MlpDenoiser::parameter_count() const {
    size_t n = 0;
    for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
    return n;
}

Image MlpDenoiser::predict_eps(const Image& x_t, int t) const {
    if (x_t.height != height_ || x_t.width != width_ || x_t.channels != channels_) {
        throw DimensionError("MlpDenoiser::predict_eps: input shape mismatch");
    }
    const int image_dim = height_ * width_ * channels_;
    Matrix input(image_dim + time_embed_dim_, 1);
    for (int i = 0; i < image_dim; ++i) input(i, 0) = x_t.data[static_cast<size_t>(i)];
    const std::vector<real> emb = time_embedding(t);
    for (int i = 0; i < time_embed_dim_; ++i) input(image_dim + i, 0) = emb[static_cast<size_t>(i)];
    const std::vector<Matrix> acts = forward_batch(layers_, std::move(input));
    Image out(height_, width_, channels_);
    const Matrix& y = acts.back();
    for (int i = 0; i < image_dim; ++i) out.data[static_cast<size_t>(i)] = y(i, 0);
    return out;
}

real mlp_batch_loss(const MlpDenoiser& model, const std::vector<Image>& x_t,
                    const std::vector<int>& ts, const std::vector<Image>& eps_target,
                    std::vector<DenseLayer>* grads) {
    if (x_t.empty() || x_t.size() != ts.size() || x_t.size() != eps_target.size()) {
        throw ParameterError("mlp_batch_loss: inconsistent batch");
    }
    const auto& layers = model.layers();
    const int image_dim = model.height() * model.width() * model.channels();
    const int in_dim = image_dim + model.time_embed_dim();
    const int batch = static_cast<int>(x_t.size());

    Matrix input(in_dim, batch);
    Matrix target(image_dim, batch);
    for (int b = 0; b < batch; ++b) {
        for (int i = 0; i < image_dim; ++i) {
            input(i, b) = x_t[static_cast<size_t>(b)].data[static_cast<size_t>(i)];
            target(i, b) = eps_target[static_cast<size_t>(b)].data[static_cast<size_t>(i)];
        }
        const std::vector<real> emb = model.time_embedding(ts[static_cast<size_t>(b)]);
        for (int i = 0; i < model.time_embed_dim(); ++i) {
            input(image_dim + i, b) = emb[static_cast<size_t>(i)];
        }
    }

    const std::vector<Matrix> acts = forward_batch(layers, std::move(input));
    const Matrix residual = acts.back() - target;
    const real denom = static_cast<real>(image_dim) * batch;
    const real loss = residual.squaredNorm() / denom;
    if (!grads) return loss;

    *grads = zeros_like(layers);
    Matrix delta = (2.0 / denom) * residual;  // dLoss/dz for the last layer
    for (size_t l = layers.size(); l-- > 0;) {
        const Matrix& a_prev = acts[l];
        Matrix dw = delta * a_prev.transpose();
        RowMajorMutMap((*grads)[l].weights.data(), layers[l].out_dim, layers[l].in_dim) = dw;
        Eigen::Map<Vector>((*grads)[l].bias.data(), layers[l].out_dim) = delta.rowwise().sum();
        if (l > 0) {
            delta = weight_map(layers[l]).transpose() * delta;
            // gate through the ReLU that produced acts[l]
            delta = delta.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
        }
    }
    return loss;
}

TrainResult train_denoiser(const std::vector<Image>& dataset, const NoiseSchedule& sched,
                           const TrainConfig& cfg) {
    if (dataset.empty()) throw DataError("train_denoiser: empty dataset");
    StreamRng init_rng(cfg.seed, "init");
    MlpDenoiser raw = MlpDenoiser::create(dataset.front().height, dataset.front().width,
                                          dataset.front().channels, cfg.hidden_dims,
                                          cfg.time_embed_dim, init_rng);
    MlpDenoiser ema = raw;
    return train_denoiser(dataset, sched, cfg, std::move(raw), std::move(ema), 0);
}

TrainResult train_denoiser(const std::vector<Image>& dataset, const NoiseSchedule& sched,
                           const TrainConfig& cfg, MlpDenoiser raw, MlpDenoiser ema,
                           long start_iteration) {
    if (dataset.empty()) throw DataError("train_denoiser: empty dataset");
    for (const auto& img : dataset) {
        if (!img.same_shape(dataset.front())) {
            throw DataError("train_denoiser: dataset images must share one shape");
        }
    }
    if (cfg.iterations <= 0 || cfg.batch_size <= 0 || !(cfg.learning_rate > 0.0) ||
        !(cfg.ema_decay >= 0.0 && cfg.ema_decay < 1.0)) {
        throw ParameterError("train_denoiser: bad training configuration");
    }

    StreamRng rng(cfg.seed, "train", static_cast<std::uint64_t>(start_iteration));
    AdamState adam{zeros_like(raw.layers()), zeros_like(raw.layers()), 0};

    TrainResult result;
    result.loss_history.reserve(static_cast<size_t>(cfg.iterations));
    result.start_iteration = start_iteration;

    std::vector<Image> batch_xt(static_cast<size_t>(cfg.batch_size));
    std::vector<int> batch_t(static_cast<size_t>(cfg.batch_size));
    std::vector<Image> batch_eps(static_cast<size_t>(cfg.batch_size));
    std::vector<DenseLayer> grads;

    for (long it = 0; it < cfg.iterations; ++it) {
        for (int b = 0; b < cfg.batch_size; ++b) {
            const auto& x0 = dataset[rng.next_below(dataset.size())];
            const int t = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(sched.T)));
            Image eps(x0.height, x0.width, x0.channels);
            for (real& v : eps.data) v = rng.next_normal();
            batch_xt[static_cast<size_t>(b)] = q_sample(x0, t, eps, sched);
            batch_t[static_cast<size_t>(b)] = t;
            batch_eps[static_cast<size_t>(b)] = std::move(eps);
        }
        const real loss = mlp_batch_loss(raw, batch_xt, batch_t, batch_eps, &grads);
        check_finite(loss, start_iteration + it);
        adam_update(raw.layers(), grads, adam, cfg.learning_rate);
        ema_update(ema.layers(), raw.layers(), cfg.ema_decay);
        result.loss_history.push_back(loss);
    }

    result.model = std::move(ema);
    result.raw_model = std::move(raw);
    return result;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path.string());
    os.write("DNZ1", 4);
    const auto& layers = ckpt.raw.layers();
    write_u32(os, static_cast<std::uint32_t>(layers.size()));
    for (const auto& l : layers) {
        write_u32(os, static_cast<std::uint32_t>(l.out_dim));
        write_u32(os, static_cast<std::uint32_t>(l.in_dim));
    }
    write_u32(os, static_cast<std::uint32_t>(ckpt.raw.height()));
    write_u32(os, static_cast<std::uint32_t>(ckpt.raw.width()));
    write_u32(os, static_cast<std::uint32_t>(ckpt.raw.channels()));
    write_u32(os, static_cast<std::uint32_t>(ckpt.raw.time_embed_dim()));
    write_u64(os, ckpt.iteration);
    for (const auto& l : ckpt.raw.layers()) {
        write_block(os, l.weights);
        write_block(os, l.bias);
    }
    for (const auto& l : ckpt.ema.layers()) {
        write_block(os, l.weights);
        write_block(os, l.bias);
    }
    if (!os) throw FormatError("short write: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "DNZ1", 4) != 0) {
        throw FormatError("bad checkpoint magic in " + path.string());
    }
    const std::uint32_t n_layers = read_u32(is);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes(n_layers);
    for (auto& [out, in] : shapes) {
        out = read_u32(is);
        in = read_u32(is);
    }
    const std::uint32_t h = read_u32(is);
    const std::uint32_t w = read_u32(is);
    const std::uint32_t c = read_u32(is);
    const std::uint32_t time_dim = read_u32(is);
    const std::uint64_t iteration = read_u64(is);
    if (!is) throw FormatError("truncated checkpoint header in " + path.string());

    auto read_model = [&] {
        StreamRng dummy(0);
        // allocate via create to validate the shape chain, then overwrite
        std::vector<int> hidden;
        for (size_t l = 0; l + 1 < shapes.size(); ++l) hidden.push_back(static_cast<int>(shapes[l].first));
        MlpDenoiser model = MlpDenoiser::create(static_cast<int>(h), static_cast<int>(w),
                                                static_cast<int>(c), hidden,
                                                static_cast<int>(time_dim), dummy);
        for (size_t l = 0; l < model.layers().size(); ++l) {
            auto& layer = model.layers()[l];
            if (layer.out_dim != static_cast<int>(shapes[l].first) ||
                layer.in_dim != static_cast<int>(shapes[l].second)) {
                throw FormatError("inconsistent layer shapes in " + path.string());
            }
            read_block(is, layer.weights);
            read_block(is, layer.bias);
        }
        if (!is) throw FormatError("truncated checkpoint payload in " + path.string());
        return model;
    };

    Checkpoint ckpt;
    ckpt.raw = read_model();
    ckpt.ema = read_model();
    ckpt.iteration = iteration;
    return ckpt;
}

}  // namespace diffuse
