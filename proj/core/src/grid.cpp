#include "diffuse/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace diffuse {

namespace {

void require_positive_dims(int h, int w, int c) {
    if (h <= 0 || w <= 0 || c <= 0) {
        throw ParameterError("grid dimensions must be positive, got " + std::to_string(h) + "x" +
                             std::to_string(w) + "x" + std::to_string(c));
    }
}

}  // namespace

Image::Image(int h, int w, int c, real fill)
    : height(h), width(w), channels(c),
      data(static_cast<size_t>(h) * static_cast<size_t>(w) * static_cast<size_t>(c), fill) {
    require_positive_dims(h, w, c);
}

Mask::Mask(int h, int w, std::uint8_t fill)
    : height(h), width(w), data(static_cast<size_t>(h) * static_cast<size_t>(w), fill) {
    require_positive_dims(h, w, 1);
}

size_t Mask::area() const {
    return static_cast<size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

GrayMap::GrayMap(int h, int w, real fill)
    : height(h), width(w), data(static_cast<size_t>(h) * static_cast<size_t>(w), fill) {
    require_positive_dims(h, w, 1);
}

Kernel::Kernel(int h, int w, real fill)
    : height(h), width(w), data(static_cast<size_t>(h) * static_cast<size_t>(w), fill) {
    require_positive_dims(h, w, 1);
}

Image hadamard_mix(const Image& a, const Image& b, const Mask& m) {
    if (!a.same_shape(b)) {
        throw DimensionError("hadamard_mix: image shapes differ");
    }
    if (m.height != a.height || m.width != a.width) {
        throw DimensionError("hadamard_mix: mask does not match image spatially");
    }
    Image out(a.height, a.width, a.channels);
    const int C = a.channels;
    for (int r = 0; r < a.height; ++r) {
        for (int c = 0; c < a.width; ++c) {
            const Image& src = m.at(r, c) ? a : b;
            for (int ch = 0; ch < C; ++ch) out.at(r, c, ch) = src.at(r, c, ch);
        }
    }
    return out;
}

GrayMap convolve_same(const GrayMap& map, const Kernel& kernel) {
    if (kernel.height % 2 == 0 || kernel.width % 2 == 0) {
        throw ParameterError("convolve_same: kernel sides must be odd");
    }
    const int kh = kernel.height / 2;
    const int kw = kernel.width / 2;
    GrayMap out(map.height, map.width);
    for (int r = 0; r < map.height; ++r) {
        for (int c = 0; c < map.width; ++c) {
            real acc = 0.0;
            for (int i = -kh; i <= kh; ++i) {
                // edge replication: clamp source coordinates into the grid
                const int rr = std::clamp(r + i, 0, map.height - 1);
                for (int j = -kw; j <= kw; ++j) {
                    const int cc = std::clamp(c + j, 0, map.width - 1);
                    acc += map.at(rr, cc) * kernel.at(i + kh, j + kw);
                }
            }
            out.at(r, c) = acc;
        }
    }
    return out;
}

real percentile_value(const GrayMap& map, real p) {
    if (map.data.empty()) {
        throw ParameterError("percentile_value: empty map");
    }
    if (!(p >= 0.0 && p <= 100.0)) {
        throw ParameterError("percentile_value: p must lie in [0, 100]");
    }
    std::vector<real> sorted(map.data);
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();
    // nearest-rank: rank ceil(p/100 * n), clamped to [1, n]
    size_t rank = static_cast<size_t>(std::ceil(p / 100.0 * static_cast<real>(n)));
    rank = std::clamp<size_t>(rank, 1, n);
    return sorted[rank - 1];
}

Kernel gaussian_kernel(int side, real sigma) {
    if (side % 2 == 0 || side <= 0) {
        throw ParameterError("gaussian_kernel: side must be odd and positive");
    }
    if (!(sigma > 0.0)) {
        throw ParameterError("gaussian_kernel: sigma must be positive");
    }
    Kernel k(side, side);
    const int half = side / 2;
    real sum = 0.0;
    for (int i = -half; i <= half; ++i) {
        for (int j = -half; j <= half; ++j) {
            const real v = std::exp(-(i * i + j * j) / (2.0 * sigma * sigma));
            k.at(i + half, j + half) = v;
            sum += v;
        }
    }
    for (real& v : k.data) v /= sum;
    return k;
}

void require_finite(const Image& img, const char* what) {
    for (real v : img.data) {
        if (!std::isfinite(v)) {
            throw InternalError(std::string(what) + ": non-finite value in image");
        }
    }
}

}  // namespace diffuse
