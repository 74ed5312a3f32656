#pragma once

#include <cstdint>
#include <vector>

#include "diffuse/errors.hpp"

namespace diffuse {

using real = double;

// Dense H x W x C image, row-major, channel-fastest:
// data[(row * width + col) * channels + ch].
struct Image {
    int height = 0;
    int width = 0;
    int channels = 1;
    std::vector<real> data;

    Image() = default;
    Image(int h, int w, int c, real fill = 0.0);

    real& at(int row, int col, int ch = 0) {
        return data[static_cast<size_t>((row * width + col) * channels + ch)];
    }
    real at(int row, int col, int ch = 0) const {
        return data[static_cast<size_t>((row * width + col) * channels + ch)];
    }
    size_t size() const { return data.size(); }
    bool same_shape(const Image& other) const {
        return height == other.height && width == other.width && channels == other.channels;
    }
};

// Binary H x W mask; every entry is exactly 0 or 1.
struct Mask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;

    Mask() = default;
    Mask(int h, int w, std::uint8_t fill = 0);

    std::uint8_t& at(int row, int col) {
        return data[static_cast<size_t>(row * width + col)];
    }
    std::uint8_t at(int row, int col) const {
        return data[static_cast<size_t>(row * width + col)];
    }
    size_t area() const;  // number of 1-pixels
    bool empty_mask() const { return area() == 0; }
};

// Non-negative single-channel map (saliency, anomaly differences, ...).
struct GrayMap {
    int height = 0;
    int width = 0;
    std::vector<real> data;

    GrayMap() = default;
    GrayMap(int h, int w, real fill = 0.0);

    real& at(int row, int col) {
        return data[static_cast<size_t>(row * width + col)];
    }
    real at(int row, int col) const {
        return data[static_cast<size_t>(row * width + col)];
    }
    size_t size() const { return data.size(); }
};

// Small dense 2-D kernel for convolve_same; side lengths must be odd.
struct Kernel {
    int height = 0;
    int width = 0;
    std::vector<real> data;

    Kernel() = default;
    Kernel(int h, int w, real fill = 0.0);

    real at(int row, int col) const {
        return data[static_cast<size_t>(row * width + col)];
    }
    real& at(int row, int col) {
        return data[static_cast<size_t>(row * width + col)];
    }
};

// out = a*m + b*(1-m), mask broadcast across channels.
Image hadamard_mix(const Image& a, const Image& b, const Mask& m);

// Same-size 2-D convolution with edge replication at the borders.
GrayMap convolve_same(const GrayMap& map, const Kernel& kernel);

// Nearest-rank percentile: the value v such that strictly-greater
// binarization keeps the top (100-p)% of pixels.
real percentile_value(const GrayMap& map, real p);

// Normalized Gaussian kernel (entries sum to 1), odd side.
Kernel gaussian_kernel(int side, real sigma);

// Throws if any value is non-finite; `what` names the offending operation.
void require_finite(const Image& img, const char* what);

}  // namespace diffuse
