#include "diffuse/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace diffuse {

namespace {

static_assert(std::endian::native == std::endian::little,
              "RFI I/O assumes a little-endian host");

constexpr char kMagic[4] = {'R', 'F', 'I', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

void write_rfi_raw(const std::filesystem::path& path, int h, int w, int c,
                   const std::vector<real>& data) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path.string());
    os.write(kMagic, 4);
    write_u32(os, static_cast<std::uint32_t>(h));
    write_u32(os, static_cast<std::uint32_t>(w));
    write_u32(os, static_cast<std::uint32_t>(c));
    std::vector<float> buf(data.size());
    std::transform(data.begin(), data.end(), buf.begin(),
                   [](real v) { return static_cast<float>(v); });
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!os) throw FormatError("short write: " + path.string());
}

Image read_rfi_image(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError("bad RFI magic in " + path.string());
    }
    const std::uint32_t h = read_u32(is);
    const std::uint32_t w = read_u32(is);
    const std::uint32_t c = read_u32(is);
    if (!is || h == 0 || w == 0 || c == 0) {
        throw FormatError("bad RFI header in " + path.string());
    }
    const size_t n = static_cast<size_t>(h) * w * c;
    std::vector<float> buf(n);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!is) throw FormatError("truncated RFI payload in " + path.string());
    Image img(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
    std::copy(buf.begin(), buf.end(), img.data.begin());
    return img;
}

void write_pgm_values(const std::filesystem::path& path, int h, int w,
                      const std::vector<real>& values) {
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const real lo = *lo_it, hi = *hi_it;
    const real scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path.string());
    os << "P5\n" << w << " " << h << "\n255\n";
    std::vector<unsigned char> row(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        row[i] = static_cast<unsigned char>(std::lround((values[i] - lo) * scale));
    }
    os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
}

}  // namespace

void write_rfi(const std::filesystem::path& path, const Image& img) {
    write_rfi_raw(path, img.height, img.width, img.channels, img.data);
}

void write_rfi(const std::filesystem::path& path, const GrayMap& map) {
    write_rfi_raw(path, map.height, map.width, 1, map.data);
}

void write_rfi(const std::filesystem::path& path, const Mask& mask) {
    std::vector<real> data(mask.data.begin(), mask.data.end());
    write_rfi_raw(path, mask.height, mask.width, 1, data);
}

Image read_rfi(const std::filesystem::path& path) { return read_rfi_image(path); }

GrayMap read_rfi_graymap(const std::filesystem::path& path) {
    Image img = read_rfi_image(path);
    if (img.channels != 1) {
        throw FormatError("expected channels=1 in " + path.string());
    }
    GrayMap map(img.height, img.width);
    map.data = std::move(img.data);
    return map;
}

void write_pgm(const std::filesystem::path& path, const Image& img) {
    std::vector<real> gray(static_cast<size_t>(img.height) * img.width);
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            real acc = 0.0;
            for (int ch = 0; ch < img.channels; ++ch) acc += img.at(r, c, ch);
            gray[static_cast<size_t>(r) * img.width + c] = acc / img.channels;
        }
    }
    write_pgm_values(path, img.height, img.width, gray);
}

void write_pgm(const std::filesystem::path& path, const GrayMap& map) {
    write_pgm_values(path, map.height, map.width, map.data);
}

}  // namespace diffuse
