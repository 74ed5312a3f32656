#include "diffuse/dataset.hpp"

#include <fstream>

#include <json.hpp>

#include "diffuse/io.hpp"

namespace diffuse {

namespace {

std::string index_name(const char* stem, size_t index, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%05zu.%s", stem, index, ext);
    return buf;
}

}  // namespace

std::filesystem::path write_dataset(const std::filesystem::path& dir,
                                    const std::vector<LabeledSample>& samples) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest = nlohmann::json::array();
    for (size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const std::string image_name = index_name("img", i, "rfi");
        write_rfi(dir / image_name, s.image);
        nlohmann::json entry;
        entry["path"] = image_name;
        entry["label"] = s.label == Label::diseased ? "diseased" : "healthy";
        if (s.label == Label::diseased) {
            const std::string mask_name = index_name("mask", i, "rfi");
            write_rfi(dir / mask_name, s.gt_mask);
            entry["mask_path"] = mask_name;
        } else {
            entry["mask_path"] = "";
        }
        manifest.push_back(entry);
    }
    const std::filesystem::path manifest_path = dir / "manifest.json";
    std::ofstream os(manifest_path);
    if (!os) throw FormatError("cannot open for writing: " + manifest_path.string());
    os << manifest.dump(2) << "\n";
    return manifest_path;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream is(manifest_path);
    if (!is) throw DataError("cannot open manifest: " + manifest_path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad manifest " + manifest_path.string() + ": " + e.what());
    }
    if (!j.is_array()) throw FormatError("manifest must be a JSON array: " + manifest_path.string());
    std::vector<ManifestEntry> entries;
    entries.reserve(j.size());
    for (const auto& item : j) {
        ManifestEntry e;
        e.path = item.at("path").get<std::string>();
        const std::string label = item.at("label").get<std::string>();
        if (label == "healthy") {
            e.label = Label::healthy;
        } else if (label == "diseased") {
            e.label = Label::diseased;
        } else {
            throw FormatError("unknown label '" + label + "' in " + manifest_path.string());
        }
        e.mask_path = item.value("mask_path", std::string{});
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<LabeledSample> load_dataset(const std::filesystem::path& manifest_path) {
    const auto entries = read_manifest(manifest_path);
    const auto root = manifest_path.parent_path();
    std::vector<LabeledSample> samples;
    samples.reserve(entries.size());
    for (const auto& e : entries) {
        LabeledSample s;
        s.image = read_rfi(root / e.path);
        s.label = e.label;
        if (!e.mask_path.empty()) {
            const GrayMap raw = read_rfi_graymap(root / e.mask_path);
            Mask m(raw.height, raw.width, 0);
            for (size_t i = 0; i < raw.data.size(); ++i) {
                m.data[i] = raw.data[i] >= 0.5 ? 1 : 0;
            }
            s.gt_mask = std::move(m);
        } else {
            s.gt_mask = Mask(s.image.height, s.image.width, 0);
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace diffuse
