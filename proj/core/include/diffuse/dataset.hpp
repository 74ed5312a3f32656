#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "diffuse/phantom.hpp"

namespace diffuse {

struct ManifestEntry {
    std::string path;       // image RFI, relative to the manifest directory
    Label label = Label::healthy;
    std::string mask_path;  // ground-truth mask RFI; empty for healthy
};

// Writes images (and masks for diseased samples) as RFI files plus a
// manifest.json listing {path, label, mask_path}. Returns the manifest path.
std::filesystem::path write_dataset(const std::filesystem::path& dir,
                                    const std::vector<LabeledSample>& samples);

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest_path);

// Loads every entry; ground-truth masks are attached where present.
std::vector<LabeledSample> load_dataset(const std::filesystem::path& manifest_path);

}  // namespace diffuse
