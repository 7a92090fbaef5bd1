#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "sarbnn/data.hpp"

namespace sarbnn {

// CSV "id,file,label,split"; `file` is relative to the manifest's directory.
// Images are written as <dir>/images/<id>.pgm.
void save_manifest(const ChipDataset& ds, const std::filesystem::path& manifest);
ChipDataset load_manifest(const std::filesystem::path& manifest, std::size_t num_classes);

// Ground-truth scatterers of an adversarial set, one row per blob.
struct ScattererRow {
    std::string id;
    std::size_t scatterer_index = 0;
    std::size_t row = 0;
    std::size_t col = 0;
    double amplitude = 0.0;
    double radius = 0.0;
    bool operator==(const ScattererRow&) const = default;
};

// CSV "id,scatterer_index,row,col,amplitude,radius".
void save_scatterers(const std::vector<ScattererRow>& rows, const std::filesystem::path& path);
std::vector<ScattererRow> load_scatterers(const std::filesystem::path& path);

}  // namespace sarbnn
