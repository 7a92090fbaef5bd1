#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "sarbnn/data.hpp"

namespace sarbnn {

// MSTAR chip files: an ASCII Phoenix header ("Key= value" lines ending with
// "[EndofPhoenixHeader]"), optional native header, then NumberOfRows x
// NumberOfColumns big-endian float32 magnitudes (phase data, if present, is
// ignored). Magnitudes are divided by their maximum.
Tensor decode_mstar(std::string_view bytes, const std::string& name);
Tensor read_mstar(const std::filesystem::path& path);

// One subdirectory per class under `root`, labels assigned by sorted
// directory name; every regular file inside is decoded as a chip.
ChipDataset ingest_mstar(const std::filesystem::path& root, Split split);

}  // namespace sarbnn
