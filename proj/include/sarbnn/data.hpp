#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sarbnn/tensor.hpp"

namespace sarbnn {

enum class Split { Train, Test, Validation };

std::string_view split_name(Split s) noexcept;
Split parse_split(std::string_view name);

struct Chip {
    Tensor image;  // [1, H, W], values in [0, 1]
    std::size_t label = 0;
    std::string id;
    Split split = Split::Train;
    bool operator==(const Chip&) const = default;
};

struct ChipDataset {
    std::vector<Chip> chips;
    std::size_t num_classes = 10;
    std::string provenance;  // "synthetic(seed=...)" or "ingested(<path>)"

    std::size_t count(Split s) const;
    ChipDataset subset(Split s) const;
    void append(const ChipDataset& other);

    // Labels in range, one shared [1, H, W] shape, unique ids.
    void validate() const;

    // Provenance is informational and not compared.
    bool operator==(const ChipDataset& other) const { return num_classes == other.num_classes && chips == other.chips; }
};

// Ten templates are built in: bar, plus, L, T, V, point cluster, ring, box,
// twin bars, triangle.
inline constexpr std::size_t kSyntheticTemplates = 10;

struct SyntheticOptions {
    Split split = Split::Train;
    std::string id_prefix = "syn";
    double rotation_deg = 30.0;    // uniform in [-r, r]
    double max_shift = 4.0;        // pixels, uniform per axis
    double scale_jitter = 0.1;     // relative
    double target_level = 0.5;
    double background_level = 0.08;
    unsigned speckle_looks = 3;    // gain = mean of `looks` unit exponentials
};

// Bright template on a dark background times multiplicative speckle.
// Pixels are quantized to 16 bits so PGM storage is lossless.
ChipDataset generate_synthetic(std::size_t num_classes, std::size_t per_class, std::size_t chip_size,
                               std::uint64_t seed, const SyntheticOptions& options = {});

struct PreprocessSpec {
    std::size_t patch_h = 48;  // random training patches
    std::size_t patch_w = 48;
    std::size_t crop_h = 48;   // central crop for test / validation
    std::size_t crop_w = 48;
    std::size_t augment_count = 5;
};

// Train chips become augment_count random patches each (ids "<id>_p<j>"),
// other splits a single central crop. Warnings go to `warnings` if given.
ChipDataset augment_and_crop(const ChipDataset& ds, const PreprocessSpec& spec, std::uint64_t seed,
                             std::vector<std::string>* warnings = nullptr);

Tensor crop(const Tensor& image, std::size_t top, std::size_t left, std::size_t h, std::size_t w);
// Offset (H - h) / 2, rounded down.
Tensor center_crop(const Tensor& image, std::size_t h, std::size_t w);

}  // namespace sarbnn
