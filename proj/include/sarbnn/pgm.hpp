#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "sarbnn/tensor.hpp"

namespace sarbnn {

// Binary P5 graymaps. Reading accepts maxval 1..65535 (two-byte big-endian
// samples above 255) and returns a [1, H, W] tensor normalized to [0, 1].
Tensor decode_pgm(std::string_view bytes, const std::string& name);
Tensor read_pgm(const std::filesystem::path& path);

// Writes 16-bit maxval 65535. Accepts [H, W] or [1, H, W]; values are
// clamped to [0, 1] and rounded to the nearest k / 65535.
std::string encode_pgm(const Tensor& image);
void write_pgm(const std::filesystem::path& path, const Tensor& image);

// Rounds every value to the nearest k / 65535 after clamping to [0, 1], so a
// write/read cycle reproduces the tensor bit-exactly.
void quantize_16bit(Tensor& image);

}  // namespace sarbnn
