#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "sarbnn/model.hpp"

namespace sarbnn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// "BNNV1\0", u32 version, u32-length descriptor (key=value lines: arch,
// prior_mean, prior_stddev), then per parameter layer weight mu, bias mu,
// weight rho, bias rho as float32, then CRC32 of everything before it.
// All integers and floats little-endian.
std::string encode_checkpoint(const BayesianModel& model);
BayesianModel decode_checkpoint(std::string_view bytes, const std::string& name);

void save_checkpoint(const BayesianModel& model, const std::filesystem::path& path);
BayesianModel load_checkpoint(const std::filesystem::path& path);

}  // namespace sarbnn
