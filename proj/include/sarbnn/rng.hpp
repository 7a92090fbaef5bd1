#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sarbnn {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Stream derivation: every consumer of randomness asks for a sub-seed by
// purpose label, sub_seed = splitmix64(root ^ fnv1a64(label)), optionally
// mixed with an index (per image, per epoch, ...). Streams never share state,
// so a fixed root seed reproduces every run regardless of execution order.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label) noexcept;
std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index) noexcept;

}  // namespace sarbnn
