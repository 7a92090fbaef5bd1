#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sarbnn/model.hpp"
#include "sarbnn/saliency.hpp"

namespace sarbnn {

struct ScattererSpec {
    PixelCoord center;
    double amplitude = 0.0;
    double radius = 1.0;  // Gaussian std in pixels
    bool operator==(const ScattererSpec&) const = default;
};

struct AttackConfig {
    std::size_t n_scatterers = 1;
    std::size_t grid_stride = 2;
    // Amplitudes are drawn uniformly from [min, max] times the image's
    // dynamic range (max - min pixel).
    double amplitude_min = 0.3;
    double amplitude_max = 0.6;
    std::size_t amplitude_samples = 2;
    double radius = 1.25;
    std::size_t max_evals = 600;      // 0 disables the search
    double mask_percentile = 0.85;    // candidate mask: intensity above this quantile ...
    std::size_t mask_dilation = 1;    // ... dilated by this many pixels (Chebyshev)
    bool mc_objective = false;        // true: MC-mean probability instead of w = mu
    std::size_t mc_samples = 8;
    std::uint64_t rng_seed = 1;

    void validate() const;
};

struct AdversarialRecord {
    Tensor original;
    Tensor perturbed;
    std::vector<ScattererSpec> specs;
    std::size_t true_label = 0;
    std::size_t pred_before = 0;
    std::size_t pred_after = 0;
    bool success = false;  // prediction flipped away from the truth
    std::size_t evals = 0;
};

// Blobs are truncated at 3 radii. Result is clamped to [0, 1].
Tensor render_scatterers(const Tensor& image, std::span<const ScattererSpec> specs);
// Same sum without clamping.
Tensor render_scatterers_unclamped(const Tensor& image, std::span<const ScattererSpec> specs);

// Row-major [H * W] 0/1 mask of pixels above the intensity quantile, dilated.
std::vector<std::uint8_t> target_mask(const Tensor& image, double percentile, std::size_t dilation);

// Greedy placement: each round tries mask pixels on the stride grid times the
// sampled amplitudes and keeps the blob that most lowers the true-class
// probability. Exactly n_scatterers blobs unless max_evals = 0.
AdversarialRecord attack(const BayesianModel& victim, const Tensor& image, std::size_t true_label,
                         const AttackConfig& config);

}  // namespace sarbnn
