#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sarbnn/model.hpp"
#include "sarbnn/uncertainty.hpp"

namespace sarbnn {

// All maps are [H, W], matching the input image's spatial shape.
struct SaliencyBundle {
    std::vector<Tensor> per_sample;  // guided-backprop map per weight sample
    Tensor mean;                     // Monte-Carlo mean over samples
    Tensor std;                      // population std (divide by T)
    Tensor normalized;               // max(mean, 0) / (1 + std)
    Tensor topk;                     // normalized with only the k largest kept
    std::size_t k = 0;
    std::size_t target_class = 0;
    PredictiveSummary prediction;
};

// Guided backprop for one weight sample: seed one-hot at `target_class` on the
// logits, return the input gradient summed over channels.
Tensor gbp_single(const BayesianModel& model, const Tensor& x, const WeightSample& weights, std::size_t target_class);

struct SaliencyStats {
    Tensor mean;
    Tensor std;
    Tensor normalized;
};
// Mean / population std in double, then max(mean, 0) / (1 + std).
SaliencyStats aggregate_saliency(std::span<const Tensor> per_sample);

struct GbpOptions {
    std::size_t k = 50;
    // false: reuse the weight samples of the prediction (seed + i);
    // true: draw a fresh set for the saliency passes.
    bool resample = false;
};

SaliencyBundle gbp_bnn(const BayesianModel& model, const Tensor& x, std::size_t t, std::uint64_t seed,
                       const GbpOptions& options = {});

// Keeps the k largest values, ties at the cut resolved by lower row-major
// index; everything else becomes 0. k >= size keeps the map unchanged.
Tensor top_k(const Tensor& map, std::size_t k);

struct PixelCoord {
    std::size_t row = 0;
    std::size_t col = 0;
    bool operator==(const PixelCoord&) const = default;
};

struct ScattererGroundTruth {
    std::vector<PixelCoord> centers;
    std::size_t footprint_radius = 2;
};

// Fraction of centers with at least one nonzero top-k pixel within
// Chebyshev distance footprint_radius.
double sir(const Tensor& topk_map, const ScattererGroundTruth& truth);
double sir(const SaliencyBundle& bundle, const ScattererGroundTruth& truth);

struct MapScale {
    double min = 0.0;
    double max = 0.0;
};
// Min-max scales to 16-bit PGM; returns the scale factors.
MapScale write_saliency_pgm(const Tensor& map, const std::filesystem::path& path);
// "rank,row,col,score" for every nonzero pixel of a top-k map, best first.
void write_topk_csv(const Tensor& topk_map, const std::filesystem::path& path);

}  // namespace sarbnn
