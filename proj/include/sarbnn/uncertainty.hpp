#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sarbnn/model.hpp"

namespace sarbnn {

// Dense row-major T x C matrix of per-sample class probabilities.
struct ProbabilityMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    ProbabilityMatrix() = default;
    ProbabilityMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return std::span(values).subspan(r * cols, cols); }
    std::span<double> row(std::size_t r) { return std::span(values).subspan(r * cols, cols); }
};

struct PredictiveSummary {
    ProbabilityMatrix sample_probs;  // P(y | x, w_i), one row per weight sample
    std::vector<double> mean_probs;  // Monte-Carlo estimate of P(y | x, D)
    double mi = 0.0;                 // epistemic uncertainty, nats
    std::size_t t = 0;

    std::size_t predicted_class() const;
};

// Shannon entropy in nats, each term p * ln(p + 1e-12).
double entropy(std::span<const double> p);

// Column mean of the rows; the same arithmetic used by predict().
std::vector<double> column_mean(const ProbabilityMatrix& m);

// H(mean of rows) - mean of H(rows), clamped at 0.
double mutual_information(const ProbabilityMatrix& sample_probs);

// argmax with ties resolved to the lowest index.
std::size_t argmax(std::span<const double> values);

std::vector<double> softmax(std::span<const float> logits);

// Weight sample i is drawn with seed + i, so predictions for one image do not
// depend on which other images share the batch.
PredictiveSummary predict(const BayesianModel& model, const Tensor& x, std::size_t t, std::uint64_t seed);
std::vector<PredictiveSummary> predict_batch(const BayesianModel& model, std::span<const Tensor> images, std::size_t t,
                                             std::uint64_t seed);

// Deterministic prediction with w = mu, one probability row per image.
std::vector<std::vector<double>> mean_weight_probs(const BayesianModel& model, std::span<const Tensor> images);

}  // namespace sarbnn
