#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sarbnn/architecture.hpp"
#include "sarbnn/tape.hpp"
#include "sarbnn/tensor.hpp"

namespace sarbnn {

// Gaussian prior P(w) = N(mean, stddev^2), shared by every weight.
struct PriorSpec {
    double mean = 0.0;
    double stddev = 0.1;
    bool operator==(const PriorSpec&) const = default;
};

float softplus(float rho) noexcept;
float sigmoid(float x) noexcept;

// Mean-field variational posterior over one weight tensor:
// w ~ N(mu, softplus(rho)^2) element-wise.
struct GaussianPosterior {
    Tensor mu;
    Tensor rho;
    Tensor sigma() const;
    bool operator==(const GaussianPosterior&) const = default;
};

struct ParamLayer {
    GaussianPosterior weight;
    GaussianPosterior bias;
    bool operator==(const ParamLayer&) const = default;
};

class BayesianModel {
public:
    BayesianModel(ResolvedArchitecture arch, PriorSpec prior, std::vector<ParamLayer> params);

    const ResolvedArchitecture& arch() const noexcept { return arch_; }
    const ArchitectureSpec& spec() const noexcept { return arch_.spec; }
    const PriorSpec& prior() const noexcept { return prior_; }
    std::vector<ParamLayer>& params() noexcept { return params_; }
    const std::vector<ParamLayer>& params() const noexcept { return params_; }

    std::size_t num_classes() const noexcept { return arch_.spec.num_classes; }
    Shape input_shape() const;  // [C, H, W]
    std::size_t num_weights() const;  // weights + biases

    // Adds `delta` to every rho (scales every sigma up for delta > 0).
    void shift_rho(float delta);
    void set_rho(float value);

    bool operator==(const BayesianModel& other) const;

private:
    ResolvedArchitecture arch_;
    PriorSpec prior_;
    std::vector<ParamLayer> params_;
};

// mu ~ N(0, 2 / fan_in), bias mu = 0, rho = rho_init everywhere.
BayesianModel build_model(const ArchitectureSpec& arch, const PriorSpec& prior, std::uint64_t seed,
                          float rho_init = -5.0f);
// Same, from already-resolved layers and explicit posteriors (checkpoint load).
BayesianModel assemble_model(const ArchitectureSpec& arch, const PriorSpec& prior, std::vector<ParamLayer> params);

struct LayerTensors {
    Tensor weight;
    Tensor bias;
};

// One draw w_i = mu + softplus(rho) * eps. `noise` keeps the eps used so
// training can push gradients through the reparameterization.
struct WeightSample {
    std::vector<LayerTensors> layers;
    std::vector<LayerTensors> noise;
};

enum class NoiseMode { Sampled, Zero };

WeightSample sample_weights(const BayesianModel& model, std::uint64_t seed, NoiseMode mode = NoiseMode::Sampled);
// w = mu (eps forced to zero).
WeightSample mean_weights(const BayesianModel& model);
// w = mu + softplus(rho) * eps for caller-provided eps (same layout as the posteriors).
WeightSample weights_from_noise(const BayesianModel& model, std::vector<LayerTensors> noise);

struct ForwardVars {
    Var logits;                      // [N, classes]
    std::vector<Var> weight_vars;    // per parameter layer
    std::vector<Var> bias_vars;
};

// Records the network on `tape`, input `x` is [N, C, H, W].
ForwardVars forward(GradTape& tape, const ResolvedArchitecture& arch, const WeightSample& weights, Var x,
                    bool params_require_grad);

// Inference-only convenience: logits for a [N, C, H, W] batch (or one [C, H, W] image).
Tensor compute_logits(const BayesianModel& model, const WeightSample& weights, const Tensor& x);

// Closed-form KL(q || p) summed over every weight and bias, in nats.
double kl_to_prior(const BayesianModel& model);

// d KL / d mu and d KL / d rho, scaled by `scale` and added into the output.
struct PosteriorGrads {
    std::vector<LayerTensors> mu;
    std::vector<LayerTensors> rho;
};
PosteriorGrads zero_grads(const BayesianModel& model);
void add_kl_gradients(const BayesianModel& model, double scale, PosteriorGrads& grads);

// Adds a batch axis to a single [C, H, W] image.
Tensor as_batch(const Tensor& x);

}  // namespace sarbnn
