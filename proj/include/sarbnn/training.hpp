#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sarbnn/model.hpp"

namespace sarbnn {

enum class OptimizerKind { SgdMomentum, Adam };

struct TrainingConfig {
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    double learning_rate = 0.01;
    OptimizerKind optimizer = OptimizerKind::SgdMomentum;
    double momentum = 0.9;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    // Unset means 1 / (training set size): the minibatch ELBO weight for a
    // batch-mean NLL.
    std::optional<double> kl_weight;
    // Ramp the KL weight linearly from 0 over the first epoch.
    bool kl_anneal = false;
    std::size_t mc_samples_per_step = 1;
    std::uint64_t rng_seed = 1;
};

void validate(const TrainingConfig& config);

struct LossComponents {
    double nll = 0.0;
    double kl = 0.0;
    double total = 0.0;
};

struct Batch {
    Tensor images;  // [B, C, H, W]
    std::vector<int> labels;
};

Batch make_batch(std::span<const Tensor> images, std::span<const int> labels, std::span<const std::size_t> order);

// total = mean over `samples` of batch-mean NLL + kl_weight * KL(q || p).
// When `grads` is non-null, fills d total / d mu and d total / d rho through
// the reparameterization w = mu + softplus(rho) * eps of each sample.
LossComponents loss_and_gradients(const BayesianModel& model, const Batch& batch, std::span<const WeightSample> samples,
                                  double kl_weight, PosteriorGrads* grads);

class Optimizer {
public:
    Optimizer(const BayesianModel& model, const TrainingConfig& config);
    void step(BayesianModel& model, const PosteriorGrads& grads);

private:
    TrainingConfig config_;
    PosteriorGrads first_;
    PosteriorGrads second_;
    std::size_t steps_ = 0;
};

struct StepContext {
    std::size_t epoch = 0;
    std::size_t batch = 0;
};

// One Bayes-by-backprop update. Throws NumericError naming epoch, batch and
// the offending loss component when anything is non-finite.
LossComponents train_step(BayesianModel& model, Optimizer& optimizer, const Batch& batch, const TrainingConfig& config,
                          double kl_weight, std::uint64_t step_seed, StepContext context);

struct EpochLog {
    std::size_t epoch = 0;
    double nll = 0.0;    // mean over the epoch's batches
    double kl = 0.0;     // KL at the end of the epoch
    double total = 0.0;  // mean over the epoch's batches
    double clean_accuracy = 0.0;
};

// Full training run. `evaluate` returns clean accuracy after each epoch.
std::vector<EpochLog> fit(BayesianModel& model, std::span<const Tensor> images, std::span<const int> labels,
                          const TrainingConfig& config, const std::function<double(const BayesianModel&)>& evaluate,
                          const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace sarbnn
