#include "sarbnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sarbnn/error.hpp"
#include "sarbnn/rng.hpp"

namespace sarbnn {

void validate(const TrainingConfig& c) {
    if (c.epochs == 0 || c.batch_size == 0 || c.mc_samples_per_step == 0) {
        throw ValidationError("training: epochs, batch_size and mc_samples_per_step must be positive");
    }
    if (!(c.learning_rate > 0.0)) throw ValidationError("training: learning_rate must be positive");
    if (c.kl_weight && !(*c.kl_weight >= 0.0)) throw ValidationError("training: kl_weight must be >= 0");
}

Batch make_batch(std::span<const Tensor> images, std::span<const int> labels, std::span<const std::size_t> order) {
    if (order.empty()) throw ValidationError("batch: empty");
    const Tensor& first = images[order[0]];
    Shape shape{order.size()};
    shape.insert(shape.end(), first.shape().begin(), first.shape().end());
    Batch b{Tensor(shape), {}};
    float* dst = b.images.data().data();
    for (std::size_t idx : order) {
        const Tensor& img = images[idx];
        if (img.shape() != first.shape()) throw ShapeError("batch", shape_str(first.shape()), shape_str(img.shape()));
        std::copy(img.data().begin(), img.data().end(), dst);
        dst += img.size();
        b.labels.push_back(labels[idx]);
    }
    return b;
}

LossComponents loss_and_gradients(const BayesianModel& model, const Batch& batch, std::span<const WeightSample> samples,
                                  double kl_weight, PosteriorGrads* grads) {
    if (batch.labels.empty()) throw ValidationError("train_step: empty batch");
    for (int y : batch.labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= model.num_classes()) {
            throw ValidationError("train_step: label " + std::to_string(y) + " outside [0, " +
                                  std::to_string(model.num_classes()) + ")");
        }
    }
    if (samples.empty()) throw ValidationError("train_step: need at least one weight sample");
    if (grads) *grads = zero_grads(model);

    const float inv_samples = 1.0f / static_cast<float>(samples.size());
    double nll = 0.0;
    for (const WeightSample& sample : samples) {
        GradTape tape;
        Var x = tape.leaf(batch.images);
        ForwardVars fv = forward(tape, model.arch(), sample, x, grads != nullptr);
        Var loss = tape.nll_loss(tape.log_softmax(fv.logits), batch.labels);
        nll += tape.value(loss)[0];
        if (!grads) continue;
        tape.backward(loss);
        const auto& params = model.params();
        for (std::size_t l = 0; l < params.size(); ++l) {
            const Tensor& gw = tape.grad(fv.weight_vars[l]);
            const Tensor& gb = tape.grad(fv.bias_vars[l]);
            auto push = [&](const GaussianPosterior& q, const Tensor& g, const Tensor& eps, Tensor& gmu, Tensor& grho) {
                for (std::size_t i = 0; i < g.size(); ++i) {
                    gmu[i] += g[i] * inv_samples;
                    if (!eps.empty()) grho[i] += g[i] * eps[i] * sigmoid(q.rho[i]) * inv_samples;
                }
            };
            const bool has_noise = !sample.noise.empty();
            static const Tensor none;
            push(params[l].weight, gw, has_noise ? sample.noise[l].weight : none, grads->mu[l].weight, grads->rho[l].weight);
            push(params[l].bias, gb, has_noise ? sample.noise[l].bias : none, grads->mu[l].bias, grads->rho[l].bias);
        }
    }
    LossComponents out;
    out.nll = nll / static_cast<double>(samples.size());
    out.kl = kl_to_prior(model);
    out.total = out.nll + kl_weight * out.kl;
    if (grads && kl_weight != 0.0) add_kl_gradients(model, kl_weight, *grads);
    return out;
}

Optimizer::Optimizer(const BayesianModel& model, const TrainingConfig& config)
    : config_(config), first_(zero_grads(model)), second_(zero_grads(model)) {}

void Optimizer::step(BayesianModel& model, const PosteriorGrads& grads) {
    ++steps_;
    const float lr = static_cast<float>(config_.learning_rate);
    auto update = [&](Tensor& param, const Tensor& g, Tensor& m, Tensor& v) {
        if (config_.optimizer == OptimizerKind::SgdMomentum) {
            const float mom = static_cast<float>(config_.momentum);
            for (std::size_t i = 0; i < param.size(); ++i) {
                m[i] = mom * m[i] + g[i];
                param[i] -= lr * m[i];
            }
            return;
        }
        const double b1 = config_.adam_beta1, b2 = config_.adam_beta2;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
        const float step = static_cast<float>(config_.learning_rate * std::sqrt(c2) / c1);
        const float eps = static_cast<float>(config_.adam_epsilon);
        for (std::size_t i = 0; i < param.size(); ++i) {
            m[i] = static_cast<float>(b1 * m[i] + (1.0 - b1) * g[i]);
            v[i] = static_cast<float>(b2 * v[i] + (1.0 - b2) * g[i] * g[i]);
            param[i] -= step * m[i] / (std::sqrt(v[i]) + eps);
        }
    };
    auto& params = model.params();
    for (std::size_t l = 0; l < params.size(); ++l) {
        update(params[l].weight.mu, grads.mu[l].weight, first_.mu[l].weight, second_.mu[l].weight);
        update(params[l].bias.mu, grads.mu[l].bias, first_.mu[l].bias, second_.mu[l].bias);
        update(params[l].weight.rho, grads.rho[l].weight, first_.rho[l].weight, second_.rho[l].weight);
        update(params[l].bias.rho, grads.rho[l].bias, first_.rho[l].bias, second_.rho[l].bias);
    }
}

LossComponents train_step(BayesianModel& model, Optimizer& optimizer, const Batch& batch, const TrainingConfig& config,
                          double kl_weight, std::uint64_t step_seed, StepContext context) {
    std::vector<WeightSample> samples;
    for (std::size_t s = 0; s < config.mc_samples_per_step; ++s) {
        samples.push_back(sample_weights(model, derive_seed(step_seed, "mc", s)));
    }
    const std::string where = " at epoch " + std::to_string(context.epoch) + ", batch " + std::to_string(context.batch);
    PosteriorGrads grads;
    LossComponents loss;
    try {
        loss = loss_and_gradients(model, batch, samples, kl_weight, &grads);
    } catch (const NumericError& e) {
        throw NumericError("training diverged" + where + ": " + e.what());
    }

    auto fail = [&](const char* component, double value) {
        throw NumericError("training diverged: non-finite " + std::string(component) + " (" + std::to_string(value) + ")" + where);
    };
    if (!std::isfinite(loss.nll)) fail("nll", loss.nll);
    if (!std::isfinite(loss.kl)) fail("kl", loss.kl);
    if (!std::isfinite(loss.total)) fail("total", loss.total);
    for (std::size_t l = 0; l < grads.mu.size(); ++l) {
        if (!all_finite(grads.mu[l].weight.data()) || !all_finite(grads.mu[l].bias.data()) ||
            !all_finite(grads.rho[l].weight.data()) || !all_finite(grads.rho[l].bias.data())) {
            fail("gradient", NAN);
        }
    }
    optimizer.step(model, grads);
    return loss;
}

std::vector<EpochLog> fit(BayesianModel& model, std::span<const Tensor> images, std::span<const int> labels,
                          const TrainingConfig& config, const std::function<double(const BayesianModel&)>& evaluate,
                          const std::function<void(const EpochLog&)>& on_epoch) {
    validate(config);
    if (images.empty() || images.size() != labels.size()) throw ValidationError("fit: need matching, non-empty images and labels");
    const std::size_t n = images.size();
    const std::size_t batches = (n + config.batch_size - 1) / config.batch_size;
    const double base_kl_weight = config.kl_weight.value_or(1.0 / static_cast<double>(n));

    Optimizer optimizer(model, config);
    std::vector<std::size_t> order(n);
    std::vector<EpochLog> log;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng(derive_seed(config.rng_seed, "shuffle", epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double nll_sum = 0.0, total_sum = 0.0;
        for (std::size_t b = 0; b < batches; ++b) {
            const std::size_t begin = b * config.batch_size;
            const std::size_t end = std::min(n, begin + config.batch_size);
            const Batch batch = make_batch(images, labels, std::span(order).subspan(begin, end - begin));
            double kl_weight = base_kl_weight;
            if (config.kl_anneal && epoch == 0) kl_weight *= static_cast<double>(b + 1) / static_cast<double>(batches);
            const std::uint64_t step_seed = derive_seed(config.rng_seed, "step", epoch * batches + b);
            const LossComponents loss = train_step(model, optimizer, batch, config, kl_weight, step_seed, {epoch, b});
            nll_sum += loss.nll;
            total_sum += loss.total;
        }
        EpochLog entry;
        entry.epoch = epoch + 1;
        entry.nll = nll_sum / static_cast<double>(batches);
        entry.total = total_sum / static_cast<double>(batches);
        entry.kl = kl_to_prior(model);
        entry.clean_accuracy = evaluate ? evaluate(model) : 0.0;
        log.push_back(entry);
        if (on_epoch) on_epoch(entry);
    }
    return log;
}

}  // namespace sarbnn
