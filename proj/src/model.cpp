#include "sarbnn/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "sarbnn/error.hpp"
#include "sarbnn/rng.hpp"

namespace sarbnn {

float softplus(float rho) noexcept {
    if (rho > 20.0f) return rho;
    return static_cast<float>(std::log1p(std::exp(static_cast<double>(rho))));
}

float sigmoid(float x) noexcept { return static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(x)))); }

Tensor GaussianPosterior::sigma() const {
    Tensor s(rho.shape());
    for (std::size_t i = 0; i < rho.size(); ++i) s[i] = softplus(rho[i]);
    return s;
}

BayesianModel::BayesianModel(ResolvedArchitecture arch, PriorSpec prior, std::vector<ParamLayer> params)
    : arch_(std::move(arch)), prior_(prior), params_(std::move(params)) {
    if (!(prior_.stddev > 0.0)) throw ValidationError("prior: stddev must be > 0");
    if (params_.size() != arch_.param_layers) {
        throw ValidationError("model: expected " + std::to_string(arch_.param_layers) + " parameter layers, got " +
                              std::to_string(params_.size()));
    }
}

Shape BayesianModel::input_shape() const {
    return {arch_.spec.input.channels, arch_.spec.input.height, arch_.spec.input.width};
}

std::size_t BayesianModel::num_weights() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.weight.mu.size() + p.bias.mu.size();
    return n;
}

void BayesianModel::shift_rho(float delta) {
    for (auto& p : params_) {
        for (float& r : p.weight.rho.data()) r += delta;
        for (float& r : p.bias.rho.data()) r += delta;
    }
}

void BayesianModel::set_rho(float value) {
    for (auto& p : params_) {
        p.weight.rho.fill(value);
        p.bias.rho.fill(value);
    }
}

bool BayesianModel::operator==(const BayesianModel& other) const {
    return arch_.spec == other.arch_.spec && prior_ == other.prior_ && params_ == other.params_;
}

namespace {

struct ParamShapes {
    Shape weight;
    Shape bias;
    std::size_t fan_in;
};

ParamShapes param_shapes(const ResolvedLayer& layer) {
    if (const auto* conv = std::get_if<ConvLayer>(&layer.spec)) {
        const std::size_t c = layer.in[0];
        return {{conv->out_channels, c, conv->kernel, conv->kernel}, {conv->out_channels}, c * conv->kernel * conv->kernel};
    }
    const auto& fc = std::get<FcLayer>(layer.spec);
    return {{layer.in[0], fc.units}, {fc.units}, layer.in[0]};
}

void check_param_shapes(const ResolvedArchitecture& arch, const std::vector<ParamLayer>& params) {
    std::size_t i = 0;
    for (const auto& layer : arch.layers) {
        if (layer.param_index < 0) continue;
        const ParamShapes s = param_shapes(layer);
        const ParamLayer& p = params.at(i++);
        if (p.weight.mu.shape() != s.weight || p.weight.rho.shape() != s.weight || p.bias.mu.shape() != s.bias ||
            p.bias.rho.shape() != s.bias) {
            throw ValidationError("model: posterior shapes for " + render_layer(layer.spec) + " do not match weight " +
                                  shape_str(s.weight) + " / bias " + shape_str(s.bias));
        }
    }
}

}  // namespace

BayesianModel build_model(const ArchitectureSpec& spec, const PriorSpec& prior, std::uint64_t seed, float rho_init) {
    ResolvedArchitecture arch = resolve(spec);
    Rng rng(seed);
    std::vector<ParamLayer> params;
    for (const auto& layer : arch.layers) {
        if (layer.param_index < 0) continue;
        const ParamShapes s = param_shapes(layer);
        std::normal_distribution<float> init(0.0f, std::sqrt(2.0f / static_cast<float>(s.fan_in)));
        ParamLayer p;
        p.weight.mu = Tensor(s.weight);
        for (float& v : p.weight.mu.data()) v = init(rng);
        p.weight.rho = Tensor(s.weight, rho_init);
        p.bias.mu = Tensor(s.bias);
        p.bias.rho = Tensor(s.bias, rho_init);
        params.push_back(std::move(p));
    }
    return BayesianModel(std::move(arch), prior, std::move(params));
}

BayesianModel assemble_model(const ArchitectureSpec& spec, const PriorSpec& prior, std::vector<ParamLayer> params) {
    ResolvedArchitecture arch = resolve(spec);
    if (params.size() != arch.param_layers) {
        throw ValidationError("model: expected " + std::to_string(arch.param_layers) + " parameter layers, got " +
                              std::to_string(params.size()));
    }
    check_param_shapes(arch, params);
    return BayesianModel(std::move(arch), prior, std::move(params));
}

namespace {

Tensor reparameterize(const GaussianPosterior& q, const Tensor& eps) {
    Tensor w(q.mu.shape());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = q.mu[i] + softplus(q.rho[i]) * eps[i];
    return w;
}

}  // namespace

WeightSample weights_from_noise(const BayesianModel& model, std::vector<LayerTensors> noise) {
    WeightSample s;
    const auto& params = model.params();
    if (noise.size() != params.size()) throw ValidationError("weights_from_noise: layer count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (noise[i].weight.shape() != params[i].weight.mu.shape() || noise[i].bias.shape() != params[i].bias.mu.shape()) {
            throw ShapeError("weights_from_noise", shape_str(params[i].weight.mu.shape()), shape_str(noise[i].weight.shape()));
        }
        s.layers.push_back({reparameterize(params[i].weight, noise[i].weight), reparameterize(params[i].bias, noise[i].bias)});
    }
    s.noise = std::move(noise);
    return s;
}

WeightSample sample_weights(const BayesianModel& model, std::uint64_t seed, NoiseMode mode) {
    std::vector<LayerTensors> noise;
    Rng rng(seed);
    std::normal_distribution<float> normal(0.0f, 1.0f);
    for (const auto& p : model.params()) {
        LayerTensors eps{Tensor(p.weight.mu.shape()), Tensor(p.bias.mu.shape())};
        if (mode == NoiseMode::Sampled) {
            for (float& e : eps.weight.data()) e = normal(rng);
            for (float& e : eps.bias.data()) e = normal(rng);
        }
        noise.push_back(std::move(eps));
    }
    return weights_from_noise(model, std::move(noise));
}

WeightSample mean_weights(const BayesianModel& model) {
    WeightSample s;
    for (const auto& p : model.params()) s.layers.push_back({p.weight.mu, p.bias.mu});
    return s;
}

ForwardVars forward(GradTape& tape, const ResolvedArchitecture& arch, const WeightSample& weights, Var x,
                    bool params_require_grad) {
    ForwardVars fv;
    if (weights.layers.size() != arch.param_layers) {
        throw ValidationError("forward: weight sample has " + std::to_string(weights.layers.size()) +
                              " layers, architecture needs " + std::to_string(arch.param_layers));
    }
    const Tensor& in = tape.value(x);
    const Shape expected{arch.spec.input.channels, arch.spec.input.height, arch.spec.input.width};
    if (in.rank() != 4 || Shape(in.shape().begin() + 1, in.shape().end()) != expected) {
        throw ShapeError("forward", "[N, " + std::to_string(expected[0]) + ", " + std::to_string(expected[1]) + ", " +
                                        std::to_string(expected[2]) + "]",
                         shape_str(in.shape()));
    }
    Var h = x;
    for (const auto& layer : arch.layers) {
        if (const auto* conv = std::get_if<ConvLayer>(&layer.spec)) {
            (void)conv;
            const auto& w = weights.layers[static_cast<std::size_t>(layer.param_index)];
            Var wv = tape.leaf(w.weight, params_require_grad);
            Var bv = tape.leaf(w.bias, params_require_grad);
            fv.weight_vars.push_back(wv);
            fv.bias_vars.push_back(bv);
            h = tape.conv2d(h, wv, bv, layer.pad);
        } else if (const auto* pool = std::get_if<MaxPoolLayer>(&layer.spec)) {
            h = tape.max_pool(h, pool->window, pool->stride);
        } else if (std::holds_alternative<ReluLayer>(layer.spec)) {
            h = tape.relu(h);
        } else {
            if (tape.value(h).rank() != 2) h = tape.flatten(h);
            const auto& w = weights.layers[static_cast<std::size_t>(layer.param_index)];
            Var wv = tape.leaf(w.weight, params_require_grad);
            Var bv = tape.leaf(w.bias, params_require_grad);
            fv.weight_vars.push_back(wv);
            fv.bias_vars.push_back(bv);
            h = tape.linear(h, wv, bv);
        }
    }
    if (tape.value(h).rank() != 2) h = tape.flatten(h);
    fv.logits = h;
    return fv;
}

Tensor as_batch(const Tensor& x) {
    if (x.rank() == 4) return x;
    if (x.rank() != 3) throw ShapeError("as_batch", "[C, H, W]", shape_str(x.shape()));
    return x.reshaped({1, x.dim(0), x.dim(1), x.dim(2)});
}

Tensor compute_logits(const BayesianModel& model, const WeightSample& weights, const Tensor& x) {
    GradTape tape;
    Var in = tape.leaf(as_batch(x));
    ForwardVars fv = forward(tape, model.arch(), weights, in, false);
    return tape.value(fv.logits);
}

double kl_to_prior(const BayesianModel& model) {
    const double mp = model.prior().mean;
    const double sp = model.prior().stddev;
    const double inv2var = 1.0 / (2.0 * sp * sp);
    double kl = 0.0;
    auto accumulate = [&](const GaussianPosterior& q) {
        for (std::size_t i = 0; i < q.mu.size(); ++i) {
            const double sq = softplus(q.rho[i]);
            const double d = q.mu[i] - mp;
            kl += std::log(sp / sq) + (sq * sq + d * d) * inv2var - 0.5;
        }
    };
    for (const auto& p : model.params()) {
        accumulate(p.weight);
        accumulate(p.bias);
    }
    return kl;
}

PosteriorGrads zero_grads(const BayesianModel& model) {
    PosteriorGrads g;
    for (const auto& p : model.params()) {
        g.mu.push_back({Tensor(p.weight.mu.shape()), Tensor(p.bias.mu.shape())});
        g.rho.push_back({Tensor(p.weight.mu.shape()), Tensor(p.bias.mu.shape())});
    }
    return g;
}

void add_kl_gradients(const BayesianModel& model, double scale, PosteriorGrads& grads) {
    const double mp = model.prior().mean;
    const double var = model.prior().stddev * model.prior().stddev;
    auto add = [&](const GaussianPosterior& q, Tensor& gmu, Tensor& grho) {
        for (std::size_t i = 0; i < q.mu.size(); ++i) {
            const double sq = softplus(q.rho[i]);
            gmu[i] += static_cast<float>(scale * (q.mu[i] - mp) / var);
            grho[i] += static_cast<float>(scale * (-1.0 / sq + sq / var) * sigmoid(q.rho[i]));
        }
    };
    const auto& params = model.params();
    for (std::size_t l = 0; l < params.size(); ++l) {
        add(params[l].weight, grads.mu[l].weight, grads.rho[l].weight);
        add(params[l].bias, grads.mu[l].bias, grads.rho[l].bias);
    }
}

}  // namespace sarbnn
