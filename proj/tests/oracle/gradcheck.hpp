#pragma once

// Randomized finite-difference check of the tape in standard mode. Analytic
// gradients come from GradTape; the reference is a central difference of the
// naive double-precision forward in reference_ops.hpp.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "oracle/reference_ops.hpp"
#include "sarbnn/tape.hpp"

namespace oracle {

struct GradcheckReport {
    std::size_t cases = 0;
    std::size_t checks = 0;
    std::size_t failures = 0;
    double max_rel_error = 0.0;
    std::map<std::string, std::size_t> cases_per_op;
    std::vector<std::string> failure_notes;
};

namespace detail {

constexpr double kStep = 1e-5;
constexpr double kTol = 1e-3;
constexpr double kKinkGap = 1e-3;

struct Case {
    std::string op;
    std::vector<DTensor> inputs;
    std::function<double(const std::vector<DTensor>&)> objective;
    std::function<std::vector<sarbnn::Tensor>(const std::vector<sarbnn::Tensor>&)> analytic;
};

inline sarbnn::Tensor to_tensor(const DTensor& d) {
    std::vector<float> v(d.v.begin(), d.v.end());
    return sarbnn::Tensor(sarbnn::Shape(d.shape.begin(), d.shape.end()), std::move(v));
}

// Values are rounded to float so the tape and the oracle see identical inputs.
inline DTensor random_tensor(std::mt19937_64& rng, std::vector<std::size_t> shape, double scale = 1.0) {
    DTensor t = make(std::move(shape));
    std::normal_distribution<double> nd(0.0, scale);
    for (double& v : t.v) v = static_cast<float>(nd(rng));
    return t;
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double project(const DTensor& out, const DTensor& r) {
    double s = 0.0;
    for (std::size_t i = 0; i < out.v.size(); ++i) s += out.v[i] * r.v[i];
    return s;
}

inline bool relu_kink(const DTensor& pre) {
    for (double v : pre.v) {
        if (std::abs(v) < kKinkGap) return true;
    }
    return false;
}

// True when some pooling window's top two values are closer than the gap
// (and the top is positive, so the choice matters downstream).
inline bool pool_kink(const DTensor& x, std::size_t window, std::size_t stride) {
    const std::size_t nc = x.shape[0] * x.shape[1], h = x.shape[2], w = x.shape[3];
    const std::size_t oh = (h - window) / stride + 1, ow = (w - window) / stride + 1;
    for (std::size_t p = 0; p < nc; ++p)
        for (std::size_t r = 0; r < oh; ++r)
            for (std::size_t q = 0; q < ow; ++q) {
                double a = -INFINITY, b = -INFINITY;
                for (std::size_t i = 0; i < window; ++i)
                    for (std::size_t j = 0; j < window; ++j) {
                        const double v = x.v[(p * h + r * stride + i) * w + q * stride + j];
                        if (v > a) {
                            b = a;
                            a = v;
                        } else if (v > b) {
                            b = v;
                        }
                    }
                if (a - b < kKinkGap && a != 0.0) return true;
            }
    return false;
}

inline std::vector<sarbnn::Tensor> grads_of(sarbnn::GradTape& tape, const std::vector<sarbnn::Var>& vars) {
    std::vector<sarbnn::Tensor> out;
    for (auto v : vars) out.push_back(tape.grad(v));
    return out;
}

inline std::vector<sarbnn::Var> leaves(sarbnn::GradTape& tape, const std::vector<sarbnn::Tensor>& in) {
    std::vector<sarbnn::Var> v;
    for (const auto& t : in) v.push_back(tape.leaf(t, true));
    return v;
}

// Builds case `kind`; returns false when the draw sits too close to a kink.
inline bool make_case(std::size_t kind, std::mt19937_64& rng, Case& c) {
    using sarbnn::GradTape;
    using sarbnn::Tensor;
    switch (kind) {
        case 0:
        case 1: {  // conv2d, unpadded and padded
            const std::size_t n = pick(rng, 1, 2), ch = pick(rng, 1, 3), h = pick(rng, 3, 6), w = pick(rng, 3, 6);
            const std::size_t o = pick(rng, 1, 3), k = pick(rng, 1, 3);
            const std::size_t pad = kind == 1 ? pick(rng, 1, 2) : 0;
            c.op = kind == 1 ? "conv2d(padded)" : "conv2d";
            c.inputs = {random_tensor(rng, {n, ch, h, w}), random_tensor(rng, {o, ch, k, k}, 0.5), random_tensor(rng, {o}, 0.5)};
            const DTensor r = random_tensor(rng, {n, o, h + 2 * pad - k + 1, w + 2 * pad - k + 1});
            c.objective = [r, pad](const std::vector<DTensor>& in) { return project(conv2d(in[0], in[1], in[2], pad), r); };
            c.analytic = [r, pad](const std::vector<Tensor>& in) {
                GradTape tape;
                auto v = leaves(tape, in);
                tape.backward(tape.conv2d(v[0], v[1], v[2], pad), to_tensor(r));
                return grads_of(tape, v);
            };
            return true;
        }
        case 2: {  // max_pool
            const std::size_t n = pick(rng, 1, 2), ch = pick(rng, 1, 2), h = pick(rng, 3, 7), w = pick(rng, 3, 7);
            const std::size_t window = pick(rng, 1, 3), stride = pick(rng, 1, 3);
            c.op = "max_pool";
            c.inputs = {random_tensor(rng, {n, ch, h, w})};
            if (pool_kink(c.inputs[0], window, stride)) return false;
            const DTensor r = random_tensor(rng, {n, ch, (h - window) / stride + 1, (w - window) / stride + 1});
            c.objective = [r, window, stride](const std::vector<DTensor>& in) { return project(max_pool(in[0], window, stride), r); };
            c.analytic = [r, window, stride](const std::vector<Tensor>& in) {
                GradTape tape;
                auto v = leaves(tape, in);
                tape.backward(tape.max_pool(v[0], window, stride), to_tensor(r));
                return grads_of(tape, v);
            };
            return true;
        }
        case 3: {  // relu
            const std::size_t n = pick(rng, 1, 3), f = pick(rng, 1, 12);
            c.op = "relu";
            c.inputs = {random_tensor(rng, {n, f})};
            if (relu_kink(c.inputs[0])) return false;
            const DTensor r = random_tensor(rng, {n, f});
            c.objective = [r](const std::vector<DTensor>& in) { return project(relu(in[0]), r); };
            c.analytic = [r](const std::vector<Tensor>& in) {
                GradTape tape;
                auto v = leaves(tape, in);
                tape.backward(tape.relu(v[0]), to_tensor(r));
                return grads_of(tape, v);
            };
            return true;
        }
        case 4: {  // flatten + linear
            const std::size_t n = pick(rng, 1, 3), ch = pick(rng, 1, 2), h = pick(rng, 1, 3), w = pick(rng, 1, 3), o = pick(rng, 1, 5);
            c.op = "flatten+linear";
            c.inputs = {random_tensor(rng, {n, ch, h, w}), random_tensor(rng, {ch * h * w, o}, 0.5), random_tensor(rng, {o}, 0.5)};
            const DTensor r = random_tensor(rng, {n, o});
            c.objective = [r](const std::vector<DTensor>& in) { return project(linear(flatten(in[0]), in[1], in[2]), r); };
            c.analytic = [r](const std::vector<Tensor>& in) {
                GradTape tape;
                auto v = leaves(tape, in);
                tape.backward(tape.linear(tape.flatten(v[0]), v[1], v[2]), to_tensor(r));
                return grads_of(tape, v);
            };
            return true;
        }
        case 5: {  // log_softmax
            const std::size_t n = pick(rng, 1, 3), k = pick(rng, 2, 7);
            c.op = "log_softmax";
            c.inputs = {random_tensor(rng, {n, k}, 2.0)};
            const DTensor r = random_tensor(rng, {n, k});
            c.objective = [r](const std::vector<DTensor>& in) { return project(log_softmax(in[0]), r); };
            c.analytic = [r](const std::vector<Tensor>& in) {
                GradTape tape;
                auto v = leaves(tape, in);
                tape.backward(tape.log_softmax(v[0]), to_tensor(r));
                return grads_of(tape, v);
            };
            return true;
        }
        case 6: {  // nll_loss over log_softmax
            const std::size_t n = pick(rng, 1, 4), k = pick(rng, 2, 6);
            std::vector<int> labels(n);
            for (int& l : labels) l = static_cast<int>(pick(rng, 0, k - 1));
            c.op = "nll_loss";
            c.inputs = {random_tensor(rng, {n, k}, 2.0)};
            c.objective = [labels](const std::vector<DTensor>& in) { return nll(log_softmax(in[0]), labels); };
            c.analytic = [labels](const std::vector<Tensor>& in) {
                GradTape tape;
                auto v = leaves(tape, in);
                tape.backward(tape.nll_loss(tape.log_softmax(v[0]), labels));
                return grads_of(tape, v);
            };
            return true;
        }
        default: {  // full chain with a shared input feeding two branches
            const std::size_t n = 2, h = pick(rng, 4, 7), w = pick(rng, 4, 7), o = 2, k = 3, classes = 3;
            std::vector<int> labels(n);
            for (int& l : labels) l = static_cast<int>(pick(rng, 0, classes - 1));
            c.op = "chain";
            const std::size_t ph = h / 2, pw = w / 2;
            c.inputs = {random_tensor(rng, {n, 1, h, w}), random_tensor(rng, {o, 1, k, k}, 0.7), random_tensor(rng, {o}, 0.3),
                        random_tensor(rng, {o * ph * pw, classes}, 0.5), random_tensor(rng, {classes}, 0.3)};
            const DTensor pre = conv2d(c.inputs[0], c.inputs[1], c.inputs[2], 1);
            if (relu_kink(pre) || pool_kink(relu(pre), 2, 2)) return false;
            c.objective = [labels](const std::vector<DTensor>& in) {
                DTensor a = max_pool(relu(conv2d(in[0], in[1], in[2], 1)), 2, 2);
                return nll(log_softmax(linear(flatten(a), in[3], in[4])), labels);
            };
            c.analytic = [labels](const std::vector<Tensor>& in) {
                GradTape tape;
                auto v = leaves(tape, in);
                auto a = tape.max_pool(tape.relu(tape.conv2d(v[0], v[1], v[2], 1)), 2, 2);
                tape.backward(tape.nll_loss(tape.log_softmax(tape.linear(tape.flatten(a), v[3], v[4])), labels));
                return grads_of(tape, v);
            };
            return true;
        }
    }
}

}  // namespace detail

inline constexpr std::size_t kGradcheckKinds = 8;

inline GradcheckReport run_gradcheck(std::size_t cases, std::uint64_t seed) {
    GradcheckReport rep;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < cases; ++i) {
        detail::Case c;
        while (!detail::make_case(i % kGradcheckKinds, rng, c)) {
        }
        std::vector<sarbnn::Tensor> in;
        for (const auto& d : c.inputs) in.push_back(detail::to_tensor(d));
        const std::vector<sarbnn::Tensor> g = c.analytic(in);
        ++rep.cases;
        ++rep.cases_per_op[c.op];
        for (std::size_t t = 0; t < c.inputs.size(); ++t) {
            for (std::size_t e = 0; e < c.inputs[t].size(); ++e) {
                std::vector<DTensor> plus = c.inputs, minus = c.inputs;
                plus[t].v[e] += detail::kStep;
                minus[t].v[e] -= detail::kStep;
                const double fd = (c.objective(plus) - c.objective(minus)) / (2 * detail::kStep);
                const double an = g[t][e];
                const double rel = std::abs(an - fd) / std::max({std::abs(fd), std::abs(an), 1e-2});
                ++rep.checks;
                rep.max_rel_error = std::max(rep.max_rel_error, rel);
                if (rel > detail::kTol) {
                    ++rep.failures;
                    if (rep.failure_notes.size() < 10) {
                        rep.failure_notes.push_back(c.op + " case " + std::to_string(i) + " input " + std::to_string(t) +
                                                    " elem " + std::to_string(e) + ": analytic " + std::to_string(an) +
                                                    " vs fd " + std::to_string(fd));
                    }
                }
            }
        }
    }
    return rep;
}

}  // namespace oracle
