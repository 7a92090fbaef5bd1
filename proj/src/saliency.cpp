#include "sarbnn/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sarbnn/error.hpp"
#include "sarbnn/io_util.hpp"
#include "sarbnn/pgm.hpp"
#include "sarbnn/rng.hpp"

namespace sarbnn {

Tensor gbp_single(const BayesianModel& model, const Tensor& x, const WeightSample& weights, std::size_t target_class) {
    if (target_class >= model.num_classes()) {
        throw ValidationError("gbp: target class " + std::to_string(target_class) + " outside [0, " +
                              std::to_string(model.num_classes()) + ")");
    }
    GradTape tape(BackwardMode::Guided);
    Var in = tape.leaf(as_batch(x), true);
    ForwardVars fv = forward(tape, model.arch(), weights, in, false);
    Tensor seed(tape.value(fv.logits).shape());
    seed[target_class] = 1.0f;
    tape.backward(fv.logits, seed);

    const Tensor& g = tape.grad(in);
    const std::size_t c = g.dim(1), h = g.dim(2), w = g.dim(3);
    Tensor map(Shape{h, w});
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t p = 0; p < h * w; ++p) map[p] += g[ch * h * w + p];
    }
    return map;
}

SaliencyStats aggregate_saliency(std::span<const Tensor> per_sample) {
    if (per_sample.empty()) throw ValidationError("saliency: need at least one per-sample map");
    const Shape& shape = per_sample.front().shape();
    const std::size_t n = per_sample.front().size();
    const double t = static_cast<double>(per_sample.size());
    SaliencyStats s{Tensor(shape), Tensor(shape), Tensor(shape)};
    for (std::size_t p = 0; p < n; ++p) {
        double sum = 0.0;
        for (const Tensor& m : per_sample) {
            if (m.shape() != shape) throw ShapeError("aggregate_saliency", shape_str(shape), shape_str(m.shape()));
            sum += m[p];
        }
        const double mean = sum / t;
        double sq = 0.0;
        for (const Tensor& m : per_sample) sq += (m[p] - mean) * (m[p] - mean);
        const double sd = std::sqrt(sq / t);
        s.mean[p] = static_cast<float>(mean);
        s.std[p] = static_cast<float>(sd);
        s.normalized[p] = static_cast<float>(std::max(mean, 0.0) / (1.0 + sd));
    }
    return s;
}

SaliencyBundle gbp_bnn(const BayesianModel& model, const Tensor& x, std::size_t t, std::uint64_t seed,
                       const GbpOptions& options) {
    if (t < 1) throw ValidationError("gbp_bnn: t must be >= 1");
    if (options.k < 1) throw ValidationError("gbp_bnn: k must be >= 1");
    SaliencyBundle b;
    b.prediction = predict(model, x, t, seed);
    b.target_class = b.prediction.predicted_class();
    b.k = options.k;
    const std::uint64_t base = options.resample ? derive_seed(seed, "saliency-resample") : seed;
    for (std::size_t i = 0; i < t; ++i) {
        b.per_sample.push_back(gbp_single(model, x, sample_weights(model, base + i), b.target_class));
    }
    SaliencyStats s = aggregate_saliency(b.per_sample);
    b.mean = std::move(s.mean);
    b.std = std::move(s.std);
    b.normalized = std::move(s.normalized);
    b.topk = top_k(b.normalized, options.k);
    return b;
}

Tensor top_k(const Tensor& map, std::size_t k) {
    if (k < 1) throw ValidationError("top_k: k must be >= 1");
    if (k >= map.size()) return map;
    std::vector<std::size_t> idx(map.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), [&](std::size_t a, std::size_t b) {
        return map[a] > map[b] || (map[a] == map[b] && a < b);
    });
    Tensor out(map.shape());
    for (std::size_t i = 0; i < k; ++i) out[idx[i]] = map[idx[i]];
    return out;
}

double sir(const Tensor& topk_map, const ScattererGroundTruth& truth) {
    if (truth.centers.empty()) throw ValidationError("sir: ground truth has no scatterers");
    if (topk_map.rank() != 2) throw ShapeError("sir", "[H, W]", shape_str(topk_map.shape()));
    const long h = static_cast<long>(topk_map.dim(0)), w = static_cast<long>(topk_map.dim(1));
    const long r = static_cast<long>(truth.footprint_radius);
    std::size_t found = 0;
    for (const auto& c : truth.centers) {
        if (static_cast<long>(c.row) >= h || static_cast<long>(c.col) >= w) {
            throw ValidationError("sir: scatterer center (" + std::to_string(c.row) + ", " + std::to_string(c.col) +
                                  ") outside the map");
        }
        bool hit = false;
        for (long i = std::max(0L, static_cast<long>(c.row) - r); i <= std::min(h - 1, static_cast<long>(c.row) + r) && !hit; ++i) {
            for (long j = std::max(0L, static_cast<long>(c.col) - r); j <= std::min(w - 1, static_cast<long>(c.col) + r); ++j) {
                if (topk_map[static_cast<std::size_t>(i * w + j)] != 0.0f) {
                    hit = true;
                    break;
                }
            }
        }
        found += hit;
    }
    return static_cast<double>(found) / static_cast<double>(truth.centers.size());
}

double sir(const SaliencyBundle& bundle, const ScattererGroundTruth& truth) { return sir(bundle.topk, truth); }

MapScale write_saliency_pgm(const Tensor& map, const std::filesystem::path& path) {
    if (map.rank() != 2 || map.empty()) throw ShapeError("write_saliency_pgm", "[H, W]", shape_str(map.shape()));
    const auto [lo, hi] = std::minmax_element(map.data().begin(), map.data().end());
    MapScale scale{*lo, *hi};
    Tensor scaled(map.shape());
    const double range = scale.max - scale.min;
    for (std::size_t i = 0; i < map.size(); ++i) {
        scaled[i] = range > 0.0 ? static_cast<float>((map[i] - scale.min) / range) : 0.0f;
    }
    write_pgm(path, scaled);
    return scale;
}

void write_topk_csv(const Tensor& topk_map, const std::filesystem::path& path) {
    if (topk_map.rank() != 2) throw ShapeError("write_topk_csv", "[H, W]", shape_str(topk_map.shape()));
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < topk_map.size(); ++i) {
        if (topk_map[i] != 0.0f) idx.push_back(i);
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return topk_map[a] > topk_map[b]; });
    const std::size_t w = topk_map.dim(1);
    std::string out = "rank,row,col,score\n";
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out += std::to_string(r + 1) + "," + std::to_string(idx[r] / w) + "," + std::to_string(idx[r] % w) + "," +
               format_double(topk_map[idx[r]]) + "\n";
    }
    write_file_atomic(path, out);
}

}  // namespace sarbnn
