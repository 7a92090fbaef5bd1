#include "sarbnn/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "sarbnn/error.hpp"
#include "sarbnn/rng.hpp"
#include "sarbnn/uncertainty.hpp"

namespace sarbnn {
namespace {

constexpr std::size_t kEvalBatch = 64;

void add_blob(Tensor& img, const ScattererSpec& s) {
    const std::size_t c = img.dim(0), h = img.dim(1), w = img.dim(2);
    if (s.center.row >= h || s.center.col >= w) {
        throw ValidationError("scatterer center (" + std::to_string(s.center.row) + ", " + std::to_string(s.center.col) +
                              ") outside " + std::to_string(h) + "x" + std::to_string(w) + " image");
    }
    if (!(s.radius > 0.0) || !(s.amplitude >= 0.0)) throw ValidationError("scatterer needs radius > 0 and amplitude >= 0");
    const double cutoff = 3.0 * s.radius;
    const long reach = static_cast<long>(std::ceil(cutoff));
    const long r0 = static_cast<long>(s.center.row), c0 = static_cast<long>(s.center.col);
    for (long y = std::max(0L, r0 - reach); y <= std::min(static_cast<long>(h) - 1, r0 + reach); ++y) {
        for (long x = std::max(0L, c0 - reach); x <= std::min(static_cast<long>(w) - 1, c0 + reach); ++x) {
            const double d2 = static_cast<double>((y - r0) * (y - r0) + (x - c0) * (x - c0));
            if (d2 > cutoff * cutoff) continue;
            const float add = static_cast<float>(s.amplitude * std::exp(-d2 / (2.0 * s.radius * s.radius)));
            for (std::size_t ch = 0; ch < c; ++ch) img[(ch * h + static_cast<std::size_t>(y)) * w + static_cast<std::size_t>(x)] += add;
        }
    }
}

void clamp_unit(Tensor& img) {
    for (float& v : img.data()) v = std::clamp(v, 0.0f, 1.0f);
}

// Class probabilities for each image under the attack objective.
std::vector<std::vector<double>> objective_probs(const BayesianModel& victim, const WeightSample& mean_w,
                                                 std::span<const Tensor> images, const AttackConfig& cfg) {
    if (cfg.mc_objective) {
        std::vector<std::vector<double>> out;
        for (const PredictiveSummary& s : predict_batch(victim, images, cfg.mc_samples, derive_seed(cfg.rng_seed, "attack-mc"))) {
            out.push_back(s.mean_probs);
        }
        return out;
    }
    const Shape in = victim.input_shape();
    Tensor batch(Shape{images.size(), in[0], in[1], in[2]});
    const std::size_t per = shape_numel(in);
    for (std::size_t i = 0; i < images.size(); ++i) {
        std::copy(images[i].data().begin(), images[i].data().end(), batch.data().begin() + static_cast<std::ptrdiff_t>(i * per));
    }
    const Tensor logits = compute_logits(victim, mean_w, batch);
    const std::size_t k = logits.dim(1);
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < images.size(); ++i) out.push_back(softmax(logits.data().subspan(i * k, k)));
    return out;
}

}  // namespace

void AttackConfig::validate() const {
    if (n_scatterers < 1) throw ValidationError("attack: n_scatterers must be >= 1");
    if (grid_stride < 1) throw ValidationError("attack: grid_stride must be >= 1");
    if (!(amplitude_min > 0.0) || amplitude_max < amplitude_min) {
        throw ValidationError("attack: need 0 < amplitude_min <= amplitude_max");
    }
    if (amplitude_samples < 1) throw ValidationError("attack: amplitude_samples must be >= 1");
    if (!(radius > 0.0)) throw ValidationError("attack: radius must be > 0");
    if (max_evals != 0 && max_evals < n_scatterers) {
        throw ValidationError("attack: max_evals must be 0 or at least n_scatterers");
    }
    if (!(mask_percentile >= 0.0 && mask_percentile < 1.0)) throw ValidationError("attack: mask_percentile must be in [0, 1)");
    if (mc_objective && mc_samples < 1) throw ValidationError("attack: mc_samples must be >= 1");
}

Tensor render_scatterers_unclamped(const Tensor& image, std::span<const ScattererSpec> specs) {
    if (image.rank() != 3) throw ShapeError("render_scatterers", "[C, H, W]", shape_str(image.shape()));
    Tensor out = image;
    for (const ScattererSpec& s : specs) add_blob(out, s);
    return out;
}

Tensor render_scatterers(const Tensor& image, std::span<const ScattererSpec> specs) {
    Tensor out = render_scatterers_unclamped(image, specs);
    clamp_unit(out);
    return out;
}

std::vector<std::uint8_t> target_mask(const Tensor& image, double percentile, std::size_t dilation) {
    if (image.rank() != 3) throw ShapeError("target_mask", "[C, H, W]", shape_str(image.shape()));
    const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
    std::vector<float> energy(h * w, 0.0f);
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t p = 0; p < h * w; ++p) energy[p] += image[ch * h * w + p];
    }
    std::vector<float> sorted = energy;
    const std::size_t q = static_cast<std::size_t>(std::floor(percentile * static_cast<double>(sorted.size() - 1)));
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q), sorted.end());
    const float cut = sorted[q];

    std::vector<std::uint8_t> seed(h * w, 0), mask(h * w, 0);
    for (std::size_t p = 0; p < h * w; ++p) seed[p] = energy[p] > cut;
    const long d = static_cast<long>(dilation);
    for (long y = 0; y < static_cast<long>(h); ++y) {
        for (long x = 0; x < static_cast<long>(w); ++x) {
            if (!seed[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)]) continue;
            for (long yy = std::max(0L, y - d); yy <= std::min(static_cast<long>(h) - 1, y + d); ++yy) {
                for (long xx = std::max(0L, x - d); xx <= std::min(static_cast<long>(w) - 1, x + d); ++xx) {
                    mask[static_cast<std::size_t>(yy) * w + static_cast<std::size_t>(xx)] = 1;
                }
            }
        }
    }
    return mask;
}

AdversarialRecord attack(const BayesianModel& victim, const Tensor& image, std::size_t true_label,
                         const AttackConfig& config) {
    config.validate();
    if (true_label >= victim.num_classes()) {
        throw ValidationError("attack: true label " + std::to_string(true_label) + " outside [0, " +
                              std::to_string(victim.num_classes()) + ")");
    }
    if (image.shape() != victim.input_shape()) {
        throw ShapeError("attack", shape_str(victim.input_shape()), shape_str(image.shape()));
    }
    const std::size_t h = image.dim(1), w = image.dim(2);
    const std::vector<std::uint8_t> mask = target_mask(image, config.mask_percentile, config.mask_dilation);
    std::vector<PixelCoord> sites, fallback;
    for (std::size_t p = 0; p < h * w; ++p) {
        if (!mask[p]) continue;
        const PixelCoord pc{p / w, p % w};
        fallback.push_back(pc);
        if (pc.row % config.grid_stride == 0 && pc.col % config.grid_stride == 0) sites.push_back(pc);
    }
    if (fallback.empty()) throw ValidationError("attack: target mask is empty (image has no pixels above the percentile)");
    if (sites.empty()) sites = fallback;

    const WeightSample mean_w = mean_weights(victim);
    AdversarialRecord rec;
    rec.original = image;
    rec.perturbed = image;
    rec.true_label = true_label;
    rec.pred_before = argmax(objective_probs(victim, mean_w, std::span(&image, 1), config)[0]);
    rec.pred_after = rec.pred_before;
    if (config.max_evals == 0) return rec;

    const auto [lo, hi] = std::minmax_element(image.data().begin(), image.data().end());
    const double range = *hi > *lo ? static_cast<double>(*hi - *lo) : 1.0;
    Rng rng(config.rng_seed);
    std::uniform_real_distribution<double> amp(config.amplitude_min * range, config.amplitude_max * range);

    Tensor accumulated = image;  // unclamped sum of the blobs placed so far
    for (std::size_t round = 0; round < config.n_scatterers; ++round) {
        const std::size_t budget = (config.max_evals - rec.evals) / (config.n_scatterers - round);
        std::vector<double> amplitudes(config.amplitude_samples);
        for (double& a : amplitudes) a = amp(rng);

        const std::size_t total = sites.size() * amplitudes.size();
        const std::size_t n_eval = std::min(total, budget);
        std::vector<ScattererSpec> candidates;
        for (std::size_t i = 0; i < n_eval; ++i) {
            const std::size_t idx = total == n_eval ? i : i * total / n_eval;
            candidates.push_back(ScattererSpec{sites[idx / amplitudes.size()], amplitudes[idx % amplitudes.size()], config.radius});
        }

        double best_p = std::numeric_limits<double>::infinity();
        std::size_t best = 0, best_pred = rec.pred_after;
        for (std::size_t start = 0; start < candidates.size(); start += kEvalBatch) {
            const std::size_t end = std::min(candidates.size(), start + kEvalBatch);
            std::vector<Tensor> batch;
            for (std::size_t i = start; i < end; ++i) {
                Tensor t = accumulated;
                add_blob(t, candidates[i]);
                clamp_unit(t);
                batch.push_back(std::move(t));
            }
            const auto probs = objective_probs(victim, mean_w, batch, config);
            for (std::size_t i = 0; i < probs.size(); ++i) {
                if (probs[i][true_label] < best_p) {
                    best_p = probs[i][true_label];
                    best = start + i;
                    best_pred = argmax(probs[i]);
                }
            }
        }
        rec.evals += candidates.size();
        add_blob(accumulated, candidates[best]);
        rec.specs.push_back(candidates[best]);
        rec.pred_after = best_pred;
    }
    rec.perturbed = accumulated;
    clamp_unit(rec.perturbed);
    rec.success = rec.pred_after != rec.pred_before && rec.pred_after != true_label;
    return rec;
}

}  // namespace sarbnn
