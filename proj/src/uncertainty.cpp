#include "sarbnn/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sarbnn/error.hpp"

namespace sarbnn {
namespace {

constexpr std::size_t kChunk = 128;

Tensor stack(std::span<const Tensor> images, std::size_t begin, std::size_t end, const Shape& expected) {
    Shape shape{end - begin};
    shape.insert(shape.end(), expected.begin(), expected.end());
    Tensor out(shape);
    float* dst = out.data().data();
    for (std::size_t i = begin; i < end; ++i) {
        const Tensor& img = images[i];
        const bool ok = img.shape() == expected ||
                        (img.rank() == 4 && img.dim(0) == 1 && Shape(img.shape().begin() + 1, img.shape().end()) == expected);
        if (!ok) throw ShapeError("predict", shape_str(expected), shape_str(img.shape()));
        std::copy(img.data().begin(), img.data().end(), dst);
        dst += img.size();
    }
    return out;
}

void finalize(PredictiveSummary& s) {
    s.mean_probs = column_mean(s.sample_probs);
    s.mi = mutual_information(s.sample_probs);
}

}  // namespace

std::size_t PredictiveSummary::predicted_class() const { return argmax(mean_probs); }

double entropy(std::span<const double> p) {
    double h = 0.0;
    for (double v : p) h -= v * std::log(v + 1e-12);
    return h;
}

std::vector<double> column_mean(const ProbabilityMatrix& m) {
    std::vector<double> mean(m.cols, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) mean[c] += m.at(r, c);
    }
    for (double& v : mean) v /= static_cast<double>(m.rows);
    return mean;
}

double mutual_information(const ProbabilityMatrix& sample_probs) {
    if (sample_probs.rows == 0 || sample_probs.cols == 0) throw ValidationError("mutual_information: empty probability matrix");
    const std::vector<double> mean = column_mean(sample_probs);
    double expected = 0.0;
    for (std::size_t r = 0; r < sample_probs.rows; ++r) expected += entropy(sample_probs.row(r));
    expected /= static_cast<double>(sample_probs.rows);
    return std::max(0.0, entropy(mean) - expected);
}

std::size_t argmax(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("argmax: empty");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

std::vector<double> softmax(std::span<const float> logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) sum += p[i] = std::exp(logits[i] - m);
    for (double& v : p) v /= sum;
    return p;
}

std::vector<PredictiveSummary> predict_batch(const BayesianModel& model, std::span<const Tensor> images, std::size_t t,
                                             std::uint64_t seed) {
    if (t < 1) throw ValidationError("predict: t must be >= 1");
    const std::size_t classes = model.num_classes();
    std::vector<PredictiveSummary> out(images.size());
    for (auto& s : out) {
        s.sample_probs = ProbabilityMatrix(t, classes);
        s.t = t;
    }
    const Shape expected = model.input_shape();
    for (std::size_t i = 0; i < t; ++i) {
        const WeightSample w = sample_weights(model, seed + i);
        for (std::size_t begin = 0; begin < images.size(); begin += kChunk) {
            const std::size_t end = std::min(images.size(), begin + kChunk);
            const Tensor logits = compute_logits(model, w, stack(images, begin, end, expected));
            for (std::size_t n = begin; n < end; ++n) {
                const auto p = softmax(logits.data().subspan((n - begin) * classes, classes));
                std::copy(p.begin(), p.end(), out[n].sample_probs.row(i).begin());
            }
        }
    }
    for (auto& s : out) finalize(s);
    return out;
}

PredictiveSummary predict(const BayesianModel& model, const Tensor& x, std::size_t t, std::uint64_t seed) {
    return predict_batch(model, std::span(&x, 1), t, seed).front();
}

std::vector<std::vector<double>> mean_weight_probs(const BayesianModel& model, std::span<const Tensor> images) {
    const std::size_t classes = model.num_classes();
    const WeightSample w = mean_weights(model);
    std::vector<std::vector<double>> out;
    out.reserve(images.size());
    for (std::size_t begin = 0; begin < images.size(); begin += kChunk) {
        const std::size_t end = std::min(images.size(), begin + kChunk);
        const Tensor logits = compute_logits(model, w, stack(images, begin, end, model.input_shape()));
        for (std::size_t n = begin; n < end; ++n) out.push_back(softmax(logits.data().subspan((n - begin) * classes, classes)));
    }
    return out;
}

}  // namespace sarbnn
