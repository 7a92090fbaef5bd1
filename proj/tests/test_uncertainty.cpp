#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracle/oracles.hpp"
#include "sarbnn/error.hpp"
#include "sarbnn/stats.hpp"
#include "sarbnn/uncertainty.hpp"

using namespace sarbnn;

namespace {

ProbabilityMatrix matrix(const std::vector<std::vector<double>>& rows) {
    ProbabilityMatrix m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m.at(r, c) = rows[r][c];
    return m;
}

std::vector<std::vector<double>> random_rows(std::mt19937_64& rng, std::size_t t, std::size_t c) {
    std::gamma_distribution<double> g(0.3, 1.0);
    std::vector<std::vector<double>> rows(t, std::vector<double>(c));
    for (auto& row : rows) {
        double s = 0.0;
        for (double& v : row) s += (v = g(rng) + 1e-300);
        for (double& v : row) v /= s;
    }
    return rows;
}

ArchitectureSpec small_arch() {
    ArchitectureSpec s;
    s.input = {1, 12, 12};
    s.num_classes = 4;
    s.layers = parse_layers("C(4,3) - ReLU - MP(2,2) - FC(4)");
    return s;
}

std::vector<Tensor> random_images(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::vector<Tensor> out;
    for (std::size_t i = 0; i < n; ++i) {
        Tensor x(Shape{1, 12, 12});
        for (float& v : x.data()) v = u(rng);
        out.push_back(x);
    }
    return out;
}

}  // namespace

TEST_CASE("MI of two disagreeing one-hot rows is ln 2") {
    CHECK(mutual_information(matrix({{1, 0}, {0, 1}})) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("MI of [0.8,0.2] and [0.6,0.4] matches the direct summation") {
    const std::vector<std::vector<double>> rows = {{0.8, 0.2}, {0.6, 0.4}};
    const double expected = oracle::mutual_information(rows);
    CHECK(mutual_information(matrix(rows)) == doctest::Approx(expected).epsilon(1e-12));
    // by hand: H(0.7,0.3) - (H(0.8,0.2) + H(0.6,0.4)) / 2
    auto h = [](double p) { return -p * std::log(p) - (1 - p) * std::log(1 - p); };
    CHECK(expected == doctest::Approx(h(0.7) - 0.5 * (h(0.8) + h(0.6))).epsilon(1e-9));
}

TEST_CASE("MI of identical rows is zero and empty input is an error") {
    CHECK(std::abs(mutual_information(matrix({{0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}}))) <= 1e-9);
    CHECK_THROWS_AS(mutual_information(ProbabilityMatrix{}), ValidationError);
}

TEST_CASE("MI agrees with the oracle and respects its bounds and symmetries") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t t = 1 + rng() % 16, c = 2 + rng() % 9;
        auto rows = random_rows(rng, t, c);
        const double mi = mutual_information(matrix(rows));
        CHECK(std::abs(mi - oracle::mutual_information(rows)) <= 1e-9);
        const ProbabilityMatrix m = matrix(rows);
        CHECK(mi >= 0.0);
        CHECK(mi <= std::min(std::log(static_cast<double>(c)), entropy(column_mean(m))) + 1e-9);

        std::shuffle(rows.begin(), rows.end(), rng);
        CHECK(std::abs(mutual_information(matrix(rows)) - mi) <= 1e-12);
        std::vector<std::size_t> perm(c);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (auto& row : rows) {
            std::vector<double> p(c);
            for (std::size_t j = 0; j < c; ++j) p[j] = row[perm[j]];
            row = p;
        }
        CHECK(std::abs(mutual_information(matrix(rows)) - mi) <= 1e-12);
    }
}

TEST_CASE("argmax breaks ties toward the lowest index") {
    const std::vector<double> v = {0.25, 0.5, 0.5, 0.1};
    CHECK(argmax(v) == 1);
}

TEST_CASE("predict: one sample has zero MI and the mean equals the row") {
    const BayesianModel m = build_model(small_arch(), PriorSpec{}, 1, -2.0f);
    const Tensor x = random_images(1, 3)[0];
    const PredictiveSummary s = predict(m, x, 1, 42);
    CHECK(s.mi == 0.0);
    for (std::size_t c = 0; c < 4; ++c) CHECK(s.mean_probs[c] == s.sample_probs.at(0, c));
}

TEST_CASE("predict: rows are distributions, mean is the column mean, runs repeat") {
    const BayesianModel m = build_model(small_arch(), PriorSpec{}, 1, -2.0f);
    const Tensor x = random_images(1, 4)[0];
    const PredictiveSummary s = predict(m, x, 12, 42);
    for (std::size_t r = 0; r < s.t; ++r) {
        double sum = 0.0;
        for (double p : s.sample_probs.row(r)) sum += p;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
    }
    CHECK(s.mean_probs == column_mean(s.sample_probs));
    CHECK(s.mi <= std::log(4.0) + 1e-9);
    const PredictiveSummary again = predict(m, x, 12, 42);
    CHECK(again.sample_probs.values == s.sample_probs.values);
    CHECK(again.mi == s.mi);
    CHECK_THROWS(predict(m, Tensor(Shape{1, 10, 10}), 3, 1));
    CHECK_THROWS(predict(m, x, 0, 1));
}

TEST_CASE("predict_batch matches per-image predict") {
    const BayesianModel m = build_model(small_arch(), PriorSpec{}, 2, -2.0f);
    const auto images = random_images(5, 8);
    const auto batch = predict_batch(m, images, 6, 99);
    for (std::size_t i = 0; i < images.size(); ++i) {
        const PredictiveSummary one = predict(m, images[i], 6, 99);
        CHECK(one.mi == doctest::Approx(batch[i].mi).epsilon(1e-6));
        CHECK(one.predicted_class() == batch[i].predicted_class());
    }
}

TEST_CASE("vanishing sigma gives zero MI") {
    const BayesianModel m = build_model(small_arch(), PriorSpec{}, 1, -40.0f);
    for (const Tensor& x : random_images(5, 5)) CHECK(predict(m, x, 10, 7).mi <= 1e-9);
}

TEST_CASE("raising every sigma raises MI across a batch (sign test)") {
    BayesianModel m = build_model(small_arch(), PriorSpec{}, 3, -4.0f);
    const auto images = random_images(100, 21);
    const auto low = predict_batch(m, images, 20, 5);
    m.shift_rho(3.0f);
    const auto high = predict_batch(m, images, 20, 5);
    std::size_t up = 0, trials = 0;
    std::vector<double> lo_mi, hi_mi;
    for (std::size_t i = 0; i < images.size(); ++i) {
        lo_mi.push_back(low[i].mi);
        hi_mi.push_back(high[i].mi);
        if (high[i].mi == low[i].mi) continue;
        ++trials;
        up += high[i].mi > low[i].mi;
    }
    std::nth_element(lo_mi.begin(), lo_mi.begin() + 50, lo_mi.end());
    std::nth_element(hi_mi.begin(), hi_mi.begin() + 50, hi_mi.end());
    CHECK(hi_mi[50] >= lo_mi[50]);
    CHECK(up * 2 > trials);
    CHECK(sign_test_p(up, trials) < 0.01);
}
