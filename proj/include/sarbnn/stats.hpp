#pragma once

#include <cstddef>
#include <span>

namespace sarbnn {

struct RankTestResult {
    double u = 0.0;        // Mann-Whitney U of sample a over b (ties count 1/2)
    double z = 0.0;        // normal approximation, tie-corrected
    double p_value = 1.0;  // two-sided
};

// Two-sided Mann-Whitney rank test with average ranks for ties.
RankTestResult mann_whitney(std::span<const double> a, std::span<const double> b);

// Two-sided exact binomial sign test for `successes` out of `trials` at p = 1/2.
double sign_test_p(std::size_t successes, std::size_t trials);

double mean(std::span<const double> v);

}  // namespace sarbnn
