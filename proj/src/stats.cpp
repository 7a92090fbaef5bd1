#include "sarbnn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sarbnn/error.hpp"

namespace sarbnn {

RankTestResult mann_whitney(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ValidationError("mann_whitney: both samples must be nonempty");
    const std::size_t n = a.size() + b.size();
    std::vector<std::pair<double, bool>> all;  // value, from a
    all.reserve(n);
    for (double v : a) all.emplace_back(v, true);
    for (double v : b) all.emplace_back(v, false);
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

    double rank_sum_a = 0.0, tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && all[j].first == all[i].first) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].second) rank_sum_a += avg;
        }
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size()), nn = static_cast<double>(n);
    RankTestResult r;
    r.u = rank_sum_a - na * (na + 1.0) / 2.0;
    const double mu = na * nb / 2.0;
    const double var = na * nb / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
    if (var <= 0.0) return r;  // every value tied
    r.z = (r.u - mu) / std::sqrt(var);
    r.p_value = std::erfc(std::abs(r.z) / std::sqrt(2.0));
    return r;
}

double sign_test_p(std::size_t successes, std::size_t trials) {
    if (successes > trials) throw ValidationError("sign_test_p: successes exceed trials");
    if (trials == 0) return 1.0;
    // Sum the binomial tail in log space for the more extreme side.
    const std::size_t k = std::min(successes, trials - successes);
    const double n = static_cast<double>(trials);
    double tail = 0.0;
    for (std::size_t i = 0; i <= k; ++i) {
        const double x = static_cast<double>(i);
        tail += std::exp(std::lgamma(n + 1) - std::lgamma(x + 1) - std::lgamma(n - x + 1) - n * std::log(2.0));
    }
    return std::min(1.0, 2.0 * tail);
}

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace sarbnn
