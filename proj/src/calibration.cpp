#include "sarbnn/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sarbnn/error.hpp"
#include "sarbnn/io_util.hpp"

namespace sarbnn {

ValidationSet::ValidationSet(std::vector<ScoredItem> items) {
    for (const auto& it : items) add(it.uncertainty, it.label);
}

void ValidationSet::add(double uncertainty, int label) {
    if (label != 0 && label != 1) throw ValidationError("validation set: label must be 0 or 1, got " + std::to_string(label));
    if (!std::isfinite(uncertainty)) throw ValidationError("validation set: non-finite uncertainty");
    items_.push_back({uncertainty, label});
    (label ? adversarial_ : benign_)++;
}

void ValidationSet::require_both_classes(const char* op) const {
    if (benign_ == 0 || adversarial_ == 0) {
        throw ValidationError(std::string(op) + ": validation set needs at least one benign and one adversarial item (have " +
                              std::to_string(benign_) + " benign, " + std::to_string(adversarial_) + " adversarial)");
    }
}

Rates tpr_fpr(const ValidationSet& set, double theta) {
    set.require_both_classes("tpr_fpr");
    std::size_t tp = 0, fp = 0;
    for (const auto& it : set.items()) {
        if (!is_adversarial(it.uncertainty, theta)) continue;
        (it.label ? tp : fp)++;
    }
    return {static_cast<double>(tp) / static_cast<double>(set.adversarial_count()),
            static_cast<double>(fp) / static_cast<double>(set.benign_count())};
}

ThresholdResult find_threshold(const ValidationSet& set, double alpha) {
    set.require_both_classes("find_threshold");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("find_threshold: alpha must lie in [0, 1]");

    // Sorting lets each candidate's counts come from one sweep; the result is
    // the same as evaluating every candidate independently.
    std::vector<ScoredItem> sorted = set.items();
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.uncertainty > b.uncertainty; });
    const double nb = static_cast<double>(set.benign_count());
    const double na = static_cast<double>(set.adversarial_count());

    ThresholdResult best;
    std::size_t tp = 0, fp = 0;  // items strictly above the current candidate
    std::size_t i = 0;
    while (i < sorted.size()) {
        const double theta = sorted[i].uncertainty;
        const double tpr = tp / na, fpr = fp / nb;
        if (fpr <= alpha && (!best.feasible || tpr > best.tpr)) {
            best = {theta, tpr, fpr, true};
        }
        while (i < sorted.size() && sorted[i].uncertainty == theta) {
            (sorted[i].label ? tp : fp)++;
            ++i;
        }
    }
    if (!best.feasible) {
        const Rates at_zero = tpr_fpr(set, 0.0);
        best = {0.0, at_zero.tpr, at_zero.fpr, false};
    }
    return best;
}

RocCurve roc_auc(const ValidationSet& set) {
    set.require_both_classes("roc_auc");
    std::vector<ScoredItem> sorted = set.items();
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.uncertainty > b.uncertainty; });
    const double nb = static_cast<double>(set.benign_count());
    const double na = static_cast<double>(set.adversarial_count());

    RocCurve roc;
    roc.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        const double theta = sorted[i].uncertainty;
        // u > theta for the current candidate equals everything before i
        roc.points.push_back({theta, fp / nb, tp / na});
        while (i < sorted.size() && sorted[i].uncertainty == theta) {
            (sorted[i].label ? tp : fp)++;
            ++i;
        }
    }
    roc.points.push_back({-std::numeric_limits<double>::infinity(), 1.0, 1.0});

    double area = 0.0;
    for (std::size_t k = 1; k < roc.points.size(); ++k) {
        const auto& a = roc.points[k - 1];
        const auto& b = roc.points[k];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
    }
    roc.auc = area;
    return roc;
}

void write_roc_csv(const RocCurve& roc, const std::filesystem::path& path) {
    std::string out = "threshold,fpr,tpr\n";
    for (const auto& p : roc.points) out += format_double(p.threshold) + "," + format_double(p.fpr) + "," + format_double(p.tpr) + "\n";
    out += "auc," + format_double(roc.auc) + "\n";
    write_file_atomic(path, out);
}

}  // namespace sarbnn
