#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace sarbnn {

// c = 0 benign, c = 1 adversarial
struct ScoredItem {
    double uncertainty = 0.0;
    int label = 0;
};

class ValidationSet {
public:
    ValidationSet() = default;
    explicit ValidationSet(std::vector<ScoredItem> items);

    void add(double uncertainty, int label);
    const std::vector<ScoredItem>& items() const noexcept { return items_; }
    std::size_t benign_count() const noexcept { return benign_; }
    std::size_t adversarial_count() const noexcept { return adversarial_; }

    // Throws ValidationError unless both classes are present.
    void require_both_classes(const char* op) const;

private:
    std::vector<ScoredItem> items_;
    std::size_t benign_ = 0;
    std::size_t adversarial_ = 0;
};

struct Rates {
    double tpr = 0.0;
    double fpr = 0.0;
};

// Decision rule: adversarial iff u > theta.
inline bool is_adversarial(double uncertainty, double theta) noexcept { return uncertainty > theta; }

Rates tpr_fpr(const ValidationSet& set, double theta);

struct ThresholdResult {
    double theta = 0.0;
    double tpr = 0.0;  // rates achieved on the set at theta
    double fpr = 0.0;
    // false when no observed uncertainty meets FPR <= alpha; theta is then the
    // search's initial value 0.
    bool feasible = false;
};

// Scans every observed uncertainty as a candidate threshold and keeps the one
// with the highest TPR subject to FPR <= alpha; TPR ties go to the larger
// threshold.
ThresholdResult find_threshold(const ValidationSet& set, double alpha);

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // (0,0) at +inf ... (1,1) at -inf
    double auc = 0.0;
};

// Thresholds: +inf, every distinct uncertainty in descending order, -inf.
// AUC by the trapezoid rule (equals the Mann-Whitney statistic, ties as 1/2).
RocCurve roc_auc(const ValidationSet& set);

// CSV: "threshold,fpr,tpr" rows then a footer "auc,<value>".
void write_roc_csv(const RocCurve& roc, const std::filesystem::path& path);

}  // namespace sarbnn
