// One PASS/FAIL line per acceptance criterion. Usage:
//   acceptance [work_dir] [criterion ...]
// With no criteria listed all eight run. Criteria 6-8 share one pipeline run
// (plus a second identical run for 8) under work_dir.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracle/gradcheck.hpp"
#include "oracle/oracles.hpp"
#include "sarbnn/calibration.hpp"
#include "sarbnn/checkpoint.hpp"
#include "sarbnn/commands.hpp"
#include "sarbnn/io_util.hpp"
#include "sarbnn/saliency.hpp"
#include "sarbnn/uncertainty.hpp"
#include "support/csv.hpp"

namespace fs = std::filesystem;
using namespace sarbnn;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream ss;
    ss.precision(precision);
    ss << v;
    return ss.str();
}

// -- 1 -------------------------------------------------------------------

Outcome gradients() {
    Outcome o;
    const auto t0 = Clock::now();
    const oracle::GradcheckReport rep = oracle::run_gradcheck(560, 20240601);
    const double secs = seconds_since(t0);
    o.require(rep.cases >= 500, "case count " + std::to_string(rep.cases));
    o.require(rep.cases_per_op.size() == oracle::kGradcheckKinds, "every primitive exercised");
    o.require(rep.failures == 0, std::to_string(rep.failures) + " gradient mismatches" +
                                     (rep.failure_notes.empty() ? "" : " (" + rep.failure_notes.front() + ")"));
    o.require(secs < 60.0, "runtime under 1 min");
    o.note(std::to_string(rep.cases) + " cases, " + std::to_string(rep.checks) + " partials, max rel err " +
           fmt(rep.max_rel_error, 3) + ", " + fmt(secs, 3) + " s");
    return o;
}

// -- 2 -------------------------------------------------------------------

Outcome mutual_info() {
    Outcome o;
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<std::size_t> tdist(1, 16), cdist(2, 10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    std::size_t bound_violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t t = tdist(rng), c = cdist(rng);
        // Mix of diffuse, peaked and exactly one-hot rows.
        const int style = trial % 3;
        ProbabilityMatrix m(t, c);
        std::vector<std::vector<double>> rows(t, std::vector<double>(c));
        for (std::size_t i = 0; i < t; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
                double v = u(rng);
                if (style == 1) v = std::pow(v, 8.0);
                rows[i][j] = v;
                sum += v;
            }
            for (double& v : rows[i]) v /= sum;
            if (style == 2 && u(rng) < 0.5) {
                std::fill(rows[i].begin(), rows[i].end(), 0.0);
                rows[i][rng() % c] = 1.0;
            }
            for (std::size_t j = 0; j < c; ++j) m.at(i, j) = rows[i][j];
        }
        const double got = mutual_information(m);
        worst = std::max(worst, std::abs(got - oracle::mutual_information(rows)));
        bound_violations += got < 0.0 || got > std::log(static_cast<double>(c)) + 1e-9;
    }
    o.require(worst <= 1e-9, "oracle agreement (max abs diff " + fmt(worst, 3) + ")");
    o.require(bound_violations == 0, std::to_string(bound_violations) + " values outside [0, ln C]");

    ProbabilityMatrix same(4, 3);
    for (std::size_t i = 0; i < 4; ++i) {
        same.at(i, 0) = 0.2;
        same.at(i, 1) = 0.5;
        same.at(i, 2) = 0.3;
    }
    o.require(std::abs(mutual_information(same)) <= 1e-9, "identical rows give 0");
    ProbabilityMatrix hot(2, 2);
    hot.at(0, 0) = 1.0;
    hot.at(1, 1) = 1.0;
    o.require(std::abs(mutual_information(hot) - std::log(2.0)) <= 1e-9, "two one-hot rows give ln 2");
    o.note("1000 matrices, max abs diff " + fmt(worst, 3));
    return o;
}

// -- 3 -------------------------------------------------------------------

Outcome threshold_search() {
    Outcome o;
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t mismatches = 0, fpr_violations = 0, feasible = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 199;
        const std::size_t nb = 1 + rng() % (n - 1);
        const double alpha = std::vector<double>{0.0, 0.05, 0.1, 0.2, 0.5, 1.0}[rng() % 6];
        // Coarse grids on some trials force ties between and within classes.
        const double grid = trial % 2 ? 20.0 : 0.0;
        auto draw = [&](double shift) {
            double v = std::clamp(u(rng) * 0.7 + shift, 0.0, 1.0);
            return grid > 0 ? std::round(v * grid) / grid : v;
        };
        std::vector<double> benign, adversarial;
        ValidationSet vs;
        for (std::size_t i = 0; i < n; ++i) {
            const bool ben = i < nb;
            const double v = draw(ben ? 0.0 : 0.3);
            (ben ? benign : adversarial).push_back(v);
            vs.add(v, ben ? 0 : 1);
        }
        const ThresholdResult r = find_threshold(vs, alpha);
        const oracle::ScanResult s = oracle::exhaustive_threshold(benign, adversarial, alpha);
        mismatches += r.feasible != s.feasible || (s.feasible && std::abs(r.tpr - s.best_tpr) > 1e-12);
        if (r.feasible) {
            ++feasible;
            fpr_violations += r.fpr > alpha;
            const Rates check = tpr_fpr(vs, r.theta);
            mismatches += std::abs(check.tpr - r.tpr) > 1e-12 || std::abs(check.fpr - r.fpr) > 1e-12;
        }
    }
    o.require(mismatches == 0, std::to_string(mismatches) + " sets disagree with the exhaustive scan");
    o.require(fpr_violations == 0, std::to_string(fpr_violations) + " sets exceed alpha");
    o.note("200 sets, " + std::to_string(feasible) + " feasible");
    return o;
}

// -- 4 -------------------------------------------------------------------

Outcome auc_duality() {
    Outcome o;
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    std::size_t with_ties = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t nb = 1 + rng() % 80, na = 1 + rng() % 80;
        const double levels = trial % 2 ? 6.0 + static_cast<double>(rng() % 10) : 0.0;
        auto draw = [&](double shift) {
            const double v = u(rng) + shift;
            return levels > 0 ? std::round(v * levels) / levels : v;
        };
        std::vector<double> benign, adversarial;
        ValidationSet vs;
        for (std::size_t i = 0; i < nb; ++i) {
            benign.push_back(draw(0.0));
            vs.add(benign.back(), 0);
        }
        for (std::size_t i = 0; i < na; ++i) {
            adversarial.push_back(draw(0.25));
            vs.add(adversarial.back(), 1);
        }
        std::set<double> distinct(benign.begin(), benign.end());
        distinct.insert(adversarial.begin(), adversarial.end());
        with_ties += distinct.size() < nb + na;
        worst = std::max(worst, std::abs(roc_auc(vs).auc - oracle::pairwise_auc(benign, adversarial)));
    }
    o.require(worst <= 1e-9, "trapezoid vs pairwise AUC (max abs diff " + fmt(worst, 3) + ")");
    o.require(with_ties >= 50, "enough tied sets (" + std::to_string(with_ties) + ")");
    o.note("200 sets, " + std::to_string(with_ties) + " with ties, max abs diff " + fmt(worst, 3));
    return o;
}

// -- 5 -------------------------------------------------------------------

Outcome saliency_aggregation() {
    Outcome o;
    std::mt19937_64 rng(505);
    std::normal_distribution<float> nd(0.0f, 1.0f);
    double worst = 0.0;
    std::size_t nesting_failures = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t t = 1 + rng() % 30, h = 12 + rng() % 37, w = 12 + rng() % 37;
        std::vector<Tensor> maps;
        std::vector<std::vector<float>> raw;
        for (std::size_t i = 0; i < t; ++i) {
            Tensor m(Shape{h, w});
            for (float& v : m.data()) v = std::max(0.0f, nd(rng) + 0.2f) * (trial % 4 == 0 ? 1e-3f : 1.0f);
            raw.emplace_back(m.data().begin(), m.data().end());
            maps.push_back(std::move(m));
        }
        const SaliencyStats s = aggregate_saliency(maps);
        const oracle::Aggregate ref = oracle::saliency_aggregate(raw);
        auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); };
        for (std::size_t p = 0; p < h * w; ++p) {
            if (ref.mean[p] != 0.0) worst = std::max(worst, rel(s.mean[p], ref.mean[p]));
            if (ref.std[p] != 0.0) worst = std::max(worst, rel(s.std[p], ref.std[p]));
            if (ref.normalized[p] != 0.0) worst = std::max(worst, rel(s.normalized[p], ref.normalized[p]));
            if (ref.std[p] == 0.0 && s.std[p] > 1e-6f * std::abs(s.mean[p]) + 1e-12f) worst = std::max(worst, 1.0);
        }
        std::set<std::size_t> prev;
        for (std::size_t k : {10, 50, 100}) {
            const Tensor top = top_k(s.normalized, k);
            std::set<std::size_t> cur;
            for (std::size_t p = 0; p < top.size(); ++p) {
                if (top[p] != 0.0f) cur.insert(p);
            }
            for (std::size_t p : prev) nesting_failures += cur.count(p) == 0;
            prev = std::move(cur);
        }
    }
    o.require(worst <= 1e-5, "aggregation vs oracle (max rel err " + fmt(worst, 3) + ")");
    o.require(nesting_failures == 0, std::to_string(nesting_failures) + " pixels break top-k nesting");
    o.note("100 stacks, max rel err " + fmt(worst, 3));
    return o;
}

// -- 6 to 8 --------------------------------------------------------------

struct PipelineRun {
    fs::path root;
    double seconds = 0.0;
};

PipelineRun run_pipeline(const fs::path& root) {
    fs::remove_all(root);
    std::ostringstream log;
    RunConfig cfg;  // desk defaults
    const auto t0 = Clock::now();
    cmd_gen_data(cfg, root / "data", log);
    cfg.data = (root / "data" / "manifest.csv").string();
    cmd_train(cfg, root / "train", log);
    cfg.checkpoint = (root / "train" / "model.ckpt").string();
    cmd_attack(cfg, root / "attack", log);
    cfg.adversarial = (root / "attack").string();
    cmd_calibrate(cfg, root / "calibrate", log);
    cmd_eval(cfg, root / "eval", log);
    PipelineRun r{root, seconds_since(t0)};
    write_file_atomic(root / "pipeline.log", log.str());
    return r;
}

std::map<std::string, std::string> row_map(const std::vector<std::string>& header, const std::vector<std::string>& row) {
    std::map<std::string, std::string> m;
    for (std::size_t i = 0; i < header.size() && i < row.size(); ++i) m[header[i]] = row[i];
    return m;
}

std::vector<std::map<std::string, std::string>> table(const fs::path& p) {
    const auto rows = support::read_csv(p);
    std::vector<std::map<std::string, std::string>> out;
    for (std::size_t i = 1; i < rows.size(); ++i) out.push_back(row_map(rows[0], rows[i]));
    return out;
}

double num(const std::map<std::string, std::string>& row, const std::string& key) {
    const auto it = row.find(key);
    if (it == row.end()) return std::nan("");
    return parse_double(it->second, key);
}

Outcome desk_pipeline(const PipelineRun& run) {
    Outcome o;
    const auto summary = table(run.root / "eval" / "eval_summary.csv");
    const double acc = summary.empty() ? 0.0 : num(summary[0], "clean_accuracy");
    o.require(acc >= 0.90, "clean accuracy " + fmt(acc) + " >= 0.90");
    o.require(!summary.empty() && num(summary[0], "samples") == 30, "T = 30");

    double success_n3 = -1.0;
    std::string rates;
    for (const auto& r : table(run.root / "attack" / "attack_summary.csv")) {
        rates += (rates.empty() ? "" : "/") + fmt(num(r, "success_rate"), 3);
        if (r.at("attack_n") == "3") success_n3 = num(r, "success_rate");
    }
    o.require(success_n3 >= 0.60, "n=3 attack success " + fmt(success_n3) + " >= 0.60");

    std::string aucs, pvals;
    for (const auto& r : table(run.root / "eval" / "detection.csv")) {
        const std::string n = r.at("attack_n");
        const double auc = num(r, "auc"), p = num(r, "rank_p");
        aucs += (aucs.empty() ? "" : "/") + fmt(auc, 3);
        pvals += (pvals.empty() ? "" : "/") + fmt(p, 2);
        o.require(auc >= 0.75, "AUC n=" + n + " " + fmt(auc) + " >= 0.75");
        o.require(num(r, "mean_mi_adversarial") > num(r, "mean_mi_benign"), "mean MI adversarial > benign at n=" + n);
        o.require(p < 0.01, "rank test p at n=" + n + " " + fmt(p) + " < 0.01");
        o.require(num(r, "benign") >= 200 && num(r, "adversarial") >= 200, "at least 200 images per side at n=" + n);
    }
    o.require(!aucs.empty(), "detection report present");
    o.require(run.seconds <= 15 * 60, "runtime " + fmt(run.seconds, 4) + " s <= 900 s");
    o.note("accuracy " + fmt(acc) + ", success n=1/2/3 " + rates + ", AUC " + aucs + ", rank p " + pvals + ", " +
           fmt(run.seconds, 4) + " s");
    return o;
}

Outcome sir_behavior(const PipelineRun& run) {
    Outcome o;
    const auto rows = table(run.root / "eval" / "sir.csv");
    o.require(!rows.empty(), "SIR report present");
    std::string shown;
    bool saw_n1 = false;
    for (const auto& r : rows) {
        const std::string n = r.at("attack_n");
        const double s10 = num(r, "sir_10"), s50 = num(r, "sir_50"), s100 = num(r, "sir_100");
        shown += (shown.empty() ? "n=" : ", n=") + n + " " + fmt(s10, 3) + "/" + fmt(s50, 3) + "/" + fmt(s100, 3);
        o.require(s10 <= s50 && s50 <= s100, "SIR ordering at n=" + n);
        if (n == "1") {
            saw_n1 = true;
            o.require(s50 >= 0.5, "SIR_50 at n=1 " + fmt(s50) + " >= 0.5");
        }
    }
    o.require(saw_n1, "n=1 row present");
    o.note("SIR_10/50/100 " + shown);
    return o;
}

std::vector<fs::path> csv_files(const fs::path& root) {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(fs::relative(e.path(), root));
    }
    std::sort(out.begin(), out.end());
    return out;
}

Outcome determinism(const PipelineRun& a, const PipelineRun& b) {
    Outcome o;
    const auto fa = csv_files(a.root), fb = csv_files(b.root);
    o.require(fa == fb, "same set of CSV reports");
    std::size_t differing = 0;
    for (const fs::path& f : fa) {
        if (!fs::exists(b.root / f) || read_file(a.root / f) != read_file(b.root / f)) {
            if (differing++ == 0) o.note("first difference: " + f.string());
        }
    }
    o.require(differing == 0, std::to_string(differing) + " CSV files differ");

    const std::string ckpt = read_file(a.root / "train" / "model.ckpt");
    o.require(ckpt == read_file(b.root / "train" / "model.ckpt"), "checkpoints identical across runs");
    bool crc_ok = true;
    std::string again;
    try {
        again = encode_checkpoint(decode_checkpoint(ckpt, "model.ckpt"));
    } catch (const std::exception& e) {
        crc_ok = false;
        o.note(e.what());
    }
    o.require(crc_ok, "checkpoint decodes with a valid CRC");
    o.require(again == ckpt, "load then save is byte-identical");
    o.note(std::to_string(fa.size()) + " CSV files compared, checkpoint " + std::to_string(ckpt.size()) + " bytes");
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    fs::path work = fs::current_path() / "acceptance_work";
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (!a.empty() && std::all_of(a.begin(), a.end(), ::isdigit)) {
            wanted.insert(std::stoi(a));
        } else {
            work = a;
        }
    }
    if (wanted.empty()) wanted = {1, 2, 3, 4, 5, 6, 7, 8};

    const std::map<int, std::string> names = {
        {1, "gradient correctness"},     {2, "mutual information oracle"}, {3, "threshold search oracle"},
        {4, "AUC dual computation"},     {5, "saliency aggregation"},      {6, "desk-scale pipeline"},
        {7, "scatterer identification"}, {8, "determinism"},
    };
    bool all_pass = true;
    auto report = [&](int id, const std::function<Outcome()>& fn) {
        if (!wanted.count(id)) return;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        all_pass = all_pass && o.pass;
        std::printf("criterion %d (%s): %s  %s\n", id, names.at(id).c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    };

    report(1, gradients);
    report(2, mutual_info);
    report(3, threshold_search);
    report(4, auc_duality);
    report(5, saliency_aggregation);

    if (wanted.count(6) || wanted.count(7) || wanted.count(8)) {
        PipelineRun first;
        std::string error;
        try {
            first = run_pipeline(work / "run_a");
        } catch (const std::exception& e) {
            error = e.what();
        }
        auto guarded = [&](const std::function<Outcome()>& fn) {
            return [&, fn] {
                if (!error.empty()) return Outcome{false, "pipeline failed: " + error};
                return fn();
            };
        };
        report(6, guarded([&] { return desk_pipeline(first); }));
        report(7, guarded([&] { return sir_behavior(first); }));
        report(8, guarded([&] { return determinism(first, run_pipeline(work / "run_b")); }));
    }
    return all_pass ? 0 : 1;
}
