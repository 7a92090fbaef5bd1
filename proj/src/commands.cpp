#include "sarbnn/commands.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <regex>

#include "sarbnn/attack.hpp"
#include "sarbnn/calibration.hpp"
#include "sarbnn/checkpoint.hpp"
#include "sarbnn/error.hpp"
#include "sarbnn/io_util.hpp"
#include "sarbnn/manifest.hpp"
#include "sarbnn/pgm.hpp"
#include "sarbnn/rng.hpp"
#include "sarbnn/saliency.hpp"
#include "sarbnn/stats.hpp"
#include "sarbnn/uncertainty.hpp"

#ifndef SARBNN_VERSION
#define SARBNN_VERSION "0.0.0"
#endif
#ifndef SARBNN_GIT_DESCRIBE
#define SARBNN_GIT_DESCRIBE ""
#endif

namespace sarbnn {
namespace {

namespace fs = std::filesystem;

void write_metadata(const RunConfig& cfg, const fs::path& out) {
    write_file_atomic(out / "config.txt", render_config(cfg));
    write_file_atomic(out / "version.txt", tool_version() + "\n");
}

const std::string& require_path(const std::string& value, const char* key) {
    if (value.empty()) throw UsageError(std::string("missing '") + key + "' (set it in the config or pass --" + key + ")");
    return value;
}

// Center-crops chips larger than the model input.
std::vector<Chip> fit_to_model(std::vector<Chip> chips, const BayesianModel& model) {
    const Shape in = model.input_shape();
    for (Chip& c : chips) {
        if (c.image.shape() == in) continue;
        if (c.image.rank() != 3 || c.image.dim(0) != in[0]) throw ShapeError("model input", shape_str(in), shape_str(c.image.shape()));
        c.image = center_crop(c.image, in[1], in[2]);
    }
    return chips;
}

std::vector<Tensor> images_of(const std::vector<Chip>& chips) {
    std::vector<Tensor> out;
    out.reserve(chips.size());
    for (const Chip& c : chips) out.push_back(c.image);
    return out;
}

std::vector<Chip> test_chips(const RunConfig& cfg, const std::string& manifest, const BayesianModel& model) {
    ChipDataset ds = load_manifest(manifest, cfg.num_classes);
    return fit_to_model(ds.subset(Split::Test).chips, model);
}

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    return idx;
}

std::uint64_t mc_seed(const RunConfig& cfg) { return derive_seed(cfg.seed, "mc"); }

std::vector<double> mi_of(const std::vector<PredictiveSummary>& preds) {
    std::vector<double> out;
    for (const auto& p : preds) out.push_back(p.mi);
    return out;
}

// Across-seed spread of the MI estimate: MC prediction is rerun with
// `repeats` seeds; the row reports the root mean square over images of the
// per-image sample standard deviation.
std::string mi_seed_row(const RunConfig& cfg, const BayesianModel& model, const std::string& set,
                        const std::vector<Chip>& chips) {
    const std::size_t n = std::min(cfg.mi_repeat_images, chips.size());
    if (cfg.mi_repeats < 2 || n == 0) return "";
    const std::vector<Tensor> images = images_of(std::vector<Chip>(chips.begin(), chips.begin() + static_cast<std::ptrdiff_t>(n)));
    std::vector<std::vector<double>> runs;
    for (std::size_t r = 0; r < cfg.mi_repeats; ++r) {
        runs.push_back(mi_of(predict_batch(model, images, cfg.samples, derive_seed(cfg.seed, "mi-repeat", r))));
    }
    double mi_sum = 0.0, var_sum = 0.0;
    const double reps = static_cast<double>(cfg.mi_repeats);
    for (std::size_t i = 0; i < n; ++i) {
        double m = 0.0;
        for (const auto& run : runs) m += run[i];
        m /= reps;
        double ss = 0.0;
        for (const auto& run : runs) ss += (run[i] - m) * (run[i] - m);
        mi_sum += m;
        var_sum += ss / (reps - 1.0);
    }
    return set + "," + std::to_string(n) + "," + std::to_string(cfg.mi_repeats) + "," +
           format_double(mi_sum / static_cast<double>(n)) + "," + format_double(std::sqrt(var_sum / static_cast<double>(n))) + "\n";
}

// The attack_* settings of the run that produced `adversarial`, if it left a config.txt.
std::string attack_parameters(const fs::path& adversarial) {
    fs::path dir = fs::is_directory(adversarial) ? adversarial : adversarial.parent_path().parent_path();
    if (!fs::exists(dir / "config.txt")) return "";
    std::string csv = "key,value\n";
    for (const std::string& line : split_lines(render_config(load_config(dir / "config.txt")))) {
        if (line.rfind("attack_", 0) != 0) continue;
        const auto eq = line.find(" = ");
        csv += line.substr(0, eq) + "," + csv_field(line.substr(eq + 3)) + "\n";
    }
    return csv;
}

struct Calibration {
    std::size_t attack_n = 0;
    ThresholdResult result;
    std::size_t benign = 0;
    std::size_t adversarial = 0;
};

std::vector<Calibration> calibrate(const RunConfig& cfg, const BayesianModel& model, const std::string& benign_manifest,
                                   const std::string& adversarial, std::ostream& log) {
    ChipDataset benign_ds = load_manifest(benign_manifest, cfg.num_classes);
    std::vector<Chip> benign = benign_ds.count(Split::Test) ? benign_ds.subset(Split::Test).chips : benign_ds.chips;
    benign = fit_to_model(std::move(benign), model);
    std::vector<Tensor> benign_pick;
    for (std::size_t i : shuffled(benign.size(), derive_seed(cfg.seed, "calib-benign"))) {
        if (benign_pick.size() == cfg.calib_benign) break;
        benign_pick.push_back(benign[i].image);
    }
    const std::vector<double> benign_mi = mi_of(predict_batch(model, benign_pick, cfg.samples, mc_seed(cfg)));

    std::vector<Calibration> out;
    for (const AdversarialSet& set : find_adversarial_sets(adversarial)) {
        std::vector<Chip> adv = fit_to_model(load_manifest(set.manifest, cfg.num_classes).chips, model);
        std::vector<Tensor> adv_pick;
        for (std::size_t i : shuffled(adv.size(), derive_seed(cfg.seed, "calib-adversarial", set.attack_n))) {
            if (adv_pick.size() == cfg.calib_adversarial) break;
            adv_pick.push_back(adv[i].image);
        }
        ValidationSet vs;
        for (double u : benign_mi) vs.add(u, 0);
        for (double u : mi_of(predict_batch(model, adv_pick, cfg.samples, mc_seed(cfg)))) vs.add(u, 1);
        vs.require_both_classes("calibrate");
        Calibration c{set.attack_n, find_threshold(vs, cfg.alpha), vs.benign_count(), vs.adversarial_count()};
        if (!c.result.feasible) log << "warning: no threshold meets FPR <= " << cfg.alpha << " for attack n=" << set.attack_n << "\n";
        log << "calibrated n=" << set.attack_n << ": theta=" << c.result.theta << " tpr=" << c.result.tpr
            << " fpr=" << c.result.fpr << "\n";
        out.push_back(c);
    }
    return out;
}

void write_thresholds(const std::vector<Calibration>& cals, double alpha, const fs::path& path) {
    std::string csv = "attack_n,theta,tpr,fpr,feasible,alpha,benign,adversarial\n";
    for (const Calibration& c : cals) {
        csv += std::to_string(c.attack_n) + "," + format_double(c.result.theta) + "," + format_double(c.result.tpr) + "," +
               format_double(c.result.fpr) + "," + (c.result.feasible ? "true" : "false") + "," + format_double(alpha) +
               "," + std::to_string(c.benign) + "," + std::to_string(c.adversarial) + "\n";
    }
    write_file_atomic(path, csv);
}

}  // namespace

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const UsageError*>(&e)) return kExitUsage;
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) return kExitIo;
    if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ShapeError*>(&e)) return kExitValidation;
    if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
    return kExitFailure;
}

std::string tool_version() {
    const std::string describe = SARBNN_GIT_DESCRIBE;
    return describe.empty() ? std::string("v") + SARBNN_VERSION : describe;
}

std::vector<AdversarialSet> find_adversarial_sets(const fs::path& path) {
    static const std::regex adv_dir("adv_n([0-9]+)");
    std::vector<AdversarialSet> sets;
    if (fs::is_regular_file(path)) {
        std::smatch m;
        const std::string parent = path.parent_path().filename().string();
        const std::size_t n = std::regex_match(parent, m, adv_dir) ? std::stoul(m[1]) : 0;
        return {AdversarialSet{n, path}};
    }
    if (!fs::is_directory(path)) throw IoError("adversarial set not found: '" + path.string() + "'");
    for (const auto& e : fs::directory_iterator(path)) {
        std::smatch m;
        const std::string name = e.path().filename().string();
        if (e.is_directory() && std::regex_match(name, m, adv_dir) && fs::exists(e.path() / "manifest.csv")) {
            sets.push_back(AdversarialSet{std::stoul(m[1]), e.path() / "manifest.csv"});
        }
    }
    if (sets.empty()) throw IoError("no adv_n<n>/manifest.csv under '" + path.string() + "'");
    std::sort(sets.begin(), sets.end(), [](const auto& a, const auto& b) { return a.attack_n < b.attack_n; });
    return sets;
}

void cmd_gen_data(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    ChipDataset ds = generate_synthetic(cfg.num_classes, cfg.train_per_class, cfg.chip_size, derive_seed(cfg.seed, "data-train"),
                                        cfg.synthetic_options(Split::Train));
    ds.append(generate_synthetic(cfg.num_classes, cfg.test_per_class, cfg.chip_size, derive_seed(cfg.seed, "data-test"),
                                 cfg.synthetic_options(Split::Test)));
    save_manifest(ds, out / "manifest.csv");
    write_metadata(cfg, out);
    log << "wrote " << ds.count(Split::Train) << " train and " << ds.count(Split::Test) << " test chips to "
        << (out / "manifest.csv").string() << "\n";
}

void cmd_train(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const std::string& data = require_path(cfg.data, "data");
    ChipDataset raw = load_manifest(data, cfg.num_classes);
    std::vector<std::string> warnings;
    ChipDataset ds = augment_and_crop(raw, cfg.preprocess(), derive_seed(cfg.seed, "augment"), &warnings);
    for (const auto& w : warnings) log << "warning: " << w << "\n";
    const ChipDataset train = ds.subset(Split::Train);
    const ChipDataset test = ds.subset(Split::Test);
    if (train.chips.empty()) throw ValidationError("train: no training chips in '" + data + "'");

    BayesianModel model = build_model(cfg.architecture(), cfg.prior, derive_seed(cfg.seed, "init"), static_cast<float>(cfg.rho_init));
    std::vector<Tensor> images = images_of(train.chips);
    std::vector<int> labels;
    for (const Chip& c : train.chips) labels.push_back(static_cast<int>(c.label));
    const std::vector<Tensor> test_images = images_of(test.chips);

    TrainingConfig tc = cfg.training;
    tc.rng_seed = derive_seed(cfg.seed, "train");
    // Per-epoch accuracy uses w = mu to keep epochs cheap; eval reports the
    // Monte-Carlo accuracy.
    auto evaluate = [&](const BayesianModel& m) {
        if (test.chips.empty()) return 0.0;
        const auto probs = mean_weight_probs(m, test_images);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) correct += argmax(probs[i]) == test.chips[i].label;
        return static_cast<double>(correct) / static_cast<double>(probs.size());
    };
    std::string csv = "epoch,nll,kl,total,clean_accuracy\n";
    fit(model, images, labels, tc, evaluate, [&](const EpochLog& e) {
        csv += std::to_string(e.epoch) + "," + format_double(e.nll) + "," + format_double(e.kl) + "," + format_double(e.total) +
               "," + format_double(e.clean_accuracy) + "\n";
        log << "epoch " << e.epoch << ": nll=" << e.nll << " kl=" << e.kl << " acc=" << e.clean_accuracy << "\n";
    });
    save_checkpoint(model, out / "model.ckpt");
    write_file_atomic(out / "train_log.csv", csv);
    write_metadata(cfg, out);
}

void cmd_attack(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const BayesianModel model = load_checkpoint(require_path(cfg.checkpoint, "checkpoint"));
    const std::vector<Chip> chips = test_chips(cfg, require_path(cfg.data, "data"), model);

    // Victims: correctly classified (w = mu) test chips in a seeded order.
    const auto probs = mean_weight_probs(model, images_of(chips));
    std::vector<std::size_t> victims;
    for (std::size_t i : shuffled(chips.size(), derive_seed(cfg.seed, "attack-order"))) {
        if (victims.size() == cfg.attack_images) break;
        if (argmax(probs[i]) == chips[i].label) victims.push_back(i);
    }
    if (victims.empty()) throw ValidationError("attack: the victim classifies no test chip correctly");

    std::string records = "attack_n,id,label,pred_before,pred_after,success,evals\n";
    std::string summary = "attack_n,attempted,successes,success_rate\n";
    for (std::size_t n : cfg.attack_n) {
        ChipDataset adv{{}, cfg.num_classes, "attack"};
        std::vector<ScattererRow> truth;
        std::size_t successes = 0;
        for (std::size_t v : victims) {
            const Chip& c = chips[v];
            AttackConfig ac = cfg.attack;
            ac.n_scatterers = n;
            ac.rng_seed = derive_seed(derive_seed(cfg.seed, "attack", n), c.id);
            const AdversarialRecord r = attack(model, c.image, c.label, ac);
            records += std::to_string(n) + "," + c.id + "," + std::to_string(c.label) + "," + std::to_string(r.pred_before) +
                       "," + std::to_string(r.pred_after) + "," + (r.success ? "true" : "false") + "," +
                       std::to_string(r.evals) + "\n";
            if (!r.success) continue;
            ++successes;
            const std::string id = c.id + "_adv" + std::to_string(n);
            adv.chips.push_back(Chip{r.perturbed, c.label, id, Split::Test});
            for (std::size_t s = 0; s < r.specs.size(); ++s) {
                truth.push_back(ScattererRow{id, s, r.specs[s].center.row, r.specs[s].center.col, r.specs[s].amplitude, r.specs[s].radius});
            }
        }
        const fs::path dir = out / ("adv_n" + std::to_string(n));
        save_manifest(adv, dir / "manifest.csv");
        save_scatterers(truth, dir / "scatterers.csv");
        const double rate = static_cast<double>(successes) / static_cast<double>(victims.size());
        summary += std::to_string(n) + "," + std::to_string(victims.size()) + "," + std::to_string(successes) + "," +
                   format_double(rate) + "\n";
        log << "attack n=" << n << ": " << successes << "/" << victims.size() << " succeeded\n";
    }
    write_file_atomic(out / "attack_records.csv", records);
    write_file_atomic(out / "attack_summary.csv", summary);
    write_metadata(cfg, out);
}

void cmd_calibrate(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const BayesianModel model = load_checkpoint(require_path(cfg.checkpoint, "checkpoint"));
    const std::string& benign = cfg.validation.empty() ? require_path(cfg.data, "data") : cfg.validation;
    const auto cals = calibrate(cfg, model, benign, require_path(cfg.adversarial, "adversarial"), log);
    write_thresholds(cals, cfg.alpha, out / "threshold.csv");
    write_metadata(cfg, out);
}

void cmd_detect(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const BayesianModel model = load_checkpoint(require_path(cfg.checkpoint, "checkpoint"));
    double theta = 0.0;
    if (cfg.theta) {
        theta = *cfg.theta;
    } else {
        if (cfg.validation.empty() || cfg.adversarial.empty()) {
            throw UsageError("detect: give --theta, or --alpha with validation and adversarial sets to calibrate on");
        }
        const auto cals = calibrate(cfg, model, cfg.validation, cfg.adversarial, log);
        // Every set shares the benign sample, so the largest threshold keeps
        // FPR <= alpha on all of them.
        theta = std::max_element(cals.begin(), cals.end(), [](const auto& a, const auto& b) { return a.result.theta < b.result.theta; })
                    ->result.theta;
        write_thresholds(cals, cfg.alpha, out / "threshold.csv");
    }
    const ChipDataset ds = load_manifest(require_path(cfg.data, "data"), cfg.num_classes);
    const std::vector<Chip> chips = fit_to_model(ds.chips, model);
    const auto preds = predict_batch(model, images_of(chips), cfg.samples, mc_seed(cfg));

    std::string csv = "id,label,pred";
    for (std::size_t c = 0; c < cfg.num_classes; ++c) csv += ",p" + std::to_string(c);
    csv += ",mi,verdict\n";
    std::size_t flagged = 0;
    for (std::size_t i = 0; i < chips.size(); ++i) {
        const bool adv = is_adversarial(preds[i].mi, theta);
        flagged += adv;
        csv += chips[i].id + "," + std::to_string(chips[i].label) + "," + std::to_string(preds[i].predicted_class());
        for (double p : preds[i].mean_probs) csv += "," + format_double(p);
        csv += "," + format_double(preds[i].mi) + "," + (adv ? "adversarial" : "benign") + "\n";
    }
    write_file_atomic(out / "verdicts.csv", csv);
    write_metadata(cfg, out);
    log << "theta=" << theta << ": " << flagged << "/" << chips.size() << " flagged adversarial\n";
}

void cmd_explain(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const BayesianModel model = load_checkpoint(require_path(cfg.checkpoint, "checkpoint"));
    const ChipDataset ds = load_manifest(require_path(cfg.data, "data"), cfg.num_classes);
    const std::vector<Chip> chips = fit_to_model(ds.chips, model);
    const Shape in = model.input_shape();
    const std::size_t pixels = in[1] * in[2];
    for (std::size_t k : cfg.k) {
        if (k > pixels) log << "warning: k=" << k << " exceeds the " << pixels << " pixels of a map; keeping all\n";
    }
    std::string scale_csv = "id,map,min,max\n";
    for (const Chip& c : chips) {
        GbpOptions opt;
        opt.k = *std::max_element(cfg.k.begin(), cfg.k.end());
        opt.resample = cfg.resample_saliency;
        const SaliencyBundle b = gbp_bnn(model, c.image, cfg.samples, mc_seed(cfg), opt);
        auto emit = [&](const Tensor& map, const std::string& name) {
            const MapScale s = write_saliency_pgm(map, out / "saliency" / (name + ".pgm"));
            scale_csv += c.id + "," + name + "," + format_double(s.min) + "," + format_double(s.max) + "\n";
        };
        emit(b.normalized, c.id + "_normalized");
        for (std::size_t k : cfg.k) {
            const Tensor topk = top_k(b.normalized, k);
            const std::string name = c.id + "_k" + std::to_string(k);
            emit(topk, name);
            write_topk_csv(topk, out / "saliency" / (name + "_topk.csv"));
        }
    }
    write_file_atomic(out / "saliency_scale.csv", scale_csv);
    write_metadata(cfg, out);
    log << "explained " << chips.size() << " image(s)\n";
}

void cmd_eval(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const BayesianModel model = load_checkpoint(require_path(cfg.checkpoint, "checkpoint"));
    const std::vector<Chip> benign = test_chips(cfg, require_path(cfg.data, "data"), model);
    if (benign.empty()) throw ValidationError("eval: no test chips in '" + cfg.data + "'");
    const auto benign_preds = predict_batch(model, images_of(benign), cfg.samples, mc_seed(cfg));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < benign.size(); ++i) correct += benign_preds[i].predicted_class() == benign[i].label;
    const double accuracy = static_cast<double>(correct) / static_cast<double>(benign.size());
    const std::vector<double> benign_mi = mi_of(benign_preds);
    write_file_atomic(out / "eval_summary.csv", "arch,samples,test_images,clean_accuracy\n" + csv_field(cfg.arch) + "," +
                                                     std::to_string(cfg.samples) + "," + std::to_string(benign.size()) +
                                                     "," + format_double(accuracy) + "\n");
    log << "clean accuracy (T=" << cfg.samples << "): " << accuracy << "\n";

    std::string seed_error = "set,images,repeats,mean_mi,mi_seed_std\n" + mi_seed_row(cfg, model, "benign", benign);
    std::string detection = "attack_n,benign,adversarial,auc,mean_mi_benign,mean_mi_adversarial,rank_u,rank_z,rank_p\n";
    std::string sir_csv = "arch,attack_n,images,scatterers";
    for (std::size_t k : cfg.k) sir_csv += ",sir_" + std::to_string(k);
    sir_csv += "\n";

    for (const AdversarialSet& set : find_adversarial_sets(require_path(cfg.adversarial, "adversarial"))) {
        const std::vector<Chip> adv = fit_to_model(load_manifest(set.manifest, cfg.num_classes).chips, model);
        if (adv.empty()) {
            log << "warning: adversarial set n=" << set.attack_n << " is empty, skipped\n";
            continue;
        }
        const auto adv_preds = predict_batch(model, images_of(adv), cfg.samples, mc_seed(cfg));
        const std::vector<double> adv_mi = mi_of(adv_preds);
        ValidationSet vs;
        for (double u : benign_mi) vs.add(u, 0);
        for (double u : adv_mi) vs.add(u, 1);
        const RocCurve roc = roc_auc(vs);
        write_roc_csv(roc, out / ("roc_n" + std::to_string(set.attack_n) + ".csv"));
        const RankTestResult rt = mann_whitney(adv_mi, benign_mi);
        detection += std::to_string(set.attack_n) + "," + std::to_string(benign_mi.size()) + "," + std::to_string(adv_mi.size()) +
                     "," + format_double(roc.auc) + "," + format_double(mean(benign_mi)) + "," + format_double(mean(adv_mi)) +
                     "," + format_double(rt.u) + "," + format_double(rt.z) + "," + format_double(rt.p_value) + "\n";
        seed_error += mi_seed_row(cfg, model, "n" + std::to_string(set.attack_n), adv);
        log << "attack n=" << set.attack_n << ": AUC " << roc.auc << " over " << adv_mi.size() << " adversarial images\n";

        // Scatterer identification on the first sir_images adversarial images.
        const fs::path truth_path = set.manifest.parent_path() / "scatterers.csv";
        std::map<std::string, ScattererGroundTruth> truth;
        for (const ScattererRow& r : load_scatterers(truth_path)) {
            ScattererGroundTruth& t = truth[r.id];
            t.footprint_radius = cfg.sir_radius;
            t.centers.push_back(PixelCoord{r.row, r.col});
        }
        std::vector<std::size_t> found(cfg.k.size(), 0);
        std::size_t total = 0, images = 0;
        for (const Chip& c : adv) {
            if (images == cfg.sir_images) break;
            auto it = truth.find(c.id);
            if (it == truth.end()) throw ValidationError(truth_path.string() + ": no scatterers for '" + c.id + "'");
            GbpOptions opt;
            opt.k = *std::max_element(cfg.k.begin(), cfg.k.end());
            opt.resample = cfg.resample_saliency;
            const SaliencyBundle b = gbp_bnn(model, c.image, cfg.samples, mc_seed(cfg), opt);
            const double n_centers = static_cast<double>(it->second.centers.size());
            for (std::size_t j = 0; j < cfg.k.size(); ++j) {
                found[j] += static_cast<std::size_t>(std::lround(sir(top_k(b.normalized, cfg.k[j]), it->second) * n_centers));
            }
            total += it->second.centers.size();
            ++images;
        }
        sir_csv += csv_field(cfg.arch) + "," + std::to_string(set.attack_n) + "," + std::to_string(images) + "," + std::to_string(total);
        for (std::size_t f : found) sir_csv += "," + format_double(total ? static_cast<double>(f) / static_cast<double>(total) : 0.0);
        sir_csv += "\n";
    }
    write_file_atomic(out / "detection.csv", detection);
    write_file_atomic(out / "sir.csv", sir_csv);
    write_file_atomic(out / "mi_seed_error.csv", seed_error);
    if (const std::string params = attack_parameters(cfg.adversarial); !params.empty()) {
        write_file_atomic(out / "attack_parameters.csv", params);
    } else {
        log << "warning: no config.txt next to '" << cfg.adversarial << "'; attack parameters not reported\n";
    }
    write_metadata(cfg, out);
}

}  // namespace sarbnn
