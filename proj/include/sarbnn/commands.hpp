#pragma once

#include <exception>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "sarbnn/config.hpp"

namespace sarbnn {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitUsage = 2,
    kExitIo = 3,
    kExitValidation = 4,
    kExitNumeric = 5,
};

int exit_code_for(const std::exception& e) noexcept;

// git describe of the build, or the release version outside a checkout.
std::string tool_version();

// Every command writes config.txt and version.txt into `out` besides its
// own reports. File names below are relative to `out`.

// manifest.csv, images/*.pgm (raw chips, train and test splits)
void cmd_gen_data(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

// model.ckpt, train_log.csv (epoch,nll,kl,total,clean_accuracy)
void cmd_train(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

// adv_n<n>/manifest.csv + adv_n<n>/scatterers.csv (successful attacks only),
// attack_records.csv, attack_summary.csv
void cmd_attack(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

// threshold.csv (attack_n,theta,tpr,fpr,feasible,alpha,benign,adversarial)
void cmd_calibrate(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

// verdicts.csv (id,label,pred,p0..,mi,verdict); with alpha also threshold.csv
void cmd_detect(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

// saliency/<id>_normalized.pgm, saliency/<id>_k<k>.pgm, saliency/<id>_k<k>_topk.csv,
// saliency_scale.csv
void cmd_explain(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

// eval_summary.csv, detection.csv, roc_n<n>.csv, sir.csv, mi_seed_error.csv
// (set,images,repeats,mean_mi,mi_seed_std), attack_parameters.csv (key,value
// copied from the attack run's config.txt when present)
void cmd_eval(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

struct AdversarialSet {
    std::size_t attack_n = 0;  // 0 when the directory name carries no n
    std::filesystem::path manifest;
};
// A manifest file, or a directory holding adv_n<n>/manifest.csv entries.
std::vector<AdversarialSet> find_adversarial_sets(const std::filesystem::path& path);

}  // namespace sarbnn
