#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sarbnn/architecture.hpp"
#include "sarbnn/attack.hpp"
#include "sarbnn/data.hpp"
#include "sarbnn/model.hpp"
#include "sarbnn/training.hpp"

namespace sarbnn {

// Every key the config file accepts. Defaults are the desk-scale pipeline.
struct RunConfig {
    std::uint64_t seed = 1;

    // data
    std::size_t num_classes = 10;
    std::size_t chip_size = 64;
    std::size_t crop_size = 48;
    std::size_t train_per_class = 200;
    std::size_t test_per_class = 100;
    std::size_t augment_count = 4;
    unsigned speckle_looks = 3;
    double rotation_deg = 30.0;

    // model; arch is a preset name or a layer string such as
    // "C(8,5) - ReLU - MP(2,2) - FC(10)". Input size and class count come
    // from crop_size and num_classes.
    std::string arch = "aconvnet-desk";
    PriorSpec prior;
    double rho_init = -5.0;
    TrainingConfig training;

    // inference
    std::size_t samples = 30;
    double alpha = 0.1;
    std::optional<double> theta;
    std::vector<std::size_t> k = {10, 50, 100};
    std::size_t calib_benign = 50;
    std::size_t calib_adversarial = 50;
    bool resample_saliency = false;
    std::size_t sir_radius = 2;
    std::size_t sir_images = 100;
    // eval reruns MC prediction with this many seeds on the first
    // mi_repeat_images images of each set to estimate MI's seed noise
    std::size_t mi_repeats = 5;
    std::size_t mi_repeat_images = 50;

    // attack
    std::vector<std::size_t> attack_n = {1, 2, 3};
    std::size_t attack_images = 1000;
    AttackConfig attack;

    // paths (empty means "not given")
    std::string data;
    std::string checkpoint;
    std::string adversarial;
    std::string validation;

    ArchitectureSpec architecture() const;
    SyntheticOptions synthetic_options(Split split) const;
    PreprocessSpec preprocess() const;
    void validate() const;
};

// "key = value" lines; '#' starts a comment. Unknown keys are an error.
RunConfig parse_config(std::string_view text, const std::string& name = "config");
RunConfig load_config(const std::filesystem::path& path);
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

// Every key in a fixed order; parse_config(render_config(c)) == c.
std::string render_config(const RunConfig& config);
std::vector<std::string> config_keys();

}  // namespace sarbnn
