#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sarbnn/commands.hpp"
#include "sarbnn/error.hpp"

namespace {

using sarbnn::RunConfig;

struct Flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    std::optional<double> alpha;
    std::optional<double> theta;
    std::vector<std::size_t> k;
    std::vector<std::size_t> attack_n;
    std::string data, checkpoint, adversarial, validation;
    std::vector<std::string> settings;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "key = value config file (default: $SARBNN_CONFIG)");
    cmd->add_option("--out", f.out, "output directory")->required();
    cmd->add_option("--seed", f.seed, "root seed");
    cmd->add_option("--samples", f.samples, "Monte-Carlo weight samples T");
    cmd->add_option("--alpha", f.alpha, "maximum false positive rate for calibration");
    cmd->add_option("--theta", f.theta, "fixed MI threshold");
    cmd->add_option("--k", f.k, "top-k sizes")->delimiter(',');
    cmd->add_option("--attack-n", f.attack_n, "scatterer counts to attack with")->delimiter(',');
    cmd->add_option("--data", f.data, "dataset manifest");
    cmd->add_option("--checkpoint", f.checkpoint, "model checkpoint");
    cmd->add_option("--adversarial", f.adversarial, "adversarial manifest or attack output directory");
    cmd->add_option("--validation", f.validation, "benign manifest for calibration");
    cmd->add_option("--set", f.settings, "override one config key (key=value), repeatable");
}

RunConfig resolve_config(const Flags& f) {
    std::string path = f.config;
    if (path.empty()) {
        if (const char* env = std::getenv("SARBNN_CONFIG")) path = env;
    }
    RunConfig cfg = path.empty() ? RunConfig{} : sarbnn::load_config(path);
    for (const std::string& s : f.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw sarbnn::UsageError("--set expects key=value, got '" + s + "'");
        sarbnn::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (f.seed) cfg.seed = *f.seed;
    if (f.samples) cfg.samples = *f.samples;
    if (f.alpha) cfg.alpha = *f.alpha;
    if (f.theta) cfg.theta = *f.theta;
    if (!f.k.empty()) cfg.k = f.k;
    if (!f.attack_n.empty()) cfg.attack_n = f.attack_n;
    if (!f.data.empty()) cfg.data = f.data;
    if (!f.checkpoint.empty()) cfg.checkpoint = f.checkpoint;
    if (!f.adversarial.empty()) cfg.adversarial = f.adversarial;
    if (!f.validation.empty()) cfg.validation = f.validation;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian CNN adversarial detection and explanation for SAR chips"};
    app.set_version_flag("--version", sarbnn::tool_version());
    app.require_subcommand(1);

    using Command = void (*)(const RunConfig&, const std::filesystem::path&, std::ostream&);
    const std::vector<std::tuple<const char*, const char*, Command>> commands = {
        {"gen-data", "generate the synthetic chip dataset", sarbnn::cmd_gen_data},
        {"train", "train the Bayesian CNN by variational inference", sarbnn::cmd_train},
        {"attack", "run the scatterer attack on correctly classified test chips", sarbnn::cmd_attack},
        {"calibrate", "pick the MI threshold for a target false positive rate", sarbnn::cmd_calibrate},
        {"detect", "classify images and flag adversarial ones", sarbnn::cmd_detect},
        {"explain", "write GBP-BNN saliency maps", sarbnn::cmd_explain},
        {"eval", "ROC/AUC, rank test and scatterer identification reports", sarbnn::cmd_eval},
    };
    Flags flags;
    std::map<CLI::App*, Command> handlers;
    for (const auto& [name, help, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub, flags);
        handlers[sub] = fn;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : sarbnn::kExitUsage;
    }

    try {
        const RunConfig cfg = resolve_config(flags);
        for (auto& [sub, fn] : handlers) {
            if (sub->parsed()) fn(cfg, flags.out, std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return sarbnn::exit_code_for(e);
    }
    return sarbnn::kExitOk;
}
