#include "sarbnn/config.hpp"

#include <algorithm>
#include <functional>

#include "sarbnn/error.hpp"
#include "sarbnn/io_util.hpp"

namespace sarbnn {
namespace {

struct Field {
    const char* key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::size_t to_size(const std::string& v, const char* key) {
    const long long n = parse_int(v, key);
    if (n < 0) throw ValidationError(std::string(key) + ": must be non-negative, got " + v);
    return static_cast<std::size_t>(n);
}

bool to_bool(const std::string& v, const char* key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ValidationError(std::string(key) + ": expected true or false, got '" + v + "'");
}

std::vector<std::size_t> to_list(const std::string& v, const char* key) {
    std::vector<std::size_t> out;
    for (const std::string& part : split(v, ',')) out.push_back(to_size(trim(part), key));
    return out;
}

std::string from_list(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

#define SIZE_FIELD(name, member) \
    Field{name, [](RunConfig& c, const std::string& v) { c.member = to_size(v, name); }, \
          [](const RunConfig& c) { return std::to_string(c.member); }}
#define DOUBLE_FIELD(name, member) \
    Field{name, [](RunConfig& c, const std::string& v) { c.member = parse_double(v, name); }, \
          [](const RunConfig& c) { return format_double(c.member); }}
#define BOOL_FIELD(name, member) \
    Field{name, [](RunConfig& c, const std::string& v) { c.member = to_bool(v, name); }, \
          [](const RunConfig& c) { return from_bool(c.member); }}
#define STRING_FIELD(name, member) \
    Field{name, [](RunConfig& c, const std::string& v) { c.member = v; }, [](const RunConfig& c) { return c.member; }}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        Field{"seed", [](RunConfig& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(to_size(v, "seed")); },
              [](const RunConfig& c) { return std::to_string(c.seed); }},
        SIZE_FIELD("num_classes", num_classes),
        SIZE_FIELD("chip_size", chip_size),
        SIZE_FIELD("crop_size", crop_size),
        SIZE_FIELD("train_per_class", train_per_class),
        SIZE_FIELD("test_per_class", test_per_class),
        SIZE_FIELD("augment_count", augment_count),
        Field{"speckle_looks", [](RunConfig& c, const std::string& v) { c.speckle_looks = static_cast<unsigned>(to_size(v, "speckle_looks")); },
              [](const RunConfig& c) { return std::to_string(c.speckle_looks); }},
        DOUBLE_FIELD("rotation_deg", rotation_deg),
        STRING_FIELD("arch", arch),
        DOUBLE_FIELD("prior_mean", prior.mean),
        DOUBLE_FIELD("prior_stddev", prior.stddev),
        DOUBLE_FIELD("rho_init", rho_init),
        SIZE_FIELD("epochs", training.epochs),
        SIZE_FIELD("batch_size", training.batch_size),
        DOUBLE_FIELD("learning_rate", training.learning_rate),
        Field{"optimizer",
              [](RunConfig& c, const std::string& v) {
                  if (v == "sgd") c.training.optimizer = OptimizerKind::SgdMomentum;
                  else if (v == "adam") c.training.optimizer = OptimizerKind::Adam;
                  else throw ValidationError("optimizer: expected sgd or adam, got '" + v + "'");
              },
              [](const RunConfig& c) { return std::string(c.training.optimizer == OptimizerKind::Adam ? "adam" : "sgd"); }},
        DOUBLE_FIELD("momentum", training.momentum),
        Field{"kl_weight",
              [](RunConfig& c, const std::string& v) {
                  if (v == "auto") c.training.kl_weight.reset();
                  else c.training.kl_weight = parse_double(v, "kl_weight");
              },
              [](const RunConfig& c) { return c.training.kl_weight ? format_double(*c.training.kl_weight) : std::string("auto"); }},
        BOOL_FIELD("kl_anneal", training.kl_anneal),
        SIZE_FIELD("mc_samples_per_step", training.mc_samples_per_step),
        SIZE_FIELD("samples", samples),
        DOUBLE_FIELD("alpha", alpha),
        Field{"theta",
              [](RunConfig& c, const std::string& v) {
                  if (v.empty() || v == "none") c.theta.reset();
                  else c.theta = parse_double(v, "theta");
              },
              [](const RunConfig& c) { return c.theta ? format_double(*c.theta) : std::string("none"); }},
        Field{"k", [](RunConfig& c, const std::string& v) { c.k = to_list(v, "k"); }, [](const RunConfig& c) { return from_list(c.k); }},
        SIZE_FIELD("calib_benign", calib_benign),
        SIZE_FIELD("calib_adversarial", calib_adversarial),
        BOOL_FIELD("resample_saliency", resample_saliency),
        SIZE_FIELD("sir_radius", sir_radius),
        SIZE_FIELD("sir_images", sir_images),
        SIZE_FIELD("mi_repeats", mi_repeats),
        SIZE_FIELD("mi_repeat_images", mi_repeat_images),
        Field{"attack_n", [](RunConfig& c, const std::string& v) { c.attack_n = to_list(v, "attack_n"); },
              [](const RunConfig& c) { return from_list(c.attack_n); }},
        SIZE_FIELD("attack_images", attack_images),
        SIZE_FIELD("attack_stride", attack.grid_stride),
        DOUBLE_FIELD("attack_amp_min", attack.amplitude_min),
        DOUBLE_FIELD("attack_amp_max", attack.amplitude_max),
        SIZE_FIELD("attack_amp_samples", attack.amplitude_samples),
        DOUBLE_FIELD("attack_radius", attack.radius),
        SIZE_FIELD("attack_max_evals", attack.max_evals),
        DOUBLE_FIELD("attack_mask_percentile", attack.mask_percentile),
        SIZE_FIELD("attack_mask_dilation", attack.mask_dilation),
        BOOL_FIELD("attack_mc_objective", attack.mc_objective),
        SIZE_FIELD("attack_mc_samples", attack.mc_samples),
        STRING_FIELD("data", data),
        STRING_FIELD("checkpoint", checkpoint),
        STRING_FIELD("adversarial", adversarial),
        STRING_FIELD("validation", validation),
    };
    return table;
}

#undef SIZE_FIELD
#undef DOUBLE_FIELD
#undef BOOL_FIELD
#undef STRING_FIELD

}  // namespace

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
    const auto& table = fields();
    auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return key == f.key; });
    if (it == table.end()) throw ValidationError("unknown config key '" + std::string(key) + "'");
    it->set(config, std::string(value));
}

RunConfig parse_config(std::string_view text, const std::string& name) {
    RunConfig c;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string line = lines[i];
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(name + ":" + std::to_string(i + 1) + ": expected 'key = value', got '" + line + "'");
        }
        try {
            apply_setting(c, trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)));
        } catch (const ValidationError& e) {
            throw ValidationError(name + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("config not found: '" + path.string() + "'");
    return parse_config(read_file(path), path.string());
}

std::string render_config(const RunConfig& config) {
    std::string out;
    for (const Field& f : fields()) out += std::string(f.key) + " = " + f.get(config) + "\n";
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const Field& f : fields()) keys.emplace_back(f.key);
    return keys;
}

ArchitectureSpec RunConfig::architecture() const {
    ArchitectureSpec spec;
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), arch) != names.end()) {
        spec = preset(arch);
    } else {
        spec.layers = parse_layers(arch);
    }
    spec.input = {1, crop_size, crop_size};
    spec.num_classes = num_classes;
    return spec;
}

SyntheticOptions RunConfig::synthetic_options(Split split) const {
    SyntheticOptions o;
    o.split = split;
    o.id_prefix = std::string(split_name(split));
    o.rotation_deg = rotation_deg;
    o.speckle_looks = speckle_looks;
    return o;
}

PreprocessSpec RunConfig::preprocess() const {
    return PreprocessSpec{crop_size, crop_size, crop_size, crop_size, augment_count};
}

void RunConfig::validate() const {
    if (crop_size > chip_size) throw ValidationError("config: crop_size exceeds chip_size");
    if (samples < 1) throw ValidationError("config: samples must be >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("config: alpha must be in [0, 1]");
    if (k.empty() || std::find(k.begin(), k.end(), std::size_t{0}) != k.end()) {
        throw ValidationError("config: k must be a nonempty list of positive integers");
    }
    if (attack_n.empty() || std::find(attack_n.begin(), attack_n.end(), std::size_t{0}) != attack_n.end()) {
        throw ValidationError("config: attack_n must be a nonempty list of positive integers");
    }
    if (!(prior.stddev > 0.0)) throw ValidationError("config: prior_stddev must be > 0");
    sarbnn::validate(training);
    attack.validate();
}

}  // namespace sarbnn
