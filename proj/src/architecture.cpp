#include "sarbnn/architecture.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <string>

#include "sarbnn/error.hpp"

namespace sarbnn {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::size_t parse_size(std::string_view s, std::string_view context) {
    s = trim(s);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
        throw ValidationError("architecture: expected positive integer in '" + std::string(context) + "', got '" +
                              std::string(s) + "'");
    }
    return v;
}

std::vector<std::size_t> parse_args(std::string_view token, std::string_view prefix, std::size_t count) {
    const auto open = prefix.size();
    if (token.size() < open + 2 || token[open] != '(' || token.back() != ')') {
        throw ValidationError("architecture: malformed layer '" + std::string(token) + "'");
    }
    std::string_view inner = token.substr(open + 1, token.size() - open - 2);
    std::vector<std::size_t> out;
    while (true) {
        const auto comma = inner.find(',');
        out.push_back(parse_size(inner.substr(0, comma), token));
        if (comma == std::string_view::npos) break;
        inner.remove_prefix(comma + 1);
    }
    if (out.size() != count) {
        throw ValidationError("architecture: layer '" + std::string(token) + "' expects " + std::to_string(count) +
                              " arguments");
    }
    return out;
}

LayerSpec parse_layer(std::string_view token) {
    token = trim(token);
    if (token == "ReLU") return ReluLayer{};
    if (token.starts_with("MP")) {
        auto a = parse_args(token, "MP", 2);
        return MaxPoolLayer{a[0], a[1]};
    }
    if (token.starts_with("FC")) {
        auto a = parse_args(token, "FC", 1);
        return FcLayer{a[0]};
    }
    if (token.starts_with("C")) {
        auto a = parse_args(token, "C", 2);
        return ConvLayer{a[0], a[1]};
    }
    throw ValidationError("architecture: unknown layer '" + std::string(token) + "'");
}

InputSize parse_input(std::string_view s) {
    InputSize in;
    const auto x1 = s.find('x');
    const auto x2 = s.find('x', x1 == std::string_view::npos ? x1 : x1 + 1);
    if (x1 == std::string_view::npos || x2 == std::string_view::npos) {
        throw ValidationError("architecture: input must be CxHxW, got '" + std::string(s) + "'");
    }
    in.channels = parse_size(s.substr(0, x1), s);
    in.height = parse_size(s.substr(x1 + 1, x2 - x1 - 1), s);
    in.width = parse_size(s.substr(x2 + 1), s);
    return in;
}

std::string layer_label(std::size_t index, const LayerSpec& layer) {
    return "layer " + std::to_string(index) + " (" + render_layer(layer) + ")";
}

}  // namespace

std::string render_layer(const LayerSpec& layer) {
    return std::visit(
        [](const auto& l) -> std::string {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, ConvLayer>) {
                return "C(" + std::to_string(l.out_channels) + "," + std::to_string(l.kernel) + ")";
            } else if constexpr (std::is_same_v<T, ReluLayer>) {
                return "ReLU";
            } else if constexpr (std::is_same_v<T, MaxPoolLayer>) {
                return "MP(" + std::to_string(l.window) + "," + std::to_string(l.stride) + ")";
            } else {
                return "FC(" + std::to_string(l.units) + ")";
            }
        },
        layer);
}

std::string render_layers(const std::vector<LayerSpec>& layers) {
    std::string out;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (i) out += " - ";
        out += render_layer(layers[i]);
    }
    return out;
}

std::vector<LayerSpec> parse_layers(std::string_view text) {
    std::vector<LayerSpec> layers;
    text = trim(text);
    if (text.empty()) throw ValidationError("architecture: empty layer list");
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto sep = text.find(" - ", start);
        layers.push_back(parse_layer(text.substr(start, sep == std::string_view::npos ? sep : sep - start)));
        if (sep == std::string_view::npos) break;
        start = sep + 3;
    }
    return layers;
}

std::string render(const ArchitectureSpec& spec) {
    return "input=" + std::to_string(spec.input.channels) + "x" + std::to_string(spec.input.height) + "x" +
           std::to_string(spec.input.width) + ";classes=" + std::to_string(spec.num_classes) +
           ";layers=" + render_layers(spec.layers);
}

ArchitectureSpec parse_architecture(std::string_view text) {
    ArchitectureSpec spec;
    bool have_input = false, have_classes = false, have_layers = false;
    while (!text.empty()) {
        const auto semi = text.find(';');
        std::string_view field = trim(text.substr(0, semi));
        text = semi == std::string_view::npos ? std::string_view{} : text.substr(semi + 1);
        const auto eq = field.find('=');
        if (eq == std::string_view::npos) throw ValidationError("architecture: malformed field '" + std::string(field) + "'");
        const auto key = trim(field.substr(0, eq));
        const auto val = trim(field.substr(eq + 1));
        if (key == "input") {
            spec.input = parse_input(val);
            have_input = true;
        } else if (key == "classes") {
            spec.num_classes = parse_size(val, field);
            have_classes = true;
        } else if (key == "layers") {
            spec.layers = parse_layers(val);
            have_layers = true;
        } else {
            throw ValidationError("architecture: unknown field '" + std::string(key) + "'");
        }
    }
    if (!have_input || !have_classes || !have_layers) {
        throw ValidationError("architecture: descriptor needs input, classes and layers");
    }
    return spec;
}

ArchitectureSpec preset(std::string_view name) {
    ArchitectureSpec spec;
    spec.num_classes = 10;
    if (name == "aconvnet") {
        spec.input = {1, 88, 88};
        spec.layers = parse_layers(
            "C(16,5) - ReLU - MP(2,2) - C(32,5) - ReLU - MP(2,2) - C(64,5) - ReLU - MP(2,2) - "
            "C(128,6) - ReLU - MP(2,2) - C(10,3)");
    } else if (name == "alexnet") {
        spec.input = {1, 88, 88};
        spec.layers = parse_layers(
            "C(64,11) - ReLU - MP(2,2) - C(192,5) - ReLU - MP(2,2) - C(384,3) - ReLU - C(256,3) - ReLU - "
            "C(256,3) - ReLU - MP(2,2) - FC(10)");
    } else if (name == "lconvnet") {
        spec.input = {1, 88, 88};
        spec.layers = parse_layers(
            "C(32,5) - ReLU - MP(2,2) - C(64,5) - ReLU - MP(2,2) - C(128,5) - ReLU - MP(2,2) - C(256,6) - ReLU - "
            "MP(2,2) - C(256,5) - ReLU - FC(1024) - ReLU - FC(1024) - ReLU - FC(10)");
    } else if (name == "aconvnet-desk") {
        spec.input = {1, 48, 48};
        spec.layers = parse_layers(
            "C(8,5) - ReLU - MP(2,2) - C(16,5) - ReLU - MP(2,2) - C(32,3) - ReLU - MP(2,2) - "
            "C(64,2) - ReLU - MP(2,2) - C(10,1)");
    } else if (name == "alexnet-desk") {
        spec.input = {1, 48, 48};
        spec.layers = parse_layers(
            "C(16,5) - ReLU - MP(2,2) - C(32,5) - ReLU - MP(2,2) - C(48,3) - ReLU - C(32,3) - ReLU - "
            "C(32,3) - ReLU - MP(2,2) - FC(10)");
    } else if (name == "lconvnet-desk") {
        spec.input = {1, 48, 48};
        spec.layers = parse_layers(
            "C(16,5) - ReLU - MP(2,2) - C(32,5) - ReLU - MP(2,2) - C(64,3) - ReLU - MP(2,2) - C(64,2) - ReLU - "
            "MP(2,2) - C(64,1) - ReLU - FC(128) - ReLU - FC(128) - ReLU - FC(10)");
    } else {
        throw ValidationError("architecture: unknown preset '" + std::string(name) + "'");
    }
    return spec;
}

std::vector<std::string> preset_names() {
    return {"aconvnet", "alexnet", "lconvnet", "aconvnet-desk", "alexnet-desk", "lconvnet-desk"};
}

ResolvedArchitecture resolve(const ArchitectureSpec& spec) {
    if (spec.layers.empty()) throw ValidationError("architecture: no layers");
    if (spec.num_classes == 0) throw ValidationError("architecture: num_classes must be positive");
    if (spec.input.channels == 0 || spec.input.height == 0 || spec.input.width == 0) {
        throw ValidationError("architecture: input size must be positive");
    }
    ResolvedArchitecture r;
    r.spec = spec;
    Shape shape{spec.input.channels, spec.input.height, spec.input.width};
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& layer = spec.layers[i];
        ResolvedLayer rl{layer, shape, {}, 0, -1};
        if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
            if (shape.size() != 3) throw ValidationError("architecture: " + layer_label(i, layer) + " follows a fully-connected layer");
            const std::size_t extent = std::min(shape[1], shape[2]);
            if (extent < conv->kernel) rl.pad = (conv->kernel - extent + 1) / 2;
            rl.out = {conv->out_channels, shape[1] + 2 * rl.pad - conv->kernel + 1, shape[2] + 2 * rl.pad - conv->kernel + 1};
            rl.param_index = static_cast<int>(r.param_layers++);
        } else if (const auto* pool = std::get_if<MaxPoolLayer>(&layer)) {
            if (shape.size() != 3) throw ValidationError("architecture: " + layer_label(i, layer) + " follows a fully-connected layer");
            if (shape[1] < pool->window || shape[2] < pool->window) {
                throw ValidationError("architecture: " + layer_label(i, layer) + " produces a zero-size feature map from input " +
                                      shape_str(shape));
            }
            rl.out = {shape[0], (shape[1] - pool->window) / pool->stride + 1, (shape[2] - pool->window) / pool->stride + 1};
        } else if (const auto* fc = std::get_if<FcLayer>(&layer)) {
            rl.in = {shape_numel(shape)};
            rl.out = {fc->units};
            rl.param_index = static_cast<int>(r.param_layers++);
        } else {
            rl.out = shape;
        }
        shape = rl.out;
        r.layers.push_back(std::move(rl));
    }
    if (shape_numel(shape) != spec.num_classes) {
        const std::size_t last = spec.layers.size() - 1;
        throw ValidationError("architecture: " + layer_label(last, spec.layers[last]) + " emits " + shape_str(shape) + " = " +
                              std::to_string(shape_numel(shape)) + " values, expected " + std::to_string(spec.num_classes) +
                              " logits for input " + std::to_string(spec.input.channels) + "x" +
                              std::to_string(spec.input.height) + "x" + std::to_string(spec.input.width));
    }
    return r;
}

}  // namespace sarbnn
