#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sarbnn/tensor.hpp"

namespace sarbnn {

struct ConvLayer {
    std::size_t out_channels = 0;
    std::size_t kernel = 0;
    bool operator==(const ConvLayer&) const = default;
};
struct ReluLayer {
    bool operator==(const ReluLayer&) const = default;
};
struct MaxPoolLayer {
    std::size_t window = 0;
    std::size_t stride = 0;
    bool operator==(const MaxPoolLayer&) const = default;
};
struct FcLayer {
    std::size_t units = 0;
    bool operator==(const FcLayer&) const = default;
};

using LayerSpec = std::variant<ConvLayer, ReluLayer, MaxPoolLayer, FcLayer>;

struct InputSize {
    std::size_t channels = 1;
    std::size_t height = 0;
    std::size_t width = 0;
    bool operator==(const InputSize&) const = default;
};

// Ordered layer list in the "C(16,5) - ReLU - MP(2,2) - FC(10)" notation plus
// the input geometry it is validated against.
struct ArchitectureSpec {
    std::vector<LayerSpec> layers;
    InputSize input;
    std::size_t num_classes = 10;
    bool operator==(const ArchitectureSpec&) const = default;
};

std::string render_layer(const LayerSpec& layer);
std::string render_layers(const std::vector<LayerSpec>& layers);
std::vector<LayerSpec> parse_layers(std::string_view text);

// "input=1x48x48;classes=10;layers=C(16,5) - ReLU - ..." (checkpoint descriptor form)
std::string render(const ArchitectureSpec& spec);
ArchitectureSpec parse_architecture(std::string_view text);

// Verbatim 88x88 presets: "aconvnet", "alexnet", "lconvnet".
// Desk-scale 48x48 presets: "aconvnet-desk", "alexnet-desk", "lconvnet-desk".
ArchitectureSpec preset(std::string_view name);
std::vector<std::string> preset_names();

struct ResolvedLayer {
    LayerSpec spec;
    Shape in;   // per-sample shape, [C, H, W] or [F]
    Shape out;
    std::size_t pad = 0;     // conv zero padding
    int param_index = -1;    // index into the model's parameter layers
};

struct ResolvedArchitecture {
    ArchitectureSpec spec;
    std::vector<ResolvedLayer> layers;
    std::size_t param_layers = 0;
};

// Walks the layer list against spec.input and checks the final layer emits
// exactly num_classes values. A conv whose kernel exceeds its input extent is
// zero-padded symmetrically just enough to produce a non-empty map. Errors
// name the offending layer by index and notation.
ResolvedArchitecture resolve(const ArchitectureSpec& spec);

}  // namespace sarbnn
