#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sarbnn/tensor.hpp"

namespace sarbnn {

// Standard: ordinary reverse-mode chain rule.
// Guided: ReLU passes gradient only where both the forward input and the
// upstream gradient are positive; every other op keeps its standard rule.
enum class BackwardMode { Standard, Guided };

// Handle to a value recorded on a GradTape.
struct Var {
    std::size_t id = static_cast<std::size_t>(-1);
    bool valid() const noexcept { return id != static_cast<std::size_t>(-1); }
};

// Records primitive ops in forward order and replays them in exact reverse.
// A tape belongs to one thread for its whole forward/backward pass.
class GradTape {
public:
    explicit GradTape(BackwardMode mode = BackwardMode::Standard) : mode_(mode) {}

    BackwardMode mode() const noexcept { return mode_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    Var leaf(Tensor value, bool requires_grad = false);

    Var conv2d(Var x, Var weight, Var bias, std::size_t pad = 0);
    Var max_pool(Var x, std::size_t window, std::size_t stride);
    Var relu(Var x);
    Var flatten(Var x);  // [N, ...] -> [N, prod(...)]
    Var linear(Var x, Var weight, Var bias);
    Var log_softmax(Var x);
    Var nll_loss(Var log_probs, std::vector<int> labels);  // scalar, shape [1]

    const Tensor& value(Var v) const;

    // Gradients of every node that requires one, seeded at `output`.
    void backward(Var output, const Tensor& seed);
    void backward(Var scalar_output);  // seed of 1 for a single-element output

    bool has_grad(Var v) const;
    const Tensor& grad(Var v) const;

    // Node ids in the order the last backward pass visited them.
    const std::vector<std::size_t>& last_backward_order() const noexcept { return visit_order_; }

private:
    enum class Op { Leaf, Conv2d, MaxPool, Relu, Flatten, Linear, LogSoftmax, NllLoss };

    struct Node {
        Op op = Op::Leaf;
        std::size_t in[3] = {0, 0, 0};
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        std::size_t pad = 0;
        std::size_t window = 0;
        std::size_t stride = 0;
        std::vector<std::uint32_t> argmax;
        std::vector<int> labels;
    };

    const Node& node(Var v, const char* what) const;
    Var push(Node n, const char* op);
    void accumulate(std::size_t id, Tensor g);

    BackwardMode mode_;
    std::vector<Node> nodes_;
    std::vector<std::size_t> visit_order_;
    bool backward_done_ = false;
};

}  // namespace sarbnn
