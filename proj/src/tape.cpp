#include "sarbnn/tape.hpp"

#include <stdexcept>
#include <string>

#include "sarbnn/error.hpp"
#include "sarbnn/ops.hpp"

namespace sarbnn {

const GradTape::Node& GradTape::node(Var v, const char* what) const {
    if (!v.valid() || v.id >= nodes_.size()) {
        throw std::logic_error(std::string(what) + ": variable not recorded on this tape");
    }
    return nodes_[v.id];
}

Var GradTape::push(Node n, const char* op) {
    require_finite(n.value, op);
    nodes_.push_back(std::move(n));
    backward_done_ = false;
    return Var{nodes_.size() - 1};
}

Var GradTape::leaf(Tensor value, bool requires_grad) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    return push(std::move(n), "leaf");
}

Var GradTape::conv2d(Var x, Var weight, Var bias, std::size_t pad) {
    const Node& nx = node(x, "conv2d");
    const Node& nw = node(weight, "conv2d");
    const Node& nb = node(bias, "conv2d");
    Node n;
    n.op = Op::Conv2d;
    n.in[0] = x.id;
    n.in[1] = weight.id;
    n.in[2] = bias.id;
    n.pad = pad;
    n.value = ops::conv2d(nx.value, nw.value, nb.value, pad);
    n.requires_grad = nx.requires_grad || nw.requires_grad || nb.requires_grad;
    return push(std::move(n), "conv2d");
}

Var GradTape::max_pool(Var x, std::size_t window, std::size_t stride) {
    const Node& nx = node(x, "max_pool");
    auto r = ops::max_pool(nx.value, window, stride);
    Node n;
    n.op = Op::MaxPool;
    n.in[0] = x.id;
    n.window = window;
    n.stride = stride;
    n.value = std::move(r.out);
    n.argmax = std::move(r.argmax);
    n.requires_grad = nx.requires_grad;
    return push(std::move(n), "max_pool");
}

Var GradTape::relu(Var x) {
    const Node& nx = node(x, "relu");
    Node n;
    n.op = Op::Relu;
    n.in[0] = x.id;
    n.value = ops::relu(nx.value);
    n.requires_grad = nx.requires_grad;
    return push(std::move(n), "relu");
}

Var GradTape::flatten(Var x) {
    const Node& nx = node(x, "flatten");
    if (nx.value.rank() < 2) throw ShapeError("flatten", "rank >= 2", shape_str(nx.value.shape()));
    const std::size_t batch = nx.value.dim(0);
    Node n;
    n.op = Op::Flatten;
    n.in[0] = x.id;
    n.value = nx.value.reshaped({batch, nx.value.size() / batch});
    n.requires_grad = nx.requires_grad;
    return push(std::move(n), "flatten");
}

Var GradTape::linear(Var x, Var weight, Var bias) {
    const Node& nx = node(x, "linear");
    const Node& nw = node(weight, "linear");
    const Node& nb = node(bias, "linear");
    Node n;
    n.op = Op::Linear;
    n.in[0] = x.id;
    n.in[1] = weight.id;
    n.in[2] = bias.id;
    n.value = ops::linear(nx.value, nw.value, nb.value);
    n.requires_grad = nx.requires_grad || nw.requires_grad || nb.requires_grad;
    return push(std::move(n), "linear");
}

Var GradTape::log_softmax(Var x) {
    const Node& nx = node(x, "log_softmax");
    Node n;
    n.op = Op::LogSoftmax;
    n.in[0] = x.id;
    n.value = ops::log_softmax(nx.value);
    n.requires_grad = nx.requires_grad;
    return push(std::move(n), "log_softmax");
}

Var GradTape::nll_loss(Var log_probs, std::vector<int> labels) {
    const Node& nx = node(log_probs, "nll_loss");
    Node n;
    n.op = Op::NllLoss;
    n.in[0] = log_probs.id;
    n.value = Tensor(Shape{1}, static_cast<float>(ops::nll_loss(nx.value, labels)));
    n.labels = std::move(labels);
    n.requires_grad = nx.requires_grad;
    return push(std::move(n), "nll_loss");
}

const Tensor& GradTape::value(Var v) const { return node(v, "value").value; }

bool GradTape::has_grad(Var v) const { return backward_done_ && !node(v, "grad").grad.empty(); }

const Tensor& GradTape::grad(Var v) const {
    const Node& n = node(v, "grad");
    if (!backward_done_) throw std::logic_error("grad: backward has not been run on this tape");
    if (n.grad.empty()) throw std::logic_error("grad: variable does not require a gradient");
    return n.grad;
}

void GradTape::accumulate(std::size_t id, Tensor g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.empty()) {
        n.grad = std::move(g);
        return;
    }
    for (std::size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
}

void GradTape::backward(Var scalar_output) {
    const Node& n = node(scalar_output, "backward");
    if (n.value.size() != 1) throw ShapeError("backward", "single-element output for implicit seed", shape_str(n.value.shape()));
    backward(scalar_output, Tensor(n.value.shape(), 1.0f));
}

void GradTape::backward(Var output, const Tensor& seed) {
    if (nodes_.empty()) throw std::logic_error("backward: tape is empty, run a forward pass first");
    const Node& out = node(output, "backward");
    if (seed.shape() != out.value.shape()) throw ShapeError("backward", shape_str(out.value.shape()), shape_str(seed.shape()));
    require_finite(seed, "backward seed");

    for (Node& n : nodes_) n.grad = Tensor();
    visit_order_.clear();
    nodes_[output.id].grad = nodes_[output.id].requires_grad ? seed : Tensor();
    const bool guided = mode_ == BackwardMode::Guided;

    for (std::size_t id = output.id + 1; id-- > 0;) {
        visit_order_.push_back(id);
        Node& n = nodes_[id];
        if (n.op == Op::Leaf || n.grad.empty()) continue;
        const Tensor g = n.grad;
        switch (n.op) {
            case Op::Conv2d: {
                const Node& x = nodes_[n.in[0]];
                const Node& w = nodes_[n.in[1]];
                const bool need_params = w.requires_grad || nodes_[n.in[2]].requires_grad;
                auto grads = ops::conv2d_backward(x.value, w.value, n.pad, g, x.requires_grad, need_params);
                if (x.requires_grad) accumulate(n.in[0], std::move(grads.dx));
                if (need_params) {
                    accumulate(n.in[1], std::move(grads.dweight));
                    accumulate(n.in[2], std::move(grads.dbias));
                }
                break;
            }
            case Op::MaxPool:
                accumulate(n.in[0], ops::max_pool_backward(nodes_[n.in[0]].value.shape(), n.argmax, g));
                break;
            case Op::Relu:
                accumulate(n.in[0], ops::relu_backward(nodes_[n.in[0]].value, g, guided));
                break;
            case Op::Flatten:
                accumulate(n.in[0], g.reshaped(nodes_[n.in[0]].value.shape()));
                break;
            case Op::Linear: {
                const Node& x = nodes_[n.in[0]];
                const Node& w = nodes_[n.in[1]];
                const bool need_params = w.requires_grad || nodes_[n.in[2]].requires_grad;
                auto grads = ops::linear_backward(x.value, w.value, g, x.requires_grad, need_params);
                if (x.requires_grad) accumulate(n.in[0], std::move(grads.dx));
                if (need_params) {
                    accumulate(n.in[1], std::move(grads.dweight));
                    accumulate(n.in[2], std::move(grads.dbias));
                }
                break;
            }
            case Op::LogSoftmax:
                accumulate(n.in[0], ops::log_softmax_backward(n.value, g));
                break;
            case Op::NllLoss:
                accumulate(n.in[0], ops::nll_loss_backward(nodes_[n.in[0]].value.shape(), n.labels, g[0]));
                break;
            case Op::Leaf:
                break;
        }
    }
    backward_done_ = true;
}

}  // namespace sarbnn
