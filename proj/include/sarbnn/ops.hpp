#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sarbnn/tensor.hpp"

// Forward primitives and their backward kernels. Layouts:
//   images      [N, C, H, W] (rank-3 [C, H, W] accepted where noted)
//   conv kernel [O, C, k, k], bias [O]
//   fc weight   [F, n], bias [n]
//   logits      [N, classes]
namespace sarbnn::ops {

// Valid (optionally zero-padded) cross-correlation, stride 1.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t pad = 0);

struct Conv2dGrads {
    Tensor dx;  // empty unless requested
    Tensor dweight;
    Tensor dbias;
};
Conv2dGrads conv2d_backward(const Tensor& x, const Tensor& weight, std::size_t pad, const Tensor& grad_out,
                            bool need_dx, bool need_dparams);

struct MaxPoolResult {
    Tensor out;
    std::vector<std::uint32_t> argmax;  // flat input index per output element
};
// Output extent is floor((H - window) / stride) + 1; trailing rows/cols that
// do not fill a window are dropped. H < window is a shape error.
MaxPoolResult max_pool(const Tensor& x, std::size_t window, std::size_t stride);
Tensor max_pool_backward(const Shape& input_shape, std::span<const std::uint32_t> argmax, const Tensor& grad_out);

Tensor relu(const Tensor& x);
// guided: grad * 1[x > 0] * 1[grad > 0]; otherwise grad * 1[x > 0].
Tensor relu_backward(const Tensor& x, const Tensor& grad_out, bool guided);

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
struct LinearGrads {
    Tensor dx;
    Tensor dweight;
    Tensor dbias;
};
LinearGrads linear_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_out, bool need_dx,
                            bool need_dparams);

// Row-wise log-softmax via max subtraction.
Tensor log_softmax(const Tensor& logits);
Tensor log_softmax_backward(const Tensor& log_probs, const Tensor& grad_out);

// Mean over the batch of -log_probs[i, labels[i]], accumulated in double.
double nll_loss(const Tensor& log_probs, std::span<const int> labels);
Tensor nll_loss_backward(const Shape& log_probs_shape, std::span<const int> labels, float grad_out);

}  // namespace sarbnn::ops
