#include "sarbnn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sarbnn/error.hpp"

namespace sarbnn::ops {
namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMat>;
using ConstRowMap = Eigen::Map<const RowMat>;

struct ImageDims {
    std::size_t n, c, h, w;
};

ImageDims image_dims(const Tensor& x, const char* op) {
    if (x.rank() == 4) return {x.dim(0), x.dim(1), x.dim(2), x.dim(3)};
    if (x.rank() == 3) return {1, x.dim(0), x.dim(1), x.dim(2)};
    throw ShapeError(op, "rank 3 [C, H, W] or rank 4 [N, C, H, W]", shape_str(x.shape()));
}

struct ConvGeometry {
    ImageDims in;
    std::size_t out_ch, k, pad, oh, ow;
};

ConvGeometry conv_geometry(const Tensor& x, const Tensor& weight, std::size_t pad) {
    ImageDims in = image_dims(x, "conv2d");
    if (weight.rank() != 4 || weight.dim(1) != in.c || weight.dim(2) != weight.dim(3)) {
        throw ShapeError("conv2d", "kernel [O, " + std::to_string(in.c) + ", k, k]", shape_str(weight.shape()));
    }
    const std::size_t k = weight.dim(2);
    if (in.h + 2 * pad < k || in.w + 2 * pad < k) {
        throw ShapeError("conv2d", "padded input extent >= kernel " + std::to_string(k),
                         shape_str(x.shape()) + " with pad " + std::to_string(pad));
    }
    return {in, weight.dim(0), k, pad, in.h + 2 * pad - k + 1, in.w + 2 * pad - k + 1};
}

// col[(c*k + ki)*k + kj, (n*oh + i)*ow + j] = x[n, c, i + ki - pad, j + kj - pad]
void im2col(const float* x, const ConvGeometry& g, float* col) {
    const std::size_t cols = g.in.n * g.oh * g.ow;
    const long pad = static_cast<long>(g.pad);
    for (std::size_t c = 0; c < g.in.c; ++c) {
        for (std::size_t ki = 0; ki < g.k; ++ki) {
            for (std::size_t kj = 0; kj < g.k; ++kj) {
                float* row = col + ((c * g.k + ki) * g.k + kj) * cols;
                for (std::size_t n = 0; n < g.in.n; ++n) {
                    const float* plane = x + (n * g.in.c + c) * g.in.h * g.in.w;
                    for (std::size_t i = 0; i < g.oh; ++i) {
                        const long si = static_cast<long>(i + ki) - pad;
                        float* dst = row + (n * g.oh + i) * g.ow;
                        if (si < 0 || si >= static_cast<long>(g.in.h)) {
                            std::fill(dst, dst + g.ow, 0.0f);
                            continue;
                        }
                        const float* src = plane + si * g.in.w;
                        for (std::size_t j = 0; j < g.ow; ++j) {
                            const long sj = static_cast<long>(j + kj) - pad;
                            dst[j] = (sj < 0 || sj >= static_cast<long>(g.in.w)) ? 0.0f : src[sj];
                        }
                    }
                }
            }
        }
    }
}

void col2im(const float* col, const ConvGeometry& g, float* dx) {
    const std::size_t cols = g.in.n * g.oh * g.ow;
    const long pad = static_cast<long>(g.pad);
    for (std::size_t c = 0; c < g.in.c; ++c) {
        for (std::size_t ki = 0; ki < g.k; ++ki) {
            for (std::size_t kj = 0; kj < g.k; ++kj) {
                const float* row = col + ((c * g.k + ki) * g.k + kj) * cols;
                for (std::size_t n = 0; n < g.in.n; ++n) {
                    float* plane = dx + (n * g.in.c + c) * g.in.h * g.in.w;
                    for (std::size_t i = 0; i < g.oh; ++i) {
                        const long si = static_cast<long>(i + ki) - pad;
                        if (si < 0 || si >= static_cast<long>(g.in.h)) continue;
                        const float* src = row + (n * g.oh + i) * g.ow;
                        float* dst = plane + si * g.in.w;
                        for (std::size_t j = 0; j < g.ow; ++j) {
                            const long sj = static_cast<long>(j + kj) - pad;
                            if (sj >= 0 && sj < static_cast<long>(g.in.w)) dst[sj] += src[j];
                        }
                    }
                }
            }
        }
    }
}

void check_bias(const Tensor& bias, std::size_t n, const char* op) {
    if (bias.rank() != 1 || bias.dim(0) != n) {
        throw ShapeError(op, "bias [" + std::to_string(n) + "]", shape_str(bias.shape()));
    }
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) throw ShapeError(op, shape_str(a.shape()), shape_str(b.shape()));
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t pad) {
    const ConvGeometry g = conv_geometry(x, weight, pad);
    check_bias(bias, g.out_ch, "conv2d");
    const std::size_t patch = g.in.c * g.k * g.k;
    const std::size_t spatial = g.oh * g.ow;
    const std::size_t cols = g.in.n * spatial;

    std::vector<float> col(patch * cols);
    im2col(x.data().data(), g, col.data());
    RowMat prod = ConstRowMap(weight.data().data(), g.out_ch, patch) * ConstRowMap(col.data(), patch, cols);

    Shape out_shape = x.rank() == 4 ? Shape{g.in.n, g.out_ch, g.oh, g.ow} : Shape{g.out_ch, g.oh, g.ow};
    Tensor out(out_shape);
    float* o = out.data().data();
    for (std::size_t n = 0; n < g.in.n; ++n) {
        for (std::size_t oc = 0; oc < g.out_ch; ++oc) {
            const float* src = prod.data() + oc * cols + n * spatial;
            float* dst = o + (n * g.out_ch + oc) * spatial;
            const float b = bias[oc];
            for (std::size_t p = 0; p < spatial; ++p) dst[p] = src[p] + b;
        }
    }
    return out;
}

Conv2dGrads conv2d_backward(const Tensor& x, const Tensor& weight, std::size_t pad, const Tensor& grad_out,
                            bool need_dx, bool need_dparams) {
    const ConvGeometry g = conv_geometry(x, weight, pad);
    const std::size_t patch = g.in.c * g.k * g.k;
    const std::size_t spatial = g.oh * g.ow;
    const std::size_t cols = g.in.n * spatial;
    if (grad_out.size() != g.in.n * g.out_ch * spatial) {
        throw ShapeError("conv2d_backward", shape_str({g.in.n, g.out_ch, g.oh, g.ow}), shape_str(grad_out.shape()));
    }

    // [N, O, HW] -> [O, N*HW]
    RowMat gmat(g.out_ch, cols);
    const float* go = grad_out.data().data();
    for (std::size_t n = 0; n < g.in.n; ++n) {
        for (std::size_t oc = 0; oc < g.out_ch; ++oc) {
            std::copy_n(go + (n * g.out_ch + oc) * spatial, spatial, gmat.data() + oc * cols + n * spatial);
        }
    }

    Conv2dGrads grads;
    if (need_dparams) {
        std::vector<float> col(patch * cols);
        im2col(x.data().data(), g, col.data());
        grads.dweight = Tensor(weight.shape());
        RowMap(grads.dweight.data().data(), g.out_ch, patch).noalias() =
            gmat * ConstRowMap(col.data(), patch, cols).transpose();
        grads.dbias = Tensor(Shape{g.out_ch});
        Eigen::Map<Eigen::VectorXf>(grads.dbias.data().data(), g.out_ch) = gmat.rowwise().sum();
    }
    if (need_dx) {
        RowMat dcol = ConstRowMap(weight.data().data(), g.out_ch, patch).transpose() * gmat;
        grads.dx = Tensor(x.shape());
        col2im(dcol.data(), g, grads.dx.data().data());
    }
    return grads;
}

MaxPoolResult max_pool(const Tensor& x, std::size_t window, std::size_t stride) {
    const ImageDims in = image_dims(x, "max_pool");
    if (window == 0 || stride == 0) throw ShapeError("max_pool", "window >= 1 and stride >= 1", "0");
    if (in.h < window || in.w < window) {
        throw ShapeError("max_pool",
                         "spatial extent >= window " + std::to_string(window) +
                             " (trailing rows/cols that do not fill a window are truncated)",
                         shape_str(x.shape()));
    }
    const std::size_t oh = (in.h - window) / stride + 1;
    const std::size_t ow = (in.w - window) / stride + 1;
    Shape out_shape = x.rank() == 4 ? Shape{in.n, in.c, oh, ow} : Shape{in.c, oh, ow};
    MaxPoolResult r{Tensor(out_shape), std::vector<std::uint32_t>(in.n * in.c * oh * ow)};
    const float* src = x.data().data();
    float* dst = r.out.data().data();
    std::size_t o = 0;
    for (std::size_t plane = 0; plane < in.n * in.c; ++plane) {
        const std::size_t base = plane * in.h * in.w;
        for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j, ++o) {
                std::size_t best = base + i * stride * in.w + j * stride;
                for (std::size_t a = 0; a < window; ++a) {
                    for (std::size_t b = 0; b < window; ++b) {
                        const std::size_t idx = base + (i * stride + a) * in.w + j * stride + b;
                        if (src[idx] > src[best]) best = idx;
                    }
                }
                dst[o] = src[best];
                r.argmax[o] = static_cast<std::uint32_t>(best);
            }
        }
    }
    return r;
}

Tensor max_pool_backward(const Shape& input_shape, std::span<const std::uint32_t> argmax, const Tensor& grad_out) {
    if (grad_out.size() != argmax.size()) {
        throw ShapeError("max_pool_backward", std::to_string(argmax.size()) + " elements", shape_str(grad_out.shape()));
    }
    Tensor dx(input_shape);
    for (std::size_t o = 0; o < argmax.size(); ++o) dx[argmax[o]] += grad_out[o];
    return dx;
}

Tensor relu(const Tensor& x) {
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0f ? x[i] : 0.0f;
    return out;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out, bool guided) {
    check_same_shape(x, grad_out, "relu_backward");
    Tensor dx(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool pass = x[i] > 0.0f && (!guided || grad_out[i] > 0.0f);
        dx[i] = pass ? grad_out[i] : 0.0f;
    }
    return dx;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    if (x.rank() != 2) throw ShapeError("linear", "input [N, F]", shape_str(x.shape()));
    if (weight.rank() != 2 || weight.dim(0) != x.dim(1)) {
        throw ShapeError("linear", "weight [" + std::to_string(x.dim(1)) + ", n]", shape_str(weight.shape()));
    }
    const std::size_t n = x.dim(0), f = x.dim(1), units = weight.dim(1);
    check_bias(bias, units, "linear");
    Tensor out(Shape{n, units});
    RowMap o(out.data().data(), n, units);
    o.noalias() = ConstRowMap(x.data().data(), n, f) * ConstRowMap(weight.data().data(), f, units);
    o.rowwise() += Eigen::Map<const Eigen::RowVectorXf>(bias.data().data(), units);
    return out;
}

LinearGrads linear_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_out, bool need_dx,
                            bool need_dparams) {
    const std::size_t n = x.dim(0), f = x.dim(1), units = weight.dim(1);
    if (grad_out.shape() != Shape{n, units}) {
        throw ShapeError("linear_backward", shape_str({n, units}), shape_str(grad_out.shape()));
    }
    ConstRowMap g(grad_out.data().data(), n, units);
    LinearGrads grads;
    if (need_dparams) {
        grads.dweight = Tensor(weight.shape());
        RowMap(grads.dweight.data().data(), f, units).noalias() = ConstRowMap(x.data().data(), n, f).transpose() * g;
        grads.dbias = Tensor(Shape{units});
        Eigen::Map<Eigen::RowVectorXf>(grads.dbias.data().data(), units) = g.colwise().sum();
    }
    if (need_dx) {
        grads.dx = Tensor(x.shape());
        RowMap(grads.dx.data().data(), n, f).noalias() = g * ConstRowMap(weight.data().data(), f, units).transpose();
    }
    return grads;
}

Tensor log_softmax(const Tensor& logits) {
    if (logits.rank() != 2) throw ShapeError("log_softmax", "[N, classes]", shape_str(logits.shape()));
    const std::size_t n = logits.dim(0), c = logits.dim(1);
    Tensor out(logits.shape());
    for (std::size_t i = 0; i < n; ++i) {
        const float* row = logits.data().data() + i * c;
        const float m = *std::max_element(row, row + c);
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) sum += std::exp(static_cast<double>(row[j]) - m);
        const double lse = m + std::log(sum);
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] = static_cast<float>(row[j] - lse);
    }
    return out;
}

Tensor log_softmax_backward(const Tensor& log_probs, const Tensor& grad_out) {
    check_same_shape(log_probs, grad_out, "log_softmax_backward");
    const std::size_t n = log_probs.dim(0), c = log_probs.dim(1);
    Tensor dx(log_probs.shape());
    for (std::size_t i = 0; i < n; ++i) {
        double gsum = 0.0;
        for (std::size_t j = 0; j < c; ++j) gsum += grad_out[i * c + j];
        for (std::size_t j = 0; j < c; ++j) {
            const double p = std::exp(static_cast<double>(log_probs[i * c + j]));
            dx[i * c + j] = static_cast<float>(grad_out[i * c + j] - p * gsum);
        }
    }
    return dx;
}

double nll_loss(const Tensor& log_probs, std::span<const int> labels) {
    if (log_probs.rank() != 2 || log_probs.dim(0) != labels.size()) {
        throw ShapeError("nll_loss", "[" + std::to_string(labels.size()) + ", classes]", shape_str(log_probs.shape()));
    }
    const std::size_t c = log_probs.dim(1);
    double sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c) {
            throw ShapeError("nll_loss", "label in [0, " + std::to_string(c) + ")", std::to_string(labels[i]));
        }
        sum -= log_probs[i * c + static_cast<std::size_t>(labels[i])];
    }
    return sum / static_cast<double>(labels.size());
}

Tensor nll_loss_backward(const Shape& log_probs_shape, std::span<const int> labels, float grad_out) {
    Tensor dx(log_probs_shape);
    const std::size_t c = log_probs_shape.at(1);
    const float scale = -grad_out / static_cast<float>(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) dx[i * c + static_cast<std::size_t>(labels[i])] = scale;
    return dx;
}

}  // namespace sarbnn::ops
