#include "sarbnn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "sarbnn/error.hpp"

namespace sarbnn {

ShapeError::ShapeError(std::string op, std::string expected, std::string got)
    : std::invalid_argument(op + ": shape mismatch, expected " + expected + ", got " + got),
      op_(std::move(op)),
      expected_(std::move(expected)),
      got_(std::move(got)) {}

std::string shape_str(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

std::size_t shape_numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_numel(shape_) != data_.size()) {
        throw ShapeError("tensor", std::to_string(shape_numel(shape_)) + " elements for " + shape_str(shape_),
                         std::to_string(data_.size()) + " elements");
    }
}

Tensor Tensor::from(std::initializer_list<std::size_t> shape, std::initializer_list<float> values) {
    return Tensor(Shape(shape), std::vector<float>(values));
}

Tensor Tensor::reshaped(Shape shape) const {
    if (shape_numel(shape) != data_.size()) {
        throw ShapeError("reshape", shape_str(shape), shape_str(shape_));
    }
    return Tensor(std::move(shape), data_);
}

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

bool all_finite(std::span<const float> values) {
    return std::all_of(values.begin(), values.end(), [](float v) { return std::isfinite(v); });
}

void require_finite(const Tensor& t, std::string_view where) {
    if (!all_finite(t.data())) {
        throw NumericError(std::string(where) + ": non-finite value in tensor of shape " + shape_str(t.shape()));
    }
}

}  // namespace sarbnn
