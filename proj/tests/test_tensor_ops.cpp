#include <cmath>
#include <limits>

#include "doctest.h"
#include "sarbnn/error.hpp"
#include "sarbnn/ops.hpp"
#include "sarbnn/tape.hpp"

using namespace sarbnn;

TEST_CASE("tensor construction checks element count") {
    CHECK_THROWS_AS(Tensor(Shape{2, 2}, std::vector<float>{1, 2, 3}), ShapeError);
    Tensor t(Shape{2, 3}, 1.5f);
    CHECK(t.size() == 6);
    CHECK(t.reshaped({3, 2}).shape() == Shape{3, 2});
    CHECK_THROWS_AS(t.reshaped({4, 2}), ShapeError);
}

TEST_CASE("shape errors name the op and both shapes") {
    const Tensor x(Shape{1, 2, 4, 4});
    const Tensor w(Shape{1, 3, 2, 2});
    const Tensor b(Shape{1});
    try {
        ops::conv2d(x, w, b);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        CHECK(e.op() == "conv2d");
        CHECK(!e.expected().empty());
        CHECK(!e.got().empty());
    }
}

TEST_CASE("relu definition") {
    CHECK(ops::relu(Tensor::from({3}, {-1.0f, 0.0f, 2.5f})) == Tensor::from({3}, {0.0f, 0.0f, 2.5f}));
}

TEST_CASE("conv2d of ones sums each window") {
    const Tensor x(Shape{1, 3, 3}, 1.0f);
    const Tensor w(Shape{1, 1, 2, 2}, 1.0f);
    const Tensor y = ops::conv2d(x, w, Tensor(Shape{1}));
    CHECK(y == Tensor(Shape{1, 2, 2}, 4.0f));
}

TEST_CASE("conv2d zero padding keeps the border contribution at zero") {
    const Tensor x(Shape{1, 1, 2, 2}, 1.0f);
    const Tensor w(Shape{1, 1, 3, 3}, 1.0f);
    const Tensor y = ops::conv2d(x, w, Tensor(Shape{1}), 1);
    CHECK(y == Tensor(Shape{1, 1, 2, 2}, 4.0f));
}

TEST_CASE("max_pool picks the window max and truncates ragged edges") {
    const Tensor x = Tensor::from({1, 1, 2, 2}, {1, 2, 3, 4});
    CHECK(ops::max_pool(x, 2, 2).out == Tensor::from({1, 1, 1, 1}, {4}));

    const Tensor odd(Shape{1, 1, 5, 5}, 1.0f);
    CHECK(ops::max_pool(odd, 2, 2).out.shape() == Shape{1, 1, 2, 2});
    CHECK_THROWS_AS(ops::max_pool(Tensor(Shape{1, 1, 1, 1}), 2, 2), ShapeError);
}

TEST_CASE("max_pool ties route the gradient to the first element") {
    const Tensor x(Shape{1, 1, 2, 2}, 3.0f);
    const auto r = ops::max_pool(x, 2, 2);
    const Tensor g = ops::max_pool_backward(x.shape(), r.argmax, Tensor::from({1, 1, 1, 1}, {1.0f}));
    CHECK(g == Tensor::from({1, 1, 2, 2}, {1, 0, 0, 0}));
}

TEST_CASE("log_softmax rows exponentiate to one, even for large logits") {
    const Tensor z = Tensor::from({2, 3}, {1000.0f, 1001.0f, 999.0f, -5.0f, 0.0f, 5.0f});
    const Tensor lp = ops::log_softmax(z);
    for (std::size_t r = 0; r < 2; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < 3; ++c) s += std::exp(static_cast<double>(lp[r * 3 + c]));
        CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("nll of a one-element batch is -ln p") {
    const Tensor lp = ops::log_softmax(Tensor::from({1, 2}, {0.0f, std::log(3.0f)}));
    const int label = 1;
    CHECK(ops::nll_loss(lp, std::span(&label, 1)) == doctest::Approx(-std::log(0.75)).epsilon(1e-6));
    const int bad = 2;
    CHECK_THROWS(ops::nll_loss(lp, std::span(&bad, 1)));
}

TEST_CASE("non-finite values are rejected") {
    Tensor t(Shape{2});
    t[1] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(require_finite(t, "test"), NumericError);
    GradTape tape;
    CHECK_THROWS_AS(tape.leaf(t), NumericError);
    GradTape tape2;
    Var big = tape2.leaf(Tensor::from({1, 2}, {3e38f, 3e38f}));
    Var w = tape2.leaf(Tensor::from({2, 1}, {10.0f, 10.0f}));
    CHECK_THROWS_AS(tape2.linear(big, w, tape2.leaf(Tensor::from({1}, {0.0f}))), NumericError);
}

TEST_CASE("guided relu examples") {
    CHECK(ops::relu_backward(Tensor::from({2}, {-1.0f, 2.0f}), Tensor::from({2}, {3.0f, -4.0f}), true) ==
          Tensor::from({2}, {0.0f, 0.0f}));
    CHECK(ops::relu_backward(Tensor::from({2}, {1.0f, 2.0f}), Tensor::from({2}, {3.0f, 4.0f}), true) ==
          Tensor::from({2}, {3.0f, 4.0f}));
}

TEST_CASE("standard mode: relu(x) * 2 at 1.5 has gradient 2") {
    GradTape tape;
    Var x = tape.leaf(Tensor::from({1, 1}, {1.5f}), true);
    Var y = tape.linear(tape.relu(x), tape.leaf(Tensor::from({1, 1}, {2.0f})), tape.leaf(Tensor::from({1}, {0.0f})));
    tape.backward(y);
    const double h = 1e-3;
    const double fd = (2 * (1.5 + h) - 2 * (1.5 - h)) / (2 * h);
    CHECK(tape.grad(x)[0] == doctest::Approx(fd).epsilon(1e-4));
    CHECK(tape.grad(x)[0] == doctest::Approx(2.0));
}

TEST_CASE("backward visits nodes in exact reverse order") {
    GradTape tape;
    Var x = tape.leaf(Tensor(Shape{1, 1, 4, 4}, 0.5f), true);
    Var w = tape.leaf(Tensor(Shape{1, 1, 2, 2}, 0.25f), true);
    Var b = tape.leaf(Tensor(Shape{1}, 0.1f), true);
    Var y = tape.max_pool(tape.relu(tape.conv2d(x, w, b)), 2, 1);
    tape.backward(y, Tensor(tape.value(y).shape(), 1.0f));
    const auto& order = tape.last_backward_order();
    REQUIRE(!order.empty());
    CHECK(std::is_sorted(order.rbegin(), order.rend()));
    CHECK(order.front() == y.id);
}

TEST_CASE("a weight used by two layers accumulates both gradients") {
    // y = (x * w) * w, dy/dw = 2 x w
    GradTape tape;
    Var x = tape.leaf(Tensor::from({1, 1}, {3.0f}));
    Var w = tape.leaf(Tensor::from({1, 1}, {2.0f}), true);
    Var b = tape.leaf(Tensor::from({1}, {0.0f}));
    Var y = tape.linear(tape.linear(x, w, b), w, b);
    tape.backward(y);
    CHECK(tape.value(y)[0] == doctest::Approx(12.0));
    CHECK(tape.grad(w)[0] == doctest::Approx(12.0));
}

TEST_CASE("backward misuse is reported") {
    GradTape empty;
    CHECK_THROWS(empty.backward(Var{0}));
    GradTape tape;
    Var x = tape.leaf(Tensor(Shape{1, 2}, 1.0f), true);
    Var y = tape.relu(x);
    CHECK_THROWS_AS(tape.backward(y, Tensor(Shape{1, 3})), ShapeError);
}
