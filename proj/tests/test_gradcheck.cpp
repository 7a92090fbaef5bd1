#include "doctest.h"
#include "oracle/gradcheck.hpp"
#include "sarbnn/ops.hpp"

TEST_CASE("standard-mode gradients match central differences for every primitive") {
    const oracle::GradcheckReport rep = oracle::run_gradcheck(160, 0x5eed);
    for (const auto& note : rep.failure_notes) MESSAGE(note);
    CHECK(rep.failures == 0);
    CHECK(rep.max_rel_error <= 1e-3);
    CHECK(rep.cases_per_op.size() == oracle::kGradcheckKinds);
    for (const auto& [op, n] : rep.cases_per_op) CHECK_MESSAGE(n >= 10, op);
}

TEST_CASE("guided relu backward keeps only positive gradient at positive input") {
    using sarbnn::Tensor;
    const Tensor x = Tensor::from({4}, {1.0f, -1.0f, 2.0f, 3.0f});
    const Tensor g = Tensor::from({4}, {0.5f, 0.7f, -0.2f, 0.0f});
    CHECK(sarbnn::ops::relu_backward(x, g, true) == Tensor::from({4}, {0.5f, 0.0f, 0.0f, 0.0f}));
    CHECK(sarbnn::ops::relu_backward(x, g, false) == Tensor::from({4}, {0.5f, 0.0f, -0.2f, 0.0f}));
}

TEST_CASE("guided tape differs from standard only through relu") {
    using namespace sarbnn;
    Tensor x = Tensor::from({1, 3}, {1.0f, -2.0f, 0.5f});
    Tensor w = Tensor::from({3, 2}, {1.0f, -1.0f, 2.0f, 0.5f, -3.0f, 1.0f});
    Tensor b = Tensor::from({2}, {0.0f, 0.0f});
    for (BackwardMode mode : {BackwardMode::Standard, BackwardMode::Guided}) {
        GradTape tape(mode);
        Var vx = tape.leaf(x, true);
        Var y = tape.linear(vx, tape.leaf(w), tape.leaf(b));
        tape.backward(y, Tensor::from({1, 2}, {1.0f, -1.0f}));
        // no relu on the path: both modes give w * seed
        CHECK(tape.grad(vx) == Tensor::from({1, 3}, {2.0f, 1.5f, -4.0f}));
    }
}
