#include <gtest/gtest.h>

#include "dragan/nn/layers.hpp"
#include "dragan/nn/optim.hpp"
#include "support.hpp"

using namespace dragan;
using namespace dragan::nn;
using testing_support::check_gradients;
using testing_support::random_tensor;

TEST(Dense, MatchesNaiveProduct) {
    Rng rng(1);
    auto x = random_tensor({4, 3}, rng);
    auto w = random_tensor({3, 5}, rng);
    auto b = random_tensor({5}, rng);
    auto y = dense(x, w, b);
    ASSERT_EQ(y.shape(), (Shape{4, 5}));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            double acc = b[j];
            for (std::size_t k = 0; k < 3; ++k) acc += x[i * 3 + k] * w[k * 5 + j];
            EXPECT_NEAR(y[i * 5 + j], acc, 1e-14);
        }
}

TEST(Dense, RejectsMismatchedExtents) {
    Tensor x({2, 3}), w({4, 2}), b({2});
    EXPECT_THROW(dense(x, w, b), DimensionError);
}

TEST(Conv1d, MatchesSlidingWindowWithZeroPadding) {
    Rng rng(2);
    const std::size_t cin = 3, cout = 2, len = 7, k = 3;
    auto x = random_tensor({cin, len}, rng);
    auto w = random_tensor({cout, cin, k}, rng);
    auto b = random_tensor({cout}, rng);
    auto y = conv1d(x, w, b);
    ASSERT_EQ(y.shape(), (Shape{cout, len}));
    for (std::size_t o = 0; o < cout; ++o)
        for (std::size_t t = 0; t < len; ++t) {
            double acc = b[o];
            for (std::size_t c = 0; c < cin; ++c)
                for (std::size_t j = 0; j < k; ++j) {
                    const long pos = static_cast<long>(t + j) - 1;
                    if (pos < 0 || pos >= static_cast<long>(len)) continue;
                    acc += w[(o * cin + c) * k + j] * x[c * len + static_cast<std::size_t>(pos)];
                }
            EXPECT_NEAR(y[o * len + t], acc, 1e-14);
        }
}

TEST(Conv1d, EvenKernelIsAConfigError) {
    Tensor x({1, 5}), w({1, 1, 2}), b({1});
    EXPECT_THROW(conv1d(x, w, b), ConfigError);
    Rng rng(0);
    EXPECT_THROW(Conv1d(1, 1, 4, rng), ConfigError);
}

TEST(Conv1d, KernelOneIsPointwiseMix) {
    Tensor x({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor w({1, 2, 1}, {10, 100});
    Tensor b({1}, {0.5});
    auto y = conv1d(x, w, b);
    EXPECT_DOUBLE_EQ(y[0], 410.5);
    EXPECT_DOUBLE_EQ(y[2], 630.5);
}

TEST(Activations, Values) {
    Tensor x({4}, {-2.0, -0.5, 0.0, 3.0});
    auto r = relu(x);
    auto l = leaky_relu(x);
    auto s = sigmoid(x);
    EXPECT_EQ(r[0], 0.0);
    EXPECT_EQ(r[3], 3.0);
    EXPECT_DOUBLE_EQ(l[0], -0.02);
    EXPECT_DOUBLE_EQ(l[1], -0.005);
    EXPECT_DOUBLE_EQ(s[2], 0.5);
    EXPECT_NEAR(s[3], 1.0 / (1.0 + std::exp(-3.0)), 1e-15);
}

TEST(Activations, SigmoidStaysFiniteForLargeInputs) {
    Tensor x({2}, {-800.0, 800.0});
    auto s = sigmoid(x);
    EXPECT_EQ(s[0], 0.0);
    EXPECT_EQ(s[1], 1.0);
}

TEST(BatchNorm, TrainModeStandardizesColumnsAndTracksStats) {
    Tensor x({4, 2}, {1, 10, 2, 20, 3, 30, 4, 40});
    Tensor gamma({2}, {1, 1}), beta({2}, {0, 0});
    BatchNormStats stats(2);
    auto y = batchnorm1d(x, gamma, beta, Mode::train, stats);
    for (std::size_t j = 0; j < 2; ++j) {
        double m = 0, v = 0;
        for (std::size_t i = 0; i < 4; ++i) m += y[i * 2 + j];
        m /= 4;
        for (std::size_t i = 0; i < 4; ++i) v += (y[i * 2 + j] - m) * (y[i * 2 + j] - m);
        EXPECT_NEAR(m, 0.0, 1e-12);
        EXPECT_NEAR(v / 4, 1.0, 1e-9);
    }
    // momentum 0.1 from (0, 1); biased batch variance 1.25 and 125
    EXPECT_NEAR(stats.running_mean[0], 0.25, 1e-12);
    EXPECT_NEAR(stats.running_mean[1], 2.5, 1e-12);
    EXPECT_NEAR(stats.running_var[0], 0.9 + 0.125, 1e-12);
    EXPECT_NEAR(stats.running_var[1], 0.9 + 12.5, 1e-12);
}

TEST(BatchNorm, EvalModeUsesRunningStats) {
    Tensor x({1, 1}, {3.0});
    Tensor gamma({1}, {2.0}), beta({1}, {0.5});
    BatchNormStats stats(1);
    stats.running_mean[0] = 1.0;
    stats.running_var[0] = 4.0;
    auto y = batchnorm1d(x, gamma, beta, Mode::eval, stats);
    EXPECT_DOUBLE_EQ(y[0], 2.0 * (3.0 - 1.0) / 2.0 + 0.5);
}

TEST(BatchNorm, ConstantColumnUsesVarianceFloor) {
    Tensor x({3, 1}, {5, 5, 5});
    Tensor gamma({1}, {1}), beta({1}, {0});
    BatchNormStats stats(1);
    auto y = batchnorm1d(x, gamma, beta, Mode::train, stats);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(y[i], 0.0);
}

TEST(BatchNorm, SingleRowTrainBatchIsDegenerate) {
    Tensor x({1, 3}), gamma({3}), beta({3});
    BatchNormStats stats(3);
    EXPECT_THROW(batchnorm1d(x, gamma, beta, Mode::train, stats), DegenerateBatchError);
    EXPECT_NO_THROW(batchnorm1d(x, gamma, beta, Mode::eval, stats));
}

TEST(Dropout, EvalIsIdentityAndTrainScalesSurvivors) {
    Rng rng(3);
    Tensor x({10000}, std::vector<double>(10000, 1.0));
    auto e = dropout(x, 0.5, Mode::eval, rng);
    EXPECT_EQ(e[123], 1.0);
    auto t = dropout(x, 0.5, Mode::train, rng);
    std::size_t kept = 0;
    for (double v : t.values()) {
        EXPECT_TRUE(v == 0.0 || v == 2.0);
        kept += v != 0.0;
    }
    EXPECT_NEAR(static_cast<double>(kept) / 10000.0, 0.5, 0.03);
    EXPECT_THROW(dropout(x, 1.0, Mode::train, rng), ConfigError);
}

TEST(Autodiff, BackwardNeedsScalarLoss) {
    Tensor x({2}, {1, 2}, true);
    EXPECT_THROW(backward(square(x)), ContractError);
}

TEST(Autodiff, SharedSubexpressionAccumulates) {
    Tensor x({1}, {3.0}, true);
    auto y = mul(x, x);      // x^2
    auto z = add(y, y);      // 2x^2
    backward(sum(z));
    EXPECT_DOUBLE_EQ(x.grad()[0], 12.0);
}

TEST(Autodiff, FrozenParametersReceiveNoGradient) {
    Rng rng(4);
    auto x = random_tensor({2, 3}, rng, false);
    auto w = random_tensor({3, 1}, rng);
    auto b = random_tensor({1}, rng);
    w.set_requires_grad(false);
    backward(sum(dense(x, w, b)));
    EXPECT_FALSE(w.has_grad());
    EXPECT_TRUE(b.has_grad());
    EXPECT_DOUBLE_EQ(b.grad()[0], 2.0);
}

TEST(Autodiff, UntrackedInputsBuildNoGraph) {
    Tensor a({2}, {1, 2}), b({2}, {3, 4});
    auto c = add(a, b);
    EXPECT_FALSE(c.has_graph_edge());
    EXPECT_FALSE(c.requires_grad());
}

TEST(GradCheck, DenseActivationsStack) {
    Rng rng(5);
    auto x = random_tensor({5, 4}, rng);
    auto w1 = random_tensor({4, 6}, rng);
    auto b1 = random_tensor({6}, rng);
    auto w2 = random_tensor({6, 3}, rng);
    auto b2 = random_tensor({3}, rng);
    auto loss = [&] {
        auto h = leaky_relu(dense(x, w1, b1));
        auto o = sigmoid(relu(dense(h, w2, b2)));
        return sum(square(o));
    };
    auto r = check_gradients(loss, {x, w1, b1, w2, b2}, 50, rng);
    EXPECT_EQ(r.failed, 0u) << r.first_failure;
}

TEST(GradCheck, Conv1d) {
    Rng rng(6);
    auto x = random_tensor({3, 9}, rng);
    auto w = random_tensor({4, 3, 5}, rng);
    auto b = random_tensor({4}, rng);
    auto loss = [&] { return sum(square(sigmoid(conv1d(x, w, b)))); };
    auto r = check_gradients(loss, {x, w, b}, 50, rng);
    EXPECT_EQ(r.failed, 0u) << r.first_failure;
}

TEST(GradCheck, BatchNormTrainAndEval) {
    Rng rng(7);
    auto x = random_tensor({6, 4}, rng);
    auto gamma = random_tensor({4}, rng, true, 0.5, 1.5);
    auto beta = random_tensor({4}, rng);
    auto weights = random_tensor({6, 4}, rng, false);
    for (auto mode : {Mode::train, Mode::eval}) {
        BatchNormStats stats(4);
        stats.running_var.assign(4, 2.0);
        auto loss = [&] {
            BatchNormStats local = stats;
            return sum(mul(sigmoid(batchnorm1d(x, gamma, beta, mode, local)), weights));
        };
        auto r = check_gradients(loss, {x, gamma, beta}, 50, rng);
        EXPECT_EQ(r.failed, 0u) << r.first_failure;
    }
}

TEST(GradCheck, TransposeReshapeDropoutMse) {
    Rng rng(8);
    auto x = random_tensor({3, 4}, rng);
    const std::vector<double> target(12, 0.25);
    auto loss = [&] {
        Rng mask(99);
        auto t = transpose(x).reshaped({2, 6});
        return mse(sigmoid(dropout(t, 0.3, Mode::train, mask)).reshaped({12}), target);
    };
    auto r = check_gradients(loss, {x}, 50, rng);
    EXPECT_EQ(r.failed, 0u) << r.first_failure;
}

TEST(Optimizer, SgdStep) {
    std::vector<double> p{1.0, -1.0};
    const std::vector<double> g{0.5, -2.0};
    OptimizerState s(OptimizerKind::sgd, 0.1, {2});
    const std::span<double> ps[] = {p};
    const std::span<const double> gs[] = {g};
    optimizer_step(ps, gs, s);
    EXPECT_DOUBLE_EQ(p[0], 0.95);
    EXPECT_DOUBLE_EQ(p[1], -0.8);
    EXPECT_EQ(s.step_count, 1u);
}

TEST(Optimizer, AdamFirstStepIsLearningRateTimesSign) {
    std::vector<double> p{0.0, 0.0};
    const std::vector<double> g{3.0, -0.001};
    OptimizerState s(OptimizerKind::adam, 0.01, {2});
    const std::span<double> ps[] = {p};
    const std::span<const double> gs[] = {g};
    optimizer_step(ps, gs, s);
    EXPECT_NEAR(p[0], -0.01, 1e-9);
    EXPECT_NEAR(p[1], 0.01, 1e-6);
}

TEST(Optimizer, AdamTwoStepsMatchHandComputation) {
    std::vector<double> p{1.0};
    OptimizerState s(OptimizerKind::adam, 0.1, {1});
    const std::span<double> ps[] = {p};
    std::vector<double> g{2.0};
    {
        const std::span<const double> gs[] = {g};
        optimizer_step(ps, gs, s);
    }
    g[0] = -1.0;
    {
        const std::span<const double> gs[] = {g};
        optimizer_step(ps, gs, s);
    }
    // m2 = 0.9*0.2 + 0.1*(-1) = 0.08; v2 = 0.999*0.004 + 0.001*1 = 0.004996
    const double mhat = 0.08 / (1 - 0.81), vhat = 0.004996 / (1 - 0.998001);
    const double first = 0.1 * (0.2 / 0.1) / (std::sqrt(0.004 / 0.001) + 1e-8);
    const double expected = 1.0 - first - 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
    EXPECT_NEAR(p[0], expected, 1e-12);
}

TEST(Optimizer, RmspropFirstStepIsTenTimesLearningRate) {
    std::vector<double> p{0.0};
    const std::vector<double> g{4.0};
    OptimizerState s(OptimizerKind::rmsprop, 0.001, {1});
    const std::span<double> ps[] = {p};
    const std::span<const double> gs[] = {g};
    optimizer_step(ps, gs, s);
    // v = 0.01 * 16, step = lr * 4 / 0.4
    EXPECT_NEAR(p[0], -0.01, 1e-9);
}

TEST(Optimizer, RejectsMismatchedParameterList) {
    OptimizerState s(OptimizerKind::adam, 0.1, {2, 3});
    std::vector<double> p(2);
    const std::vector<double> g(2);
    const std::span<double> ps[] = {p};
    const std::span<const double> gs[] = {g};
    EXPECT_THROW(optimizer_step(ps, gs, s), DimensionError);
    EXPECT_THROW(OptimizerState(OptimizerKind::sgd, 0.0, {1}), ConfigError);
}

TEST(Layers, InitIsUniformWithinFanInBound) {
    Rng rng(9);
    Dense d(100, 50, rng);
    const double bound = 0.1;
    double lo = 1, hi = -1;
    for (double v : d.weights().values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    EXPECT_GE(lo, -bound);
    EXPECT_LE(hi, bound);
    EXPECT_LT(lo, -0.09);
    EXPECT_GT(hi, 0.09);
    for (double v : d.bias().values()) EXPECT_EQ(v, 0.0);
}

TEST(Layers, SequentialCollectsParametersInOrder) {
    Rng rng(10);
    Sequential net({LayerSpec::make_dense(4, 8), LayerSpec::make_activation(ActivationKind::relu),
                    LayerSpec::make_batchnorm(8), LayerSpec::make_dropout(0.5), LayerSpec::make_dense(8, 1)},
                   rng);
    auto ps = net.parameters();
    ASSERT_EQ(ps.size(), 6u);
    EXPECT_EQ(ps[0].shape(), (Shape{4, 8}));
    EXPECT_EQ(ps[2].shape(), (Shape{8}));
    EXPECT_EQ(ps[4].shape(), (Shape{8, 1}));
    Tensor x({3, 4});
    EXPECT_EQ(net.forward(x, Mode::train, rng).shape(), (Shape{3, 1}));
}

TEST(Layers, ParseNamesRoundTrip) {
    for (auto a : {ActivationKind::relu, ActivationKind::leaky_relu, ActivationKind::sigmoid})
        EXPECT_EQ(parse_activation(to_string(a)), a);
    for (auto o : {OptimizerKind::sgd, OptimizerKind::adam, OptimizerKind::rmsprop})
        EXPECT_EQ(parse_optimizer(to_string(o)), o);
    EXPECT_THROW(parse_activation("tanh"), ConfigError);
}
