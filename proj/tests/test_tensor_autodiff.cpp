#include "lfcycle/adam.hpp"
#include "op_grad_suite.hpp"

#include <doctest.h>

using namespace lfcycle;
using test::DTensor;

TEST_SUITE_BEGIN("tensor-autodiff");

TEST_CASE("relu forward") {
    auto x = ad::Tensor<float>::from_data({3}, {-1.0f, 0.0f, 2.0f});
    auto y = ad::relu(x);
    CHECK(y.values() == std::vector<float>{0.0f, 0.0f, 2.0f});
}

TEST_CASE("conv2d identity kernel") {
    auto x = ad::Tensor<float>::from_data({1, 1, 3, 3},
                                          {1.f, 2.f, 3.f, 4.f, 5.f, 6.f, 7.f, 8.f, 9.f});
    auto k = ad::Tensor<float>::from_data({1, 1, 1, 1}, {1.f});
    auto y = ad::conv2d(x, k, ad::Tensor<float>{}, 1, 0);
    CHECK(y.shape() == std::vector<int>{1, 1, 3, 3});
    CHECK(y.values() == x.values());
}

TEST_CASE("avg_pool2 of a 2x2 block") {
    auto x = ad::Tensor<float>::from_data({1, 1, 2, 2}, {1.f, 3.f, 5.f, 7.f});
    auto y = ad::avg_pool2(x);
    CHECK(y.values() == std::vector<float>{4.f});
}

TEST_CASE("shape mismatch errors name the op") {
    auto a = ad::Tensor<float>::zeros({2, 2});
    auto b = ad::Tensor<float>::zeros({2, 3});
    CHECK_THROWS_WITH_AS(ad::add(a, b), doctest::Contains("add"), std::invalid_argument);
    auto x = ad::Tensor<float>::zeros({1, 2, 4, 4});
    auto k = ad::Tensor<float>::zeros({3, 5, 3, 3});
    CHECK_THROWS_WITH_AS(ad::conv2d(x, k, ad::Tensor<float>{}, 1, 1),
                         doctest::Contains("conv2d"), std::invalid_argument);
}

TEST_CASE("backward of sum of squares") {
    auto x = DTensor::from_data({2}, {1.0, 2.0});
    x.set_requires_grad(true);
    ad::backward(ad::sum(ad::square(x)));
    CHECK(x.grad()[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(x.grad()[1] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("backward of mean absolute difference") {
    auto x = DTensor::from_data({1}, {2.0});
    auto y = DTensor::from_data({1}, {1.0});
    x.set_requires_grad(true);
    ad::backward(ad::mean(ad::abs(ad::sub(x, y))));
    CHECK(x.grad()[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("backward rejects non-scalar loss") {
    auto x = DTensor::from_data({2}, {1.0, 2.0});
    x.set_requires_grad(true);
    CHECK_THROWS_WITH_AS(ad::backward(ad::square(x)), doctest::Contains("scalar"),
                         std::runtime_error);
}

TEST_CASE("backward twice without a new forward fails") {
    auto x = DTensor::from_data({2}, {1.0, 2.0});
    x.set_requires_grad(true);
    auto loss = ad::sum(ad::square(x));
    ad::backward(loss);
    CHECK_THROWS_WITH_AS(ad::backward(loss), doctest::Contains("consumed"), std::runtime_error);
}

TEST_CASE("gradients accumulate over shared leaves") {
    auto x = DTensor::from_data({2}, {1.5, -0.5});
    x.set_requires_grad(true);

    // x feeds two consumers in one graph
    ad::backward(ad::sum(ad::add(x, x)));
    CHECK(x.grad()[0] == doctest::Approx(2.0));
    CHECK(x.grad()[1] == doctest::Approx(2.0));

    // equivalent duplicated-leaf construction
    auto x1 = DTensor::from_data({2}, {1.5, -0.5});
    auto x2 = DTensor::from_data({2}, {1.5, -0.5});
    x1.set_requires_grad(true);
    x2.set_requires_grad(true);
    ad::backward(ad::sum(ad::add(x1, x2)));
    for (int i = 0; i < 2; ++i)
        CHECK(x.grad()[i] == doctest::Approx(x1.grad()[i] + x2.grad()[i]));

    // a second backward on a fresh graph keeps accumulating
    ad::backward(ad::sum(ad::add(x, x)));
    CHECK(x.grad()[0] == doctest::Approx(4.0));
}

TEST_CASE("finite differences validate every op kind") {
    for (const auto& [name, err] : test::run_op_grad_suite()) {
        INFO("op ", name);
        CHECK(err < 1e-5);
    }
}

TEST_CASE("no-grad mode records nothing") {
    auto x = DTensor::from_data({2}, {1.0, 2.0});
    x.set_requires_grad(true);
    ad::Tensor<double> y;
    {
        ad::NoGradGuard guard;
        y = ad::sum(ad::square(x));
    }
    CHECK_FALSE(y.requires_grad());
}

TEST_CASE("adam first step moves by about lr with unit gradient") {
    auto p = DTensor::from_data({3}, {0.5, 0.5, 0.5});
    p.set_requires_grad(true);
    p.node()->grad.assign(3, 1.0);
    std::vector<DTensor> params = {p};
    ad::AdamState<double> state;
    ad::adam_step(params, state, ad::AdamConfig<double>{});
    for (double v : p.values()) CHECK(v == doctest::Approx(0.5 - 0.001).epsilon(1e-6));
}

TEST_CASE("adam with zero gradient leaves parameters unchanged") {
    auto p = DTensor::from_data({2}, {0.25, -0.75});
    p.set_requires_grad(true);
    p.zero_grad();
    std::vector<DTensor> params = {p};
    ad::AdamState<double> state;
    ad::adam_step(params, state, ad::AdamConfig<double>{});
    CHECK(p.values() == std::vector<double>{0.25, -0.75});
}

TEST_CASE("adam matches a scalar reference over two steps") {
    const double g = 0.3, lr = 0.001, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    double ref = 1.0, m = 0.0, v = 0.0;
    for (int t = 1; t <= 2; ++t) {
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double mhat = m / (1 - std::pow(b1, t));
        const double vhat = v / (1 - std::pow(b2, t));
        ref -= lr * mhat / (std::sqrt(vhat) + eps);
    }

    auto p = DTensor::from_data({2}, {1.0, 1.0});
    p.set_requires_grad(true);
    std::vector<DTensor> params = {p};
    ad::AdamState<double> state;
    for (int t = 0; t < 2; ++t) {
        p.node()->grad.assign(2, g);
        ad::adam_step(params, state, ad::AdamConfig<double>{});
    }
    for (double val : p.values()) CHECK(val == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("adam rejects mismatched parameter lists") {
    auto p = DTensor::from_data({2}, {1.0, 1.0});
    p.set_requires_grad(true);
    std::vector<DTensor> params = {p};
    ad::AdamState<double> state;
    p.node()->grad.assign(2, 0.1);
    ad::adam_step(params, state, ad::AdamConfig<double>{});
    auto q = DTensor::from_data({3}, {1.0, 1.0, 1.0});
    q.set_requires_grad(true);
    std::vector<DTensor> params2 = {p, q};
    CHECK_THROWS_AS(ad::adam_step(params2, state, ad::AdamConfig<double>{}),
                    std::invalid_argument);
}

TEST_CASE("forward and backward are deterministic for a fixed seed") {
    auto run = [](uint64_t seed) {
        RandomSource rng(seed);
        auto x = test::rand_tensor({1, 2, 4, 4}, rng, 0.0, 1.0);
        auto k = test::rand_tensor({2, 2, 3, 3}, rng);
        auto b = test::rand_tensor({2}, rng);
        auto loss = ad::mean(ad::square(ad::conv2d(x, k, b, 1, 1)));
        const double value = loss.item();
        ad::backward(loss);
        return std::tuple{value, k.grad(), x.grad()};
    };
    auto [v1, kg1, xg1] = run(99);
    auto [v2, kg2, xg2] = run(99);
    CHECK(v1 == v2);
    CHECK(kg1 == kg2);
    CHECK(xg1 == xg2);
}

TEST_SUITE_END();
