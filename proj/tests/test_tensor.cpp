#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "wavecast/autograd.hpp"
#include "wavecast/tensor.hpp"

using namespace wavecast;

namespace {

Tensor random_tensor(const std::vector<int>& shape, std::mt19937_64& rng) {
    Tensor t(shape);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (double& v : t.data) v = d(rng);
    return t;
}

} // namespace

TEST_CASE("tensor basics") {
    Tensor t({2, 3}, 0.0);
    CHECK(t.numel() == 6);
    t.at(1, 2) = 5.0;
    CHECK(t.data[5] == 5.0);
    CHECK(t.shape_str() == "[2x3]");
    CHECK_THROWS_AS(Tensor({0, 3}), ShapeError);
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0}), ShapeError);
    CHECK(Tensor::scalar(3.0).numel() == 1);
    t.at(0, 0) = std::nan("");
    CHECK_FALSE(t.all_finite());
}

TEST_CASE("conv1d matches the naive loop") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_int_distribution<int> li(2, 40), ci(1, 4), co(1, 5);
        const int len = li(rng), c_in = ci(rng), c_out = co(rng);
        std::uniform_int_distribution<int> ki(1, len);
        const int k = ki(rng);
        std::uniform_int_distribution<int> si(1, 3);
        const int stride = si(rng);
        const Tensor x = random_tensor({c_in, len}, rng);
        const Tensor w = random_tensor({c_out, c_in, k}, rng);
        const Tensor got = conv1d(x, w, stride);
        const Tensor want = oracles::conv1d_naive(x, w, stride);
        REQUIRE(got.shape == want.shape);
        CHECK(got.dim(1) == (len - k) / stride + 1);
        for (std::size_t i = 0; i < got.numel(); ++i)
            CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("conv1d validation") {
    const Tensor x({1, 4}, {1, 2, 3, 4});
    const Tensor w({1, 1, 5}, 0.0);
    CHECK_THROWS_AS(conv1d(x, w), ShapeError);
    const Tensor w2({1, 2, 2}, 0.0);
    CHECK_THROWS_AS(conv1d(x, w2), ShapeError);
    const Tensor w3({1, 1, 2}, {1, 1});
    CHECK_THROWS_AS(conv1d(x, w3, 0), ArgumentError);
    const Tensor y = conv1d(x, w3);
    CHECK(y.dim(1) == 3);
    CHECK(y.at(0, 0) == 3.0);
    CHECK(y.at(0, 2) == 7.0);
}

TEST_CASE("conv2d matches the naive loop") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        std::uniform_int_distribution<int> hi(2, 12), wi(2, 12), ci(1, 3), co(1, 4);
        const int h = hi(rng), w = wi(rng), c_in = ci(rng), c_out = co(rng);
        std::uniform_int_distribution<int> khi(1, h), kwi(1, w);
        const int kh = khi(rng), kw = kwi(rng);
        const Tensor x = random_tensor({c_in, h, w}, rng);
        const Tensor ker = random_tensor({c_out, c_in, kh, kw}, rng);
        const Tensor got = conv2d(x, ker);
        const Tensor want = oracles::conv2d_naive(x, ker);
        REQUIRE(got.shape == want.shape);
        for (std::size_t i = 0; i < got.numel(); ++i)
            CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("affine, relu, softmax, concat") {
    const Tensor x = Tensor::vec({1.0, 2.0});
    const Tensor w({2, 2}, {1.0, 0.0, 0.0, 1.0});
    const Tensor b = Tensor::vec({0.5, -0.5});
    const Tensor y = affine(x, w, b);
    CHECK(y.at(0) == 1.5);
    CHECK(y.at(1) == 1.5);
    CHECK_THROWS_AS(affine(x, Tensor({2, 3}, 0.0), b), ShapeError);

    const Tensor r = relu(Tensor::vec({-1.0, 0.0, 2.0}));
    CHECK(r.at(0) == 0.0);
    CHECK(r.at(2) == 2.0);

    const Tensor s = softmax(Tensor::vec({1000.0, 1000.0}));
    CHECK(s.at(0) == doctest::Approx(0.5)); // max subtraction keeps this finite
    double sum = 0.0;
    for (double v : softmax(Tensor::vec({0.3, -2.0, 5.0})).data) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    const Tensor c = concat({Tensor({1, 2}, {1, 2}), Tensor({2, 2}, {3, 4, 5, 6})});
    CHECK(c.shape == std::vector<int>{3, 2});
    CHECK(c.at(2, 1) == 6.0);
    CHECK_THROWS_AS(concat({Tensor({1, 2}, 0.0), Tensor({1, 3}, 0.0)}), ShapeError);
    CHECK_THROWS_AS(concat({}), ArgumentError);

    const Tensor tr = transpose(Tensor({2, 3}, {1, 2, 3, 4, 5, 6}));
    CHECK(tr.shape == std::vector<int>{3, 2});
    CHECK(tr.at(2, 0) == 3.0);
    CHECK(tr.at(0, 1) == 4.0);
}

TEST_CASE("gradients pass finite-difference checks per op") {
    std::mt19937_64 rng(21);
    const double tol = 1e-6;

    SUBCASE("conv1d") {
        Graph g;
        const NodeId x = g.param(random_tensor({2, 9}, rng));
        const NodeId w = g.param(random_tensor({3, 2, 4}, rng));
        const NodeId out = g.sum(g.conv1d(x, w, 2));
        g.backward(out);
        CHECK(g.finite_diff_check(x, out, 1e-5) < tol);
        CHECK(g.finite_diff_check(w, out, 1e-5) < tol);
    }
    SUBCASE("conv2d") {
        Graph g;
        const NodeId x = g.param(random_tensor({2, 6, 7}, rng));
        const NodeId w = g.param(random_tensor({3, 2, 3, 2}, rng));
        const NodeId out = g.sum(g.conv2d(x, w));
        g.backward(out);
        CHECK(g.finite_diff_check(x, out, 1e-5) < tol);
        CHECK(g.finite_diff_check(w, out, 1e-5) < tol);
    }
    SUBCASE("affine + relu") {
        Graph g;
        const NodeId x = g.param(random_tensor({5}, rng));
        const NodeId w = g.param(random_tensor({4, 5}, rng));
        const NodeId b = g.param(random_tensor({4}, rng));
        const NodeId out = g.sum(g.relu(g.affine(x, w, b)));
        g.backward(out);
        CHECK(g.finite_diff_check(x, out, 1e-5) < tol);
        CHECK(g.finite_diff_check(w, out, 1e-5) < tol);
        CHECK(g.finite_diff_check(b, out, 1e-5) < tol);
    }
    SUBCASE("softmax weighting") {
        Graph g;
        const NodeId s = g.param(random_tensor({3}, rng));
        const NodeId x = g.param(random_tensor({4}, rng));
        const NodeId sm = g.softmax(s);
        const NodeId out =
            g.sum(g.add(g.scale(x, g.pick(sm, 0)), g.scale(x, g.pick(sm, 2))));
        g.backward(out);
        CHECK(g.finite_diff_check(s, out, 1e-5) < tol);
        CHECK(g.finite_diff_check(x, out, 1e-5) < tol);
    }
    SUBCASE("softmax_cols + mul + reshape") {
        Graph g;
        const NodeId s = g.param(random_tensor({2, 6}, rng));
        const NodeId x = g.param(random_tensor({6}, rng));
        const NodeId sm = g.softmax_cols(s);
        const NodeId row = g.reshape(g.slice_rows(sm, 1, 2), {6});
        const NodeId out = g.sum(g.mul(x, row));
        g.backward(out);
        CHECK(g.finite_diff_check(s, out, 1e-5) < tol);
        CHECK(g.finite_diff_check(x, out, 1e-5) < tol);
    }
    SUBCASE("concat + slice + bias_ch + mean_pool + mse") {
        Graph g;
        const NodeId a = g.param(random_tensor({2, 5}, rng));
        const NodeId b = g.param(random_tensor({3, 5}, rng));
        const NodeId bias = g.param(random_tensor({5}, rng));
        const NodeId cat = g.concat({a, b});
        const NodeId sl = g.slice_rows(cat, 1, 4);
        const NodeId biased = g.bias_ch(g.concat({sl, g.slice_rows(cat, 0, 2)}), bias);
        const NodeId pooled = g.mean_pool_last(biased);
        const NodeId target = g.input(random_tensor({5}, rng));
        const NodeId out = g.mse(pooled, target);
        g.backward(out);
        CHECK(g.finite_diff_check(a, out, 1e-5) < tol);
        CHECK(g.finite_diff_check(b, out, 1e-5) < tol);
        CHECK(g.finite_diff_check(bias, out, 1e-5) < tol);
    }
}

TEST_CASE("backward requires a scalar and accumulates over reuse") {
    Graph g;
    const NodeId x = g.param(Tensor::vec({1.0, 2.0}));
    CHECK_THROWS_AS(g.backward(x), ArgumentError);
    const NodeId y = g.sum(g.add(x, x));
    g.backward(y);
    CHECK(g.grad(x).at(0) == doctest::Approx(2.0));
    CHECK(g.grad(x).at(1) == doctest::Approx(2.0));
}

TEST_CASE("recompute reflects edited leaves") {
    Graph g;
    const NodeId x = g.param(Tensor::vec({1.0, 2.0, 3.0}));
    const NodeId out = g.sum(x);
    CHECK(g.value(out).data[0] == doctest::Approx(6.0));
    g.leaf_value(x).at(1) = 10.0;
    g.recompute();
    CHECK(g.value(out).data[0] == doctest::Approx(14.0));
}
