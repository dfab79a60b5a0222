#include <catch_amalgamated.hpp>

#include "tddr/tddr.hpp"

using namespace tddr;

TEST_CASE("conv2d shape follows the filter count") {
    Tape t;
    Rng rng(1);
    int x = t.leaf(randn_tensor({1, 8, 8}, 1.0, rng));
    int w = t.leaf(randn_tensor({128, 1, 3, 3}, 0.1, rng));
    int b = t.leaf(Tensor::zeros({128}));
    int out = t.conv2d(x, w, b, 1);
    REQUIRE(t.value(out).shape == std::vector<int>{128, 8, 8});
}

TEST_CASE("conv2d with a centered identity kernel reproduces the input") {
    Tape t;
    Rng rng(2);
    Tensor xv = randn_tensor({1, 6, 6}, 1.0, rng);
    Tensor wv = Tensor::zeros({1, 1, 3, 3});
    wv.at4(0, 0, 1, 1) = 1.0;
    int out = t.conv2d(t.leaf(xv), t.leaf(wv), t.leaf(Tensor::zeros({1})), 1);
    for (size_t i = 0; i < xv.data.size(); ++i) REQUIRE(t.value(out).data[i] == xv.data[i]);
}

TEST_CASE("conv2d rejects channel mismatches") {
    Tape t;
    Rng rng(3);
    int x = t.leaf(randn_tensor({2, 4, 4}, 1.0, rng));
    int w = t.leaf(randn_tensor({3, 5, 3, 3}, 1.0, rng));
    int b = t.leaf(Tensor::zeros({3}));
    REQUIRE_THROWS_AS(t.conv2d(x, w, b, 1), shape_error);
}

TEST_CASE("batchnorm2d stabilizes a constant channel at beta") {
    Tape t;
    int x = t.leaf(Tensor::full({1, 4, 4}, 7.0));
    int g = t.leaf(Tensor::full({1}, 1.0));
    int b = t.leaf(Tensor::full({1}, 0.5));
    int out = t.batchnorm2d(x, g, b, 1e-5);
    for (double v : t.value(out).data) REQUIRE(std::abs(v - 0.5) < 1e-9);
}

TEST_CASE("batchnorm2d normalizes mean and variance") {
    Tape t;
    Rng rng(4);
    int x = t.leaf(randn_tensor({3, 6, 6}, 2.0, rng));
    int g = t.leaf(Tensor::full({3}, 1.0));
    int b = t.leaf(Tensor::zeros({3}));
    const Tensor& out = t.value(t.batchnorm2d(x, g, b, 1e-5));
    const size_t m = 36;
    for (int ch = 0; ch < 3; ++ch) {
        double mean = 0, var = 0;
        for (size_t i = 0; i < m; ++i) mean += out.data[ch * m + i];
        mean /= double(m);
        for (size_t i = 0; i < m; ++i) var += sqr(out.data[ch * m + i] - mean);
        var /= double(m);
        REQUIRE(std::abs(mean) < 1e-6);
        REQUIRE(std::abs(var - 1.0) < 1e-3);
    }
}

TEST_CASE("batchnorm2d rejects nonpositive eps") {
    Tape t;
    int x = t.leaf(Tensor::full({1, 2, 2}, 1.0));
    int g = t.leaf(Tensor::full({1}, 1.0));
    int b = t.leaf(Tensor::zeros({1}));
    REQUIRE_THROWS_AS(t.batchnorm2d(x, g, b, 0.0), config_error);
    REQUIRE_THROWS_AS(t.batchnorm2d(x, g, b, -1.0), config_error);
}

TEST_CASE("relu clamps negatives and zero") {
    Tape t;
    int x = t.leaf(Tensor({3}, {-1.0, 0.0, 2.0}));
    const Tensor& out = t.value(t.relu(x));
    REQUIRE(out.data == std::vector<double>{0.0, 0.0, 2.0});
}

TEST_CASE("relu on an all-negative input zeroes values and gradients") {
    Tape t;
    int x = t.leaf(Tensor({4}, {-1.0, -2.0, -0.5, -3.0}), true);
    int r = t.relu(x);
    int loss = t.l2_loss(r, Tensor::full({4}, 1.0));
    auto grads = t.backward(loss);
    for (double v : t.value(r).data) REQUIRE(v == 0.0);
    for (double v : grads[x].data) REQUIRE(v == 0.0);
}

TEST_CASE("upsample replicates pixels and sums gradients") {
    Tape t;
    Rng rng(5);
    Tensor xv = randn_tensor({128, 8, 8}, 1.0, rng);
    int x = t.leaf(xv, true);
    int up = t.upsample_nn2x(x);
    REQUIRE(t.value(up).shape == std::vector<int>{128, 16, 16});

    Tape t2;
    int x2 = t2.leaf(Tensor::full({1, 1, 1}, 3.25), true);
    int up2 = t2.upsample_nn2x(x2);
    for (double v : t2.value(up2).data) REQUIRE(v == 3.25);
    // all-ones upstream gradient sums the four replicas
    int loss = t2.l2_loss(up2, Tensor::full({1, 2, 2}, 3.25 - 0.5));
    auto grads = t2.backward(loss);
    REQUIRE(grads[x2].data[0] == Catch::Approx(4.0 * 2.0 * 0.5));
}

TEST_CASE("complex pixmul identity and i*i") {
    Tape t;
    Rng rng(6);
    Tensor xv = randn_tensor({2, 3, 3}, 1.0, rng);
    Tensor ones = Tensor::zeros({2, 3, 3});
    for (int i = 0; i < 9; ++i) ones.data[i] = 1.0;  // 1 + 0j
    int out = t.complex_pixmul(t.leaf(xv), ones);
    for (size_t i = 0; i < xv.data.size(); ++i) REQUIRE(t.value(out).data[i] == xv.data[i]);

    Tensor imag = Tensor::zeros({2, 2, 2});
    for (int i = 4; i < 8; ++i) imag.data[i] = 1.0;  // 0 + 1j
    Tape t2;
    int out2 = t2.complex_pixmul(t2.leaf(imag), imag);
    for (int i = 0; i < 4; ++i) REQUIRE(t2.value(out2).data[i] == -1.0);   // real part
    for (int i = 4; i < 8; ++i) REQUIRE(t2.value(out2).data[i] == 0.0);    // imag part
}

TEST_CASE("complex pixmul rejects spatial mismatch") {
    Tape t;
    int x = t.leaf(Tensor::zeros({2, 4, 4}));
    REQUIRE_THROWS_AS(t.complex_pixmul(x, Tensor::zeros({2, 3, 3})), shape_error);
}

TEST_CASE("nudft layer forwards zeros and sums pixels at dc") {
    auto plan = std::make_shared<NufftPlan>(std::vector<KCoord>{{0.0, 0.0}}, 4);
    Tape t;
    int x = t.leaf(Tensor::zeros({2, 4, 4}), true);
    int y = t.nudft_layer(x, plan, FourierPath::Exact);
    for (double v : t.value(y).data) REQUIRE(v == 0.0);
    auto grads = t.backward(t.l2_loss(y, Tensor::zeros({2, 1})));
    for (double v : grads[x].data) REQUIRE(v == 0.0);

    Tape t2;
    Rng rng(7);
    Tensor xv = randn_tensor({2, 4, 4}, 1.0, rng);
    int y2 = t2.nudft_layer(t2.leaf(xv), plan, FourierPath::Exact);
    double re = 0, im = 0;
    for (int i = 0; i < 16; ++i) {
        re += xv.data[i];
        im += xv.data[16 + i];
    }
    REQUIRE(t2.value(y2).data[0] == Catch::Approx(re).epsilon(1e-12));
    REQUIRE(t2.value(y2).data[1] == Catch::Approx(im).epsilon(1e-12));
}

TEST_CASE("l2 loss on trivial pairs") {
    Tape t;
    Rng rng(8);
    Tensor p = randn_tensor({2, 5}, 1.0, rng);
    REQUIRE(t.value(t.l2_loss(t.leaf(p), p)).data[0] == 0.0);

    Tape t2;
    Tensor pred({2, 1}, {1.0, 0.0});    // 1 + 0j
    Tensor target({2, 1}, {0.0, 1.0});  // 0 + 1j
    REQUIRE(t2.value(t2.l2_loss(t2.leaf(pred), target)).data[0] == 2.0);

    Tape t3;
    REQUIRE_THROWS_AS(t3.l2_loss(t3.leaf(Tensor::zeros({2, 3})), Tensor::zeros({2, 4})), shape_error);
}

TEST_CASE("backward seeds scalar sums with unit gradients") {
    Tape t;
    int a = t.leaf(Tensor({1}, {2.0}), true);
    int b = t.leaf(Tensor({1}, {-1.0}), true);
    auto grads = t.backward(t.add_n({a, b}));
    REQUIRE(grads[a].data[0] == 1.0);
    REQUIRE(grads[b].data[0] == 1.0);
}

TEST_CASE("backward leaves disconnected parameters without gradient") {
    Tape t;
    int used = t.leaf(Tensor({1}, {1.5}), true);
    int unused = t.leaf(Tensor({1}, {9.0}), true);
    auto grads = t.backward(t.add_n({used}));
    REQUIRE(grads[used].data[0] == 1.0);
    REQUIRE(grads[unused].data.empty());  // exactly zero: no contribution recorded
}

TEST_CASE("backward requires a scalar loss") {
    Tape t;
    int x = t.leaf(Tensor::zeros({2, 2}));
    REQUIRE_THROWS_AS(t.backward(x), shape_error);
}

TEST_CASE("linear ops are linear to double precision") {
    Rng rng(9);
    Tensor xv = randn_tensor({2, 6, 6}, 1.0, rng);
    Tensor yv = randn_tensor({2, 6, 6}, 1.0, rng);
    Tensor wv = randn_tensor({2, 2, 3, 3}, 0.5, rng);
    Tensor bias = Tensor::zeros({2});
    Tensor cmap = randn_tensor({2, 6, 6}, 1.0, rng);
    auto plan = std::make_shared<NufftPlan>(std::vector<KCoord>{{0.3, -0.7}, {1.1, 2.2}}, 6);
    const double alpha = 0.37, beta = -1.21;

    Tensor axby = Tensor::zeros({2, 6, 6});
    for (size_t i = 0; i < axby.data.size(); ++i)
        axby.data[i] = alpha * xv.data[i] + beta * yv.data[i];

    auto eval = [&](const Tensor& in, auto op) {
        Tape t;
        return op(t, t.leaf(in));
    };
    auto check = [&](auto op) {
        Tape tx, ty, tc;
        const Tensor fx = op(tx, tx.leaf(xv));
        const Tensor fy = op(ty, ty.leaf(yv));
        const Tensor fc = op(tc, tc.leaf(axby));
        double scale = 0;
        for (double v : fc.data) scale = std::max(scale, std::abs(v));
        for (size_t i = 0; i < fc.data.size(); ++i)
            REQUIRE(std::abs(fc.data[i] - (alpha * fx.data[i] + beta * fy.data[i])) <=
                    1e-10 * std::max(scale, 1.0));
    };
    check([&](Tape& t, int x) { return t.value(t.conv2d(x, t.leaf(wv), t.leaf(bias), 1)); });
    check([&](Tape& t, int x) { return t.value(t.upsample_nn2x(x)); });
    check([&](Tape& t, int x) { return t.value(t.complex_pixmul(x, cmap)); });
    check([&](Tape& t, int x) { return t.value(t.nudft_layer(x, plan, FourierPath::Gridded)); });
    (void)eval;
}

TEST_CASE("tape replay reproduces recorded values bit-exactly") {
    Rng rng(10);
    Tape t;
    int x = t.leaf(randn_tensor({1, 4, 4}, 1.0, rng), true);
    int w = t.leaf(randn_tensor({2, 1, 3, 3}, 0.7, rng), true);
    int b = t.leaf(randn_tensor({2}, 0.1, rng), true);
    int g = t.leaf(Tensor::full({2}, 1.0), true);
    int be = t.leaf(Tensor::zeros({2}), true);
    int c = t.conv2d(x, w, b, 1);
    int bn = t.batchnorm2d(c, g, be, 1e-5);
    int r = t.relu(bn);
    int up = t.upsample_nn2x(r);
    int loss = t.l2_loss(up, Tensor::full({2, 8, 8}, 0.25));

    std::vector<std::vector<double>> snapshot;
    for (int i = 0; i < t.size(); ++i) snapshot.push_back(t.value(i).data);
    (void)t.backward(loss);
    t.replay();
    for (int i = 0; i < t.size(); ++i) REQUIRE(t.value(i).data == snapshot[i]);
}

TEST_CASE("recording is deterministic for identical inputs") {
    auto build = [] {
        Rng rng(77);
        Tape t;
        int x = t.leaf(randn_tensor({1, 4, 4}, 1.0, rng), true);
        int w = t.leaf(randn_tensor({3, 1, 3, 3}, 0.5, rng), true);
        int b = t.leaf(randn_tensor({3}, 0.5, rng), true);
        int c = t.conv2d(x, w, b, 1);
        int loss = t.l2_loss(c, Tensor::full({3, 4, 4}, 0.1));
        auto grads = t.backward(loss);
        return std::make_pair(t.value(loss).data[0], grads[w].data);
    };
    auto [l1, g1] = build();
    auto [l2, g2] = build();
    REQUIRE(l1 == l2);
    REQUIRE(g1 == g2);
}
