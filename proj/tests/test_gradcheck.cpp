#include <catch_amalgamated.hpp>

#include "tddr/tddr.hpp"

using namespace tddr;

namespace {

// analytic gradients for a recorded graph, as (loss, grads-by-leaf)
template <typename Build>
std::pair<double, std::vector<Tensor>> analytic(const std::vector<Tensor>& inputs, Build build) {
    Tape t;
    std::vector<int> ids;
    for (const Tensor& in : inputs) ids.push_back(t.leaf(in, true));
    const int loss = build(t, ids);
    auto grads = t.backward(loss);
    std::vector<Tensor> out;
    for (int id : ids)
        out.push_back(grads[id].data.empty() ? Tensor::zeros(t.value(id).shape) : grads[id]);
    return {t.value(loss).data[0], out};
}

template <typename Build>
double fd_check(const std::vector<Tensor>& inputs, Build build, double h = 1e-5) {
    auto [loss, grads] = analytic(inputs, build);
    (void)loss;
    auto forward = [&](const std::vector<Tensor>& in) {
        Tape t;
        std::vector<int> ids;
        for (const Tensor& x : in) ids.push_back(t.leaf(x));
        return t.value(build(t, ids)).data[0];
    };
    return fd_max_rel_err(forward, inputs, grads, h).max_rel_err;
}

}  // namespace

TEST_CASE("conv2d gradients match central finite differences") {
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(500 + trial);
        Tensor target = randn_tensor({3, 5, 5}, 1.0, rng);
        std::vector<Tensor> inputs{randn_tensor({2, 5, 5}, 1.0, rng),
                                   randn_tensor({3, 2, 3, 3}, 0.5, rng), randn_tensor({3}, 0.5, rng)};
        worst = std::max(worst, fd_check(inputs, [&](Tape& t, const std::vector<int>& id) {
                             return t.l2_loss(t.conv2d(id[0], id[1], id[2], 1), target);
                         }));
    }
    INFO("max rel err " << worst);
    REQUIRE(worst < 1e-4);
}

TEST_CASE("batchnorm2d gradients match central finite differences") {
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(600 + trial);
        Tensor target = randn_tensor({3, 6, 6}, 1.0, rng);
        std::vector<Tensor> inputs{randn_tensor({3, 6, 6}, 1.0, rng), randn_tensor({3}, 0.7, rng),
                                   randn_tensor({3}, 0.7, rng)};
        worst = std::max(worst, fd_check(inputs, [&](Tape& t, const std::vector<int>& id) {
                             return t.l2_loss(t.batchnorm2d(id[0], id[1], id[2], 1e-5), target);
                         }));
    }
    INFO("max rel err " << worst);
    REQUIRE(worst < 1e-4);
}

TEST_CASE("relu gradient mask matches finite differences away from zero") {
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(700 + trial);
        Tensor x = randn_tensor({2, 4, 4}, 1.0, rng);
        for (double& v : x.data)
            if (std::abs(v) < 1e-3) v += v < 0 ? -1e-3 : 1e-3;
        Tensor target = randn_tensor({2, 4, 4}, 1.0, rng);
        worst = std::max(worst, fd_check({x}, [&](Tape& t, const std::vector<int>& id) {
                             return t.l2_loss(t.relu(id[0]), target);
                         }));
    }
    INFO("max rel err " << worst);
    REQUIRE(worst < 1e-6);
}

TEST_CASE("complex pixmul gradient matches finite differences") {
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(800 + trial);
        Tensor cmap = randn_tensor({2, 4, 4}, 1.0, rng);
        Tensor target = randn_tensor({2, 4, 4}, 1.0, rng);
        worst = std::max(worst,
                         fd_check({randn_tensor({2, 4, 4}, 1.0, rng)},
                                  [&](Tape& t, const std::vector<int>& id) {
                                      return t.l2_loss(t.complex_pixmul(id[0], cmap), target);
                                  }));
    }
    INFO("max rel err " << worst);
    REQUIRE(worst < 1e-4);
}

TEST_CASE("nudft layer gradient matches finite differences on both routes") {
    for (FourierPath path : {FourierPath::Exact, FourierPath::Gridded}) {
        double worst = 0;
        for (int trial = 0; trial < 10; ++trial) {
            Rng rng(900 + trial);
            std::vector<KCoord> coords(16);
            for (KCoord& k : coords) {
                k.kx = rng.uniform(-kPi, kPi * 0.999999);
                k.ky = rng.uniform(-kPi, kPi * 0.999999);
            }
            auto plan = std::make_shared<NufftPlan>(coords, 8);
            Tensor target = randn_tensor({2, 16}, 1.0, rng);
            worst = std::max(worst,
                             fd_check({randn_tensor({2, 8, 8}, 1.0, rng)},
                                      [&](Tape& t, const std::vector<int>& id) {
                                          return t.l2_loss(t.nudft_layer(id[0], plan, path), target);
                                      }));
        }
        INFO("path " << (path == FourierPath::Exact ? "exact" : "gridded") << " max rel err " << worst);
        REQUIRE(worst < 1e-4);
    }
}

TEST_CASE("l2 loss gradient is 2(pred - target)") {
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(1000 + trial);
        Tensor pred = randn_tensor({2, 12}, 1.0, rng);
        Tensor target = randn_tensor({2, 12}, 1.0, rng);
        auto [loss, grads] = analytic({pred}, [&](Tape& t, const std::vector<int>& id) {
            return t.l2_loss(id[0], target);
        });
        (void)loss;
        for (size_t i = 0; i < pred.data.size(); ++i) {
            const double expect = 2.0 * (pred.data[i] - target.data[i]);
            worst = std::max(worst, std::abs(grads[0].data[i] - expect) /
                                        std::max({std::abs(expect), 1e-6}));
        }
        worst = std::max(worst, fd_check({pred}, [&](Tape& t, const std::vector<int>& id) {
                             return t.l2_loss(id[0], target);
                         }));
    }
    INFO("max rel err " << worst);
    REQUIRE(worst < 1e-6);
}

TEST_CASE("composed generator + transform + loss gradients pass at 1e-3", "[heavy]") {
    SelftestReport report = run_selftest("gradcheck.composed");
    REQUIRE(report.checks.size() == 1);
    INFO(report.checks[0].detail);
    REQUIRE(report.checks[0].pass);
}
