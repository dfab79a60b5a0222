#include <catch_amalgamated.hpp>

#include "tddr/tddr.hpp"

using namespace tddr;

namespace {

CImage random_image(int n, std::uint64_t seed) {
    Rng rng(seed);
    CImage img(n);
    for (cplx& z : img.v) z = cplx(rng.normal(), rng.normal());
    return img;
}

}  // namespace

TEST_CASE("kaiser-bessel fourier pair matches numeric quadrature") {
    GridConfig cfg;
    const double tau = cfg.kernel_width / 2.0;
    const double beta = cfg.beta();
    for (double f : {0.0, 0.05, 0.1, 0.2, 0.249}) {
        // Simpson quadrature of the kernel against cos(2 pi f u)
        const int steps = 20000;
        const double h = 2.0 * tau / steps;
        double acc = 0;
        for (int i = 0; i <= steps; ++i) {
            const double u = -tau + i * h;
            const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += w * detail::kb_kernel(u, tau, beta) * std::cos(2.0 * kPi * f * u);
        }
        acc *= h / 3.0;
        const double closed = detail::kb_fourier(f, tau, beta);
        REQUIRE(std::abs(acc - closed) < 1e-9 * std::abs(closed));
    }
}

TEST_CASE("gridded transform matches the exact oracle on radial spokes") {
    TrajectoryConfig traj = TrajectoryConfig::for_grid(64);
    std::vector<KCoord> coords;
    for (int k = 0; k < 5; ++k) {
        auto c = radial_coords(spoke_angle(k, traj), traj);
        coords.insert(coords.end(), c.begin(), c.end());
    }
    CImage x = random_image(64, 5);
    auto exact = nudft_apply(x, coords);
    auto fast = NufftPlan(coords, x.n).apply(x);

    double scale = 0;
    for (const cplx& z : exact) scale = std::max(scale, std::abs(z));
    double worst = 0;
    for (size_t i = 0; i < exact.size(); ++i)
        worst = std::max(worst, std::abs(fast[i] - exact[i]) / scale);
    INFO("max rel err " << worst);
    REQUIRE(worst < 1e-3);
}

TEST_CASE("gridded adjoint matches the exact adjoint to gridding accuracy") {
    TrajectoryConfig traj = TrajectoryConfig::for_grid(32);
    std::vector<KCoord> coords = radial_coords(spoke_angle(3, traj), traj);
    Rng rng(9);
    std::vector<cplx> y(coords.size());
    for (cplx& v : y) v = cplx(rng.normal(), rng.normal());

    CImage exact = nudft_adjoint(y, coords, 32);
    CImage fast = NufftPlan(coords, 32).adjoint(y);
    double scale = 0;
    for (const cplx& z : exact.v) scale = std::max(scale, std::abs(z));
    for (size_t i = 0; i < exact.v.size(); ++i)
        REQUIRE(std::abs(fast.v[i] - exact.v[i]) < 1e-3 * scale);
}

TEST_CASE("gridded transform is linear") {
    CImage x = random_image(16, 3);
    NufftPlan plan(std::vector<KCoord>{{0.4, -1.2}, {2.0, 0.3}, {-3.0, 3.0}}, 16);
    CImage x2(16);
    for (size_t i = 0; i < x.v.size(); ++i) x2.v[i] = 2.0 * x.v[i];
    auto y = plan.apply(x);
    auto y2 = plan.apply(x2);
    for (size_t i = 0; i < y.size(); ++i)
        REQUIRE(std::abs(y2[i] - 2.0 * y[i]) <= 1e-12 * std::abs(y[i]) + 1e-300);
}

TEST_CASE("gridded pair passes the adjoint dot test") {
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        CImage x = random_image(32, 40 + trial);
        Rng rng(80 + trial);
        std::vector<KCoord> coords(50);
        for (KCoord& k : coords) {
            k.kx = rng.uniform(-kPi, kPi * 0.999999);
            k.ky = rng.uniform(-kPi, kPi * 0.999999);
        }
        NufftPlan plan(coords, x.n);
        std::vector<cplx> y(coords.size());
        for (cplx& v : y) v = cplx(rng.normal(), rng.normal());
        auto ax = plan.apply(x);
        CImage aty = plan.adjoint(y);
        cplx lhs = cdot(ax, y);
        cplx rhs(0, 0);
        for (size_t i = 0; i < x.v.size(); ++i) rhs += x.v[i] * std::conj(aty.v[i]);
        worst = std::max(worst, std::abs(lhs - rhs) / std::abs(lhs));
    }
    REQUIRE(worst < 1e-6);
}

TEST_CASE("kernel width must stay below the oversampled grid") {
    GridConfig cfg;
    cfg.kernel_width = 64;
    REQUIRE_THROWS_AS(NufftPlan(std::vector<KCoord>{{0.0, 0.0}}, 16, cfg), config_error);
}
