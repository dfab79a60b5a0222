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

std::vector<KCoord> random_coords(size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<KCoord> c(count);
    for (KCoord& k : c) {
        k.kx = rng.uniform(-kPi, kPi * 0.999999);
        k.ky = rng.uniform(-kPi, kPi * 0.999999);
    }
    return c;
}

}  // namespace

TEST_CASE("nudft dc sample sums the image") {
    const int n = 8;
    CImage x(n);
    const cplx c(1.5, -0.25);
    for (cplx& v : x.v) v = c;
    auto y = nudft_apply(x, std::vector<KCoord>{{0.0, 0.0}});
    REQUIRE(std::abs(y[0] - c * double(n * n)) < 1e-12 * std::abs(c) * n * n);
}

TEST_CASE("nudft centered impulse transforms to all ones") {
    const int n = 8;
    CImage x(n);
    x.at(n / 2, n / 2) = cplx(1, 0);
    auto coords = random_coords(25, 11);
    auto y = nudft_apply(x, coords);
    for (const cplx& v : y) REQUIRE(std::abs(v - cplx(1, 0)) < 1e-12);
}

TEST_CASE("nudft rejects out-of-range coordinates") {
    CImage x(4);
    REQUIRE_THROWS_AS(nudft_apply(x, std::vector<KCoord>{{kPi, 0.0}}), config_error);
    REQUIRE_THROWS_AS(nudft_apply(x, std::vector<KCoord>{{0.0, -kPi - 0.1}}), config_error);
}

TEST_CASE("fourier slice: axis-aligned spoke equals padded 1d fft of the projection") {
    const int n = 8;
    CImage x = random_image(n, 42);
    TrajectoryConfig traj = TrajectoryConfig::for_grid(n);
    auto coords = radial_coords(0.0, traj);  // ky = 0 along the whole spoke
    auto y = nudft_apply(x, coords);

    // project along rows, then a centered 2n-point transform of the projection
    const int g = 2 * n;
    std::vector<cplx> proj(g, cplx(0, 0));
    for (int col = 0; col < n; ++col) {
        cplx s(0, 0);
        for (int row = 0; row < n; ++row) s += x.at(row, col);
        const int cx = col - n / 2;
        proj[(cx % g + g) % g] = s;
    }
    fft_pow2(proj.data(), g, false);

    double scale = 0;
    for (const cplx& v : y) scale = std::max(scale, std::abs(v));
    for (int m = 0; m < traj.m_omega; ++m) {
        const int q = m - traj.m_omega / 2;
        const cplx ref = proj[(q % g + g) % g];
        REQUIRE(std::abs(y[m] - ref) < 1e-10 * scale);
    }
}

TEST_CASE("nudft adjoint passes the dot test") {
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        CImage x = random_image(8, 100 + trial);
        auto coords = random_coords(30, 200 + trial);
        Rng rng(300 + trial);
        std::vector<cplx> y(coords.size());
        for (cplx& v : y) v = cplx(rng.normal(), rng.normal());

        auto ax = nudft_apply(x, coords);
        CImage aty = nudft_adjoint(y, coords, x.n);
        cplx lhs = cdot(ax, y);
        cplx rhs(0, 0);
        for (size_t i = 0; i < x.v.size(); ++i) rhs += x.v[i] * std::conj(aty.v[i]);
        worst = std::max(worst, std::abs(lhs - rhs) / std::abs(lhs));
    }
    REQUIRE(worst < 1e-12);
}

TEST_CASE("nudft adjoint trivial cases") {
    std::vector<KCoord> dc{{0.0, 0.0}};
    CImage ones = nudft_adjoint(std::vector<cplx>{cplx(1, 0)}, dc, 6);
    for (const cplx& v : ones.v) REQUIRE(std::abs(v - cplx(1, 0)) < 1e-14);

    CImage zero = nudft_adjoint(std::vector<cplx>{cplx(0, 0)}, dc, 6);
    for (const cplx& v : zero.v) REQUIRE(std::abs(v) == 0.0);
}

TEST_CASE("nudft rotation covariance on a symmetric support") {
    const int n = 8, h = n / 2;
    CImage x = random_image(n, 7);
    // zero the unmatched row/column so a 90-degree rotation is a bijection
    for (int i = 0; i < n; ++i) {
        x.at(0, i) = 0;
        x.at(i, 0) = 0;
    }
    // rotate +90 degrees in centered coordinates: output (cx,cy) reads (cy,-cx)
    CImage xr(n);
    for (int y = 0; y < n; ++y)
        for (int c = 0; c < n; ++c) {
            const int cx = c - h, cy = y - h;
            const int sx = cy, sy = -cx;
            if (sx < -h || sx >= h || sy < -h || sy >= h) continue;
            xr.at(y, c) = x.at(sy + h, sx + h);
        }

    TrajectoryConfig traj = TrajectoryConfig::for_grid(n);
    const double theta = 0.37;
    auto y_orig = nudft_apply(x, radial_coords(theta, traj));
    auto y_rot = nudft_apply(xr, radial_coords(theta + kPi / 2, traj));
    double scale = 0;
    for (const cplx& v : y_orig) scale = std::max(scale, std::abs(v));
    for (size_t i = 0; i < y_orig.size(); ++i) REQUIRE(std::abs(y_orig[i] - y_rot[i]) < 1e-10 * scale);
}
