#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tddr/generator.hpp"
#include "tddr/metrics.hpp"
#include "tddr/recon_common.hpp"

namespace tddr {

// ---- finite-difference gradient oracle -------------------------------------
//
// The oracle only ever evaluates forward passes; it never looks at the
// backward implementation it is checking.

struct GradCheckResult {
    double max_rel_err = 0;
    size_t checked = 0;
};

inline GradCheckResult fd_max_rel_err(const std::function<double(const std::vector<Tensor>&)>& f,
                                      std::vector<Tensor> inputs,
                                      const std::vector<Tensor>& analytic, double h = 1e-5,
                                      double denom_floor = 1e-6) {
    GradCheckResult res;
    for (size_t ti = 0; ti < inputs.size(); ++ti) {
        if (analytic[ti].data.empty()) continue;
        for (size_t e = 0; e < inputs[ti].data.size(); ++e) {
            const double keep = inputs[ti].data[e];
            inputs[ti].data[e] = keep + h;
            const double fp = f(inputs);
            inputs[ti].data[e] = keep - h;
            const double fm = f(inputs);
            inputs[ti].data[e] = keep;
            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic[ti].data[e];
            const double rel =
                std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), denom_floor});
            res.max_rel_err = std::max(res.max_rel_err, rel);
            ++res.checked;
        }
    }
    return res;
}

// ---- RSNR grid-search oracle ------------------------------------------------
//
// Multi-round zooming (a, b) grid; function evaluations only, independent of
// the closed-form fit.

inline double rsnr_grid_oracle(const CImage& ref, const CImage& est, int grid = 201, int rounds = 4) {
    const std::vector<double> r = magnitude(ref);
    const std::vector<double> e = magnitude(est);
    double rmax = 0, emax = 0, ref_sq = 0;
    for (size_t i = 0; i < r.size(); ++i) {
        rmax = std::max(rmax, std::abs(r[i]));
        emax = std::max(emax, std::abs(e[i]));
        ref_sq += sqr(r[i]);
    }
    double a_lo = -2.0 * rmax / std::max(emax, 1e-12) - 1.0;
    double a_hi = -a_lo;
    double b_lo = -(rmax + 1.0), b_hi = rmax + 1.0;

    auto residual_sq = [&](double a, double b) {
        double s = 0;
        for (size_t i = 0; i < r.size(); ++i) s += sqr(r[i] - a * e[i] - b);
        return s;
    };

    double best_a = 0, best_b = 0, best = residual_sq(0, 0);
    for (int round = 0; round < rounds; ++round) {
        const double da = (a_hi - a_lo) / (grid - 1);
        const double db = (b_hi - b_lo) / (grid - 1);
        for (int i = 0; i < grid; ++i) {
            const double a = a_lo + da * i;
            for (int j = 0; j < grid; ++j) {
                const double b = b_lo + db * j;
                const double s = residual_sq(a, b);
                if (s < best) {
                    best = s;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        a_lo = best_a - 2 * da;
        a_hi = best_a + 2 * da;
        b_lo = best_b - 2 * db;
        b_hi = best_b + 2 * db;
    }
    const double res = std::sqrt(best);
    const double refn = std::sqrt(ref_sq);
    if (res <= 1e-12 * refn) return kRsnrCapDb;
    return std::min(20.0 * std::log10(refn / res), kRsnrCapDb);
}

// ---- built-in self test -------------------------------------------------

// Test-fixture fault injection: flips the sign of the exact adjoint inside
// the dot test so the failure reporting path can be exercised.
enum class SelftestFault { None, NudftAdjointSign };

struct SelftestCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SelftestReport {
    std::vector<SelftestCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline CImage random_cimage(int n, Rng& rng) {
    CImage img(n);
    for (cplx& z : img.v) z = cplx(rng.normal(), rng.normal());
    return img;
}

inline std::vector<KCoord> random_coords(size_t count, Rng& rng) {
    std::vector<KCoord> c(count);
    for (KCoord& k : c) {
        k.kx = rng.uniform(-kPi, kPi * (1.0 - 1e-9));
        k.ky = rng.uniform(-kPi, kPi * (1.0 - 1e-9));
    }
    return c;
}

inline std::vector<cplx> random_cvec(size_t count, Rng& rng) {
    std::vector<cplx> v(count);
    for (cplx& z : v) z = cplx(rng.normal(), rng.normal());
    return v;
}

}  // namespace detail

inline SelftestReport run_selftest(const std::string& filter = "",
                                   SelftestFault fault = SelftestFault::None) {
    SelftestReport report;
    auto want = [&](const std::string& name) {
        return filter.empty() || name.find(filter) != std::string::npos;
    };
    auto add = [&](const std::string& name, bool pass, const std::string& detail) {
        report.checks.push_back({name, pass, detail});
    };
    char buf[128];

    if (want("adjoint.nudft")) {
        Rng rng(101);
        double worst = 0;
        for (int trial = 0; trial < 20; ++trial) {
            CImage x = detail::random_cimage(16, rng);
            auto coords = detail::random_coords(40, rng);
            auto y = detail::random_cvec(coords.size(), rng);
            auto ax = nudft_apply(x, coords);
            CImage aty = nudft_adjoint(y, coords, x.n);
            if (fault == SelftestFault::NudftAdjointSign)
                for (cplx& z : aty.v) z = -z;
            const cplx lhs = cdot(ax, y);
            cplx rhs(0, 0);
            for (size_t i = 0; i < x.v.size(); ++i) rhs += x.v[i] * std::conj(aty.v[i]);
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
        }
        std::snprintf(buf, sizeof(buf), "max rel err %.3e (tol 1e-12)", worst);
        add("adjoint.nudft", worst < 1e-12, buf);
    }

    if (want("adjoint.nufft")) {
        Rng rng(102);
        double worst = 0;
        for (int trial = 0; trial < 20; ++trial) {
            CImage x = detail::random_cimage(32, rng);
            NufftPlan plan(detail::random_coords(60, rng), x.n);
            auto y = detail::random_cvec(plan.sample_count(), rng);
            auto ax = plan.apply(x);
            CImage aty = plan.adjoint(y);
            const cplx lhs = cdot(ax, y);
            cplx rhs(0, 0);
            for (size_t i = 0; i < x.v.size(); ++i) rhs += x.v[i] * std::conj(aty.v[i]);
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
        }
        std::snprintf(buf, sizeof(buf), "max rel err %.3e (tol 1e-6)", worst);
        add("adjoint.nufft", worst < 1e-6, buf);
    }

    if (want("adjoint.system")) {
        Rng rng(103);
        double worst = 0;
        CoilMaps coils;
        coils.n = 16;
        for (int c = 0; c < 3; ++c) coils.maps.push_back(detail::random_cimage(16, rng));
        SpokeStream stream;
        stream.traj = TrajectoryConfig::for_grid(16);
        stream.coils = 3;
        for (int k = 0; k < 9; ++k) {
            Spoke s;
            s.index = k;
            s.angle = spoke_angle(k, stream.traj);
            s.samples.assign(static_cast<size_t>(3) * stream.traj.m_omega, cplx(0, 0));
            stream.spokes.push_back(std::move(s));
        }
        for (int trial = 0; trial < 10; ++trial) {
            SystemOperator op(make_window(4, 3, stream), coils, FourierPath::Gridded);
            CImage x = detail::random_cimage(16, rng);
            std::vector<std::vector<cplx>> y(3);
            for (auto& v : y) v = detail::random_cvec(op.samples_per_coil(), rng);
            auto ax = op.apply(x);
            CImage aty = op.adjoint(y);
            cplx lhs(0, 0);
            for (int c = 0; c < 3; ++c) lhs += cdot(ax[c], y[c]);
            cplx rhs(0, 0);
            for (size_t i = 0; i < x.v.size(); ++i) rhs += x.v[i] * std::conj(aty.v[i]);
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
        }
        std::snprintf(buf, sizeof(buf), "max rel err %.3e (tol 1e-6)", worst);
        add("adjoint.system", worst < 1e-6, buf);
    }

    if (want("gridding.oracle")) {
        Rng rng(104);
        TrajectoryConfig traj = TrajectoryConfig::for_grid(64);
        std::vector<KCoord> coords;
        for (int k = 0; k < 5; ++k) {
            auto c = radial_coords(spoke_angle(k, traj), traj);
            coords.insert(coords.end(), c.begin(), c.end());
        }
        CImage x = detail::random_cimage(64, rng);
        auto exact = nudft_apply(x, coords);
        auto fast = NufftPlan(coords, x.n).apply(x);
        double scale = 0;
        for (const cplx& z : exact) scale = std::max(scale, std::abs(z));
        double worst = 0;
        for (size_t i = 0; i < exact.size(); ++i)
            worst = std::max(worst, std::abs(fast[i] - exact[i]) / scale);
        std::snprintf(buf, sizeof(buf), "max rel err %.3e (tol 1e-3)", worst);
        add("gridding.oracle", worst < 1e-3, buf);
    }

    auto gradcheck = [&](const std::string& name,
                         const std::function<double(const std::vector<Tensor>&)>& f,
                         const std::function<std::vector<Tensor>(Rng&)>& make_inputs,
                         const std::function<std::vector<Tensor>(const std::vector<Tensor>&)>& analytic,
                         double tol, int trials, std::uint64_t seed) {
        if (!want(name)) return;
        Rng rng(seed);
        double worst = 0;
        size_t total = 0;
        for (int trial = 0; trial < trials; ++trial) {
            std::vector<Tensor> inputs = make_inputs(rng);
            GradCheckResult r = fd_max_rel_err(f, inputs, analytic(inputs));
            worst = std::max(worst, r.max_rel_err);
            total += r.checked;
        }
        std::snprintf(buf, sizeof(buf), "max rel err %.3e over %zu entries (tol %.0e)", worst, total,
                      tol);
        add(name, worst < tol, buf);
    };

    // conv2d: loss = || conv(x, w, b) - target ||^2 with a fixed target
    {
        Tensor target;
        auto forward = [&target](const std::vector<Tensor>& in) {
            Tape t;
            int x = t.leaf(in[0]), w = t.leaf(in[1]), b = t.leaf(in[2]);
            return t.value(t.l2_loss(t.conv2d(x, w, b, 1), target)).data[0];
        };
        auto inputs = [&target](Rng& rng) {
            std::vector<Tensor> in{randn_tensor({2, 5, 5}, 1.0, rng), randn_tensor({3, 2, 3, 3}, 0.5, rng),
                                   randn_tensor({3}, 0.5, rng)};
            target = randn_tensor({3, 5, 5}, 1.0, rng);
            return in;
        };
        auto analytic = [&target](const std::vector<Tensor>& in) {
            Tape t;
            int x = t.leaf(in[0], true), w = t.leaf(in[1], true), b = t.leaf(in[2], true);
            auto grads = t.backward(t.l2_loss(t.conv2d(x, w, b, 1), target));
            return std::vector<Tensor>{grads[x], grads[w], grads[b]};
        };
        gradcheck("gradcheck.conv2d", forward, inputs, analytic, 1e-4, 20, 201);
    }

    // batchnorm2d
    {
        Tensor target;
        auto forward = [&target](const std::vector<Tensor>& in) {
            Tape t;
            int x = t.leaf(in[0]), g = t.leaf(in[1]), b = t.leaf(in[2]);
            return t.value(t.l2_loss(t.batchnorm2d(x, g, b, 1e-5), target)).data[0];
        };
        auto inputs = [&target](Rng& rng) {
            std::vector<Tensor> in{randn_tensor({3, 6, 6}, 1.0, rng), randn_tensor({3}, 0.5, rng),
                                   randn_tensor({3}, 0.5, rng)};
            target = randn_tensor({3, 6, 6}, 1.0, rng);
            return in;
        };
        auto analytic = [&target](const std::vector<Tensor>& in) {
            Tape t;
            int x = t.leaf(in[0], true), g = t.leaf(in[1], true), b = t.leaf(in[2], true);
            auto grads = t.backward(t.l2_loss(t.batchnorm2d(x, g, b, 1e-5), target));
            return std::vector<Tensor>{grads[x], grads[g], grads[b]};
        };
        gradcheck("gradcheck.batchnorm", forward, inputs, analytic, 1e-4, 20, 202);
    }

    // relu (inputs kept away from the kink)
    {
        Tensor target;
        auto forward = [&target](const std::vector<Tensor>& in) {
            Tape t;
            return t.value(t.l2_loss(t.relu(t.leaf(in[0])), target)).data[0];
        };
        auto inputs = [&target](Rng& rng) {
            Tensor x = randn_tensor({2, 4, 4}, 1.0, rng);
            for (double& v : x.data)
                if (std::abs(v) < 1e-3) v = v < 0 ? v - 1e-3 : v + 1e-3;
            target = randn_tensor({2, 4, 4}, 1.0, rng);
            return std::vector<Tensor>{x};
        };
        auto analytic = [&target](const std::vector<Tensor>& in) {
            Tape t;
            int x = t.leaf(in[0], true);
            auto grads = t.backward(t.l2_loss(t.relu(x), target));
            return std::vector<Tensor>{grads[x]};
        };
        gradcheck("gradcheck.relu", forward, inputs, analytic, 1e-6, 20, 203);
    }

    // complex pixel product
    {
        Tensor target, cmap;
        auto forward = [&](const std::vector<Tensor>& in) {
            Tape t;
            return t.value(t.l2_loss(t.complex_pixmul(t.leaf(in[0]), cmap), target)).data[0];
        };
        auto inputs = [&](Rng& rng) {
            cmap = randn_tensor({2, 4, 4}, 1.0, rng);
            target = randn_tensor({2, 4, 4}, 1.0, rng);
            return std::vector<Tensor>{randn_tensor({2, 4, 4}, 1.0, rng)};
        };
        auto analytic = [&](const std::vector<Tensor>& in) {
            Tape t;
            int x = t.leaf(in[0], true);
            auto grads = t.backward(t.l2_loss(t.complex_pixmul(x, cmap), target));
            return std::vector<Tensor>{grads[x]};
        };
        gradcheck("gradcheck.pixmul", forward, inputs, analytic, 1e-4, 20, 204);
    }

    // nudft layer (exact and gridded routes share the linear-op backward)
    {
        Tensor target;
        std::shared_ptr<const NufftPlan> plan;
        auto forward = [&](const std::vector<Tensor>& in) {
            Tape t;
            return t.value(t.l2_loss(t.nudft_layer(t.leaf(in[0]), plan, FourierPath::Exact), target))
                .data[0];
        };
        auto inputs = [&](Rng& rng) {
            plan = std::make_shared<NufftPlan>(detail::random_coords(16, rng), 8);
            target = randn_tensor({2, 16}, 1.0, rng);
            return std::vector<Tensor>{randn_tensor({2, 8, 8}, 1.0, rng)};
        };
        auto analytic = [&](const std::vector<Tensor>& in) {
            Tape t;
            int x = t.leaf(in[0], true);
            auto grads = t.backward(t.l2_loss(t.nudft_layer(x, plan, FourierPath::Exact), target));
            return std::vector<Tensor>{grads[x]};
        };
        gradcheck("gradcheck.nudft", forward, inputs, analytic, 1e-4, 20, 205);
    }

    // composed generator -> coil weight -> windowed transform -> loss
    if (want("gradcheck.composed")) {
        Rng rng(206);
        GeneratorConfig gcfg;
        gcfg.latent_hw = 4;
        gcfg.stages = 2;
        gcfg.channels = 4;
        GeneratorParams params = init_generator(gcfg, 42);
        const Tensor z = uniform_tensor({1, 4, 4}, 0.0, 0.1, rng);
        TrajectoryConfig traj = TrajectoryConfig::for_grid(16);
        auto plan = std::make_shared<const NufftPlan>(radial_coords(spoke_angle(0, traj), traj), 16);
        Tensor cmap = randn_tensor({2, 16, 16}, 1.0, rng);
        Tensor target = randn_tensor({2, static_cast<int>(plan->sample_count())}, 1.0, rng);

        auto run = [&](const std::vector<Tensor>& values, bool trainable,
                       std::vector<Tensor>* grads_out) {
            GeneratorParams p = params;
            auto ptrs = p.tensors();
            for (size_t i = 0; i < ptrs.size(); ++i) *ptrs[i] = values[i];
            Tape t;
            GeneratorOnTape bound = push_generator_params(t, p, trainable);
            const int out = generate(t, gcfg, bound, z);
            const int weighted = t.complex_pixmul(out, cmap);
            const int loss = t.l2_loss(t.nudft_layer(weighted, plan, FourierPath::Exact), target);
            if (grads_out) {
                auto grads = t.backward(loss);
                grads_out->clear();
                for (int id : bound.param_ids)
                    grads_out->push_back(grads[id].data.empty()
                                             ? Tensor::zeros(t.value(id).shape)
                                             : grads[id]);
            }
            return t.value(loss).data[0];
        };

        std::vector<Tensor> values;
        for (const Tensor* p : const_cast<const GeneratorParams&>(params).tensors())
            values.push_back(*p);
        std::vector<Tensor> analytic;
        run(values, true, &analytic);
        auto forward = [&](const std::vector<Tensor>& v) { return run(v, false, nullptr); };
        GradCheckResult r = fd_max_rel_err(forward, values, analytic);
        std::snprintf(buf, sizeof(buf), "max rel err %.3e over %zu entries (tol 1e-3)", r.max_rel_err,
                      r.checked);
        add("gradcheck.composed", r.max_rel_err < 1e-3, buf);
    }

    if (want("rsnr.oracle")) {
        Rng rng(207);
        double worst = 0;
        for (int trial = 0; trial < 10; ++trial) {
            CImage ref = detail::random_cimage(16, rng);
            CImage est = detail::random_cimage(16, rng);
            const double closed = rsnr(ref, est).db;
            const double grid = rsnr_grid_oracle(ref, est);
            worst = std::max(worst, std::abs(closed - grid));
        }
        std::snprintf(buf, sizeof(buf), "max |closed - grid| %.4f dB (tol 0.01)", worst);
        add("rsnr.oracle", worst < 0.01, buf);
    }

    return report;
}

}  // namespace tddr
