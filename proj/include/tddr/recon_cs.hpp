#pragma once

#include <memory>

#include "tddr/recon_common.hpp"

namespace tddr {

// Exact 1D total-variation proximal operator (taut-string, Condat-style
// direct pass): minimizes 0.5*||x - y||^2 + lambda * sum |x_{i+1} - x_i|.
inline void tv1d_denoise(const double* y, double* x, int n, double lambda) {
    if (n <= 0) return;
    if (n == 1 || lambda <= 0) {
        for (int i = 0; i < n; ++i) x[i] = y[i];
        return;
    }
    int k = 0, k0 = 0, kminus = 0, kplus = 0;
    double umin = lambda, umax = -lambda;
    double vmin = y[0] - lambda, vmax = y[0] + lambda;
    const double two_lambda = 2.0 * lambda;
    for (;;) {
        while (k == n - 1) {
            if (umin < 0.0) {
                do x[k0++] = vmin;
                while (k0 <= kminus);
                k = kminus = k0;
                vmin = y[k];
                umin = lambda;
                umax = vmin + umin - vmax;
            } else if (umax > 0.0) {
                do x[k0++] = vmax;
                while (k0 <= kplus);
                k = kplus = k0;
                vmax = y[k];
                umax = -lambda;
                umin = vmax + umax - vmin;
            } else {
                vmin += umin / double(k - k0 + 1);
                do x[k0++] = vmin;
                while (k0 <= k);
                return;
            }
        }
        umin += y[k + 1] - vmin;
        if (umin < -lambda) {
            do x[k0++] = vmin;
            while (k0 <= kminus);
            k = kminus = kplus = k0;
            vmin = y[k];
            vmax = vmin + two_lambda;
            umin = lambda;
            umax = -lambda;
        } else {
            umax += y[k + 1] - vmax;
            if (umax > lambda) {
                do x[k0++] = vmax;
                while (k0 <= kplus);
                k = kminus = kplus = k0;
                vmax = y[k];
                vmin = vmax - two_lambda;
                umin = lambda;
                umax = -lambda;
            } else {
                ++k;
                if (umin >= lambda) {
                    kminus = k;
                    vmin += (umin - lambda) / double(kminus - k0 + 1);
                    umin = lambda;
                }
                if (umax <= -lambda) {
                    kplus = k;
                    vmax += (umax + lambda) / double(kplus - k0 + 1);
                    umax = -lambda;
                }
            }
        }
    }
}

struct CsConfig {
    double lambda = 0.05;
    int iterations = 250;
    int power_iterations = 20;
    bool accelerated = true;
    FourierPath path = FourierPath::Gridded;
    std::uint64_t seed = 7;
};

// Temporal-TV compressed sensing over disjoint n-spoke bins:
//   min_X  sum_f ||A_f x_f - y_f||^2 + lambda * sum_pixels TV_t(x)
// solved by proximal gradient (optional FISTA momentum). The TV term acts on
// real and imaginary parts separately so the per-pixel prox stays exact.
inline ReconResult cs_reconstruct(const SpokeStream& stream, const CoilMaps& coils, int n_bin,
                                  const CsConfig& cfg, const FrameWindows* windows = nullptr) {
    stream.validate();
    if (cfg.lambda < 0) throw config_error("cs: lambda must be nonnegative");
    if (cfg.iterations < 1) throw config_error("cs: need at least one iteration");

    FrameWindows w = windows ? *windows : FrameWindows::binned(stream.count(), n_bin);
    const int F = w.count();
    const int n = coils.n;
    const size_t pixels = static_cast<size_t>(n) * n;

    std::vector<std::unique_ptr<SystemOperator>> ops;
    std::vector<std::vector<std::vector<cplx>>> targets;
    for (int f = 0; f < F; ++f) {
        ops.push_back(std::make_unique<SystemOperator>(make_window_from_members(w.members[f], stream),
                                                       coils, cfg.path));
        targets.push_back(gather_window_samples(stream, w.members[f]));
    }

    // Lipschitz constant of the fidelity gradient: 2 * max_f ||A_f||^2,
    // estimated by power iteration on A^H A with a small safety margin.
    double op_norm_sq = 0;
    {
        Rng rng(derive_seed(cfg.seed, 0x706f7765));
        CImage v(n);
        for (cplx& z : v.v) z = cplx(rng.normal(), rng.normal());
        for (int f = 0; f < F; ++f) {
            CImage u = v;
            double lam = 0;
            for (int it = 0; it < cfg.power_iterations; ++it) {
                CImage nu = ops[f]->adjoint(ops[f]->apply(u));
                lam = cnorm(nu.v);
                const double scale = 1.0 / std::max(lam, 1e-300);
                for (size_t i = 0; i < nu.v.size(); ++i) u.v[i] = nu.v[i] * scale;
            }
            op_norm_sq = std::max(op_norm_sq, lam);
        }
    }
    const double lipschitz = 2.0 * op_norm_sq * 1.05;
    const double step = 1.0 / lipschitz;

    std::vector<CImage> x(F, CImage(n)), z(F, CImage(n)), x_prev(F, CImage(n));
    double momentum_t = 1.0;
    ReconResult r;
    r.method = "cs";
    r.times = w.times;
    r.series.n = n;
    r.series.dt = stream.traj.dt;
    r.loss_trace.reserve(cfg.iterations);

    auto objective = [&](const std::vector<CImage>& frames) {
        double fid = 0;
        for (int f = 0; f < F; ++f) {
            auto pred = ops[f]->apply(frames[f]);
            for (int c = 0; c < coils.count(); ++c)
                for (size_t i = 0; i < pred[c].size(); ++i)
                    fid += std::norm(pred[c][i] - targets[f][c][i]);
        }
        double tv = 0;
        for (size_t p = 0; p < pixels; ++p)
            for (int f = 0; f + 1 < F; ++f) {
                const cplx d = frames[f + 1].v[p] - frames[f].v[p];
                tv += std::abs(d.real()) + std::abs(d.imag());
            }
        return fid + cfg.lambda * tv;
    };

    int rising = 0;
    double prev_obj = 0;
    for (int it = 0; it < cfg.iterations; ++it) {
        // gradient step on the fidelity term at the momentum point
        std::vector<CImage> g(F, CImage(n));
        for (int f = 0; f < F; ++f) {
            auto pred = ops[f]->apply(z[f]);
            for (int c = 0; c < coils.count(); ++c)
                for (size_t i = 0; i < pred[c].size(); ++i) pred[c][i] -= targets[f][c][i];
            CImage back = ops[f]->adjoint(pred);
            for (size_t i = 0; i < pixels; ++i) g[f].v[i] = z[f].v[i] - step * 2.0 * back.v[i];
        }

        // exact temporal TV prox per pixel
        std::vector<CImage> x_new(F, CImage(n));
        if (F == 1 || cfg.lambda == 0) {
            x_new = g;
        } else {
#ifdef _OPENMP
#pragma omp parallel
#endif
            {
                std::vector<double> buf(F), out(F);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
                for (long long p = 0; p < static_cast<long long>(pixels); ++p) {
                    for (int f = 0; f < F; ++f) buf[f] = g[f].v[p].real();
                    tv1d_denoise(buf.data(), out.data(), F, step * cfg.lambda);
                    for (int f = 0; f < F; ++f) x_new[f].v[p].real(out[f]);
                    for (int f = 0; f < F; ++f) buf[f] = g[f].v[p].imag();
                    tv1d_denoise(buf.data(), out.data(), F, step * cfg.lambda);
                    for (int f = 0; f < F; ++f) x_new[f].v[p].imag(out[f]);
                }
            }
        }

        if (cfg.accelerated) {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum_t * momentum_t));
            const double gamma = (momentum_t - 1.0) / t_next;
            for (int f = 0; f < F; ++f)
                for (size_t i = 0; i < pixels; ++i)
                    z[f].v[i] = x_new[f].v[i] + gamma * (x_new[f].v[i] - x_prev[f].v[i]);
            momentum_t = t_next;
        } else {
            z = x_new;
        }
        x_prev = x_new;
        x = std::move(x_new);

        const double obj = objective(x);
        if (!std::isfinite(obj))
            throw numeric_error("cs: non-finite objective at iteration " + std::to_string(it));
        if (it > 0 && obj > prev_obj) {
            if (++rising >= 50)
                throw numeric_error("cs: objective increased for 50 consecutive iterations");
        } else {
            rising = 0;
        }
        prev_obj = obj;
        r.loss_trace.push_back(obj);
    }

    r.series.frames = std::move(x);
    return r;
}

}  // namespace tddr
