#pragma once

#include <string>
#include <vector>

#include "tddr/image.hpp"

namespace tddr {

inline constexpr double kRsnrCapDb = 300.0;

struct RsnrResult {
    double db = 0;
    double a = 0, b = 0;
    bool degenerate_fit = false;  // estimate had no variance; offset-only fit
};

// Regressed SNR on magnitude images: least-squares fit of |ref| by
// a*|est| + b, then 20*log10(|||ref||| / ||residual||). Exact fits cap at
// 300 dB; the fit absorbs any positive scaling or constant offset of est.
inline RsnrResult rsnr(const CImage& ref, const CImage& est) {
    if (ref.n != est.n) throw shape_error("rsnr: image sizes differ");
    const std::vector<double> r = magnitude(ref);
    const std::vector<double> e = magnitude(est);
    const double count = double(r.size());

    double mr = 0, me = 0;
    for (size_t i = 0; i < r.size(); ++i) {
        mr += r[i];
        me += e[i];
    }
    mr /= count;
    me /= count;
    double cov = 0, var = 0;
    for (size_t i = 0; i < r.size(); ++i) {
        cov += (e[i] - me) * (r[i] - mr);
        var += sqr(e[i] - me);
    }

    RsnrResult out;
    if (var <= 0) {
        out.degenerate_fit = true;
        out.a = 0;
        out.b = mr;
    } else {
        out.a = cov / var;
        out.b = mr - out.a * me;
    }

    double ref_sq = 0, res_sq = 0;
    for (size_t i = 0; i < r.size(); ++i) {
        ref_sq += sqr(r[i]);
        res_sq += sqr(r[i] - out.a * e[i] - out.b);
    }
    const double ref_norm = std::sqrt(ref_sq);
    const double res_norm = std::sqrt(res_sq);
    if (res_norm <= 1e-12 * ref_norm) {
        out.db = kRsnrCapDb;
    } else {
        out.db = 20.0 * std::log10(ref_norm / res_norm);
        if (out.db > kRsnrCapDb) out.db = kRsnrCapDb;
    }
    return out;
}

struct MetricReport {
    std::vector<double> per_frame_db;
    std::vector<double> per_frame_a, per_frame_b;
    double mean_db = 0;
    std::string metadata;
};

inline MetricReport rsnr_series(const FrameSeries& ref, const FrameSeries& est) {
    if (ref.count() != est.count()) throw shape_error("rsnr_series: frame counts differ");
    MetricReport rep;
    double sum = 0;
    for (int k = 0; k < ref.count(); ++k) {
        RsnrResult r = rsnr(ref.frames[k], est.frames[k]);
        rep.per_frame_db.push_back(r.db);
        rep.per_frame_a.push_back(r.a);
        rep.per_frame_b.push_back(r.b);
        sum += r.db;
    }
    rep.mean_db = sum / double(ref.count());
    return rep;
}

// (y-t) magnitude section through one column: row t holds |x_t[., column]|.
inline Tensor cross_section(const FrameSeries& series, int column) {
    if (series.count() < 1) throw shape_error("cross_section: empty series");
    if (column < 0 || column >= series.n) throw config_error("cross_section: column out of range");
    Tensor out = Tensor::zeros({series.count(), series.n});
    for (int k = 0; k < series.count(); ++k)
        for (int y = 0; y < series.n; ++y)
            out.data[static_cast<size_t>(k) * series.n + y] = std::abs(series.frames[k].at(y, column));
    return out;
}

struct TemporalStd {
    double mean = 0;             // spatial mean of the per-pixel std
    std::vector<double> map;     // per-pixel std of magnitude over time
    int n = 0;
};

inline TemporalStd temporal_std(const FrameSeries& series) {
    const int K = series.count();
    if (K < 2) throw config_error("temporal_std: need at least two frames");
    TemporalStd out;
    out.n = series.n;
    const size_t pixels = static_cast<size_t>(series.n) * series.n;
    out.map.assign(pixels, 0.0);
    std::vector<double> mean(pixels, 0.0);
    for (int k = 0; k < K; ++k)
        for (size_t i = 0; i < pixels; ++i) mean[i] += std::abs(series.frames[k].v[i]);
    for (double& m : mean) m /= double(K);
    for (int k = 0; k < K; ++k)
        for (size_t i = 0; i < pixels; ++i) out.map[i] += sqr(std::abs(series.frames[k].v[i]) - mean[i]);
    double acc = 0;
    for (size_t i = 0; i < pixels; ++i) {
        out.map[i] = std::sqrt(out.map[i] / double(K));  // population std over t
        acc += out.map[i];
    }
    out.mean = acc / double(pixels);
    return out;
}

}  // namespace tddr
