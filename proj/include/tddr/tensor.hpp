#pragma once

#include <numeric>
#include <vector>

#include "tddr/common.hpp"

namespace tddr {

// Dense row-major real tensor. Complex quantities are carried as two real
// channels (channel 0 real plane, channel 1 imaginary plane).
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != static_cast<size_t>(numel_of(shape)))
            throw shape_error("tensor: data length does not match shape");
    }

    static Tensor zeros(std::vector<int> s) {
        Tensor t;
        t.shape = std::move(s);
        t.data.assign(static_cast<size_t>(numel_of(t.shape)), 0.0);
        return t;
    }

    static Tensor full(std::vector<int> s, double v) {
        Tensor t = zeros(std::move(s));
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }

    static long long numel_of(const std::vector<int>& s) {
        long long n = 1;
        for (int e : s) {
            if (e <= 0) throw shape_error("tensor: nonpositive extent");
            n *= e;
        }
        return n;
    }

    long long numel() const { return static_cast<long long>(data.size()); }

    int dim(size_t i) const { return shape.at(i); }
    size_t rank() const { return shape.size(); }

    // 3D (c, h, w) accessors for image-like tensors.
    double& at(int c, int y, int x) {
        return data[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x];
    }

    // 4D (o, i, ky, kx) accessors for conv weights.
    double& at4(int o, int i, int ky, int kx) {
        return data[((static_cast<size_t>(o) * shape[1] + i) * shape[2] + ky) * shape[3] + kx];
    }
    double at4(int o, int i, int ky, int kx) const {
        return data[((static_cast<size_t>(o) * shape[1] + i) * shape[2] + ky) * shape[3] + kx];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline Tensor randn_tensor(std::vector<int> shape, double std, Rng& rng) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = std * rng.normal();
    return t;
}

inline Tensor uniform_tensor(std::vector<int> shape, double lo, double hi, Rng& rng) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

inline double dot(const Tensor& a, const Tensor& b) {
    double s = 0;
    for (size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

inline double norm2(const Tensor& a) { return std::sqrt(dot(a, a)); }

}  // namespace tddr
