#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tddr/system.hpp"
#include "tddr/tensor.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tddr {

enum class OpKind {
    Leaf,
    Conv2d,
    BatchNorm2d,
    Relu,
    UpsampleNn2x,
    ComplexPixmul,
    NudftLayer,
    L2Loss,
    AddN,
};

// Append-only reverse-mode tape over the fixed operator set the generator and
// its measurement loss require. Single-owner: one thread records and runs
// backward; parallelism lives inside the op kernels, where every output
// element is reduced in a fixed order regardless of thread count.
class Tape {
public:
    struct Node {
        OpKind kind = OpKind::Leaf;
        int a = -1, b = -1, c = -1;
        std::vector<int> list;  // AddN inputs
        int pad = 0;
        double eps = 0;
        Tensor constant;  // pixmul map / l2 target
        std::shared_ptr<const NufftPlan> plan;
        FourierPath path = FourierPath::Gridded;
        bool is_param = false;
        std::vector<double> saved_mean, saved_istd;  // batchnorm forward context
    };

    int leaf(Tensor value, bool is_param = false) {
        Node n;
        n.kind = OpKind::Leaf;
        n.is_param = is_param;
        return push(std::move(n), std::move(value));
    }

    int conv2d(int x, int w, int b, int pad) {
        const Tensor& xv = value(x);
        const Tensor& wv = value(w);
        const Tensor& bv = value(b);
        if (xv.rank() != 3 || wv.rank() != 4 || bv.rank() != 1)
            throw shape_error("conv2d: expected x (c,h,w), w (o,i,kh,kw), b (o)");
        if (wv.dim(1) != xv.dim(0))
            throw shape_error("conv2d: input channels do not match kernel");
        if (bv.dim(0) != wv.dim(0)) throw shape_error("conv2d: bias length does not match filters");
        if (pad < 0) throw config_error("conv2d: negative padding");
        const int oh = xv.dim(1) + 2 * pad - wv.dim(2) + 1;
        const int ow = xv.dim(2) + 2 * pad - wv.dim(3) + 1;
        if (oh <= 0 || ow <= 0) throw shape_error("conv2d: kernel larger than padded input");

        Node n;
        n.kind = OpKind::Conv2d;
        n.a = x;
        n.b = w;
        n.c = b;
        n.pad = pad;
        return push(std::move(n), conv_forward(xv, wv, bv, pad, oh, ow));
    }

    int batchnorm2d(int x, int gamma, int beta, double eps) {
        if (eps <= 0) throw config_error("batchnorm2d: eps must be positive");
        const Tensor& xv = value(x);
        const Tensor& gv = value(gamma);
        const Tensor& bv = value(beta);
        if (xv.rank() != 3) throw shape_error("batchnorm2d: expected (c,h,w) input");
        if (gv.rank() != 1 || bv.rank() != 1 || gv.dim(0) != xv.dim(0) || bv.dim(0) != xv.dim(0))
            throw shape_error("batchnorm2d: gamma/beta must have one entry per channel");

        Node n;
        n.kind = OpKind::BatchNorm2d;
        n.a = x;
        n.b = gamma;
        n.c = beta;
        n.eps = eps;
        Tensor out = bn_forward(xv, gv, bv, eps, n.saved_mean, n.saved_istd);
        return push(std::move(n), std::move(out));
    }

    int relu(int x) {
        const Tensor& xv = value(x);
        Tensor out = xv;
        for (double& v : out.data) v = v > 0 ? v : 0.0;
        Node n;
        n.kind = OpKind::Relu;
        n.a = x;
        return push(std::move(n), std::move(out));
    }

    int upsample_nn2x(int x) {
        const Tensor& xv = value(x);
        if (xv.rank() != 3) throw shape_error("upsample_nn2x: expected (c,h,w) input");
        const int c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
        Tensor out = Tensor::zeros({c, 2 * h, 2 * w});
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < h; ++y)
                for (int xx = 0; xx < w; ++xx) {
                    const double v = xv.at(ch, y, xx);
                    out.at(ch, 2 * y, 2 * xx) = v;
                    out.at(ch, 2 * y, 2 * xx + 1) = v;
                    out.at(ch, 2 * y + 1, 2 * xx) = v;
                    out.at(ch, 2 * y + 1, 2 * xx + 1) = v;
                }
        Node n;
        n.kind = OpKind::UpsampleNn2x;
        n.a = x;
        return push(std::move(n), std::move(out));
    }

    // Pixel-wise product with a constant complex image (two-channel tensor);
    // the constant is not differentiated.
    int complex_pixmul(int x, Tensor cmap) {
        const Tensor& xv = value(x);
        if (xv.rank() != 3 || xv.dim(0) != 2) throw shape_error("complex_pixmul: x must be (2,h,w)");
        if (cmap.shape != xv.shape) throw shape_error("complex_pixmul: constant spatial size mismatch");
        Tensor out = Tensor::zeros(xv.shape);
        const size_t plane = out.data.size() / 2;
        const double* xr = xv.data.data();
        const double* xi = xr + plane;
        const double* cr = cmap.data.data();
        const double* ci = cr + plane;
        for (size_t i = 0; i < plane; ++i) {
            out.data[i] = xr[i] * cr[i] - xi[i] * ci[i];
            out.data[plane + i] = xr[i] * ci[i] + xi[i] * cr[i];
        }
        Node n;
        n.kind = OpKind::ComplexPixmul;
        n.a = x;
        n.constant = std::move(cmap);
        return push(std::move(n), std::move(out));
    }

    int nudft_layer(int x, std::shared_ptr<const NufftPlan> plan,
                    FourierPath path = FourierPath::Gridded) {
        const Tensor& xv = value(x);
        if (xv.rank() != 3 || xv.dim(0) != 2 || xv.dim(1) != plan->n_image() || xv.dim(2) != plan->n_image())
            throw shape_error("nudft_layer: x must be (2,n,n) matching the plan grid");
        Node n;
        n.kind = OpKind::NudftLayer;
        n.a = x;
        n.plan = plan;
        n.path = path;
        Tensor out = measurements_to_tensor(
            path == FourierPath::Exact ? nudft_apply(tensor_to_cimage(xv), plan->coords())
                                       : plan->apply(tensor_to_cimage(xv)));
        return push(std::move(n), std::move(out));
    }

    int l2_loss(int pred, Tensor target) {
        const Tensor& pv = value(pred);
        if (pv.shape != target.shape) throw shape_error("l2_loss: prediction/target length mismatch");
        double s = 0;
        for (size_t i = 0; i < pv.data.size(); ++i) s += sqr(pv.data[i] - target.data[i]);
        Node n;
        n.kind = OpKind::L2Loss;
        n.a = pred;
        n.constant = std::move(target);
        return push(std::move(n), Tensor({1}, {s}));
    }

    int add_n(std::vector<int> terms) {
        if (terms.empty()) throw shape_error("add_n: no terms");
        double s = 0;
        for (int t : terms) {
            if (value(t).numel() != 1) throw shape_error("add_n: terms must be scalars");
            s += value(t).data[0];
        }
        Node n;
        n.kind = OpKind::AddN;
        n.list = std::move(terms);
        return push(std::move(n), Tensor({1}, {s}));
    }

    const Tensor& value(int id) const { return values_.at(id); }
    const Node& node(int id) const { return nodes_.at(id); }
    int size() const { return static_cast<int>(nodes_.size()); }

    // Reverse sweep from a scalar loss; returns one gradient slot per node
    // (empty tensor where no gradient flowed).
    std::vector<Tensor> backward(int loss) const {
        if (value(loss).numel() != 1) throw shape_error("backward: loss must be a scalar node");
        std::vector<Tensor> grads(nodes_.size());
        grads[loss] = Tensor({1}, {1.0});
        for (int i = loss; i >= 0; --i) {
            if (grads[i].data.empty()) continue;
            const Node& n = nodes_[i];
            const Tensor& g = grads[i];
            switch (n.kind) {
                case OpKind::Leaf:
                    break;
                case OpKind::Conv2d:
                    conv_backward(value(n.a), value(n.b), n.pad, g, accum(grads, n.a, value(n.a).shape),
                                  accum(grads, n.b, value(n.b).shape), accum(grads, n.c, value(n.c).shape));
                    break;
                case OpKind::BatchNorm2d:
                    bn_backward(value(n.a), value(n.b), n.saved_mean, n.saved_istd, g,
                                accum(grads, n.a, value(n.a).shape), accum(grads, n.b, value(n.b).shape),
                                accum(grads, n.c, value(n.c).shape));
                    break;
                case OpKind::Relu: {
                    Tensor& gx = accum(grads, n.a, value(n.a).shape);
                    const Tensor& xv = value(n.a);
                    for (size_t k = 0; k < gx.data.size(); ++k)
                        if (xv.data[k] > 0) gx.data[k] += g.data[k];
                    break;
                }
                case OpKind::UpsampleNn2x: {
                    Tensor& gx = accum(grads, n.a, value(n.a).shape);
                    const int c = gx.dim(0), h = gx.dim(1), w = gx.dim(2);
                    for (int ch = 0; ch < c; ++ch)
                        for (int y = 0; y < h; ++y)
                            for (int xx = 0; xx < w; ++xx)
                                gx.at(ch, y, xx) += g.at(ch, 2 * y, 2 * xx) + g.at(ch, 2 * y, 2 * xx + 1) +
                                                    g.at(ch, 2 * y + 1, 2 * xx) +
                                                    g.at(ch, 2 * y + 1, 2 * xx + 1);
                    break;
                }
                case OpKind::ComplexPixmul: {
                    // d/dx of c*x under the real pairing: conj(c) * g
                    Tensor& gx = accum(grads, n.a, value(n.a).shape);
                    const size_t plane = gx.data.size() / 2;
                    const double* cr = n.constant.data.data();
                    const double* ci = cr + plane;
                    const double* gr = g.data.data();
                    const double* gi = gr + plane;
                    for (size_t k = 0; k < plane; ++k) {
                        gx.data[k] += gr[k] * cr[k] + gi[k] * ci[k];
                        gx.data[plane + k] += -gr[k] * ci[k] + gi[k] * cr[k];
                    }
                    break;
                }
                case OpKind::NudftLayer: {
                    Tensor& gx = accum(grads, n.a, value(n.a).shape);
                    std::vector<cplx> gy = tensor_to_measurements(g);
                    CImage back = (n.path == FourierPath::Exact)
                                      ? nudft_adjoint(gy, n.plan->coords(), n.plan->n_image())
                                      : n.plan->adjoint(gy);
                    const size_t plane = gx.data.size() / 2;
                    for (size_t k = 0; k < plane; ++k) {
                        gx.data[k] += back.v[k].real();
                        gx.data[plane + k] += back.v[k].imag();
                    }
                    break;
                }
                case OpKind::L2Loss: {
                    Tensor& gp = accum(grads, n.a, value(n.a).shape);
                    const Tensor& pv = value(n.a);
                    const double gs = g.data[0];
                    for (size_t k = 0; k < gp.data.size(); ++k)
                        gp.data[k] += 2.0 * gs * (pv.data[k] - n.constant.data[k]);
                    break;
                }
                case OpKind::AddN:
                    for (int t : n.list) accum(grads, t, {1}).data[0] += g.data[0];
                    break;
            }
        }
        return grads;
    }

    // Recompute every non-leaf value from the recorded graph, in place.
    // Reproduces the original values bit-exactly for fixed leaf inputs.
    void replay() {
        for (size_t i = 0; i < nodes_.size(); ++i) {
            Node& n = nodes_[i];
            switch (n.kind) {
                case OpKind::Leaf:
                    break;
                case OpKind::Conv2d: {
                    const Tensor& xv = value(n.a);
                    const Tensor& wv = value(n.b);
                    const int oh = xv.dim(1) + 2 * n.pad - wv.dim(2) + 1;
                    const int ow = xv.dim(2) + 2 * n.pad - wv.dim(3) + 1;
                    values_[i] = conv_forward(xv, wv, value(n.c), n.pad, oh, ow);
                    break;
                }
                case OpKind::BatchNorm2d:
                    values_[i] = bn_forward(value(n.a), value(n.b), value(n.c), n.eps, n.saved_mean,
                                            n.saved_istd);
                    break;
                case OpKind::Relu: {
                    Tensor out = value(n.a);
                    for (double& v : out.data) v = v > 0 ? v : 0.0;
                    values_[i] = std::move(out);
                    break;
                }
                case OpKind::UpsampleNn2x: {
                    const Tensor& xv = value(n.a);
                    const int c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
                    Tensor out = Tensor::zeros({c, 2 * h, 2 * w});
                    for (int ch = 0; ch < c; ++ch)
                        for (int y = 0; y < h; ++y)
                            for (int xx = 0; xx < w; ++xx) {
                                const double v = xv.at(ch, y, xx);
                                out.at(ch, 2 * y, 2 * xx) = v;
                                out.at(ch, 2 * y, 2 * xx + 1) = v;
                                out.at(ch, 2 * y + 1, 2 * xx) = v;
                                out.at(ch, 2 * y + 1, 2 * xx + 1) = v;
                            }
                    values_[i] = std::move(out);
                    break;
                }
                case OpKind::ComplexPixmul: {
                    const Tensor& xv = value(n.a);
                    Tensor out = Tensor::zeros(xv.shape);
                    const size_t plane = out.data.size() / 2;
                    for (size_t k = 0; k < plane; ++k) {
                        const double xr = xv.data[k], xi = xv.data[plane + k];
                        const double cr = n.constant.data[k], ci = n.constant.data[plane + k];
                        out.data[k] = xr * cr - xi * ci;
                        out.data[plane + k] = xr * ci + xi * cr;
                    }
                    values_[i] = std::move(out);
                    break;
                }
                case OpKind::NudftLayer:
                    values_[i] = measurements_to_tensor(
                        n.path == FourierPath::Exact
                            ? nudft_apply(tensor_to_cimage(value(n.a)), n.plan->coords())
                            : n.plan->apply(tensor_to_cimage(value(n.a))));
                    break;
                case OpKind::L2Loss: {
                    const Tensor& pv = value(n.a);
                    double s = 0;
                    for (size_t k = 0; k < pv.data.size(); ++k)
                        s += sqr(pv.data[k] - n.constant.data[k]);
                    values_[i] = Tensor({1}, {s});
                    break;
                }
                case OpKind::AddN: {
                    double s = 0;
                    for (int t : n.list) s += value(t).data[0];
                    values_[i] = Tensor({1}, {s});
                    break;
                }
            }
        }
    }

    static Tensor measurements_to_tensor(const std::vector<cplx>& y) {
        Tensor t = Tensor::zeros({2, static_cast<int>(y.size())});
        for (size_t i = 0; i < y.size(); ++i) {
            t.data[i] = y[i].real();
            t.data[y.size() + i] = y[i].imag();
        }
        return t;
    }

    static std::vector<cplx> tensor_to_measurements(const Tensor& t) {
        if (t.rank() != 2 || t.dim(0) != 2) throw shape_error("expected (2,p) measurement tensor");
        const size_t p = static_cast<size_t>(t.dim(1));
        std::vector<cplx> y(p);
        for (size_t i = 0; i < p; ++i) y[i] = cplx(t.data[i], t.data[p + i]);
        return y;
    }

private:
    int push(Node n, Tensor v) {
        nodes_.push_back(std::move(n));
        values_.push_back(std::move(v));
        return static_cast<int>(nodes_.size()) - 1;
    }

    static Tensor& accum(std::vector<Tensor>& grads, int id, const std::vector<int>& shape) {
        if (grads[id].data.empty()) grads[id] = Tensor::zeros(shape);
        return grads[id];
    }

    static Tensor conv_forward(const Tensor& x, const Tensor& w, const Tensor& b, int pad, int oh,
                               int ow) {
        const int ic = x.dim(0), h = x.dim(1), wd = x.dim(2);
        const int oc = w.dim(0), kh = w.dim(2), kw = w.dim(3);
        Tensor out = Tensor::zeros({oc, oh, ow});
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int o = 0; o < oc; ++o) {
            double* outp = out.data.data() + static_cast<size_t>(o) * oh * ow;
            const double bo = b.data[o];
            for (int i = 0; i < static_cast<int>(static_cast<size_t>(oh) * ow); ++i) outp[i] = bo;
            for (int i = 0; i < ic; ++i) {
                const double* xp = x.data.data() + static_cast<size_t>(i) * h * wd;
                for (int ky = 0; ky < kh; ++ky)
                    for (int kx = 0; kx < kw; ++kx) {
                        const double wv = w.at4(o, i, ky, kx);
                        if (wv == 0.0) continue;
                        const int dy = ky - pad, dx = kx - pad;
                        const int y0 = std::max(0, -dy), y1 = std::min(oh, h - dy);
                        const int x0 = std::max(0, -dx), x1 = std::min(ow, wd - dx);
                        for (int y = y0; y < y1; ++y) {
                            double* dst = outp + static_cast<size_t>(y) * ow;
                            const double* src = xp + static_cast<size_t>(y + dy) * wd + dx;
                            for (int xx = x0; xx < x1; ++xx) dst[xx] += wv * src[xx];
                        }
                    }
            }
        }
        return out;
    }

    static void conv_backward(const Tensor& x, const Tensor& w, int pad, const Tensor& g, Tensor& gx,
                              Tensor& gw, Tensor& gb) {
        const int ic = x.dim(0), h = x.dim(1), wd = x.dim(2);
        const int oc = w.dim(0), kh = w.dim(2), kw = w.dim(3);
        const int oh = g.dim(1), ow = g.dim(2);

        // d/dbias and d/dweight: each output slot owned by one (o[,i,ky,kx]).
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int o = 0; o < oc; ++o) {
            const double* gp = g.data.data() + static_cast<size_t>(o) * oh * ow;
            double s = 0;
            for (int i = 0; i < static_cast<int>(static_cast<size_t>(oh) * ow); ++i) s += gp[i];
            gb.data[o] += s;
            for (int i = 0; i < ic; ++i) {
                const double* xp = x.data.data() + static_cast<size_t>(i) * h * wd;
                for (int ky = 0; ky < kh; ++ky)
                    for (int kx = 0; kx < kw; ++kx) {
                        const int dy = ky - pad, dx = kx - pad;
                        const int y0 = std::max(0, -dy), y1 = std::min(oh, h - dy);
                        const int x0 = std::max(0, -dx), x1 = std::min(ow, wd - dx);
                        double acc = 0;
                        for (int y = y0; y < y1; ++y) {
                            const double* grow = gp + static_cast<size_t>(y) * ow;
                            const double* xrow = xp + static_cast<size_t>(y + dy) * wd + dx;
                            for (int xx = x0; xx < x1; ++xx) acc += grow[xx] * xrow[xx];
                        }
                        gw.at4(o, i, ky, kx) += acc;
                    }
            }
        }

        // d/dx: full correlation with the flipped kernel; each input element
        // is an independent fixed-order reduction.
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int i = 0; i < ic; ++i) {
            double* gxp = gx.data.data() + static_cast<size_t>(i) * h * wd;
            for (int o = 0; o < oc; ++o) {
                const double* gp = g.data.data() + static_cast<size_t>(o) * oh * ow;
                for (int ky = 0; ky < kh; ++ky)
                    for (int kx = 0; kx < kw; ++kx) {
                        const double wv = w.at4(o, i, ky, kx);
                        if (wv == 0.0) continue;
                        const int dy = ky - pad, dx = kx - pad;
                        // input (iy,ix) receives g(iy-dy, ix-dx)
                        const int y0 = std::max(0, dy), y1 = std::min(h, oh + dy);
                        const int x0 = std::max(0, dx), x1 = std::min(wd, ow + dx);
                        for (int y = y0; y < y1; ++y) {
                            double* dst = gxp + static_cast<size_t>(y) * wd;
                            const double* src = gp + static_cast<size_t>(y - dy) * ow - dx;
                            for (int xx = x0; xx < x1; ++xx) dst[xx] += wv * src[xx];
                        }
                    }
            }
        }
    }

    static Tensor bn_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps,
                             std::vector<double>& mean_out, std::vector<double>& istd_out) {
        const int c = x.dim(0);
        const size_t m = static_cast<size_t>(x.dim(1)) * x.dim(2);
        Tensor out = Tensor::zeros(x.shape);
        mean_out.assign(c, 0.0);
        istd_out.assign(c, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int ch = 0; ch < c; ++ch) {
            const double* xp = x.data.data() + m * ch;
            double* op = out.data.data() + m * ch;
            double mu = 0;
            for (size_t i = 0; i < m; ++i) mu += xp[i];
            mu /= double(m);
            double var = 0;
            for (size_t i = 0; i < m; ++i) var += sqr(xp[i] - mu);
            var /= double(m);
            const double istd = 1.0 / std::sqrt(var + eps);
            const double gch = gamma.data[ch], bch = beta.data[ch];
            for (size_t i = 0; i < m; ++i) op[i] = gch * (xp[i] - mu) * istd + bch;
            mean_out[ch] = mu;
            istd_out[ch] = istd;
        }
        return out;
    }

    static void bn_backward(const Tensor& x, const Tensor& gamma, const std::vector<double>& mean,
                            const std::vector<double>& istd, const Tensor& g, Tensor& gx, Tensor& ggamma,
                            Tensor& gbeta) {
        const int c = x.dim(0);
        const size_t m = static_cast<size_t>(x.dim(1)) * x.dim(2);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int ch = 0; ch < c; ++ch) {
            const double* xp = x.data.data() + m * ch;
            const double* gp = g.data.data() + m * ch;
            double* gxp = gx.data.data() + m * ch;
            double sum_g = 0, sum_gx = 0;
            for (size_t i = 0; i < m; ++i) {
                const double xhat = (xp[i] - mean[ch]) * istd[ch];
                sum_g += gp[i];
                sum_gx += gp[i] * xhat;
            }
            ggamma.data[ch] += sum_gx;
            gbeta.data[ch] += sum_g;
            const double k = gamma.data[ch] * istd[ch];
            const double mg = sum_g / double(m);
            const double mgx = sum_gx / double(m);
            for (size_t i = 0; i < m; ++i) {
                const double xhat = (xp[i] - mean[ch]) * istd[ch];
                gxp[i] += k * (gp[i] - mg - xhat * mgx);
            }
        }
    }

    std::vector<Node> nodes_;
    std::vector<Tensor> values_;
};

}  // namespace tddr
