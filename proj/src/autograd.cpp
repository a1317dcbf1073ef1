#include "wavecast/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace wavecast {

namespace {

std::size_t trailing_numel(const Tensor& t) {
    std::size_t n = 1;
    for (int i = 1; i < t.ndim(); ++i) n *= static_cast<std::size_t>(t.dim(i));
    return n;
}

} // namespace

NodeId Graph::push(Node n) {
    n.grad = Tensor(n.value.shape, 0.0);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::input(Tensor v) {
    Node n;
    n.op = Op::Input;
    n.value = std::move(v);
    return push(std::move(n));
}

NodeId Graph::param(Tensor v) {
    Node n;
    n.op = Op::Param;
    n.value = std::move(v);
    NodeId id = push(std::move(n));
    params_.push_back(id);
    return id;
}

Tensor& Graph::leaf_value(NodeId id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.op != Op::Input && n.op != Op::Param)
        throw ArgumentError("leaf_value on non-leaf node");
    return n.value;
}

Tensor Graph::eval(const Node& n) const {
    auto in = [&](int i) -> const Tensor& { return value(n.inputs[static_cast<std::size_t>(i)]); };
    switch (n.op) {
        case Op::Input:
        case Op::Param:
            return n.value;
        case Op::Conv1d:
            return wavecast::conv1d(in(0), in(1), n.a0);
        case Op::Conv2d:
            return wavecast::conv2d(in(0), in(1));
        case Op::Affine:
            return wavecast::affine(in(0), in(1), in(2));
        case Op::Relu:
            return wavecast::relu(in(0));
        case Op::Softmax:
            return wavecast::softmax(in(0));
        case Op::SoftmaxCols: {
            const Tensor& x = in(0);
            const int b = x.dim(0), w = x.dim(1);
            Tensor out(x.shape);
            for (int j = 0; j < w; ++j) {
                double mx = x.at(0, j);
                for (int i = 1; i < b; ++i) mx = std::max(mx, x.at(i, j));
                double s = 0.0;
                for (int i = 0; i < b; ++i) s += std::exp(x.at(i, j) - mx);
                for (int i = 0; i < b; ++i) out.at(i, j) = std::exp(x.at(i, j) - mx) / s;
            }
            return out;
        }
        case Op::Concat: {
            std::vector<Tensor> parts;
            parts.reserve(n.inputs.size());
            for (NodeId id : n.inputs) parts.push_back(value(id));
            return wavecast::concat(parts);
        }
        case Op::Add: {
            Tensor out = in(0);
            const Tensor& b = in(1);
            for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] += b.data[i];
            return out;
        }
        case Op::Mul: {
            Tensor out = in(0);
            const Tensor& b = in(1);
            for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] *= b.data[i];
            return out;
        }
        case Op::Scale: {
            Tensor out = in(0);
            const double s = in(1).data[0];
            for (double& v : out.data) v *= s;
            return out;
        }
        case Op::Pick:
            return Tensor::scalar(in(0).data[static_cast<std::size_t>(n.a0)]);
        case Op::SliceRows: {
            const Tensor& x = in(0);
            const std::size_t tr = trailing_numel(x);
            std::vector<int> shape = x.shape;
            shape[0] = n.a1 - n.a0;
            Tensor out(shape);
            std::copy(x.data.begin() + static_cast<std::ptrdiff_t>(n.a0 * tr),
                      x.data.begin() + static_cast<std::ptrdiff_t>(n.a1 * tr), out.data.begin());
            return out;
        }
        case Op::BiasCh: {
            Tensor out = in(0);
            const Tensor& b = in(1);
            const std::size_t tr = trailing_numel(out);
            for (int c = 0; c < out.dim(0); ++c)
                for (std::size_t i = 0; i < tr; ++i) out.data[c * tr + i] += b.at(c);
            return out;
        }
        case Op::MeanPoolLast: {
            const Tensor& x = in(0);
            const std::size_t tr = trailing_numel(x);
            Tensor out({x.dim(0)});
            for (int c = 0; c < x.dim(0); ++c) {
                double acc = 0.0;
                for (std::size_t i = 0; i < tr; ++i) acc += x.data[c * tr + i];
                out.at(c) = acc / static_cast<double>(tr);
            }
            return out;
        }
        case Op::Mse:
            return Tensor::scalar(wavecast::mse_loss(in(0), in(1)));
        case Op::Sum: {
            double acc = 0.0;
            for (double v : in(0).data) acc += v;
            return Tensor::scalar(acc);
        }
        case Op::Reshape:
            return Tensor(n.shape_aux, in(0).data);
    }
    throw StateError("unknown op");
}

NodeId Graph::conv1d(NodeId x, NodeId kernels, int stride) {
    Node n;
    n.op = Op::Conv1d;
    n.inputs = {x, kernels};
    n.a0 = stride;
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::conv2d(NodeId x, NodeId kernels) {
    Node n;
    n.op = Op::Conv2d;
    n.inputs = {x, kernels};
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::affine(NodeId x, NodeId weights, NodeId bias) {
    Node n;
    n.op = Op::Affine;
    n.inputs = {x, weights, bias};
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::relu(NodeId x) {
    Node n;
    n.op = Op::Relu;
    n.inputs = {x};
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::softmax(NodeId x) {
    Node n;
    n.op = Op::Softmax;
    n.inputs = {x};
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::softmax_cols(NodeId x) {
    if (value(x).ndim() != 2) throw ShapeError("softmax_cols expects a matrix");
    Node n;
    n.op = Op::SoftmaxCols;
    n.inputs = {x};
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::concat(const std::vector<NodeId>& xs) {
    Node n;
    n.op = Op::Concat;
    n.inputs = xs;
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::add(NodeId a, NodeId b) {
    if (!value(a).same_shape(value(b))) throw ShapeError("add shape mismatch");
    Node n;
    n.op = Op::Add;
    n.inputs = {a, b};
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::mul(NodeId a, NodeId b) {
    if (!value(a).same_shape(value(b))) throw ShapeError("mul shape mismatch");
    Node n;
    n.op = Op::Mul;
    n.inputs = {a, b};
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::scale(NodeId x, NodeId s) {
    if (value(s).numel() != 1) throw ShapeError("scale factor must be scalar");
    Node n;
    n.op = Op::Scale;
    n.inputs = {x, s};
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::pick(NodeId x, int i) {
    if (i < 0 || static_cast<std::size_t>(i) >= value(x).numel())
        throw ArgumentError("pick index out of range");
    Node n;
    n.op = Op::Pick;
    n.inputs = {x};
    n.a0 = i;
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::slice_rows(NodeId x, int r0, int r1) {
    if (r0 < 0 || r1 <= r0 || r1 > value(x).dim(0)) throw ArgumentError("slice_rows bad range");
    Node n;
    n.op = Op::SliceRows;
    n.inputs = {x};
    n.a0 = r0;
    n.a1 = r1;
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::bias_ch(NodeId x, NodeId b) {
    if (value(b).ndim() != 1 || value(b).dim(0) != value(x).dim(0))
        throw ShapeError("bias_ch channel mismatch");
    Node n;
    n.op = Op::BiasCh;
    n.inputs = {x, b};
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::mean_pool_last(NodeId x) {
    if (value(x).ndim() < 2) throw ShapeError("mean_pool_last expects >= 2 dims");
    Node n;
    n.op = Op::MeanPoolLast;
    n.inputs = {x};
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::mse(NodeId pred, NodeId target) {
    Node n;
    n.op = Op::Mse;
    n.inputs = {pred, target};
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::sum(NodeId x) {
    Node n;
    n.op = Op::Sum;
    n.inputs = {x};
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::reshape(NodeId x, std::vector<int> shape) {
    if (shape_numel(shape) != value(x).numel()) throw ShapeError("reshape element count mismatch");
    Node n;
    n.op = Op::Reshape;
    n.inputs = {x};
    n.shape_aux = std::move(shape);
    n.value = eval(n);
    return push(std::move(n));
}

void Graph::recompute() {
    for (Node& n : nodes_) {
        if (n.op == Op::Input || n.op == Op::Param) continue;
        n.value = eval(n);
    }
}

void Graph::accumulate(NodeId out_id) {
    Node& n = nodes_[static_cast<std::size_t>(out_id)];
    const Tensor& g = n.grad;
    auto gin = [&](int i) -> Tensor& {
        return nodes_[static_cast<std::size_t>(n.inputs[static_cast<std::size_t>(i)])].grad;
    };
    auto vin = [&](int i) -> const Tensor& { return value(n.inputs[static_cast<std::size_t>(i)]); };
    switch (n.op) {
        case Op::Input:
        case Op::Param:
            return;
        case Op::Conv1d: {
            const Tensor& x = vin(0);
            const Tensor& k = vin(1);
            Tensor& gx = gin(0);
            Tensor& gk = gin(1);
            const int c_in = x.dim(0), len = x.dim(1);
            const int c_out = k.dim(0), klen = k.dim(2), stride = n.a0;
            const int out_len = n.value.dim(1);
            for (int c = 0; c < c_out; ++c)
                for (int t = 0; t < out_len; ++t) {
                    const double go = g.at(c, t);
                    if (go == 0.0) continue;
                    for (int i = 0; i < c_in; ++i) {
                        double* gxp = &gx.data[static_cast<std::size_t>(i) * len + t * stride];
                        double* gkp = &gk.data[(static_cast<std::size_t>(c) * c_in + i) * klen];
                        const double* xp = &x.data[static_cast<std::size_t>(i) * len + t * stride];
                        const double* kp = &k.data[(static_cast<std::size_t>(c) * c_in + i) * klen];
                        for (int j = 0; j < klen; ++j) {
                            gxp[j] += kp[j] * go;
                            gkp[j] += xp[j] * go;
                        }
                    }
                }
            return;
        }
        case Op::Conv2d: {
            const Tensor& x = vin(0);
            const Tensor& k = vin(1);
            Tensor& gx = gin(0);
            Tensor& gk = gin(1);
            const int c_in = x.dim(0), h = x.dim(1), w = x.dim(2);
            const int c_out = k.dim(0), kh = k.dim(2), kw = k.dim(3);
            const int oh = n.value.dim(1), ow = n.value.dim(2);
            for (int c = 0; c < c_out; ++c)
                for (int y = 0; y < oh; ++y)
                    for (int xx = 0; xx < ow; ++xx) {
                        const double go = g.at(c, y, xx);
                        if (go == 0.0) continue;
                        for (int i = 0; i < c_in; ++i)
                            for (int a = 0; a < kh; ++a) {
                                double* gxp = &gx.data[(static_cast<std::size_t>(i) * h + y + a) * w + xx];
                                double* gkp =
                                    &gk.data[((static_cast<std::size_t>(c) * c_in + i) * kh + a) * kw];
                                const double* xp =
                                    &x.data[(static_cast<std::size_t>(i) * h + y + a) * w + xx];
                                const double* kp =
                                    &k.data[((static_cast<std::size_t>(c) * c_in + i) * kh + a) * kw];
                                for (int b = 0; b < kw; ++b) {
                                    gxp[b] += kp[b] * go;
                                    gkp[b] += xp[b] * go;
                                }
                            }
                    }
            return;
        }
        case Op::Affine: {
            const Tensor& x = vin(0);
            const Tensor& w = vin(1);
            Tensor& gx = gin(0);
            Tensor& gw = gin(1);
            Tensor& gb = gin(2);
            const int m = w.dim(0), nn = w.dim(1);
            for (int i = 0; i < m; ++i) {
                const double go = g.at(i);
                gb.at(i) += go;
                for (int j = 0; j < nn; ++j) {
                    gx.at(j) += w.at(i, j) * go;
                    gw.at(i, j) += x.at(j) * go;
                }
            }
            return;
        }
        case Op::Relu: {
            const Tensor& x = vin(0);
            Tensor& gx = gin(0);
            for (std::size_t i = 0; i < x.numel(); ++i)
                if (x.data[i] > 0.0) gx.data[i] += g.data[i];
            return;
        }
        case Op::Softmax: {
            const Tensor& s = n.value;
            Tensor& gx = gin(0);
            double dot = 0.0;
            for (std::size_t i = 0; i < s.numel(); ++i) dot += g.data[i] * s.data[i];
            for (std::size_t i = 0; i < s.numel(); ++i) gx.data[i] += s.data[i] * (g.data[i] - dot);
            return;
        }
        case Op::SoftmaxCols: {
            const Tensor& s = n.value;
            Tensor& gx = gin(0);
            const int b = s.dim(0), w = s.dim(1);
            for (int j = 0; j < w; ++j) {
                double dot = 0.0;
                for (int i = 0; i < b; ++i) dot += g.at(i, j) * s.at(i, j);
                for (int i = 0; i < b; ++i) gx.at(i, j) += s.at(i, j) * (g.at(i, j) - dot);
            }
            return;
        }
        case Op::Concat: {
            std::size_t off = 0;
            for (std::size_t p = 0; p < n.inputs.size(); ++p) {
                Tensor& gi = gin(static_cast<int>(p));
                for (std::size_t i = 0; i < gi.numel(); ++i) gi.data[i] += g.data[off + i];
                off += gi.numel();
            }
            return;
        }
        case Op::Add: {
            Tensor& ga = gin(0);
            Tensor& gb = gin(1);
            for (std::size_t i = 0; i < g.numel(); ++i) {
                ga.data[i] += g.data[i];
                gb.data[i] += g.data[i];
            }
            return;
        }
        case Op::Mul: {
            const Tensor& a = vin(0);
            const Tensor& b = vin(1);
            Tensor& ga = gin(0);
            Tensor& gb = gin(1);
            for (std::size_t i = 0; i < g.numel(); ++i) {
                ga.data[i] += b.data[i] * g.data[i];
                gb.data[i] += a.data[i] * g.data[i];
            }
            return;
        }
        case Op::Scale: {
            const Tensor& x = vin(0);
            const double s = vin(1).data[0];
            Tensor& gx = gin(0);
            Tensor& gs = gin(1);
            double acc = 0.0;
            for (std::size_t i = 0; i < g.numel(); ++i) {
                gx.data[i] += s * g.data[i];
                acc += x.data[i] * g.data[i];
            }
            gs.data[0] += acc;
            return;
        }
        case Op::Pick: {
            gin(0).data[static_cast<std::size_t>(n.a0)] += g.data[0];
            return;
        }
        case Op::SliceRows: {
            Tensor& gx = gin(0);
            const std::size_t tr = trailing_numel(vin(0));
            for (std::size_t i = 0; i < g.numel(); ++i) gx.data[n.a0 * tr + i] += g.data[i];
            return;
        }
        case Op::BiasCh: {
            Tensor& gx = gin(0);
            Tensor& gb = gin(1);
            const std::size_t tr = trailing_numel(vin(0));
            for (int c = 0; c < vin(0).dim(0); ++c) {
                double acc = 0.0;
                for (std::size_t i = 0; i < tr; ++i) {
                    gx.data[c * tr + i] += g.data[c * tr + i];
                    acc += g.data[c * tr + i];
                }
                gb.at(c) += acc;
            }
            return;
        }
        case Op::MeanPoolLast: {
            Tensor& gx = gin(0);
            const std::size_t tr = trailing_numel(vin(0));
            const double inv = 1.0 / static_cast<double>(tr);
            for (int c = 0; c < vin(0).dim(0); ++c)
                for (std::size_t i = 0; i < tr; ++i) gx.data[c * tr + i] += g.at(c) * inv;
            return;
        }
        case Op::Mse: {
            const Tensor& p = vin(0);
            const Tensor& t = vin(1);
            Tensor& gp = gin(0);
            Tensor& gt = gin(1);
            const double go = g.data[0];
            const double c = 2.0 / static_cast<double>(p.numel());
            for (std::size_t i = 0; i < p.numel(); ++i) {
                const double d = c * (p.data[i] - t.data[i]) * go;
                gp.data[i] += d;
                gt.data[i] -= d;
            }
            return;
        }
        case Op::Sum: {
            Tensor& gx = gin(0);
            for (double& v : gx.data) v += g.data[0];
            return;
        }
        case Op::Reshape: {
            Tensor& gx = gin(0);
            for (std::size_t i = 0; i < g.numel(); ++i) gx.data[i] += g.data[i];
            return;
        }
    }
}

void Graph::backward(NodeId out) {
    if (value(out).numel() != 1) throw ArgumentError("backward output must be scalar");
    for (Node& n : nodes_) std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
    nodes_[static_cast<std::size_t>(out)].grad.data[0] = 1.0;
    for (NodeId id = out; id >= 0; --id) accumulate(id);
}

double Graph::finite_diff_check(NodeId param_node, NodeId out, double h) {
    if (h <= 0.0) throw ArgumentError("finite_diff_check requires h > 0");
    if (value(out).numel() != 1) throw ArgumentError("finite_diff_check output must be scalar");
    backward(out);
    const Tensor analytic = grad(param_node);
    Tensor& theta = nodes_[static_cast<std::size_t>(param_node)].value;
    double worst = 0.0;
    for (std::size_t i = 0; i < theta.numel(); ++i) {
        const double orig = theta.data[i];
        theta.data[i] = orig + h;
        recompute();
        const double fp = value(out).data[0];
        theta.data[i] = orig - h;
        recompute();
        const double fm = value(out).data[0];
        theta.data[i] = orig;
        const double numeric = (fp - fm) / (2.0 * h);
        const double err = std::abs(analytic.data[i] - numeric) / (std::abs(analytic.data[i]) + 1e-8);
        worst = std::max(worst, err);
    }
    recompute();
    backward(out);
    return worst;
}

} // namespace wavecast
