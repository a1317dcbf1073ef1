#include "wavecast/tensor.hpp"

#include <cmath>
#include <sstream>

namespace wavecast {

std::size_t shape_numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ShapeError("non-positive dimension");
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

Tensor::Tensor(std::vector<int> shp, double fill)
    : shape(std::move(shp)), data(shape_numel(shape), fill) {}

Tensor::Tensor(std::vector<int> shp, std::vector<double> values)
    : shape(std::move(shp)), data(std::move(values)) {
    if (shape_numel(shape) != data.size())
        throw ShapeError("shape/data size mismatch: " + shape_str());
}

Tensor Tensor::vec(std::vector<double> values) {
    int n = static_cast<int>(values.size());
    return Tensor({n}, std::move(values));
}

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor conv1d(const Tensor& input, const Tensor& kernels, int stride) {
    if (input.ndim() != 2) throw ShapeError("conv1d input must be [C_in x L], got " + input.shape_str());
    if (kernels.ndim() != 3) throw ShapeError("conv1d kernels must be [C_out x C_in x k]");
    if (stride < 1) throw ArgumentError("conv1d stride must be >= 1");
    const int c_in = input.dim(0), len = input.dim(1);
    const int c_out = kernels.dim(0), k = kernels.dim(2);
    if (kernels.dim(1) != c_in)
        throw ShapeError("conv1d channel mismatch: input C_in=" + std::to_string(c_in) +
                         " kernels C_in=" + std::to_string(kernels.dim(1)));
    if (k > len) throw ShapeError("conv1d kernel length exceeds input length");
    const int out_len = (len - k) / stride + 1;
    Tensor out({c_out, out_len});
    for (int c = 0; c < c_out; ++c)
        for (int t = 0; t < out_len; ++t) {
            double acc = 0.0;
            for (int i = 0; i < c_in; ++i) {
                const double* x = &input.data[static_cast<std::size_t>(i) * len + t * stride];
                const double* w = &kernels.data[(static_cast<std::size_t>(c) * c_in + i) * k];
                for (int j = 0; j < k; ++j) acc += x[j] * w[j];
            }
            out.at(c, t) = acc;
        }
    return out;
}

Tensor conv2d(const Tensor& input, const Tensor& kernels) {
    if (input.ndim() != 3) throw ShapeError("conv2d input must be [C_in x H x W]");
    if (kernels.ndim() != 4) throw ShapeError("conv2d kernels must be [C_out x C_in x kh x kw]");
    const int c_in = input.dim(0), h = input.dim(1), w = input.dim(2);
    const int c_out = kernels.dim(0), kh = kernels.dim(2), kw = kernels.dim(3);
    if (kernels.dim(1) != c_in) throw ShapeError("conv2d channel mismatch");
    if (kh > h || kw > w) throw ShapeError("conv2d kernel exceeds input extent");
    const int oh = h - kh + 1, ow = w - kw + 1;
    Tensor out({c_out, oh, ow});
    for (int c = 0; c < c_out; ++c)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                double acc = 0.0;
                for (int i = 0; i < c_in; ++i)
                    for (int a = 0; a < kh; ++a) {
                        const double* row = &input.data[(static_cast<std::size_t>(i) * h + y + a) * w + x];
                        const double* ker =
                            &kernels.data[((static_cast<std::size_t>(c) * c_in + i) * kh + a) * kw];
                        for (int b = 0; b < kw; ++b) acc += row[b] * ker[b];
                    }
                out.at(c, y, x) = acc;
            }
    return out;
}

Tensor affine(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    if (input.ndim() != 1 || weights.ndim() != 2 || bias.ndim() != 1)
        throw ShapeError("affine expects vector input, matrix weights, vector bias");
    const int n = input.dim(0), m = weights.dim(0);
    if (weights.dim(1) != n || bias.dim(0) != m)
        throw ShapeError("affine dimension mismatch: input " + input.shape_str() + ", weights " +
                         weights.shape_str());
    Tensor out({m});
    for (int i = 0; i < m; ++i) {
        double acc = bias.at(i);
        const double* w = &weights.data[static_cast<std::size_t>(i) * n];
        for (int j = 0; j < n; ++j) acc += w[j] * input.at(j);
        out.at(i) = acc;
    }
    return out;
}

Tensor relu(const Tensor& x) {
    Tensor out = x;
    for (double& v : out.data)
        if (v < 0.0) v = 0.0;
    return out;
}

Tensor softmax(const Tensor& x) {
    if (x.numel() < 1) throw ArgumentError("softmax needs at least one element");
    Tensor out = x;
    double mx = out.data[0];
    for (double v : out.data) mx = std::max(mx, v);
    double sum = 0.0;
    for (double& v : out.data) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : out.data) v /= sum;
    return out;
}

Tensor concat(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ArgumentError("concat of zero tensors");
    std::vector<int> trailing(parts[0].shape.begin() + 1, parts[0].shape.end());
    int dim0 = 0;
    for (const Tensor& p : parts) {
        std::vector<int> t(p.shape.begin() + 1, p.shape.end());
        if (t != trailing) throw ShapeError("concat trailing dimension mismatch");
        dim0 += p.dim(0);
    }
    std::vector<int> shape = parts[0].shape;
    shape[0] = dim0;
    Tensor out(shape);
    std::size_t off = 0;
    for (const Tensor& p : parts) {
        std::copy(p.data.begin(), p.data.end(), out.data.begin() + off);
        off += p.numel();
    }
    return out;
}

Tensor transpose(const Tensor& x) {
    if (x.ndim() != 2) throw ShapeError("transpose expects a matrix");
    Tensor out({x.dim(1), x.dim(0)});
    for (int i = 0; i < x.dim(0); ++i)
        for (int j = 0; j < x.dim(1); ++j) out.at(j, i) = x.at(i, j);
    return out;
}

double mse_loss(const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target)) throw ShapeError("mse_loss shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        double d = pred.data[i] - target.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.numel());
}

} // namespace wavecast
