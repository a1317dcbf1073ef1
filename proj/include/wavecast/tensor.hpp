#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "wavecast/errors.hpp"

namespace wavecast {

/// Dense row-major array of 64-bit floats.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> shp, double fill = 0.0);
    Tensor(std::vector<int> shp, std::vector<double> values);

    static Tensor scalar(double v) { return Tensor({1}, {v}); }
    static Tensor vec(std::vector<double> values);

    int ndim() const { return static_cast<int>(shape.size()); }
    std::size_t numel() const { return data.size(); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

    double& at(int i) { return data[static_cast<std::size_t>(i)]; }
    double at(int i) const { return data[static_cast<std::size_t>(i)]; }
    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * shape[1] + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * shape[1] + j]; }
    double& at(int i, int j, int k) {
        return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
    }
    double at(int i, int j, int k) const {
        return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
    }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    bool all_finite() const;
    std::string shape_str() const;
};

std::size_t shape_numel(const std::vector<int>& shape);

// ---- plain (non-recorded) numeric operations -------------------------------
// These are the forward kernels; the autograd graph records the same ops.

/// Valid cross-correlation. input [C_in x L], kernels [C_out x C_in x k].
Tensor conv1d(const Tensor& input, const Tensor& kernels, int stride = 1);

/// Valid cross-correlation. input [C_in x H x W], kernels [C_out x C_in x kh x kw].
Tensor conv2d(const Tensor& input, const Tensor& kernels);

/// weights [m x n] * input [n] + bias [m].
Tensor affine(const Tensor& input, const Tensor& weights, const Tensor& bias);

Tensor relu(const Tensor& x);

/// Numerically stable softmax of a vector (max subtraction).
Tensor softmax(const Tensor& x);

/// Concatenate along axis 0; trailing dimensions must match.
Tensor concat(const std::vector<Tensor>& parts);

double mse_loss(const Tensor& pred, const Tensor& target);

/// 2-D transpose.
Tensor transpose(const Tensor& x);

} // namespace wavecast
