#pragma once

#include <vector>

#include "wavecast/tensor.hpp"

namespace wavecast {

using NodeId = int;

enum class Op {
    Input,
    Param,
    Conv1d,
    Conv2d,
    Affine,
    Relu,
    Softmax,
    SoftmaxCols,
    Concat,
    Add,
    Mul,
    Scale,
    Pick,
    SliceRows,
    BiasCh,
    MeanPoolLast,
    Mse,
    Sum,
    Reshape,
};

struct Node {
    Op op;
    std::vector<NodeId> inputs;
    Tensor value;
    Tensor grad;
    int a0 = 0; // op-specific: stride / pick index / slice start
    int a1 = 0; // op-specific: slice end
    std::vector<int> shape_aux; // Reshape target shape
};

/// Tape-based reverse-mode gradient engine. Nodes are recorded in topological
/// order as the forward pass is built; backward() fills gradients for every
/// node (activations included, which Grad-CAM reads). A Graph is confined to
/// one thread for its lifetime.
class Graph {
public:
    NodeId input(Tensor v);
    NodeId param(Tensor v);

    NodeId conv1d(NodeId x, NodeId kernels, int stride = 1);
    NodeId conv2d(NodeId x, NodeId kernels);
    NodeId affine(NodeId x, NodeId weights, NodeId bias);
    NodeId relu(NodeId x);
    NodeId softmax(NodeId x);
    /// Column-wise softmax over axis 0 of a [B x W] tensor.
    NodeId softmax_cols(NodeId x);
    NodeId concat(const std::vector<NodeId>& xs);
    NodeId add(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    /// Multiply tensor x by scalar node s (shape [1]).
    NodeId scale(NodeId x, NodeId s);
    /// Extract element i of a vector as a scalar node.
    NodeId pick(NodeId x, int i);
    /// Rows [r0, r1) along axis 0.
    NodeId slice_rows(NodeId x, int r0, int r1);
    /// Add per-channel bias b [C] to x [C x ...].
    NodeId bias_ch(NodeId x, NodeId b);
    /// Mean over all trailing axes: [C x ...] -> [C].
    NodeId mean_pool_last(NodeId x);
    NodeId mse(NodeId pred, NodeId target);
    NodeId sum(NodeId x);
    /// Same data, new shape (element count preserved).
    NodeId reshape(NodeId x, std::vector<int> shape);

    const Tensor& value(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    const Tensor& grad(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
    Tensor& leaf_value(NodeId id);
    const std::vector<NodeId>& params() const { return params_; }
    std::size_t size() const { return nodes_.size(); }

    /// Re-run the forward pass over the whole tape (after editing leaf values).
    void recompute();
    /// Populate gradients of every node wrt a scalar output node.
    void backward(NodeId out);

    /// Max over entries of |analytic - central difference| / (|analytic| + 1e-8)
    /// for one parameter node. Leaves values and gradients restored on return.
    double finite_diff_check(NodeId param_node, NodeId out, double h);

private:
    NodeId push(Node n);
    Tensor eval(const Node& n) const;
    void accumulate(NodeId out_id);

    std::vector<Node> nodes_;
    std::vector<NodeId> params_;
};

} // namespace wavecast
