#pragma once

#include <map>
#include <random>
#include <string>

#include "wavecast/autograd.hpp"
#include "wavecast/tensor.hpp"

namespace wavecast {

/// Named learnable tensors. Names are stable across save/load and are the
/// keys the optimizer and checkpoint code work with.
struct ParamStore {
    std::map<std::string, Tensor> tensors;

    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    bool has(const std::string& name) const { return tensors.count(name) > 0; }
    void add(const std::string& name, Tensor t);
    bool all_finite() const;
};

/// name -> param node id for one recorded forward pass.
struct ParamBinding {
    std::map<std::string, NodeId> nodes;
};

/// Create (or reuse) the graph parameter node for a named tensor.
NodeId bind_param(Graph& g, const ParamStore& store, ParamBinding& binding,
                  const std::string& name);

/// Uniform init in [-limit, limit], consumed in row-major order.
Tensor uniform_tensor(const std::vector<int>& shape, double limit, std::mt19937_64& rng);

} // namespace wavecast
