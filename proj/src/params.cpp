#include "wavecast/params.hpp"

namespace wavecast {

Tensor& ParamStore::at(const std::string& name) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw StateError("unknown parameter: " + name);
    return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw StateError("unknown parameter: " + name);
    return it->second;
}

void ParamStore::add(const std::string& name, Tensor t) {
    if (has(name)) throw StateError("duplicate parameter: " + name);
    tensors.emplace(name, std::move(t));
}

bool ParamStore::all_finite() const {
    for (const auto& [name, t] : tensors)
        if (!t.all_finite()) return false;
    return true;
}

Tensor uniform_tensor(const std::vector<int>& shape, double limit, std::mt19937_64& rng) {
    Tensor t(shape);
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& v : t.data) v = dist(rng);
    return t;
}

NodeId bind_param(Graph& g, const ParamStore& store, ParamBinding& binding,
                  const std::string& name) {
    auto it = binding.nodes.find(name);
    if (it != binding.nodes.end()) return it->second;
    NodeId id = g.param(store.at(name));
    binding.nodes.emplace(name, id);
    return id;
}

} // namespace wavecast
