#pragma once

#include <string>
#include <vector>

#include "wavecast/metrics.hpp"
#include "wavecast/model.hpp"

namespace wavecast {

/// Per-variable, per-time saliency for one input window. Non-negative and
/// max-normalized to 1 (unless identically zero).
struct SaliencyMap {
    Tensor values; // [N x T]
    std::string layer;
    std::string target; // which output was aggregated
};

struct GradCamOptions {
    std::string layer = "mwkc_block_k2";
    int target_step = -1;   // -1: sum over all S steps; otherwise one step
    bool nearest = false;   // nearest-neighbor upsampling instead of linear
};

/// Available layer ids for a config: "mwkc_fused_k{k}", "mwkc_block_k{k}" for
/// k = 2..d (channels group back to variables), "cvdwcc_combo_{i}" (channels
/// belong to combination i; saliency is attributed to its member variables).
std::vector<std::string> gradcam_layers(const ModelConfig& cfg);

/// Channel weights are time-averaged gradients of the target wrt the layer
/// activations; map = relu(sum_c w_c A_c), linearly upsampled to T and
/// max-normalized.
SaliencyMap gradcam_map(const Checkpoint& ckpt, const Tensor& x_raw,
                        const GradCamOptions& opts = {});

struct VariableImportance {
    std::vector<double> per_variable; // row means, length N
    std::vector<double> per_time;     // column means, length T
};

VariableImportance aggregate_variable_importance(const SaliencyMap& map);

void write_saliency_csv(const std::string& path, const SaliencyMap& map,
                        const std::string& config_echo);
SaliencyMap load_saliency_csv(const std::string& path);

} // namespace wavecast
