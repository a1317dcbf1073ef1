#pragma once

#include <cstdint>
#include <vector>

#include "wavecast/params.hpp"
#include "wavecast/wlmc.hpp"

namespace wavecast {

/// Cross-variable dynamic-wavelet correlation convolution branch: the WLMC
/// coefficient and dominant-variable maps of each variable combination form a
/// two-channel J x T image processed by a shared 2D conv block; pooled
/// per-combination features are concatenated.
struct CvDwccConfig {
    int channels = 4;
    int kernel_h = 3;
    int kernel_w = 3;
    bool onehot_dominant = false;      // expand D into N one-hot channels
    bool per_combination_kernels = false;
};

/// Adds the branch's learnable tensors ("cvdwcc.*") to the store.
void init_cvdwcc_params(ParamStore& store, const CvDwccConfig& cfg, int n_vars, int n_combos,
                        std::uint64_t seed);

struct CvDwccForward {
    std::vector<NodeId> combo_act; // post-relu conv maps, one per combination
    NodeId feature = -1;           // F_CV, length combos * channels
};

CvDwccForward build_cv_dwcc_forward(Graph& g, const WlmcTensor& wlmc, const CvDwccConfig& cfg,
                                    const ParamStore& params, ParamBinding& binding);

/// The [channels x J x T] input image for one combination.
Tensor cv_dwcc_input_image(const WlmcTensor& wlmc, int combo, bool onehot_dominant);

} // namespace wavecast
