#pragma once

#include <cstdint>
#include <map>

#include "wavecast/params.hpp"
#include "wavecast/wavelet.hpp"

namespace wavecast {

/// Local-temporal multi-wavelet kernel convolution branch. Stride-1
/// convolutions with wavelet kernels of lengths 2..d realize the overlapping
/// varying-length patches; learnable per-wavelet scalars fuse the wavelet
/// groups; a per-variable 1D conv block deepens each length branch before
/// global average pooling.
struct MwkcConfig {
    int max_kernel_length = 6; // d
    int filters_per_length = 8; // Z_k, divisible by the wavelet count
    int block_channels = 4;     // conv-block output channels per variable
    int block_kernel = 3;
    bool alpha_per_length = false; // separate alpha_m per kernel length k
};

void check_mwkc_config(const MwkcConfig& cfg, const WaveletKernelBank& bank, int n_vars,
                       int input_len);

/// Adds the branch's learnable tensors ("mwkc.*") to the store.
void init_mwkc_params(ParamStore& store, const MwkcConfig& cfg, const WaveletKernelBank& bank,
                      std::uint64_t seed);

struct MwkcForward {
    std::map<int, NodeId> fused;      // k -> fused F'^(k), [N*Z_k x (T-k+1)]
    std::map<int, NodeId> block_act;  // k -> post-relu block activations, [N*B x .]
    NodeId feature = -1;              // F'_LT, length (d-1) * N * B
};

/// Records the branch on the tape. x_tr is an input node holding [N x T].
MwkcForward build_mwkc_forward(Graph& g, NodeId x_tr, const WaveletKernelBank& bank,
                               const MwkcConfig& cfg, const ParamStore& params,
                               ParamBinding& binding);

/// Plain (non-recorded) fused maps per kernel length, for direct use.
std::map<int, Tensor> mwkc_forward(const Tensor& x_tr, const WaveletKernelBank& bank,
                                   const MwkcConfig& cfg, const ParamStore& params);

} // namespace wavecast
