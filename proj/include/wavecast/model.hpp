#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wavecast/cvdwcc.hpp"
#include "wavecast/data.hpp"
#include "wavecast/mwkc.hpp"
#include "wavecast/params.hpp"
#include "wavecast/wlmc.hpp"

namespace wavecast {

/// Full architecture: parallel LT-MWKC and CV-DWCC branches, per-branch
/// affine heads, softmax-weighted fusion, and an affine forecast head.
struct ModelConfig {
    int input_len = 24; // T
    int horizon = 24;   // S
    int n_vars = kNumVariables;
    int head_width = 64;
    bool use_lt = true; // ablation: w/o LT-MWKC sets this false
    bool use_cv = true; // ablation: w/o CV-DWCC sets this false
    bool fusion_per_feature = false; // per-feature softmax scores instead of two scalars
    bool concat_first = false;       // weight branch features, concat, one shared head
    MwkcConfig mwkc;
    CvDwccConfig cvdwcc;
    WlmcConfig wlmc;
    BankSpec bank;
};

void check_model_config(const ModelConfig& cfg);
int lt_feature_len(const ModelConfig& cfg);
int cv_feature_len(const ModelConfig& cfg);

/// Deterministic parameter initialization for a config.
ParamStore init_model_params(const ModelConfig& cfg, const WaveletKernelBank& bank,
                             std::uint64_t seed);

struct ModelForward {
    NodeId output = -1; // normalized forecast, length S
    ParamBinding binding;
    MwkcForward lt;      // valid when use_lt
    CvDwccForward cv;    // valid when use_cv
    NodeId fusion_weights = -1; // softmax output node, -1 for single-branch models
};

/// Records the forward pass. x_norm is the normalized [T x N] window; wlmc is
/// required when use_cv (computed on the normalized window) and ignored
/// otherwise.
ModelForward build_model_forward(Graph& g, const Tensor& x_norm, const WlmcTensor* wlmc,
                                 const ModelConfig& cfg, const WaveletKernelBank& bank,
                                 const ParamStore& params);

/// Convenience: forward pass on a normalized window, returning the
/// normalized prediction.
Tensor model_forward(const Tensor& x_norm, const ModelConfig& cfg, const WaveletKernelBank& bank,
                     const ParamStore& params, WlmcCache& cache);

struct TrainConfig {
    double learning_rate = 1e-3;
    int epochs = 50;
    int batch_size = 32;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int patience = 10;          // early stopping, epochs without val improvement
    double val_fraction = 0.1;  // last fraction of the training samples
    int train_stride = 1;       // subsample training windows by this stride
};

struct TrainResult {
    ParamStore params;
    std::vector<double> curve; // per-epoch mean training loss
    int epochs_run = 0;
    double best_val_loss = 0.0;
};

/// Minibatch Adam on normalized windows. Deterministic given the seed.
/// Aborts with NumericError on NaN loss.
TrainResult train(const std::vector<MtsWindow>& samples, const NormStats& stats,
                  const ModelConfig& cfg, const WaveletKernelBank& bank, const TrainConfig& tc,
                  WlmcCache& cache);

struct ForecastResult {
    Tensor prediction; // length S, g CO2-e/kWh
    int window_id = 0;
    bool denormalized = true;
};

/// Normalize a raw window, run the model, denormalize the forecast.
ForecastResult predict(const Tensor& x_raw, int window_id, const ModelConfig& cfg,
                       const WaveletKernelBank& bank, const ParamStore& params,
                       const NormStats& stats, WlmcCache& cache);

/// Versioned binary checkpoint (magic "WVC1"): config echo, parameters,
/// normalization stats, bank spec. Round-trips predictions bitwise.
struct Checkpoint {
    ModelConfig config;
    ParamStore params;
    NormStats stats;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

} // namespace wavecast
