#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wavecast/model.hpp"

namespace wavecast {

/// Flat key = value run configuration. Every key has a default; unknown keys
/// are rejected. CLI flags override file values by calling set() afterwards.
struct RunConfig {
    // data
    std::string data_path;
    std::string mix_path;
    std::string out_dir = "out";
    int stride = 1;
    int folds = 5;
    int purge_gap = 48;

    // architecture
    int input_len = 24;
    int horizon = 24;
    int head_width = 64;
    bool use_lt = true;
    bool use_cv = true;
    bool fusion_per_feature = false;
    bool concat_first = false;
    int max_kernel_length = 6;
    int filters_per_length = 8;
    int block_channels = 4;
    int block_kernel = 3;
    bool alpha_per_length = false;
    std::string wavelets = "morlet,mexican_hat";
    double bank_support = 2.0;
    double spread_min = 0.5;
    double spread_max = 2.0;
    int cv_channels = 4;
    int cv_kernel_h = 3;
    int cv_kernel_w = 3;
    bool onehot_dominant = false;
    int scales_j = 8;
    double bandwidth = 8.0;
    std::string wlmc_wavelet = "morlet";
    double cwt_support = 5.0;

    // training
    double learning_rate = 1e-3;
    int epochs = 50;
    int batch_size = 32;
    int patience = 10;
    double val_fraction = 0.1;
    int train_stride = 1;
    std::uint64_t seed = 0;

    // synthetic generator
    int days = 365;
    double penetration = 0.5;
    double noise = 0.02;
    double weather_rho = 0.99;
    double weather_rho_day = -0.7;
    double synoptic_weight = 0.95;
    double base_load_mw = 1000.0;
    double reg_rate = 30.0;
    double neg_rate = 820.0;

    /// Apply one key; ConfigError on unknown key or unparsable value.
    void set(const std::string& key, const std::string& value);
    /// Canonical one-line echo of every key, for artifact headers.
    std::string echo() const;

    ModelConfig model_config() const;
    TrainConfig train_config() const;
    SynthConfig synth_config() const;
};

/// Parse a `key = value` file ('#' comments, blank lines allowed).
RunConfig load_run_config(const std::string& path);

/// The documented defaults, one `key = value` line each.
std::string default_config_text();

} // namespace wavecast
