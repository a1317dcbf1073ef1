#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wavecast/tensor.hpp"

namespace wavecast {

// Input variable order used everywhere: [cif, gld, reg, neg, temperature].
constexpr int kNumVariables = 5;
constexpr int kCifVariable = 0;
extern const char* const kVariableNames[kNumVariables];

/// One hourly observation. gld/reg/neg are MW, cif is g CO2-e/kWh.
struct RawGridRecord {
    std::int64_t timestamp = 0; // unix seconds, UTC, hourly aligned
    double cif = 0.0;
    double gld = 0.0;
    double reg = 0.0;
    double neg = 0.0;
    double temperature = 0.0;
    bool interpolated = false; // filled single-hour gap
};

std::int64_t parse_iso8601_utc(const std::string& text);
std::string format_iso8601_utc(std::int64_t unix_seconds);

struct GenerationMix {
    std::vector<double> energy_mwh;    // E_r
    std::vector<double> emission_rate; // C_r, g CO2-e/kWh
};

/// Energy-weighted mean emission rate; zero total generation is an error.
double compute_cif(const GenerationMix& mix);

/// Long-format generation-mix file: timestamp,source,energy_mwh,emission_rate.
/// Returns CIF per timestamp.
std::map<std::int64_t, double> load_mix_csv(const std::string& path);

/// Schema: timestamp,cif,gld,reg,neg,temperature ('#' lines are comments).
/// The cif column may be omitted when a mix map supplies it. Single-hour gaps
/// are linearly interpolated and flagged; longer gaps are rejected.
std::vector<RawGridRecord> load_csv(const std::string& path,
                                    const std::map<std::int64_t, double>* mix_cif = nullptr);

void write_csv(const std::string& path, const std::vector<RawGridRecord>& records,
               const std::string& config_echo);

/// One training sample: input matrix X [T x N] and CIF target [S].
struct MtsWindow {
    Tensor x;
    Tensor target;
    int id = 0; // start index into the record sequence
};

struct WindowedDataset {
    std::vector<MtsWindow> samples;
    int input_len = 0;
    int horizon = 0;
    int stride = 1;
    std::string provenance;
};

WindowedDataset make_windows(const std::vector<RawGridRecord>& records, int input_len, int horizon,
                             int stride);

/// Per-variable z-score statistics, fitted on the training portion only.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> stddev;       // forced to 1 for constant variables
    std::vector<bool> constant_flags;
};

NormStats fit_normalization(const std::vector<MtsWindow>& training_samples);
Tensor normalize_input(const Tensor& x, const NormStats& stats);
double normalize_target_value(double v, const NormStats& stats);
double denormalize_target_value(double v, const NormStats& stats);
Tensor normalize_target(const Tensor& t, const NormStats& stats);
Tensor denormalize_target(const Tensor& t, const NormStats& stats);

/// Contiguous temporal blocks; training indices near a test block are purged
/// to stop input/target leakage across folds.
struct FoldSplit {
    int sample_count = 0;
    int fold_count = 0;
    int purge_gap = 0;
    std::vector<int> fold_of; // sample id -> fold, 0-based

    std::vector<int> test_indices(int fold) const;
    std::vector<int> train_indices(int fold) const;
};

FoldSplit kfold_split(int sample_count, int fold_count, int purge_gap);

/// Synthetic grid data: diurnal demand with weekly modulation, solar-shaped
/// renewables under an AR(1) weather factor, residual non-renewables, and a
/// two-source CIF. Events inject step curtailment of REG.
struct SynthEvent {
    int start_hour = 0;
    int end_hour = 0;   // exclusive
    double curtail = 0.8; // fraction of REG removed
};

struct SynthConfig {
    std::uint64_t seed = 7;
    int days = 365;
    double penetration = 0.5;  // renewable share of demand at full sun
    double reg_rate = 30.0;    // g CO2-e/kWh
    double neg_rate = 820.0;
    double base_load_mw = 1000.0;
    double noise = 0.02;       // relative noise level
    double weather_rho = 0.99; // hourly AR(1) coefficient (fast component)
    // Day-scale synoptic component: cloudy and clear spells alternate, so
    // consecutive days anti-correlate. Mixed with the fast component by
    // synoptic_weight (fraction of the weather variance at the day scale).
    double weather_rho_day = -0.7;
    double synoptic_weight = 0.95;
    std::vector<SynthEvent> events;
};

std::vector<RawGridRecord> synthesize_grid(const SynthConfig& cfg);

} // namespace wavecast
