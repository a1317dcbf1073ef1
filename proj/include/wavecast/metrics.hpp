#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wavecast/model.hpp"

namespace wavecast {

/// RMSE over pooled (window, step) pairs; g CO2-e/kWh.
double rmse(const std::vector<double>& pred, const std::vector<double>& actual);
double mae(const std::vector<double>& pred, const std::vector<double>& actual);
/// SMAPE percent, mean-of-absolutes denominator; both-zero terms contribute 0.
/// Bounded by 200.
double smape(const std::vector<double>& pred, const std::vector<double>& actual);

struct MetricSet {
    double rmse = 0.0;
    double mae = 0.0;
    double smape = 0.0;
};

MetricSet pooled_metrics(const std::vector<double>& pred, const std::vector<double>& actual);

/// One forecast step of one test window, denormalized.
struct PredictionRecord {
    int fold = 0;
    int window_id = 0;
    int step = 0;
    double predicted = 0.0;
    double actual = 0.0;
};

struct EvalReport {
    std::vector<MetricSet> folds;
    MetricSet mean;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    std::string config_echo;
    std::vector<PredictionRecord> predictions; // pooled dump across folds
};

/// Recompute pooled per-fold and mean metrics from a prediction dump.
EvalReport report_from_predictions(const std::vector<PredictionRecord>& preds, int fold_count);

/// Train one model per fold (on the purged training indices) and score the
/// fold's test windows. Deterministic given the seed in tc.
EvalReport evaluate(const std::vector<MtsWindow>& samples, const FoldSplit& split,
                    const ModelConfig& cfg, const TrainConfig& tc, WlmcCache& cache);

/// Score a fixed model on a set of windows (no training).
std::vector<PredictionRecord> score_windows(const std::vector<MtsWindow>& samples,
                                            const std::vector<int>& indices,
                                            const ModelConfig& cfg, const WaveletKernelBank& bank,
                                            const ParamStore& params, const NormStats& stats,
                                            WlmcCache& cache, int fold = 0);

/// Forecast equal to the CIF observed 24 h earlier; requires horizon <= input
/// length so each target step has an in-window predecessor.
std::vector<PredictionRecord> seasonal_naive_predictions(const std::vector<MtsWindow>& samples,
                                                         const std::vector<int>& indices);

enum class AblationVariant { Complete, WithoutLtMwkc, WithoutCvDwcc };

const char* ablation_name(AblationVariant v);
/// The variant's config: removing a branch fixes fusion weight 1.0 on the
/// remaining one.
ModelConfig ablation_config(const ModelConfig& base, AblationVariant v);

struct AblationRow {
    AblationVariant variant = AblationVariant::Complete;
    MetricSet metrics; // averaged over training seeds
    int seeds = 0;
};

struct AblationTable {
    std::vector<AblationRow> rows;
    bool complete_wins_mae = false;
    bool complete_wins_rmse = false;
};

/// Train + score each variant on a single train/test split (last fold is the
/// test block) for every seed, then average. Identical seeds across variants.
AblationTable run_ablation(const std::vector<MtsWindow>& samples, const FoldSplit& split,
                           const ModelConfig& base, const TrainConfig& tc,
                           const std::vector<std::uint64_t>& seeds, WlmcCache& cache);

// ---- report emission -------------------------------------------------------

void write_report_csv(const std::string& path, const EvalReport& report);
std::string render_report_table(const EvalReport& report);
void write_predictions_csv(const std::string& path, const std::vector<PredictionRecord>& preds,
                           const std::string& config_echo);
std::vector<PredictionRecord> load_predictions_csv(const std::string& path);
std::string render_ablation_table(const AblationTable& table);
void write_ablation_csv(const std::string& path, const AblationTable& table,
                        const std::string& config_echo);

} // namespace wavecast
