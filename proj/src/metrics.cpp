#include "wavecast/metrics.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wavecast {

namespace {

void check_lengths(const std::vector<double>& pred, const std::vector<double>& actual) {
    if (pred.size() != actual.size())
        throw ShapeError("metric length mismatch: " + std::to_string(pred.size()) + " vs " +
                         std::to_string(actual.size()));
    if (pred.empty()) throw ArgumentError("metric over zero points");
}

} // namespace

double rmse(const std::vector<double>& pred, const std::vector<double>& actual) {
    check_lengths(pred, actual);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - actual[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

double mae(const std::vector<double>& pred, const std::vector<double>& actual) {
    check_lengths(pred, actual);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += std::fabs(pred[i] - actual[i]);
    return acc / static_cast<double>(pred.size());
}

double smape(const std::vector<double>& pred, const std::vector<double>& actual) {
    check_lengths(pred, actual);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double denom = (std::fabs(pred[i]) + std::fabs(actual[i])) / 2.0;
        if (denom > 0.0) acc += std::fabs(pred[i] - actual[i]) / denom;
    }
    return 100.0 * acc / static_cast<double>(pred.size());
}

MetricSet pooled_metrics(const std::vector<double>& pred, const std::vector<double>& actual) {
    return {rmse(pred, actual), mae(pred, actual), smape(pred, actual)};
}

EvalReport report_from_predictions(const std::vector<PredictionRecord>& preds, int fold_count) {
    if (fold_count < 1) throw ArgumentError("need at least one fold");
    EvalReport report;
    report.predictions = preds;
    std::vector<double> all_p, all_a;
    for (int f = 0; f < fold_count; ++f) {
        std::vector<double> p, a;
        for (const PredictionRecord& r : preds)
            if (r.fold == f) {
                p.push_back(r.predicted);
                a.push_back(r.actual);
            }
        if (p.empty()) throw StateError("no predictions for fold " + std::to_string(f));
        report.folds.push_back(pooled_metrics(p, a));
        all_p.insert(all_p.end(), p.begin(), p.end());
        all_a.insert(all_a.end(), a.begin(), a.end());
    }
    // Fold aggregation is the unweighted mean across folds.
    for (const MetricSet& m : report.folds) {
        report.mean.rmse += m.rmse;
        report.mean.mae += m.mae;
        report.mean.smape += m.smape;
    }
    const double k = static_cast<double>(fold_count);
    report.mean.rmse /= k;
    report.mean.mae /= k;
    report.mean.smape /= k;
    return report;
}

std::vector<PredictionRecord> score_windows(const std::vector<MtsWindow>& samples,
                                            const std::vector<int>& indices,
                                            const ModelConfig& cfg, const WaveletKernelBank& bank,
                                            const ParamStore& params, const NormStats& stats,
                                            WlmcCache& cache, int fold) {
    std::vector<PredictionRecord> out;
    for (int id : indices) {
        const MtsWindow& w = samples[static_cast<std::size_t>(id)];
        const ForecastResult fc = predict(w.x, w.id, cfg, bank, params, stats, cache);
        for (int s = 0; s < cfg.horizon; ++s)
            out.push_back({fold, w.id, s, fc.prediction.at(s), w.target.at(s)});
    }
    return out;
}

std::vector<PredictionRecord> seasonal_naive_predictions(const std::vector<MtsWindow>& samples,
                                                         const std::vector<int>& indices) {
    std::vector<PredictionRecord> out;
    for (int id : indices) {
        const MtsWindow& w = samples[static_cast<std::size_t>(id)];
        const int t_len = w.x.dim(0);
        const int horizon = w.target.dim(0);
        if (horizon > t_len)
            throw ArgumentError("seasonal-naive baseline needs horizon <= input length");
        for (int s = 0; s < horizon; ++s)
            out.push_back({0, w.id, s, w.x.at(t_len - horizon + s, kCifVariable), w.target.at(s)});
    }
    return out;
}

EvalReport evaluate(const std::vector<MtsWindow>& samples, const FoldSplit& split,
                    const ModelConfig& cfg, const TrainConfig& tc, WlmcCache& cache) {
    if (split.sample_count != static_cast<int>(samples.size()))
        throw ArgumentError("fold split does not match dataset size");
    const auto start = std::chrono::steady_clock::now();
    const WaveletKernelBank bank = build_bank(cfg.bank);

    std::vector<PredictionRecord> preds;
    for (int f = 0; f < split.fold_count; ++f) {
        const std::vector<int> train_ids = split.train_indices(f);
        const std::vector<int> test_ids = split.test_indices(f);
        std::vector<MtsWindow> train_samples;
        train_samples.reserve(train_ids.size());
        for (int id : train_ids) train_samples.push_back(samples[static_cast<std::size_t>(id)]);
        const NormStats stats = fit_normalization(train_samples);
        const TrainResult tr = train(train_samples, stats, cfg, bank, tc, cache);
        std::vector<PredictionRecord> fold_preds =
            score_windows(samples, test_ids, cfg, bank, tr.params, stats, cache, f);
        preds.insert(preds.end(), fold_preds.begin(), fold_preds.end());
    }
    EvalReport report = report_from_predictions(preds, split.fold_count);
    report.seed = tc.seed;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

const char* ablation_name(AblationVariant v) {
    switch (v) {
        case AblationVariant::Complete: return "complete";
        case AblationVariant::WithoutLtMwkc: return "without-lt-mwkc";
        case AblationVariant::WithoutCvDwcc: return "without-cv-dwcc";
    }
    return "unknown";
}

ModelConfig ablation_config(const ModelConfig& base, AblationVariant v) {
    ModelConfig cfg = base;
    if (v == AblationVariant::WithoutLtMwkc) cfg.use_lt = false;
    if (v == AblationVariant::WithoutCvDwcc) cfg.use_cv = false;
    return cfg;
}

AblationTable run_ablation(const std::vector<MtsWindow>& samples, const FoldSplit& split,
                           const ModelConfig& base, const TrainConfig& tc,
                           const std::vector<std::uint64_t>& seeds, WlmcCache& cache) {
    if (seeds.empty()) throw ArgumentError("run_ablation needs at least one seed");
    if (split.sample_count != static_cast<int>(samples.size()))
        throw ArgumentError("fold split does not match dataset size");

    // Single train/test split: the last fold is the held-out block.
    const int test_fold = split.fold_count - 1;
    const std::vector<int> train_ids = split.train_indices(test_fold);
    const std::vector<int> test_ids = split.test_indices(test_fold);
    std::vector<MtsWindow> train_samples;
    train_samples.reserve(train_ids.size());
    for (int id : train_ids) train_samples.push_back(samples[static_cast<std::size_t>(id)]);
    const NormStats stats = fit_normalization(train_samples);

    AblationTable table;
    const AblationVariant variants[] = {AblationVariant::Complete, AblationVariant::WithoutLtMwkc,
                                        AblationVariant::WithoutCvDwcc};
    for (AblationVariant v : variants) {
        const ModelConfig cfg = ablation_config(base, v);
        const WaveletKernelBank bank = build_bank(cfg.bank);
        MetricSet sum;
        for (std::uint64_t seed : seeds) {
            TrainConfig stc = tc;
            stc.seed = seed;
            const TrainResult tr = train(train_samples, stats, cfg, bank, stc, cache);
            std::vector<PredictionRecord> preds =
                score_windows(samples, test_ids, cfg, bank, tr.params, stats, cache);
            std::vector<double> p, a;
            for (const PredictionRecord& r : preds) {
                p.push_back(r.predicted);
                a.push_back(r.actual);
            }
            const MetricSet m = pooled_metrics(p, a);
            sum.rmse += m.rmse;
            sum.mae += m.mae;
            sum.smape += m.smape;
        }
        const double n = static_cast<double>(seeds.size());
        table.rows.push_back({v, {sum.rmse / n, sum.mae / n, sum.smape / n},
                              static_cast<int>(seeds.size())});
    }
    const MetricSet& complete = table.rows[0].metrics;
    table.complete_wins_mae =
        complete.mae < table.rows[1].metrics.mae && complete.mae < table.rows[2].metrics.mae;
    table.complete_wins_rmse =
        complete.rmse < table.rows[1].metrics.rmse && complete.rmse < table.rows[2].metrics.rmse;
    return table;
}

// ---- report emission -------------------------------------------------------

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

void write_report_csv(const std::string& path, const EvalReport& report) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    if (!report.config_echo.empty()) os << "# " << report.config_echo << "\n";
    os << "fold,rmse,mae,smape\n";
    for (std::size_t f = 0; f < report.folds.size(); ++f)
        os << f << "," << fmt(report.folds[f].rmse) << "," << fmt(report.folds[f].mae) << ","
           << fmt(report.folds[f].smape) << "\n";
    os << "mean," << fmt(report.mean.rmse) << "," << fmt(report.mean.mae) << ","
       << fmt(report.mean.smape) << "\n";
    if (!os) throw IoError("write failed: " + path);
}

std::string render_report_table(const EvalReport& report) {
    std::ostringstream os;
    os << "fold     rmse        mae         smape\n";
    char buf[128];
    for (std::size_t f = 0; f < report.folds.size(); ++f) {
        std::snprintf(buf, sizeof(buf), "%-8zu %-11.4f %-11.4f %-11.4f\n", f, report.folds[f].rmse,
                      report.folds[f].mae, report.folds[f].smape);
        os << buf;
    }
    std::snprintf(buf, sizeof(buf), "%-8s %-11.4f %-11.4f %-11.4f\n", "mean", report.mean.rmse,
                  report.mean.mae, report.mean.smape);
    os << buf;
    return os.str();
}

void write_predictions_csv(const std::string& path, const std::vector<PredictionRecord>& preds,
                           const std::string& config_echo) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    if (!config_echo.empty()) os << "# " << config_echo << "\n";
    os << "fold,window_id,step,predicted,actual\n";
    char buf[160];
    for (const PredictionRecord& r : preds) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.17g,%.17g\n", r.fold, r.window_id, r.step,
                      r.predicted, r.actual);
        os << buf;
    }
    if (!os) throw IoError("write failed: " + path);
}

std::vector<PredictionRecord> load_predictions_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    std::vector<PredictionRecord> out;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "fold,window_id,step,predicted,actual")
                throw ParseError(path + ":" + std::to_string(line_no) + ": bad header");
            header_seen = true;
            continue;
        }
        PredictionRecord r;
        if (std::sscanf(line.c_str(), "%d,%d,%d,%lg,%lg", &r.fold, &r.window_id, &r.step,
                        &r.predicted, &r.actual) != 5)
            throw ParseError(path + ":" + std::to_string(line_no) + ": bad row");
        out.push_back(r);
    }
    if (out.empty()) throw DataError("no prediction rows in " + path);
    return out;
}

std::string render_ablation_table(const AblationTable& table) {
    std::ostringstream os;
    os << "variant           rmse        mae         smape       seeds\n";
    char buf[160];
    for (const AblationRow& row : table.rows) {
        std::snprintf(buf, sizeof(buf), "%-17s %-11.4f %-11.4f %-11.4f %d\n",
                      ablation_name(row.variant), row.metrics.rmse, row.metrics.mae,
                      row.metrics.smape, row.seeds);
        os << buf;
    }
    os << "complete wins on MAE:  " << (table.complete_wins_mae ? "yes" : "no") << "\n";
    os << "complete wins on RMSE: " << (table.complete_wins_rmse ? "yes" : "no") << "\n";
    return os.str();
}

void write_ablation_csv(const std::string& path, const AblationTable& table,
                        const std::string& config_echo) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    if (!config_echo.empty()) os << "# " << config_echo << "\n";
    os << "variant,rmse,mae,smape,seeds\n";
    for (const AblationRow& row : table.rows)
        os << ablation_name(row.variant) << "," << fmt(row.metrics.rmse) << ","
           << fmt(row.metrics.mae) << "," << fmt(row.metrics.smape) << "," << row.seeds << "\n";
    if (!os) throw IoError("write failed: " + path);
}

} // namespace wavecast
