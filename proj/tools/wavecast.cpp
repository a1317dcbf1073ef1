// wavecast: synthesize grid data, train, evaluate, ablate, predict, explain.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "wavecast/config.hpp"
#include "wavecast/gradcam.hpp"
#include "wavecast/metrics.hpp"
#include "wavecast/svg.hpp"

namespace fs = std::filesystem;
using namespace wavecast;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct Cli {
    std::string config_file;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides; // key=value pairs
};

RunConfig resolve_config(const Cli& cli) {
    RunConfig cfg;
    if (!cli.config_file.empty()) cfg = load_run_config(cli.config_file);
    for (const std::string& kv : cli.overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("override must be key=value: '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (cli.seed) cfg.set("seed", std::to_string(*cli.seed));
    if (!cli.out_dir.empty()) cfg.out_dir = cli.out_dir;
    return cfg;
}

void add_common(CLI::App* cmd, Cli& cli) {
    cmd->add_option("--config", cli.config_file, "key = value config file");
    cmd->add_option("-o,--out", cli.out_dir, "output directory");
    cmd->add_option("--seed", cli.seed, "override the config seed");
    cmd->add_option("--set", cli.overrides, "config override, key=value (repeatable)");
}

fs::path ensure_out_dir(const RunConfig& cfg) {
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<RawGridRecord> load_records(const RunConfig& cfg) {
    if (cfg.data_path.empty()) throw DataError("no data file given (set data=... or --set data=...)");
    if (!cfg.mix_path.empty()) {
        const std::map<std::int64_t, double> mix = load_mix_csv(cfg.mix_path);
        return load_csv(cfg.data_path, &mix);
    }
    return load_csv(cfg.data_path);
}

WindowedDataset load_windows(const RunConfig& cfg) {
    return make_windows(load_records(cfg), cfg.input_len, cfg.horizon, cfg.stride);
}

int cmd_synth(const Cli& cli) {
    const RunConfig cfg = resolve_config(cli);
    if (cfg.days < 1) throw ConfigError("days must be >= 1");
    const std::vector<RawGridRecord> records = synthesize_grid(cfg.synth_config());
    const fs::path dir = ensure_out_dir(cfg);
    const fs::path path = cfg.data_path.empty() ? dir / "synthetic.csv" : fs::path(cfg.data_path);
    write_csv(path.string(), records, cfg.echo());
    std::cout << records.size() << " rows -> " << path.string() << "\n";
    return kExitOk;
}

int cmd_train(const Cli& cli) {
    const RunConfig cfg = resolve_config(cli);
    const WindowedDataset ds = load_windows(cfg);
    const ModelConfig mc = cfg.model_config();
    const TrainConfig tc = cfg.train_config();
    const WaveletKernelBank bank = build_bank(mc.bank);
    const FoldSplit split =
        kfold_split(static_cast<int>(ds.samples.size()), cfg.folds, cfg.purge_gap);
    const fs::path dir = ensure_out_dir(cfg);
    WlmcCache cache;

    for (int f = 0; f < split.fold_count; ++f) {
        std::vector<MtsWindow> train_samples;
        for (int id : split.train_indices(f))
            train_samples.push_back(ds.samples[static_cast<std::size_t>(id)]);
        const NormStats stats = fit_normalization(train_samples);
        const TrainResult tr = train(train_samples, stats, mc, bank, tc, cache);
        const fs::path ckpt_path = dir / ("fold" + std::to_string(f) + ".ckpt");
        save_checkpoint(ckpt_path.string(), {mc, tr.params, stats});

        const fs::path curve_path = dir / ("fold" + std::to_string(f) + "_curve.csv");
        std::ofstream os(curve_path);
        if (!os) throw IoError("cannot write " + curve_path.string());
        os << "# " << cfg.echo() << "\n";
        os << "epoch,train_loss\n";
        char buf[64];
        for (std::size_t e = 0; e < tr.curve.size(); ++e) {
            std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", e, tr.curve[e]);
            os << buf;
        }
        std::cout << "fold " << f << ": " << tr.epochs_run << " epochs, best val loss "
                  << tr.best_val_loss << " -> " << ckpt_path.string() << "\n";
    }
    return kExitOk;
}

int cmd_eval(const Cli& cli, bool dump_predictions) {
    const RunConfig cfg = resolve_config(cli);
    const WindowedDataset ds = load_windows(cfg);
    const fs::path dir = ensure_out_dir(cfg);
    const FoldSplit split =
        kfold_split(static_cast<int>(ds.samples.size()), cfg.folds, cfg.purge_gap);
    WlmcCache cache;

    // Score the per-fold checkpoints written by `train`.
    std::vector<PredictionRecord> preds;
    for (int f = 0; f < split.fold_count; ++f) {
        const fs::path ckpt_path = dir / ("fold" + std::to_string(f) + ".ckpt");
        if (!fs::exists(ckpt_path))
            throw StateError("missing checkpoint " + ckpt_path.string() + " (run train first)");
        const Checkpoint ckpt = load_checkpoint(ckpt_path.string());
        const WaveletKernelBank bank = build_bank(ckpt.config.bank);
        std::vector<PredictionRecord> fold_preds =
            score_windows(ds.samples, split.test_indices(f), ckpt.config, bank, ckpt.params,
                          ckpt.stats, cache, f);
        preds.insert(preds.end(), fold_preds.begin(), fold_preds.end());
    }
    EvalReport report = report_from_predictions(preds, split.fold_count);
    report.seed = cfg.seed;
    report.config_echo = cfg.echo();
    write_report_csv((dir / "eval_report.csv").string(), report);
    if (dump_predictions)
        write_predictions_csv((dir / "eval_predictions.csv").string(), preds, cfg.echo());
    std::cout << render_report_table(report);
    return kExitOk;
}

int cmd_ablate(const Cli& cli, int seed_count) {
    const RunConfig cfg = resolve_config(cli);
    const WindowedDataset ds = load_windows(cfg);
    const ModelConfig mc = cfg.model_config();
    const TrainConfig tc = cfg.train_config();
    const FoldSplit split =
        kfold_split(static_cast<int>(ds.samples.size()), cfg.folds, cfg.purge_gap);
    const fs::path dir = ensure_out_dir(cfg);
    WlmcCache cache;

    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < seed_count; ++i) seeds.push_back(cfg.seed + static_cast<std::uint64_t>(i));
    const AblationTable table = run_ablation(ds.samples, split, mc, tc, seeds, cache);
    write_ablation_csv((dir / "ablation.csv").string(), table, cfg.echo());
    std::cout << render_ablation_table(table);
    return kExitOk;
}

Checkpoint load_single_checkpoint(const RunConfig& cfg, const std::string& explicit_path) {
    fs::path path(explicit_path);
    if (explicit_path.empty()) path = fs::path(cfg.out_dir) / "fold0.ckpt";
    if (!fs::exists(path)) throw StateError("missing checkpoint " + path.string());
    return load_checkpoint(path.string());
}

const MtsWindow& select_window(const WindowedDataset& ds, int window) {
    if (window < 0 || window >= static_cast<int>(ds.samples.size()))
        throw ArgumentError("window id out of range: " + std::to_string(window) + " (have " +
                            std::to_string(ds.samples.size()) + ")");
    return ds.samples[static_cast<std::size_t>(window)];
}

int cmd_predict(const Cli& cli, const std::string& ckpt_path, int window) {
    const RunConfig cfg = resolve_config(cli);
    const Checkpoint ckpt = load_single_checkpoint(cfg, ckpt_path);
    const WindowedDataset ds =
        make_windows(load_records(cfg), ckpt.config.input_len, ckpt.config.horizon, cfg.stride);
    const MtsWindow& w = select_window(ds, window);
    const WaveletKernelBank bank = build_bank(ckpt.config.bank);
    WlmcCache cache;
    const ForecastResult fc =
        predict(w.x, w.id, ckpt.config, bank, ckpt.params, ckpt.stats, cache);

    const fs::path dir = ensure_out_dir(cfg);
    const fs::path csv_path = dir / "forecast.csv";
    std::ofstream os(csv_path);
    if (!os) throw IoError("cannot write " + csv_path.string());
    os << "# " << cfg.echo() << "\n";
    os << "step,predicted,actual\n";
    char buf[96];
    for (int s = 0; s < ckpt.config.horizon; ++s) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", s, fc.prediction.at(s), w.target.at(s));
        os << buf;
    }

    std::vector<PlotSeries> series;
    PlotSeries pred_series{"predicted", {}, {}, ""};
    PlotSeries actual_series{"actual", {}, {}, ""};
    for (int s = 0; s < ckpt.config.horizon; ++s) {
        pred_series.x.push_back(s);
        pred_series.y.push_back(fc.prediction.at(s));
        actual_series.x.push_back(s);
        actual_series.y.push_back(w.target.at(s));
    }
    series.push_back(pred_series);
    series.push_back(actual_series);
    const fs::path svg_path = dir / "forecast.svg";
    write_svg(svg_path.string(),
              render_line_svg(series, "CIF forecast, window " + std::to_string(w.id),
                              "horizon step", "g CO2-e/kWh", cfg.echo()));
    std::cout << "forecast -> " << csv_path.string() << ", " << svg_path.string() << "\n";
    return kExitOk;
}

int cmd_explain(const Cli& cli, const std::string& ckpt_path, int window,
                const GradCamOptions& opts) {
    const RunConfig cfg = resolve_config(cli);
    const Checkpoint ckpt = load_single_checkpoint(cfg, ckpt_path);
    const WindowedDataset ds =
        make_windows(load_records(cfg), ckpt.config.input_len, ckpt.config.horizon, cfg.stride);
    const MtsWindow& w = select_window(ds, window);
    const SaliencyMap map = gradcam_map(ckpt, w.x, opts);

    const fs::path dir = ensure_out_dir(cfg);
    const fs::path csv_path = dir / "saliency.csv";
    write_saliency_csv(csv_path.string(), map, cfg.echo());
    std::vector<std::string> labels;
    for (int v = 0; v < ckpt.config.n_vars; ++v) labels.push_back(kVariableNames[v]);
    const fs::path svg_path = dir / "saliency.svg";
    write_svg(svg_path.string(),
              render_heatmap_svg(map.values, labels,
                                 "Saliency (" + map.layer + ", window " + std::to_string(w.id) + ")",
                                 cfg.echo()));
    std::cout << "saliency -> " << csv_path.string() << ", " << svg_path.string() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"carbon-intensity forecasting with wavelet convolution branches"};
    app.require_subcommand(1);

    Cli cli;
    std::string ckpt_path;
    int window = 0;
    int seed_count = 3;
    bool dump_predictions = false;
    GradCamOptions gopts;

    std::optional<int> days_flag, epochs_flag;

    CLI::App* synth = app.add_subcommand("synth", "write a synthetic dataset CSV");
    add_common(synth, cli);
    synth->add_option("--days", days_flag, "shorthand for --set days=N");

    CLI::App* tr = app.add_subcommand("train", "train per-fold models");
    add_common(tr, cli);
    tr->add_option("--epochs", epochs_flag, "shorthand for --set epochs=N");

    CLI::App* ev = app.add_subcommand("eval", "score per-fold checkpoints");
    add_common(ev, cli);
    ev->add_flag("--dump-predictions", dump_predictions, "also write per-window prediction CSV");

    CLI::App* ab = app.add_subcommand("ablate", "three-variant ablation comparison");
    add_common(ab, cli);
    ab->add_option("--seeds", seed_count, "number of training seeds to average");

    CLI::App* pr = app.add_subcommand("predict", "forecast one window");
    add_common(pr, cli);
    pr->add_option("--checkpoint", ckpt_path, "checkpoint file (default: <out>/fold0.ckpt)");
    pr->add_option("--window", window, "window index into the dataset");

    CLI::App* ex = app.add_subcommand("explain", "Grad-CAM saliency for one window");
    add_common(ex, cli);
    ex->add_option("--checkpoint", ckpt_path, "checkpoint file (default: <out>/fold0.ckpt)");
    ex->add_option("--window", window, "window index into the dataset");
    ex->add_option("--layer", gopts.layer, "conv layer id (default mwkc_block_k2)");
    ex->add_option("--target-step", gopts.target_step, "target one horizon step (-1: sum of all)");
    ex->add_flag("--nearest", gopts.nearest, "nearest-neighbor upsampling");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    if (days_flag) cli.overrides.push_back("days=" + std::to_string(*days_flag));
    if (epochs_flag) cli.overrides.push_back("epochs=" + std::to_string(*epochs_flag));

    try {
        if (synth->parsed()) return cmd_synth(cli);
        if (tr->parsed()) return cmd_train(cli);
        if (ev->parsed()) return cmd_eval(cli, dump_predictions);
        if (ab->parsed()) return cmd_ablate(cli, seed_count);
        if (pr->parsed()) return cmd_predict(cli, ckpt_path, window);
        if (ex->parsed()) return cmd_explain(cli, ckpt_path, window, gopts);
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
