#include "wavecast/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace wavecast {

namespace {

int combo_count(int n_vars) {
    return (1 << n_vars) - n_vars - 1;
}

// Fusion weight applied to one branch's head output: scalar softmax weight or
// a per-feature weight row, depending on config.
NodeId apply_fusion_weight(Graph& g, NodeId features, NodeId weights, int branch, bool per_feature,
                           int width) {
    if (per_feature) {
        const NodeId row = g.slice_rows(weights, branch, branch + 1);
        return g.mul(features, g.reshape(row, {width}));
    }
    return g.scale(features, g.pick(weights, branch));
}

} // namespace

void check_model_config(const ModelConfig& cfg) {
    if (cfg.input_len < 2 || cfg.horizon < 1) throw ConfigError("bad input/horizon length");
    if (cfg.n_vars < 1) throw ConfigError("need at least one variable");
    if (cfg.head_width < 1) throw ConfigError("head width must be positive");
    if (!cfg.use_lt && !cfg.use_cv) throw ConfigError("at least one branch must be enabled");
    if (cfg.use_lt && cfg.mwkc.max_kernel_length > cfg.input_len)
        throw ConfigError("mwkc kernel length exceeds input length");
    if (cfg.use_cv) {
        if (cfg.n_vars < 2) throw ConfigError("cv-dwcc needs at least two variables");
        if (cfg.wlmc.scales.empty()) throw ConfigError("cv-dwcc needs at least one scale");
        if (cfg.cvdwcc.kernel_h > static_cast<int>(cfg.wlmc.scales.size()) ||
            cfg.cvdwcc.kernel_w > cfg.input_len)
            throw ConfigError("cv-dwcc kernel exceeds the J x T image");
    }
}

int lt_feature_len(const ModelConfig& cfg) {
    return (cfg.mwkc.max_kernel_length - 1) * cfg.n_vars * cfg.mwkc.block_channels;
}

int cv_feature_len(const ModelConfig& cfg) {
    return combo_count(cfg.n_vars) * cfg.cvdwcc.channels;
}

ParamStore init_model_params(const ModelConfig& cfg, const WaveletKernelBank& bank,
                             std::uint64_t seed) {
    check_model_config(cfg);
    ParamStore store;
    if (cfg.use_lt) init_mwkc_params(store, cfg.mwkc, bank, seed + 1);
    if (cfg.use_cv) init_cvdwcc_params(store, cfg.cvdwcc, cfg.n_vars, combo_count(cfg.n_vars), seed + 2);

    std::mt19937_64 rng(seed + 3);
    const int width = cfg.head_width;
    auto head_init = [&](const std::string& name, int in_len) {
        const double lim = std::sqrt(6.0 / (in_len + width));
        store.add(name + ".w", uniform_tensor({width, in_len}, lim, rng));
        store.add(name + ".b", Tensor({width}, 0.0));
    };
    if (cfg.use_lt && cfg.use_cv) {
        if (cfg.concat_first) {
            head_init("head", lt_feature_len(cfg) + cv_feature_len(cfg));
        } else {
            head_init("head_lt", lt_feature_len(cfg));
            head_init("head_cv", cv_feature_len(cfg));
        }
        store.add("fusion.scores", (cfg.fusion_per_feature && !cfg.concat_first)
                                       ? Tensor({2, width}, 0.0)
                                       : Tensor({2}, 0.0));
    } else {
        head_init("head", cfg.use_lt ? lt_feature_len(cfg) : cv_feature_len(cfg));
    }
    const double lim = std::sqrt(6.0 / (width + cfg.horizon));
    store.add("out.w", uniform_tensor({cfg.horizon, width}, lim, rng));
    store.add("out.b", Tensor({cfg.horizon}, 0.0));
    return store;
}

ModelForward build_model_forward(Graph& g, const Tensor& x_norm, const WlmcTensor* wlmc,
                                 const ModelConfig& cfg, const WaveletKernelBank& bank,
                                 const ParamStore& params) {
    check_model_config(cfg);
    if (x_norm.ndim() != 2 || x_norm.dim(0) != cfg.input_len || x_norm.dim(1) != cfg.n_vars)
        throw ShapeError("model input must be [T x N], got " + x_norm.shape_str());
    if (cfg.use_cv && !wlmc) throw ArgumentError("cv branch requires a WLMC tensor");

    ModelForward fwd;
    NodeId f_lt = -1, f_cv = -1;
    if (cfg.use_lt) {
        const NodeId x_tr = g.input(transpose(x_norm));
        fwd.lt = build_mwkc_forward(g, x_tr, bank, cfg.mwkc, params, fwd.binding);
        f_lt = fwd.lt.feature;
    }
    if (cfg.use_cv) {
        fwd.cv = build_cv_dwcc_forward(g, *wlmc, cfg.cvdwcc, params, fwd.binding);
        f_cv = fwd.cv.feature;
    }

    auto head = [&](const std::string& name, NodeId in) {
        const NodeId w = bind_param(g, params, fwd.binding, name + ".w");
        const NodeId b = bind_param(g, params, fwd.binding, name + ".b");
        return g.relu(g.affine(in, w, b));
    };

    NodeId fused;
    if (cfg.use_lt && cfg.use_cv) {
        const NodeId scores = bind_param(g, params, fwd.binding, "fusion.scores");
        const bool per_feature = cfg.fusion_per_feature && !cfg.concat_first;
        fwd.fusion_weights = per_feature ? g.softmax_cols(scores) : g.softmax(scores);
        if (cfg.concat_first) {
            // Branch feature widths differ, so concat-first weights each
            // branch by its scalar before the shared head.
            const NodeId a = g.scale(f_lt, g.pick(fwd.fusion_weights, 0));
            const NodeId b = g.scale(f_cv, g.pick(fwd.fusion_weights, 1));
            fused = head("head", g.concat({a, b}));
        } else {
            const NodeId h_lt = head("head_lt", f_lt);
            const NodeId h_cv = head("head_cv", f_cv);
            const NodeId a =
                apply_fusion_weight(g, h_lt, fwd.fusion_weights, 0, per_feature, cfg.head_width);
            const NodeId b =
                apply_fusion_weight(g, h_cv, fwd.fusion_weights, 1, per_feature, cfg.head_width);
            fused = g.add(a, b);
        }
    } else {
        fused = head("head", cfg.use_lt ? f_lt : f_cv);
    }

    const NodeId out_w = bind_param(g, params, fwd.binding, "out.w");
    const NodeId out_b = bind_param(g, params, fwd.binding, "out.b");
    fwd.output = g.affine(fused, out_w, out_b);
    return fwd;
}

Tensor model_forward(const Tensor& x_norm, const ModelConfig& cfg, const WaveletKernelBank& bank,
                     const ParamStore& params, WlmcCache& cache) {
    Graph g;
    std::shared_ptr<const WlmcTensor> wlmc;
    if (cfg.use_cv) wlmc = cache.get_or_compute(transpose(x_norm), cfg.wlmc);
    ModelForward fwd = build_model_forward(g, x_norm, wlmc.get(), cfg, bank, params);
    return g.value(fwd.output);
}

TrainResult train(const std::vector<MtsWindow>& samples, const NormStats& stats,
                  const ModelConfig& cfg, const WaveletKernelBank& bank, const TrainConfig& tc,
                  WlmcCache& cache) {
    if (samples.empty()) throw ArgumentError("train needs a non-empty dataset");
    if (tc.learning_rate < 0.0) throw ConfigError("negative learning rate");
    if (tc.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (tc.batch_size < 1 || tc.train_stride < 1) throw ConfigError("bad batch size or stride");

    // Last val_fraction of the (temporally ordered) samples is the validation
    // slice; both sides honor train_stride.
    const int total = static_cast<int>(samples.size());
    int n_train = total - static_cast<int>(std::floor(tc.val_fraction * total));
    n_train = std::clamp(n_train, 1, total);
    std::vector<int> train_ids, val_ids;
    for (int i = 0; i < n_train; i += tc.train_stride) train_ids.push_back(i);
    for (int i = n_train; i < total; i += tc.train_stride) val_ids.push_back(i);

    struct Prepared {
        Tensor x_norm;
        Tensor target_norm;
        std::shared_ptr<const WlmcTensor> wlmc;
    };
    auto prepare = [&](int id) {
        const MtsWindow& s = samples[static_cast<std::size_t>(id)];
        Prepared p;
        p.x_norm = normalize_input(s.x, stats);
        p.target_norm = normalize_target(s.target, stats);
        if (cfg.use_cv) p.wlmc = cache.get_or_compute(transpose(p.x_norm), cfg.wlmc);
        return p;
    };

    TrainResult result;
    result.params = init_model_params(cfg, bank, tc.seed);
    ParamStore& params = result.params;

    std::map<std::string, Tensor> adam_m, adam_v, grad_acc;
    for (const auto& [name, t] : params.tensors) {
        adam_m.emplace(name, Tensor(t.shape, 0.0));
        adam_v.emplace(name, Tensor(t.shape, 0.0));
        grad_acc.emplace(name, Tensor(t.shape, 0.0));
    }

    auto run_sample = [&](const Prepared& p, bool accumulate) {
        Graph g;
        ModelForward fwd = build_model_forward(g, p.x_norm, p.wlmc.get(), cfg, bank, params);
        const NodeId target = g.input(p.target_norm);
        const NodeId loss = g.mse(fwd.output, target);
        const double loss_val = g.value(loss).data[0];
        if (accumulate) {
            g.backward(loss);
            for (const auto& [name, node] : fwd.binding.nodes) {
                Tensor& acc = grad_acc.at(name);
                const Tensor& grad = g.grad(node);
                for (std::size_t i = 0; i < acc.numel(); ++i) acc.data[i] += grad.data[i];
            }
        }
        return loss_val;
    };

    ParamStore best_params = params;
    double best_val = std::numeric_limits<double>::infinity();
    int wait = 0;
    long step = 0;
    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        std::vector<int> order = train_ids;
        std::mt19937_64 rng(tc.seed ^ (0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), rng);

        double epoch_loss = 0.0;
        for (std::size_t pos = 0; pos < order.size(); pos += static_cast<std::size_t>(tc.batch_size)) {
            const std::size_t end = std::min(order.size(), pos + static_cast<std::size_t>(tc.batch_size));
            for (auto& [name, t] : grad_acc) std::fill(t.data.begin(), t.data.end(), 0.0);
            for (std::size_t i = pos; i < end; ++i) {
                const double loss = run_sample(prepare(order[i]), true);
                if (!std::isfinite(loss))
                    throw NumericError("NaN training loss; learning rate likely too high");
                epoch_loss += loss;
            }
            const double inv_batch = 1.0 / static_cast<double>(end - pos);
            ++step;
            const double bc1 = 1.0 - std::pow(tc.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(tc.beta2, static_cast<double>(step));
            for (auto& [name, p] : params.tensors) {
                Tensor& m = adam_m.at(name);
                Tensor& v = adam_v.at(name);
                const Tensor& gacc = grad_acc.at(name);
                for (std::size_t i = 0; i < p.numel(); ++i) {
                    const double gi = gacc.data[i] * inv_batch;
                    m.data[i] = tc.beta1 * m.data[i] + (1.0 - tc.beta1) * gi;
                    v.data[i] = tc.beta2 * v.data[i] + (1.0 - tc.beta2) * gi * gi;
                    p.data[i] -= tc.learning_rate * (m.data[i] / bc1) /
                                 (std::sqrt(v.data[i] / bc2) + tc.epsilon);
                }
            }
            if (!params.all_finite())
                throw NumericError("non-finite parameter after optimizer step");
        }
        result.curve.push_back(epoch_loss / static_cast<double>(order.size()));
        result.epochs_run = epoch + 1;

        double val_loss = result.curve.back();
        if (!val_ids.empty()) {
            val_loss = 0.0;
            for (int id : val_ids) val_loss += run_sample(prepare(id), false);
            val_loss /= static_cast<double>(val_ids.size());
        }
        if (val_loss < best_val - 1e-12) {
            best_val = val_loss;
            best_params = params;
            wait = 0;
        } else if (++wait >= tc.patience) {
            break;
        }
    }
    result.params = best_params;
    result.best_val_loss = best_val;
    return result;
}

ForecastResult predict(const Tensor& x_raw, int window_id, const ModelConfig& cfg,
                       const WaveletKernelBank& bank, const ParamStore& params,
                       const NormStats& stats, WlmcCache& cache) {
    if (stats.mean.empty()) throw StateError("normalization stats not fitted");
    const Tensor x_norm = normalize_input(x_raw, stats);
    ForecastResult result;
    result.prediction = denormalize_target(model_forward(x_norm, cfg, bank, params, cache), stats);
    result.window_id = window_id;
    result.denormalized = true;
    return result;
}

// ---- checkpoint ------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'W', 'V', 'C', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_i32(std::ostream& os, std::int32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }

void put_string(std::ostream& os, const std::string& s) {
    put_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_doubles(std::ostream& os, const std::vector<double>& v) {
    put_u32(os, static_cast<std::uint32_t>(v.size()));
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
}

std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

std::int32_t get_i32(std::istream& is) {
    std::int32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

double get_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

std::string get_string(std::istream& is) {
    std::string s(get_u32(is), '\0');
    is.read(s.data(), static_cast<std::streamsize>(s.size()));
    return s;
}

std::vector<double> get_doubles(std::istream& is) {
    std::vector<double> v(get_u32(is));
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
    return v;
}

} // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path);
    os.write(kMagic, 4);
    put_u32(os, kVersion);

    const ModelConfig& c = ckpt.config;
    put_i32(os, c.input_len);
    put_i32(os, c.horizon);
    put_i32(os, c.n_vars);
    put_i32(os, c.head_width);
    put_i32(os, (c.use_lt ? 1 : 0) | (c.use_cv ? 2 : 0) | (c.fusion_per_feature ? 4 : 0) |
                    (c.concat_first ? 8 : 0));
    put_i32(os, c.mwkc.max_kernel_length);
    put_i32(os, c.mwkc.filters_per_length);
    put_i32(os, c.mwkc.block_channels);
    put_i32(os, c.mwkc.block_kernel);
    put_i32(os, c.mwkc.alpha_per_length ? 1 : 0);
    put_i32(os, c.cvdwcc.channels);
    put_i32(os, c.cvdwcc.kernel_h);
    put_i32(os, c.cvdwcc.kernel_w);
    put_i32(os, (c.cvdwcc.onehot_dominant ? 1 : 0) | (c.cvdwcc.per_combination_kernels ? 2 : 0));
    put_doubles(os, c.wlmc.scales);
    put_f64(os, c.wlmc.bandwidth);
    put_i32(os, static_cast<std::int32_t>(c.wlmc.wavelet.kind));
    put_f64(os, c.wlmc.wavelet.omega0);
    put_f64(os, c.wlmc.cwt_support);

    put_u32(os, static_cast<std::uint32_t>(c.bank.wavelets.size()));
    for (const MotherWavelet& w : c.bank.wavelets) {
        put_i32(os, static_cast<std::int32_t>(w.kind));
        put_f64(os, w.omega0);
    }
    put_i32(os, c.bank.max_kernel_length);
    put_i32(os, c.bank.filters_per_length);
    put_f64(os, c.bank.support);
    put_f64(os, c.bank.spread_min);
    put_f64(os, c.bank.spread_max);

    put_doubles(os, ckpt.stats.mean);
    put_doubles(os, ckpt.stats.stddev);
    put_u32(os, static_cast<std::uint32_t>(ckpt.stats.constant_flags.size()));
    for (bool b : ckpt.stats.constant_flags) put_i32(os, b ? 1 : 0);

    put_u32(os, static_cast<std::uint32_t>(ckpt.params.tensors.size()));
    for (const auto& [name, t] : ckpt.params.tensors) {
        put_string(os, name);
        put_u32(os, static_cast<std::uint32_t>(t.shape.size()));
        for (int d : t.shape) put_i32(os, d);
        put_doubles(os, t.data);
    }
    if (!os) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("not a checkpoint file: " + path);
    if (get_u32(is) != kVersion) throw DataError("unsupported checkpoint version");

    Checkpoint ckpt;
    ModelConfig& c = ckpt.config;
    c.input_len = get_i32(is);
    c.horizon = get_i32(is);
    c.n_vars = get_i32(is);
    c.head_width = get_i32(is);
    const int flags = get_i32(is);
    c.use_lt = flags & 1;
    c.use_cv = flags & 2;
    c.fusion_per_feature = flags & 4;
    c.concat_first = flags & 8;
    c.mwkc.max_kernel_length = get_i32(is);
    c.mwkc.filters_per_length = get_i32(is);
    c.mwkc.block_channels = get_i32(is);
    c.mwkc.block_kernel = get_i32(is);
    c.mwkc.alpha_per_length = get_i32(is) != 0;
    c.cvdwcc.channels = get_i32(is);
    c.cvdwcc.kernel_h = get_i32(is);
    c.cvdwcc.kernel_w = get_i32(is);
    const int cvflags = get_i32(is);
    c.cvdwcc.onehot_dominant = cvflags & 1;
    c.cvdwcc.per_combination_kernels = cvflags & 2;
    c.wlmc.scales = get_doubles(is);
    c.wlmc.bandwidth = get_f64(is);
    c.wlmc.wavelet.kind = static_cast<WaveletKind>(get_i32(is));
    c.wlmc.wavelet.omega0 = get_f64(is);
    c.wlmc.cwt_support = get_f64(is);

    c.bank.wavelets.clear();
    const std::uint32_t wcount = get_u32(is);
    for (std::uint32_t i = 0; i < wcount; ++i) {
        MotherWavelet w;
        w.kind = static_cast<WaveletKind>(get_i32(is));
        w.omega0 = get_f64(is);
        c.bank.wavelets.push_back(w);
    }
    c.bank.max_kernel_length = get_i32(is);
    c.bank.filters_per_length = get_i32(is);
    c.bank.support = get_f64(is);
    c.bank.spread_min = get_f64(is);
    c.bank.spread_max = get_f64(is);

    ckpt.stats.mean = get_doubles(is);
    ckpt.stats.stddev = get_doubles(is);
    const std::uint32_t fcount = get_u32(is);
    ckpt.stats.constant_flags.clear();
    for (std::uint32_t i = 0; i < fcount; ++i) ckpt.stats.constant_flags.push_back(get_i32(is) != 0);

    const std::uint32_t pcount = get_u32(is);
    for (std::uint32_t i = 0; i < pcount; ++i) {
        const std::string name = get_string(is);
        std::vector<int> shape(get_u32(is));
        for (int& d : shape) d = get_i32(is);
        std::vector<double> data = get_doubles(is);
        ckpt.params.tensors.emplace(name, Tensor(shape, std::move(data)));
    }
    if (!is) throw DataError("truncated checkpoint: " + path);
    return ckpt;
}

} // namespace wavecast
