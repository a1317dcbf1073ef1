#include "wavecast/gradcam.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace wavecast {

namespace {

std::vector<double> upsample(const std::vector<double>& v, int t_len, bool nearest) {
    const int n = static_cast<int>(v.size());
    std::vector<double> out(static_cast<std::size_t>(t_len), 0.0);
    if (n == 1) {
        std::fill(out.begin(), out.end(), v[0]);
        return out;
    }
    for (int t = 0; t < t_len; ++t) {
        const double pos = (t_len == 1) ? 0.0
                                        : static_cast<double>(t) * (n - 1) / (t_len - 1);
        if (nearest) {
            out[static_cast<std::size_t>(t)] = v[static_cast<std::size_t>(std::lround(pos))];
        } else {
            const int lo = static_cast<int>(std::floor(pos));
            const int hi = std::min(lo + 1, n - 1);
            const double frac = pos - lo;
            out[static_cast<std::size_t>(t)] =
                (1.0 - frac) * v[static_cast<std::size_t>(lo)] + frac * v[static_cast<std::size_t>(hi)];
        }
    }
    return out;
}

} // namespace

std::vector<std::string> gradcam_layers(const ModelConfig& cfg) {
    std::vector<std::string> out;
    if (cfg.use_lt)
        for (int k = 2; k <= cfg.mwkc.max_kernel_length; ++k) {
            out.push_back("mwkc_fused_k" + std::to_string(k));
            out.push_back("mwkc_block_k" + std::to_string(k));
        }
    if (cfg.use_cv) {
        const int combos = (1 << cfg.n_vars) - cfg.n_vars - 1;
        for (int i = 0; i < combos; ++i) out.push_back("cvdwcc_combo_" + std::to_string(i));
    }
    return out;
}

SaliencyMap gradcam_map(const Checkpoint& ckpt, const Tensor& x_raw, const GradCamOptions& opts) {
    const ModelConfig& cfg = ckpt.config;
    const WaveletKernelBank bank = build_bank(cfg.bank);
    const Tensor x_norm = normalize_input(x_raw, ckpt.stats);
    const int t_len = cfg.input_len, n = cfg.n_vars;

    WlmcTensor wlmc;
    if (cfg.use_cv) wlmc = build_wlmc_tensor(transpose(x_norm), cfg.wlmc);

    Graph g;
    ModelForward fwd =
        build_model_forward(g, x_norm, cfg.use_cv ? &wlmc : nullptr, cfg, bank, ckpt.params);

    SaliencyMap map;
    map.layer = opts.layer;
    NodeId target;
    if (opts.target_step < 0) {
        target = g.sum(fwd.output);
        map.target = "sum";
    } else {
        if (opts.target_step >= cfg.horizon) throw ArgumentError("target step out of range");
        target = g.pick(fwd.output, opts.target_step);
        map.target = "step " + std::to_string(opts.target_step);
    }
    g.backward(target);

    // Resolve the layer to a recorded activation node.
    NodeId layer_node = -1;
    int group = 0;                 // channels per variable (mwkc layers)
    std::vector<int> combo_members; // cvdwcc layers
    int parsed = 0;
    if (std::sscanf(opts.layer.c_str(), "mwkc_fused_k%d", &parsed) == 1 && cfg.use_lt &&
        fwd.lt.fused.count(parsed)) {
        layer_node = fwd.lt.fused.at(parsed);
        group = g.value(layer_node).dim(0) / n;
    } else if (std::sscanf(opts.layer.c_str(), "mwkc_block_k%d", &parsed) == 1 && cfg.use_lt &&
               fwd.lt.block_act.count(parsed)) {
        layer_node = fwd.lt.block_act.at(parsed);
        group = g.value(layer_node).dim(0) / n;
    } else if (std::sscanf(opts.layer.c_str(), "cvdwcc_combo_%d", &parsed) == 1 && cfg.use_cv &&
               parsed >= 0 && parsed < static_cast<int>(fwd.cv.combo_act.size())) {
        layer_node = fwd.cv.combo_act[static_cast<std::size_t>(parsed)];
        combo_members = wlmc.combos[static_cast<std::size_t>(parsed)];
    } else {
        throw ArgumentError("unknown gradcam layer: " + opts.layer);
    }

    const Tensor& act = g.value(layer_node);
    const Tensor& grad = g.grad(layer_node);
    map.values = Tensor({n, t_len}, 0.0);

    if (act.ndim() == 2) {
        // [N*group x L]: channel c belongs to variable c / group.
        const int channels = act.dim(0), len = act.dim(1);
        std::vector<double> weight(static_cast<std::size_t>(channels), 0.0);
        for (int c = 0; c < channels; ++c) {
            double acc = 0.0;
            for (int t = 0; t < len; ++t) acc += grad.at(c, t);
            weight[static_cast<std::size_t>(c)] = acc / static_cast<double>(len);
        }
        for (int v = 0; v < n; ++v) {
            std::vector<double> cam(static_cast<std::size_t>(len), 0.0);
            for (int c = v * group; c < (v + 1) * group; ++c)
                for (int t = 0; t < len; ++t)
                    cam[static_cast<std::size_t>(t)] += weight[static_cast<std::size_t>(c)] * act.at(c, t);
            for (double& x : cam) x = std::max(x, 0.0);
            const std::vector<double> up = upsample(cam, t_len, opts.nearest);
            for (int t = 0; t < t_len; ++t) map.values.at(v, t) = up[static_cast<std::size_t>(t)];
        }
    } else {
        // [C x H x W]: pool gradients over (H, W), collapse the cam over H,
        // attribute the time profile to the combination's member variables.
        const int channels = act.dim(0), h = act.dim(1), w = act.dim(2);
        std::vector<double> weight(static_cast<std::size_t>(channels), 0.0);
        for (int c = 0; c < channels; ++c) {
            double acc = 0.0;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) acc += grad.at(c, y, x);
            weight[static_cast<std::size_t>(c)] = acc / static_cast<double>(h * w);
        }
        std::vector<double> cam(static_cast<std::size_t>(w), 0.0);
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int c = 0; c < channels; ++c)
                for (int y = 0; y < h; ++y) acc += weight[static_cast<std::size_t>(c)] * act.at(c, y, x);
            cam[static_cast<std::size_t>(x)] = std::max(acc / static_cast<double>(h), 0.0);
        }
        const std::vector<double> up = upsample(cam, t_len, opts.nearest);
        for (int v : combo_members)
            for (int t = 0; t < t_len; ++t) map.values.at(v, t) = up[static_cast<std::size_t>(t)];
    }

    double mx = 0.0;
    for (double v : map.values.data) mx = std::max(mx, v);
    if (mx > 0.0)
        for (double& v : map.values.data) v /= mx;
    return map;
}

VariableImportance aggregate_variable_importance(const SaliencyMap& map) {
    const int n = map.values.dim(0), t_len = map.values.dim(1);
    VariableImportance vi;
    vi.per_variable.assign(static_cast<std::size_t>(n), 0.0);
    vi.per_time.assign(static_cast<std::size_t>(t_len), 0.0);
    for (int v = 0; v < n; ++v)
        for (int t = 0; t < t_len; ++t) {
            vi.per_variable[static_cast<std::size_t>(v)] += map.values.at(v, t);
            vi.per_time[static_cast<std::size_t>(t)] += map.values.at(v, t);
        }
    for (double& x : vi.per_variable) x /= static_cast<double>(t_len);
    for (double& x : vi.per_time) x /= static_cast<double>(n);
    return vi;
}

void write_saliency_csv(const std::string& path, const SaliencyMap& map,
                        const std::string& config_echo) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    if (!config_echo.empty()) os << "# " << config_echo << "\n";
    os << "# layer=" << map.layer << "\n";
    os << "# target=" << map.target << "\n";
    os << "variable,time,value\n";
    char buf[96];
    for (int v = 0; v < map.values.dim(0); ++v)
        for (int t = 0; t < map.values.dim(1); ++t) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", v, t, map.values.at(v, t));
            os << buf;
        }
    if (!os) throw IoError("write failed: " + path);
}

SaliencyMap load_saliency_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    SaliencyMap map;
    std::string line;
    int line_no = 0, max_v = -1, max_t = -1;
    bool header_seen = false;
    std::vector<std::pair<int, int>> coords;
    std::vector<double> values;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("# layer=", 0) == 0) {
            map.layer = line.substr(8);
            continue;
        }
        if (line.rfind("# target=", 0) == 0) {
            map.target = line.substr(9);
            continue;
        }
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "variable,time,value")
                throw ParseError(path + ":" + std::to_string(line_no) + ": bad header");
            header_seen = true;
            continue;
        }
        int v = 0, t = 0;
        double x = 0.0;
        if (std::sscanf(line.c_str(), "%d,%d,%lg", &v, &t, &x) != 3)
            throw ParseError(path + ":" + std::to_string(line_no) + ": bad row");
        coords.emplace_back(v, t);
        values.push_back(x);
        max_v = std::max(max_v, v);
        max_t = std::max(max_t, t);
    }
    if (coords.empty()) throw DataError("no saliency rows in " + path);
    map.values = Tensor({max_v + 1, max_t + 1}, 0.0);
    for (std::size_t i = 0; i < coords.size(); ++i)
        map.values.at(coords[i].first, coords[i].second) = values[i];
    return map;
}

} // namespace wavecast
