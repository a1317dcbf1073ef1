#include "wavecast/cvdwcc.hpp"

#include <cmath>

namespace wavecast {

namespace {

std::string kernel_name(const CvDwccConfig& cfg, int combo) {
    return cfg.per_combination_kernels ? "cvdwcc.kernel_c" + std::to_string(combo) : "cvdwcc.kernel";
}

} // namespace

void init_cvdwcc_params(ParamStore& store, const CvDwccConfig& cfg, int n_vars, int n_combos,
                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int in_ch = cfg.onehot_dominant ? 1 + n_vars : 2;
    const double lim = std::sqrt(1.0 / (in_ch * cfg.kernel_h * cfg.kernel_w));
    const std::vector<int> shape = {cfg.channels, in_ch, cfg.kernel_h, cfg.kernel_w};
    if (cfg.per_combination_kernels) {
        for (int c = 0; c < n_combos; ++c)
            store.add("cvdwcc.kernel_c" + std::to_string(c), uniform_tensor(shape, lim, rng));
    } else {
        store.add("cvdwcc.kernel", uniform_tensor(shape, lim, rng));
    }
    store.add("cvdwcc.bias", Tensor({cfg.channels}, 0.0));
}

Tensor cv_dwcc_input_image(const WlmcTensor& wlmc, int combo, bool onehot_dominant) {
    const int j_count = wlmc.coeff.dim(1), t_len = wlmc.coeff.dim(2);
    const int n = wlmc.variable_count;
    const int in_ch = onehot_dominant ? 1 + n : 2;
    Tensor img({in_ch, j_count, t_len});
    for (int j = 0; j < j_count; ++j)
        for (int t = 0; t < t_len; ++t) {
            img.at(0, j, t) = wlmc.coeff.at(combo, j, t);
            const double d = wlmc.dominant.at(combo, j, t);
            if (onehot_dominant) {
                const int v = static_cast<int>(std::lround(d * (n - 1)));
                img.at(1 + v, j, t) = 1.0;
            } else {
                img.at(1, j, t) = d;
            }
        }
    return img;
}

CvDwccForward build_cv_dwcc_forward(Graph& g, const WlmcTensor& wlmc, const CvDwccConfig& cfg,
                                    const ParamStore& params, ParamBinding& binding) {
    const int n_combos = wlmc.coeff.dim(0);
    CvDwccForward out;
    const NodeId bias = bind_param(g, params, binding, "cvdwcc.bias");
    std::vector<NodeId> pooled;
    for (int c = 0; c < n_combos; ++c) {
        const NodeId img = g.input(cv_dwcc_input_image(wlmc, c, cfg.onehot_dominant));
        const NodeId kernel = bind_param(g, params, binding, kernel_name(cfg, c));
        const NodeId act = g.relu(g.bias_ch(g.conv2d(img, kernel), bias));
        out.combo_act.push_back(act);
        pooled.push_back(g.mean_pool_last(act));
    }
    out.feature = g.concat(pooled);
    return out;
}

} // namespace wavecast
