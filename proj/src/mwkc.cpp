#include "wavecast/mwkc.hpp"

#include <cmath>

namespace wavecast {

namespace {

std::string alpha_name(const MwkcConfig& cfg, int k) {
    return cfg.alpha_per_length ? "mwkc.alpha_k" + std::to_string(k) : "mwkc.alpha";
}

} // namespace

void check_mwkc_config(const MwkcConfig& cfg, const WaveletKernelBank& bank, int n_vars,
                       int input_len) {
    if (cfg.max_kernel_length < 2) throw ConfigError("mwkc needs max kernel length >= 2");
    if (cfg.max_kernel_length > input_len) throw ConfigError("mwkc kernel length exceeds input length");
    if (n_vars < 1) throw ConfigError("mwkc needs at least one variable");
    const int m_count = bank.wavelet_count();
    if (cfg.filters_per_length % m_count != 0)
        throw ConfigError("filters per length must be divisible by wavelet count");
    for (int k = 2; k <= cfg.max_kernel_length; ++k)
        for (int m = 0; m < m_count; ++m) bank.filters(m, k); // throws if missing
}

void init_mwkc_params(ParamStore& store, const MwkcConfig& cfg, const WaveletKernelBank& bank,
                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int m_count = bank.wavelet_count();
    const Tensor alpha0({m_count}, 1.0 / m_count);
    if (cfg.alpha_per_length) {
        for (int k = 2; k <= cfg.max_kernel_length; ++k) store.add(alpha_name(cfg, k), alpha0);
    } else {
        store.add("mwkc.alpha", alpha0);
    }
    const double lim = std::sqrt(1.0 / (cfg.filters_per_length * cfg.block_kernel));
    for (int k = 2; k <= cfg.max_kernel_length; ++k) {
        store.add("mwkc.block_w_k" + std::to_string(k),
                  uniform_tensor({cfg.block_channels, cfg.filters_per_length, cfg.block_kernel}, lim,
                                 rng));
        store.add("mwkc.block_b_k" + std::to_string(k), Tensor({cfg.block_channels}, 0.0));
    }
}

MwkcForward build_mwkc_forward(Graph& g, NodeId x_tr, const WaveletKernelBank& bank,
                               const MwkcConfig& cfg, const ParamStore& params,
                               ParamBinding& binding) {
    const int n_vars = g.value(x_tr).dim(0);
    check_mwkc_config(cfg, bank, n_vars, g.value(x_tr).dim(1));
    const int m_count = bank.wavelet_count();

    MwkcForward out;
    std::vector<NodeId> features;
    for (int k = 2; k <= cfg.max_kernel_length; ++k) {
        const NodeId alpha = bind_param(g, params, binding, alpha_name(cfg, k));
        std::vector<NodeId> wavelet_kernels;
        for (int m = 0; m < m_count; ++m) wavelet_kernels.push_back(g.input(bank.conv_kernels(m, k)));

        // F'^(k): per variable, each wavelet's filter group scaled by alpha_m.
        std::vector<NodeId> groups;
        for (int v = 0; v < n_vars; ++v) {
            const NodeId row = g.slice_rows(x_tr, v, v + 1);
            for (int m = 0; m < m_count; ++m) {
                const NodeId conv = g.conv1d(row, wavelet_kernels[static_cast<std::size_t>(m)], 1);
                groups.push_back(g.scale(conv, g.pick(alpha, m)));
            }
        }
        const NodeId fused = g.concat(groups);
        out.fused[k] = fused;

        // Per-variable conv block (weights shared across variables).
        const NodeId block_w = bind_param(g, params, binding, "mwkc.block_w_k" + std::to_string(k));
        const NodeId block_b = bind_param(g, params, binding, "mwkc.block_b_k" + std::to_string(k));
        std::vector<NodeId> block_parts;
        for (int v = 0; v < n_vars; ++v) {
            const NodeId branch =
                g.slice_rows(fused, v * cfg.filters_per_length, (v + 1) * cfg.filters_per_length);
            block_parts.push_back(g.relu(g.bias_ch(g.conv1d(branch, block_w, 1), block_b)));
        }
        const NodeId act = g.concat(block_parts);
        out.block_act[k] = act;
        features.push_back(g.mean_pool_last(act));
    }
    out.feature = g.concat(features);
    return out;
}

std::map<int, Tensor> mwkc_forward(const Tensor& x_tr, const WaveletKernelBank& bank,
                                   const MwkcConfig& cfg, const ParamStore& params) {
    check_mwkc_config(cfg, bank, x_tr.dim(0), x_tr.dim(1));
    const int n_vars = x_tr.dim(0), t_len = x_tr.dim(1);
    const int m_count = bank.wavelet_count();
    std::map<int, Tensor> out;
    for (int k = 2; k <= cfg.max_kernel_length; ++k) {
        const Tensor& alpha = params.at(alpha_name(cfg, k));
        std::vector<Tensor> groups;
        for (int v = 0; v < n_vars; ++v) {
            Tensor row({1, t_len});
            for (int t = 0; t < t_len; ++t) row.at(0, t) = x_tr.at(v, t);
            for (int m = 0; m < m_count; ++m) {
                Tensor conv = conv1d(row, bank.conv_kernels(m, k), 1);
                for (double& x : conv.data) x *= alpha.at(m);
                groups.push_back(std::move(conv));
            }
        }
        out[k] = concat(groups);
    }
    return out;
}

} // namespace wavecast
