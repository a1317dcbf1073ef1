#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "wavecast/tensor.hpp"
#include "wavecast/wavelet.hpp"

namespace wavecast {

/// Gaussian weights w[t] ~ exp(-(t-s)^2 / (2 h^2)) over t = 0..T-1,
/// renormalized to sum 1 (boundary truncation handled by the renormalization).
/// s is the 0-based center index.
Tensor local_weight_window(int s, double h, int t_len);

struct LocalFit {
    Tensor fitted;          // length T
    double r2 = 0.0;        // clamped to [0, 1]; 0 for a degenerate target
    bool ridge_used = false;
    bool degenerate = false;
};

/// Weighted linear regression with intercept of target on regressors [p x T].
/// Singular normal equations fall back to ridge (lambda = 1e-8) and set the
/// diagnostics flag.
LocalFit local_multiple_regression(const Tensor& target, const Tensor& regressors,
                                   const Tensor& weights);

struct WlmcPoint {
    double phi = 0.0; // sqrt of the best local R^2, in [0, 1]
    int dominant = 0; // raw variable index of the best-explained member
};

/// WLMC at one (scale row j, center s) for a variable combination.
/// scalograms[v] is the [J x T] CWT of variable v; members lists the raw
/// variable indices in the combination. Ties take the lowest index.
WlmcPoint wlmc_at(const std::vector<Tensor>& scalograms, const std::vector<int>& members, int j,
                  int s, double h);

/// All subsets of {0..n-1} with size >= 2, lexicographic by sorted tuple.
/// Count is 2^n - n - 1.
std::vector<std::vector<int>> variable_combinations(int n);

struct WlmcTensor {
    Tensor coeff;    // C: [combos x J x T], entries in [0, 1]
    Tensor dominant; // D: [combos x J x T], entries i/(N-1) for 0-based i
    std::vector<std::vector<int>> combos;
    int variable_count = 0;
};

struct WlmcConfig {
    std::vector<double> scales = dyadic_scales(8);
    double bandwidth = 8.0; // h, in time steps
    MotherWavelet wavelet = MotherWavelet::morlet();
    double cwt_support = 5.0;
};

/// Computes each variable's CWT exactly once, then fills C and D for every
/// (combination, scale, time). X_tr is [N x T], N >= 2.
WlmcTensor build_wlmc_tensor(const Tensor& x_tr, const WlmcConfig& cfg);

std::uint64_t wlmc_cache_key(const Tensor& x_tr, const WlmcConfig& cfg);

/// Content-hash keyed cache; WLMC is deterministic and the most expensive
/// stage, so windows are computed once and shared.
class WlmcCache {
public:
    std::shared_ptr<const WlmcTensor> get_or_compute(const Tensor& x_tr, const WlmcConfig& cfg);
    std::size_t size() const;

private:
    mutable std::mutex mu_;
    std::unordered_map<std::uint64_t, std::shared_ptr<const WlmcTensor>> map_;
};

} // namespace wavecast
