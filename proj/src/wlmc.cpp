#include "wavecast/wlmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace wavecast {

namespace {

constexpr double kRidgeLambda = 1e-8;
// Pair combinations have analytically equal member R^2 (symmetric
// correlation), so the argmax must treat float-level differences as ties;
// ties resolve to the lowest member index.
constexpr double kTieEps = 1e-9;

// Gaussian elimination with partial pivoting; a is q x q row-major and is
// destroyed. Returns false when a pivot is effectively zero.
bool solve_linear(std::vector<double> a, std::vector<double> b, int q, std::vector<double>& out) {
    double scale = 0.0;
    for (int i = 0; i < q; ++i) scale = std::max(scale, std::abs(a[static_cast<std::size_t>(i) * q + i]));
    const double tiny = 1e-12 * std::max(1.0, scale);
    for (int col = 0; col < q; ++col) {
        int piv = col;
        for (int r = col + 1; r < q; ++r)
            if (std::abs(a[static_cast<std::size_t>(r) * q + col]) >
                std::abs(a[static_cast<std::size_t>(piv) * q + col]))
                piv = r;
        if (std::abs(a[static_cast<std::size_t>(piv) * q + col]) < tiny) return false;
        if (piv != col) {
            for (int c = 0; c < q; ++c)
                std::swap(a[static_cast<std::size_t>(piv) * q + c], a[static_cast<std::size_t>(col) * q + c]);
            std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(col)]);
        }
        const double d = a[static_cast<std::size_t>(col) * q + col];
        for (int r = col + 1; r < q; ++r) {
            const double f = a[static_cast<std::size_t>(r) * q + col] / d;
            if (f == 0.0) continue;
            for (int c = col; c < q; ++c)
                a[static_cast<std::size_t>(r) * q + c] -= f * a[static_cast<std::size_t>(col) * q + c];
            b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
        }
    }
    out.assign(static_cast<std::size_t>(q), 0.0);
    for (int r = q - 1; r >= 0; --r) {
        double acc = b[static_cast<std::size_t>(r)];
        for (int c = r + 1; c < q; ++c) acc -= a[static_cast<std::size_t>(r) * q + c] * out[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] = acc / a[static_cast<std::size_t>(r) * q + r];
    }
    return true;
}

bool degenerate_target(double ss_tot, double mean_sq) {
    return ss_tot <= 1e-12 * (1.0 + mean_sq);
}

// R^2 of regressing member `i` (position within the combination) on the other
// members, from the shared weighted Gram matrix over [1, w_1..w_v].
struct GramFit {
    double r2 = 0.0;
    bool ridge_used = false;
    bool degenerate = false;
};

GramFit r2_from_gram(const std::vector<double>& gram, int v, int i) {
    const int g = v + 1; // intercept + members
    const int ti = i + 1;
    const double mean_y = gram[static_cast<std::size_t>(ti)]; // sum w * y * 1
    const double mean_sq = gram[static_cast<std::size_t>(ti) * g + ti];
    const double ss_tot = mean_sq - mean_y * mean_y;
    GramFit fit;
    if (degenerate_target(ss_tot, mean_sq)) {
        fit.degenerate = true;
        return fit;
    }
    // Design = intercept plus all members except i.
    std::vector<int> idx;
    idx.reserve(static_cast<std::size_t>(v));
    idx.push_back(0);
    for (int m = 1; m <= v; ++m)
        if (m != ti) idx.push_back(m);
    const int q = static_cast<int>(idx.size());
    std::vector<double> a(static_cast<std::size_t>(q) * q), b(static_cast<std::size_t>(q));
    for (int r = 0; r < q; ++r) {
        b[static_cast<std::size_t>(r)] = gram[static_cast<std::size_t>(idx[static_cast<std::size_t>(r)]) * g + ti];
        for (int c = 0; c < q; ++c)
            a[static_cast<std::size_t>(r) * q + c] =
                gram[static_cast<std::size_t>(idx[static_cast<std::size_t>(r)]) * g + idx[static_cast<std::size_t>(c)]];
    }
    std::vector<double> beta;
    if (!solve_linear(a, b, q, beta)) {
        fit.ridge_used = true;
        std::vector<double> ar = a;
        for (int r = 0; r < q; ++r) ar[static_cast<std::size_t>(r) * q + r] += kRidgeLambda;
        if (!solve_linear(ar, b, q, beta)) return fit; // fully degenerate regressors
    }
    double quad = 0.0, lin = 0.0;
    for (int r = 0; r < q; ++r) {
        lin += beta[static_cast<std::size_t>(r)] * b[static_cast<std::size_t>(r)];
        double row = 0.0;
        for (int c = 0; c < q; ++c)
            row += a[static_cast<std::size_t>(r) * q + c] * beta[static_cast<std::size_t>(c)];
        quad += beta[static_cast<std::size_t>(r)] * row;
    }
    const double ss_res = mean_sq - 2.0 * lin + quad;
    fit.r2 = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
    return fit;
}

} // namespace

Tensor local_weight_window(int s, double h, int t_len) {
    if (h <= 0.0) throw ArgumentError("weight window bandwidth must be positive");
    if (s < 0 || s >= t_len) throw ArgumentError("weight window center out of range");
    Tensor w({t_len});
    double sum = 0.0;
    for (int t = 0; t < t_len; ++t) {
        const double d = t - s;
        w.at(t) = std::exp(-d * d / (2.0 * h * h));
        sum += w.at(t);
    }
    for (double& v : w.data) v /= sum;
    return w;
}

LocalFit local_multiple_regression(const Tensor& target, const Tensor& regressors,
                                   const Tensor& weights) {
    if (target.ndim() != 1 || regressors.ndim() != 2 || weights.ndim() != 1)
        throw ShapeError("local_multiple_regression expects target[T], regressors[p x T], weights[T]");
    const int t_len = target.dim(0);
    const int p = regressors.dim(0);
    if (regressors.dim(1) != t_len || weights.dim(0) != t_len)
        throw ShapeError("local_multiple_regression length mismatch");
    if (p < 1) throw ArgumentError("need at least one regressor");

    const int q = p + 1;
    std::vector<double> a(static_cast<std::size_t>(q) * q, 0.0), b(static_cast<std::size_t>(q), 0.0);
    double mean_y = 0.0, mean_sq = 0.0;
    std::vector<double> phi(static_cast<std::size_t>(q));
    for (int t = 0; t < t_len; ++t) {
        const double wt = weights.at(t);
        const double y = target.at(t);
        phi[0] = 1.0;
        for (int r = 0; r < p; ++r) phi[static_cast<std::size_t>(r + 1)] = regressors.at(r, t);
        for (int r = 0; r < q; ++r) {
            b[static_cast<std::size_t>(r)] += wt * phi[static_cast<std::size_t>(r)] * y;
            for (int c = 0; c < q; ++c)
                a[static_cast<std::size_t>(r) * q + c] += wt * phi[static_cast<std::size_t>(r)] * phi[static_cast<std::size_t>(c)];
        }
        mean_y += wt * y;
        mean_sq += wt * y * y;
    }

    LocalFit fit;
    fit.fitted = Tensor({t_len});
    const double ss_tot = mean_sq - mean_y * mean_y;
    std::vector<double> beta;
    if (!solve_linear(a, b, q, beta)) {
        fit.ridge_used = true;
        for (int r = 0; r < q; ++r) a[static_cast<std::size_t>(r) * q + r] += kRidgeLambda;
        if (!solve_linear(a, b, q, beta)) beta.assign(static_cast<std::size_t>(q), 0.0);
    }
    double ss_res = 0.0;
    for (int t = 0; t < t_len; ++t) {
        double f = beta[0];
        for (int r = 0; r < p; ++r) f += beta[static_cast<std::size_t>(r + 1)] * regressors.at(r, t);
        fit.fitted.at(t) = f;
        const double d = f - target.at(t);
        ss_res += weights.at(t) * d * d;
    }
    if (degenerate_target(ss_tot, mean_sq)) {
        fit.degenerate = true;
        fit.r2 = 0.0;
        return fit;
    }
    fit.r2 = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
    return fit;
}

WlmcPoint wlmc_at(const std::vector<Tensor>& scalograms, const std::vector<int>& members, int j,
                  int s, double h) {
    if (members.size() < 2) throw ArgumentError("wlmc combination needs at least two members");
    const int t_len = scalograms[static_cast<std::size_t>(members[0])].dim(1);
    const Tensor weights = local_weight_window(s, h, t_len);
    const int v = static_cast<int>(members.size());

    WlmcPoint best;
    best.dominant = members[0];
    double best_r2 = -1.0;
    bool any = false;
    for (int i = 0; i < v; ++i) {
        Tensor target({t_len});
        Tensor regressors({v - 1, t_len});
        int row = 0;
        for (int m = 0; m < v; ++m) {
            const Tensor& sc = scalograms[static_cast<std::size_t>(members[static_cast<std::size_t>(m)])];
            if (m == i) {
                for (int t = 0; t < t_len; ++t) target.at(t) = sc.at(j, t);
            } else {
                for (int t = 0; t < t_len; ++t) regressors.at(row, t) = sc.at(j, t);
                ++row;
            }
        }
        LocalFit fit = local_multiple_regression(target, regressors, weights);
        if (fit.degenerate) continue;
        if (!any || fit.r2 > best_r2 + kTieEps) {
            best_r2 = fit.r2;
            best.dominant = members[static_cast<std::size_t>(i)];
        }
        any = true;
    }
    best.phi = any ? std::sqrt(best_r2) : 0.0;
    return best;
}

std::vector<std::vector<int>> variable_combinations(int n) {
    if (n < 2) throw ArgumentError("combinations need n >= 2");
    std::vector<std::vector<int>> out;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) < 2) continue;
        std::vector<int> combo;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) combo.push_back(i);
        out.push_back(std::move(combo));
    }
    std::sort(out.begin(), out.end());
    return out;
}

WlmcTensor build_wlmc_tensor(const Tensor& x_tr, const WlmcConfig& cfg) {
    if (x_tr.ndim() != 2) throw ShapeError("build_wlmc_tensor expects [N x T]");
    const int n = x_tr.dim(0), t_len = x_tr.dim(1);
    if (n < 2) throw ArgumentError("build_wlmc_tensor needs N >= 2");
    const int j_count = static_cast<int>(cfg.scales.size());

    // One CWT per variable.
    std::vector<Tensor> scalograms;
    scalograms.reserve(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        Tensor series({t_len});
        for (int t = 0; t < t_len; ++t) series.at(t) = x_tr.at(v, t);
        scalograms.push_back(cwt(series, cfg.scales, cfg.wavelet, cfg.cwt_support));
    }

    WlmcTensor out;
    out.combos = variable_combinations(n);
    out.variable_count = n;
    const int n_combos = static_cast<int>(out.combos.size());
    out.coeff = Tensor({n_combos, j_count, t_len});
    out.dominant = Tensor({n_combos, j_count, t_len});
    const double dom_scale = n > 1 ? 1.0 / (n - 1) : 0.0;

    std::vector<Tensor> windows;
    windows.reserve(static_cast<std::size_t>(t_len));
    for (int s = 0; s < t_len; ++s) windows.push_back(local_weight_window(s, cfg.bandwidth, t_len));

    for (int c = 0; c < n_combos; ++c) {
        const std::vector<int>& members = out.combos[static_cast<std::size_t>(c)];
        const int v = static_cast<int>(members.size());
        const int g = v + 1;
        std::vector<double> gram(static_cast<std::size_t>(g) * g);
        std::vector<double> phi(static_cast<std::size_t>(g));
        for (int j = 0; j < j_count; ++j) {
            for (int s = 0; s < t_len; ++s) {
                const Tensor& w = windows[static_cast<std::size_t>(s)];
                std::fill(gram.begin(), gram.end(), 0.0);
                for (int t = 0; t < t_len; ++t) {
                    const double wt = w.at(t);
                    phi[0] = 1.0;
                    for (int m = 0; m < v; ++m)
                        phi[static_cast<std::size_t>(m + 1)] =
                            scalograms[static_cast<std::size_t>(members[static_cast<std::size_t>(m)])].at(j, t);
                    for (int r = 0; r < g; ++r) {
                        const double wr = wt * phi[static_cast<std::size_t>(r)];
                        for (int cc = r; cc < g; ++cc)
                            gram[static_cast<std::size_t>(r) * g + cc] += wr * phi[static_cast<std::size_t>(cc)];
                    }
                }
                for (int r = 0; r < g; ++r)
                    for (int cc = 0; cc < r; ++cc)
                        gram[static_cast<std::size_t>(r) * g + cc] = gram[static_cast<std::size_t>(cc) * g + r];

                double best_r2 = -1.0;
                int best_member = members[0];
                bool any = false;
                for (int i = 0; i < v; ++i) {
                    GramFit fit = r2_from_gram(gram, v, i);
                    if (fit.degenerate) continue;
                    if (!any || fit.r2 > best_r2 + kTieEps) {
                        best_r2 = fit.r2;
                        best_member = members[static_cast<std::size_t>(i)];
                    }
                    any = true;
                }
                out.coeff.at(c, j, s) = any ? std::sqrt(best_r2) : 0.0;
                out.dominant.at(c, j, s) = best_member * dom_scale;
            }
        }
    }
    return out;
}

std::uint64_t wlmc_cache_key(const Tensor& x_tr, const WlmcConfig& cfg) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix_bytes = [&h](const void* p, std::size_t n) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    auto mix_double = [&](double d) { mix_bytes(&d, sizeof(d)); };
    for (int dim : x_tr.shape) mix_double(dim);
    for (double v : x_tr.data) mix_double(v);
    for (double s : cfg.scales) mix_double(s);
    mix_double(cfg.bandwidth);
    mix_double(static_cast<double>(static_cast<int>(cfg.wavelet.kind)));
    mix_double(cfg.wavelet.omega0);
    mix_double(cfg.cwt_support);
    return h;
}

std::shared_ptr<const WlmcTensor> WlmcCache::get_or_compute(const Tensor& x_tr,
                                                            const WlmcConfig& cfg) {
    const std::uint64_t key = wlmc_cache_key(x_tr, cfg);
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = map_.find(key);
        if (it != map_.end()) return it->second;
    }
    auto tensor = std::make_shared<const WlmcTensor>(build_wlmc_tensor(x_tr, cfg));
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] = map_.emplace(key, std::move(tensor));
    return it->second;
}

std::size_t WlmcCache::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return map_.size();
}

} // namespace wavecast
