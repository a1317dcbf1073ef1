#include "wavecast/wavelet.hpp"

#include <atomic>
#include <cmath>

namespace wavecast {

namespace {
std::atomic<std::int64_t> g_cwt_calls{0};
const double kPiQuarterInv = std::pow(M_PI, -0.25);
const double kMexHatNorm = 2.0 / (std::sqrt(3.0) * std::pow(M_PI, 0.25));
} // namespace

double evaluate(const MotherWavelet& w, double t) {
    const double env = std::exp(-0.5 * t * t);
    switch (w.kind) {
        case WaveletKind::Morlet:
            return kPiQuarterInv * std::cos(w.omega0 * t) * env;
        case WaveletKind::MexicanHat:
            return kMexHatNorm * (1.0 - t * t) * env;
    }
    throw StateError("unknown wavelet kind");
}

Tensor sample_kernel(const MotherWavelet& w, int k, double support) {
    if (k < 2) throw ArgumentError("sample_kernel needs k >= 2");
    if (support <= 0.0) throw ArgumentError("sample_kernel needs support > 0");
    Tensor out({k});
    double norm = 0.0;
    for (int i = 0; i < k; ++i) {
        const double t = -support + 2.0 * support * i / (k - 1);
        out.at(i) = evaluate(w, t);
        norm += out.at(i) * out.at(i);
    }
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (double& v : out.data) v /= norm;
    return out;
}

std::vector<double> dyadic_scales(int j_count) {
    if (j_count < 1) throw ArgumentError("need at least one scale");
    std::vector<double> scales(static_cast<std::size_t>(j_count));
    for (int j = 1; j <= j_count; ++j)
        scales[static_cast<std::size_t>(j - 1)] = std::pow(2.0, j / 2.0);
    return scales;
}

Tensor cwt(const Tensor& series, const std::vector<double>& scales, const MotherWavelet& w,
           double support) {
    if (series.ndim() != 1) throw ShapeError("cwt expects a 1-D series");
    const int len = series.dim(0);
    if (len < 4) throw ArgumentError("cwt needs T >= 4");
    if (scales.empty()) throw ArgumentError("cwt needs at least one scale");
    for (double a : scales)
        if (a <= 0.0) throw ArgumentError("cwt scale must be positive");
    g_cwt_calls.fetch_add(1, std::memory_order_relaxed);

    const int j_count = static_cast<int>(scales.size());
    Tensor out({j_count, len});
    for (int j = 0; j < j_count; ++j) {
        const double a = scales[static_cast<std::size_t>(j)];
        const double inv_sqrt_a = 1.0 / std::sqrt(a);
        const int reach = static_cast<int>(std::floor(support * a));
        // Wavelet taps are shift-invariant; evaluate once per offset.
        std::vector<double> taps(static_cast<std::size_t>(2 * reach + 1));
        for (int d = -reach; d <= reach; ++d)
            taps[static_cast<std::size_t>(d + reach)] = evaluate(w, d / a);
        for (int t = 0; t < len; ++t) {
            const int lo = std::max(0, t - reach);
            const int hi = std::min(len - 1, t + reach);
            // Taps are centered over the truncated window so a constant
            // series transforms to exactly zero (discrete admissibility).
            double tap_sum = 0.0;
            for (int u = lo; u <= hi; ++u) tap_sum += taps[static_cast<std::size_t>(u - t + reach)];
            const double tap_mean = tap_sum / static_cast<double>(hi - lo + 1);
            double acc = 0.0;
            for (int u = lo; u <= hi; ++u)
                acc += series.at(u) * (taps[static_cast<std::size_t>(u - t + reach)] - tap_mean);
            out.at(j, t) = inv_sqrt_a * acc;
        }
    }
    return out;
}

std::int64_t cwt_call_count() { return g_cwt_calls.load(std::memory_order_relaxed); }

const Tensor& WaveletKernelBank::filters(int m, int k) const {
    auto it = kernels.find({m, k});
    if (it == kernels.end())
        throw ConfigError("kernel bank missing wavelet " + std::to_string(m) + " length " +
                          std::to_string(k));
    return it->second;
}

Tensor WaveletKernelBank::conv_kernels(int m, int k) const {
    const Tensor& f = filters(m, k);
    return Tensor({f.dim(0), 1, f.dim(1)}, f.data);
}

WaveletKernelBank build_bank(const BankSpec& spec) {
    if (spec.wavelets.empty()) throw ConfigError("bank needs at least one wavelet");
    if (spec.max_kernel_length < 2) throw ConfigError("max kernel length must be >= 2");
    const int m_count = static_cast<int>(spec.wavelets.size());
    if (spec.filters_per_length % m_count != 0)
        throw ConfigError("filters per length must be divisible by wavelet count");
    const int per_wavelet = spec.filters_per_length / m_count;

    WaveletKernelBank bank;
    bank.spec = spec;
    for (int m = 0; m < m_count; ++m) {
        for (int k = 2; k <= spec.max_kernel_length; ++k) {
            Tensor filters({per_wavelet, k});
            for (int z = 0; z < per_wavelet; ++z) {
                // Geometric spread of support/scale values across variants.
                const double frac = per_wavelet == 1 ? 0.5 : static_cast<double>(z) / (per_wavelet - 1);
                const double s = spec.spread_min * std::pow(spec.spread_max / spec.spread_min, frac);
                double sup = spec.support / s;
                Tensor row = sample_kernel(spec.wavelets[static_cast<std::size_t>(m)], k, sup);
                // A sampling grid can land exactly on the wavelet's zero
                // crossings (Mexican hat at +-1 with k = 2); widen until the
                // filter is non-degenerate.
                auto zero_row = [&row] {
                    for (double v : row.data)
                        if (v != 0.0) return false;
                    return true;
                };
                while (zero_row()) {
                    sup *= 1.25;
                    row = sample_kernel(spec.wavelets[static_cast<std::size_t>(m)], k, sup);
                }
                for (int i = 0; i < k; ++i) filters.at(z, i) = row.at(i);
            }
            bank.kernels[{m, k}] = std::move(filters);
        }
    }
    return bank;
}

} // namespace wavecast
