#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "wavecast/tensor.hpp"

namespace wavecast {

enum class WaveletKind { Morlet, MexicanHat };

/// Mother wavelet. Morlet is the real part with center frequency omega0;
/// the admissibility correction term is dropped (< 1e-7 at omega0 = 6).
struct MotherWavelet {
    WaveletKind kind = WaveletKind::Morlet;
    double omega0 = 6.0; // Morlet only

    static MotherWavelet morlet(double omega0 = 6.0) { return {WaveletKind::Morlet, omega0}; }
    static MotherWavelet mexican_hat() { return {WaveletKind::MexicanHat, 0.0}; }
};

double evaluate(const MotherWavelet& w, double t);

/// Sample psi at k points uniformly spanning [-support, support], then
/// normalize to unit L2 norm. Feeds conv1d as a correlation kernel.
Tensor sample_kernel(const MotherWavelet& w, int k, double support);

/// Dyadic scale ladder a_j = 2^(j/2), j = 1..j_count.
std::vector<double> dyadic_scales(int j_count);

/// W[j,t] = (1/sqrt(a_j)) * sum_u x[u] * psi((u-t)/a_j), truncated at
/// |(u-t)/a_j| <= support; edges use the truncated sum (no padding). The
/// sampled taps are mean-centered over each truncation window, so constant
/// series transform to exactly zero everywhere (discrete admissibility).
Tensor cwt(const Tensor& series, const std::vector<double>& scales, const MotherWavelet& w,
           double support = 5.0);

/// Process-wide count of cwt() invocations (performance-contract checks).
std::int64_t cwt_call_count();

/// Everything needed to rebuild a kernel bank deterministically.
struct BankSpec {
    std::vector<MotherWavelet> wavelets = {MotherWavelet::morlet(), MotherWavelet::mexican_hat()};
    int max_kernel_length = 6; // d; lengths cover {2..d}
    int filters_per_length = 8; // Z_k, divisible by wavelet count
    double support = 2.0;       // base sampling half-width
    double spread_min = 0.5;    // geometric spread of internal scales
    double spread_max = 2.0;
};

/// Sampled wavelet convolution filters: (wavelet index m, length k) ->
/// [Z_k/M x k], unit-norm rows. The same filter set is applied to every
/// input variable, so the fused per-length stack has N*Z_k channels.
struct WaveletKernelBank {
    BankSpec spec;
    std::map<std::pair<int, int>, Tensor> kernels;

    int wavelet_count() const { return static_cast<int>(spec.wavelets.size()); }
    int filters_per_wavelet() const { return spec.filters_per_length / wavelet_count(); }
    const Tensor& filters(int m, int k) const;
    /// Filters for (m, k) shaped for conv1d over one variable: [Z_k/M x 1 x k].
    Tensor conv_kernels(int m, int k) const;
};

WaveletKernelBank build_bank(const BankSpec& spec);

} // namespace wavecast
