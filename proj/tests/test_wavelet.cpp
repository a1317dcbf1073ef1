#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wavecast/wavelet.hpp"

using namespace wavecast;

namespace {

double psi_morlet6(double t) {
    return std::pow(M_PI, -0.25) * std::cos(6.0 * t) * std::exp(-t * t / 2.0);
}

double psi_mexican(double t) {
    return 2.0 / (std::sqrt(3.0) * std::pow(M_PI, 0.25)) * (1.0 - t * t) * std::exp(-t * t / 2.0);
}

} // namespace

TEST_CASE("mother wavelet values") {
    const MotherWavelet morlet = MotherWavelet::morlet();
    CHECK(evaluate(morlet, 0.0) == doctest::Approx(std::pow(M_PI, -0.25)).epsilon(1e-12));
    CHECK(evaluate(morlet, 1.3) == doctest::Approx(psi_morlet6(1.3)).epsilon(1e-12));

    const MotherWavelet mex = MotherWavelet::mexican_hat();
    CHECK(evaluate(mex, 0.0) ==
          doctest::Approx(2.0 / (std::sqrt(3.0) * std::pow(M_PI, 0.25))).epsilon(1e-12));
    CHECK(evaluate(mex, 1.0) == doctest::Approx(0.0).epsilon(1e-12)); // zero crossing at |t| = 1
    CHECK(evaluate(mex, 2.0) < 0.0);                                  // negative lobe
}

TEST_CASE("sample_kernel spans the support and is unit norm") {
    for (int k = 2; k <= 8; ++k) {
        const Tensor ker = sample_kernel(MotherWavelet::mexican_hat(), k, 3.0);
        REQUIRE(ker.numel() == static_cast<std::size_t>(k));
        double norm = 0.0;
        for (double v : ker.data) norm += v * v;
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(sample_kernel(MotherWavelet::morlet(), 1, 3.0), ArgumentError);
}

TEST_CASE("dyadic scale ladder") {
    const std::vector<double> s = dyadic_scales(8);
    REQUIRE(s.size() == 8);
    CHECK(s[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(s[7] == doctest::Approx(16.0).epsilon(1e-12)); // 2^(8/2)
    for (std::size_t j = 1; j < s.size(); ++j)
        CHECK(s[j] / s[j - 1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("cwt matches the direct transcription") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Tensor x({40});
    for (double& v : x.data) v = d(rng);
    const std::vector<double> scales = dyadic_scales(5);

    const Tensor got = cwt(x, scales, MotherWavelet::morlet(), 5.0);
    const Tensor want = oracles::cwt_naive(x, scales, 5.0, psi_morlet6);
    REQUIRE(got.shape == want.shape);
    for (std::size_t i = 0; i < got.numel(); ++i)
        CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-10));

    const Tensor got2 = cwt(x, scales, MotherWavelet::mexican_hat(), 5.0);
    const Tensor want2 = oracles::cwt_naive(x, scales, 5.0, psi_mexican);
    for (std::size_t i = 0; i < got2.numel(); ++i)
        CHECK(got2.data[i] == doctest::Approx(want2.data[i]).epsilon(1e-10));
}

TEST_CASE("cwt is linear in the signal") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Tensor a({24}), b({24});
    for (double& v : a.data) v = d(rng);
    for (double& v : b.data) v = d(rng);
    Tensor combo({24});
    for (int i = 0; i < 24; ++i) combo.at(i) = 2.0 * a.at(i) - 3.0 * b.at(i);

    const std::vector<double> scales = dyadic_scales(4);
    const MotherWavelet w = MotherWavelet::mexican_hat();
    const Tensor wa = cwt(a, scales, w), wb = cwt(b, scales, w), wc = cwt(combo, scales, w);
    for (std::size_t i = 0; i < wc.numel(); ++i)
        CHECK(wc.data[i] == doctest::Approx(2.0 * wa.data[i] - 3.0 * wb.data[i]).epsilon(1e-10));
}

TEST_CASE("mother wavelets are numerically zero-mean over [-5, 5]") {
    for (const MotherWavelet w : {MotherWavelet::morlet(), MotherWavelet::mexican_hat()}) {
        double integral = 0.0;
        for (double t = -5.0; t <= 5.0; t += 1e-3) integral += evaluate(w, t) * 1e-3;
        CHECK(std::fabs(integral) < 1e-3);
    }
}

TEST_CASE("cwt annihilates constant series exactly") {
    const Tensor ones({30}, 4.2);
    for (const MotherWavelet w : {MotherWavelet::morlet(), MotherWavelet::mexican_hat()}) {
        const Tensor out = cwt(ones, dyadic_scales(4), w);
        for (double v : out.data) CHECK(std::fabs(v) < 1e-12);
    }
}

TEST_CASE("cwt shift covariance at interior columns") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const int t_len = 80, shift = 3;
    Tensor x({t_len}), y({t_len}, 0.0);
    for (double& v : x.data) v = d(rng);
    for (int t = shift; t < t_len; ++t) y.at(t) = x.at(t - shift);

    const std::vector<double> scales = dyadic_scales(3); // max scale 2^1.5
    const double support = 5.0;
    const Tensor wx = cwt(x, scales, MotherWavelet::mexican_hat(), support);
    const Tensor wy = cwt(y, scales, MotherWavelet::mexican_hat(), support);
    for (std::size_t j = 0; j < scales.size(); ++j) {
        const int reach = static_cast<int>(std::floor(support * scales[j])) + shift;
        for (int t = reach; t < t_len - reach; ++t)
            CHECK(wy.at(static_cast<int>(j), t + shift) ==
                  doctest::Approx(wx.at(static_cast<int>(j), t)).epsilon(1e-8));
    }
}

TEST_CASE("pure sinusoid peaks at the matching Morlet scale") {
    const double period = 12.0;
    Tensor x({96});
    for (int t = 0; t < 96; ++t) x.at(t) = std::sin(2.0 * M_PI * t / period);
    // dense scale grid around the analytic best a = omega0 * P / (2 pi)
    std::vector<double> grid;
    for (double a = 2.0; a <= 24.0; a += 0.25) grid.push_back(a);
    const Tensor w = cwt(x, grid, MotherWavelet::morlet(), 5.0);
    double best_mean = -1.0;
    double best_scale = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        double mean_abs = 0.0;
        for (int t = 0; t < 96; ++t) mean_abs += std::fabs(w.at(static_cast<int>(j), t));
        if (mean_abs > best_mean) {
            best_mean = mean_abs;
            best_scale = grid[j];
        }
    }
    const double analytic = 6.0 * period / (2.0 * M_PI);
    CHECK(std::fabs(best_scale - analytic) < 1.5);
}

TEST_CASE("cwt validation") {
    CHECK_THROWS_AS(cwt(Tensor({3}, 0.0), dyadic_scales(2), MotherWavelet::morlet()),
                    ArgumentError);
    CHECK_THROWS_AS(cwt(Tensor({16}, 0.0), {0.0}, MotherWavelet::morlet()), ArgumentError);
    CHECK_THROWS_AS(cwt(Tensor({16}, 0.0), {-1.0}, MotherWavelet::morlet()), ArgumentError);
}

TEST_CASE("kernel bank layout") {
    BankSpec spec; // two wavelets, Z_k = 8, lengths 2..6
    const WaveletKernelBank bank = build_bank(spec);
    CHECK(bank.wavelet_count() == 2);
    CHECK(bank.filters_per_wavelet() == 4);
    for (int m = 0; m < 2; ++m)
        for (int k = 2; k <= 6; ++k) {
            const Tensor& f = bank.filters(m, k);
            REQUIRE(f.shape == std::vector<int>{4, k});
            for (int z = 0; z < 4; ++z) {
                double norm = 0.0;
                for (int j = 0; j < k; ++j) norm += f.at(z, j) * f.at(z, j);
                CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
            }
            const Tensor ck = bank.conv_kernels(m, k);
            CHECK(ck.shape == std::vector<int>{4, 1, k});
        }
    CHECK_THROWS_AS(bank.filters(0, 99), ConfigError);

    // deterministic rebuild
    const WaveletKernelBank again = build_bank(spec);
    for (const auto& [key, t] : bank.kernels) CHECK(again.kernels.at(key).data == t.data);
}

TEST_CASE("bank filters within a wavelet differ by spread") {
    BankSpec spec;
    const WaveletKernelBank bank = build_bank(spec);
    const Tensor& f = bank.filters(0, 6);
    bool any_diff = false;
    for (int j = 0; j < 6; ++j)
        if (std::fabs(f.at(0, j) - f.at(3, j)) > 1e-9) any_diff = true;
    CHECK(any_diff);
}
