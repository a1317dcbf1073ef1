#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <unistd.h>

#include "wavecast/gradcam.hpp"

using namespace wavecast;
namespace fs = std::filesystem;

namespace {

Checkpoint tiny_checkpoint(std::uint64_t seed) {
    ModelConfig cfg;
    cfg.input_len = 24;
    cfg.horizon = 4;
    cfg.n_vars = 5;
    cfg.head_width = 8;
    cfg.mwkc.max_kernel_length = 3;
    cfg.mwkc.filters_per_length = 4;
    cfg.mwkc.block_channels = 2;
    cfg.cvdwcc.channels = 2;
    cfg.wlmc.scales = dyadic_scales(3);
    cfg.wlmc.bandwidth = 4.0;
    cfg.bank.max_kernel_length = 3;
    cfg.bank.filters_per_length = 4;

    Checkpoint ckpt;
    ckpt.config = cfg;
    ckpt.params = init_model_params(cfg, build_bank(cfg.bank), seed);
    ckpt.stats.mean.assign(5, 0.0);
    ckpt.stats.stddev.assign(5, 1.0);
    ckpt.stats.constant_flags.assign(5, false);
    return ckpt;
}

Tensor random_window(const ModelConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Tensor x({cfg.input_len, cfg.n_vars});
    for (double& v : x.data) v = d(rng);
    return x;
}

} // namespace

TEST_CASE("layer catalogue matches the config") {
    const Checkpoint ckpt = tiny_checkpoint(81);
    const auto layers = gradcam_layers(ckpt.config);
    // k = 2..3 gives 4 mwkc layers; 5 variables give 2^5-5-1 = 26 combos
    CHECK(layers.size() == 4 + 26);
    CHECK(std::count(layers.begin(), layers.end(), "mwkc_fused_k2") == 1);
    CHECK(std::count(layers.begin(), layers.end(), "cvdwcc_combo_25") == 1);
}

TEST_CASE("saliency shape, range, and determinism") {
    const Checkpoint ckpt = tiny_checkpoint(82);
    const Tensor x = random_window(ckpt.config, 821);
    for (const std::string& layer :
         {std::string("mwkc_fused_k2"), std::string("mwkc_block_k3"), std::string("cvdwcc_combo_0")}) {
        GradCamOptions opts;
        opts.layer = layer;
        const SaliencyMap a = gradcam_map(ckpt, x, opts);
        REQUIRE(a.values.shape == std::vector<int>{5, 24});
        double mx = 0.0;
        for (double v : a.values.data) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            mx = std::max(mx, v);
        }
        CHECK((mx == 0.0 || mx == doctest::Approx(1.0).epsilon(1e-12)));
        const SaliencyMap b = gradcam_map(ckpt, x, opts);
        CHECK(a.values.data == b.values.data);
    }
}

TEST_CASE("zeroed forecast head yields an all-zero map") {
    Checkpoint ckpt = tiny_checkpoint(83);
    for (double& v : ckpt.params.at("out.w").data) v = 0.0;
    for (double& v : ckpt.params.at("out.b").data) v = 0.0;
    const SaliencyMap map = gradcam_map(ckpt, random_window(ckpt.config, 831));
    for (double v : map.values.data) CHECK(v == 0.0);
}

TEST_CASE("normalized maps are invariant to positive output rescaling") {
    Checkpoint ckpt = tiny_checkpoint(84);
    const Tensor x = random_window(ckpt.config, 841);
    GradCamOptions opts;
    opts.layer = "mwkc_block_k2";
    const SaliencyMap base = gradcam_map(ckpt, x, opts);

    for (double& v : ckpt.params.at("out.w").data) v *= 7.5;
    for (double& v : ckpt.params.at("out.b").data) v *= 7.5;
    const SaliencyMap scaled = gradcam_map(ckpt, x, opts);
    for (std::size_t i = 0; i < base.values.numel(); ++i)
        CHECK(scaled.values.data[i] == doctest::Approx(base.values.data[i]).epsilon(1e-8));
}

TEST_CASE("combo layers attribute saliency only to member variables") {
    const Checkpoint ckpt = tiny_checkpoint(85);
    const Tensor x = random_window(ckpt.config, 851);
    GradCamOptions opts;
    opts.layer = "cvdwcc_combo_0"; // first combination is {0, 1}
    const SaliencyMap map = gradcam_map(ckpt, x, opts);
    for (int t = 0; t < 24; ++t) {
        CHECK(map.values.at(2, t) == 0.0);
        CHECK(map.values.at(3, t) == 0.0);
        CHECK(map.values.at(4, t) == 0.0);
        CHECK(map.values.at(0, t) == map.values.at(1, t)); // shared time profile
    }
}

TEST_CASE("target step selection and validation") {
    const Checkpoint ckpt = tiny_checkpoint(86);
    const Tensor x = random_window(ckpt.config, 861);
    GradCamOptions opts;
    opts.target_step = 2;
    const SaliencyMap map = gradcam_map(ckpt, x, opts);
    CHECK(map.target == "step 2");

    opts.target_step = 99;
    CHECK_THROWS_AS(gradcam_map(ckpt, x, opts), ArgumentError);
    opts.target_step = -1;
    opts.layer = "no_such_layer";
    CHECK_THROWS_AS(gradcam_map(ckpt, x, opts), ArgumentError);
    opts.layer = "mwkc_block_k9"; // valid pattern, absent length
    CHECK_THROWS_AS(gradcam_map(ckpt, x, opts), ArgumentError);
}

TEST_CASE("nearest upsampling stays piecewise constant") {
    const Checkpoint ckpt = tiny_checkpoint(87);
    const Tensor x = random_window(ckpt.config, 871);
    GradCamOptions opts;
    opts.layer = "mwkc_block_k3";
    opts.nearest = true;
    const SaliencyMap map = gradcam_map(ckpt, x, opts);
    // every value must equal some coarse-grid value reachable by rounding;
    // cheap proxy: nearest and linear agree at both window ends
    GradCamOptions lin = opts;
    lin.nearest = false;
    const SaliencyMap lmap = gradcam_map(ckpt, x, lin);
    for (int v = 0; v < 5; ++v) {
        CHECK(map.values.at(v, 0) == doctest::Approx(lmap.values.at(v, 0)).epsilon(1e-12));
        CHECK(map.values.at(v, 23) == doctest::Approx(lmap.values.at(v, 23)).epsilon(1e-12));
    }
}

TEST_CASE("aggregates are row and column means") {
    SaliencyMap map;
    map.values = Tensor({2, 3}, 0.0);
    map.values.at(0, 0) = 1.0;
    map.values.at(0, 1) = 0.5;
    map.values.at(1, 2) = 0.25;
    const VariableImportance vi = aggregate_variable_importance(map);
    REQUIRE(vi.per_variable.size() == 2);
    REQUIRE(vi.per_time.size() == 3);
    CHECK(vi.per_variable[0] == doctest::Approx(1.5 / 3.0).epsilon(1e-12));
    CHECK(vi.per_variable[1] == doctest::Approx(0.25 / 3.0).epsilon(1e-12));
    CHECK(vi.per_time[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(vi.per_time[2] == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("saliency csv round trip") {
    const Checkpoint ckpt = tiny_checkpoint(88);
    const SaliencyMap map = gradcam_map(ckpt, random_window(ckpt.config, 881));
    const fs::path path =
        fs::temp_directory_path() / ("wavecast_sal_" + std::to_string(::getpid()) + ".csv");
    write_saliency_csv(path.string(), map, "seed=88");
    const SaliencyMap loaded = load_saliency_csv(path.string());
    fs::remove(path);

    CHECK(loaded.layer == map.layer);
    CHECK(loaded.target == map.target);
    REQUIRE(loaded.values.shape == map.values.shape);
    for (std::size_t i = 0; i < map.values.numel(); ++i)
        CHECK(std::fabs(loaded.values.data[i] - map.values.data[i]) < 1e-12);

    CHECK_THROWS_AS(load_saliency_csv("/nonexistent/sal.csv"), IoError);
}
