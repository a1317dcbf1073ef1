#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>

#include "wavecast/model.hpp"

using namespace wavecast;
namespace fs = std::filesystem;

namespace {

// Small-but-complete config: T=12, N=3, S=4, shallow branches.
ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.input_len = 12;
    cfg.horizon = 4;
    cfg.n_vars = 3;
    cfg.head_width = 8;
    cfg.mwkc.max_kernel_length = 3;
    cfg.mwkc.filters_per_length = 4;
    cfg.mwkc.block_channels = 2;
    cfg.cvdwcc.channels = 2;
    cfg.wlmc.scales = dyadic_scales(3);
    cfg.wlmc.bandwidth = 4.0;
    cfg.bank.max_kernel_length = 3;
    cfg.bank.filters_per_length = 4;
    return cfg;
}

Tensor random_window(int t_len, int n, std::mt19937_64& rng) {
    Tensor x({t_len, n});
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (double& v : x.data) v = d(rng);
    return x;
}

std::vector<MtsWindow> tiny_dataset(const ModelConfig& cfg, int count, std::mt19937_64& rng) {
    std::vector<MtsWindow> out;
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int i = 0; i < count; ++i) {
        MtsWindow w;
        w.id = i;
        w.x = random_window(cfg.input_len, cfg.n_vars, rng);
        w.target = Tensor({cfg.horizon});
        // target depends on the inputs so there is something to learn
        for (int s = 0; s < cfg.horizon; ++s)
            w.target.at(s) = 0.5 * w.x.at(cfg.input_len - 1 - s, 0) + 0.1 * d(rng);
        out.push_back(std::move(w));
    }
    return out;
}

NormStats identity_stats(int n) {
    NormStats stats;
    stats.mean.assign(static_cast<std::size_t>(n), 0.0);
    stats.stddev.assign(static_cast<std::size_t>(n), 1.0);
    stats.constant_flags.assign(static_cast<std::size_t>(n), false);
    return stats;
}

} // namespace

TEST_CASE("model config validation and feature lengths") {
    ModelConfig cfg = tiny_config();
    CHECK_NOTHROW(check_model_config(cfg));
    CHECK(lt_feature_len(cfg) == 2 * 3 * 2);
    CHECK(cv_feature_len(cfg) == 4 * 2); // 2^3 - 3 - 1 combos

    cfg.use_lt = cfg.use_cv = false;
    CHECK_THROWS_AS(check_model_config(cfg), ConfigError);
    cfg = tiny_config();
    cfg.n_vars = 1;
    CHECK_THROWS_AS(check_model_config(cfg), ConfigError); // cv branch needs pairs
    cfg = tiny_config();
    cfg.mwkc.max_kernel_length = 20;
    CHECK_THROWS_AS(check_model_config(cfg), ConfigError);
}

TEST_CASE("forward output shape and determinism across variants") {
    std::mt19937_64 rng(61);
    const Tensor x = random_window(12, 3, rng);

    for (const bool per_feature : {false, true}) {
        for (const bool concat_first : {false, true}) {
            ModelConfig cfg = tiny_config();
            cfg.fusion_per_feature = per_feature;
            cfg.concat_first = concat_first;
            const WaveletKernelBank bank = build_bank(cfg.bank);
            const ParamStore params = init_model_params(cfg, bank, 5);
            WlmcCache cache;
            const Tensor a = model_forward(x, cfg, bank, params, cache);
            const Tensor b = model_forward(x, cfg, bank, params, cache);
            REQUIRE(a.shape == std::vector<int>{4});
            CHECK(a.data == b.data);
        }
    }
}

TEST_CASE("ablation flags fix the remaining branch weight at 1") {
    std::mt19937_64 rng(62);
    const Tensor x = random_window(12, 3, rng);

    for (const bool use_lt : {true, false}) {
        ModelConfig cfg = tiny_config();
        cfg.use_lt = use_lt;
        cfg.use_cv = !use_lt;
        const WaveletKernelBank bank = build_bank(cfg.bank);
        const ParamStore params = init_model_params(cfg, bank, 6);
        CHECK_FALSE(params.has("fusion.scores")); // no fusion parameter at all

        Graph g;
        WlmcTensor wlmc;
        if (cfg.use_cv) wlmc = build_wlmc_tensor(transpose(x), cfg.wlmc);
        const ModelForward fwd =
            build_model_forward(g, x, cfg.use_cv ? &wlmc : nullptr, cfg, bank, params);
        CHECK(fwd.fusion_weights == -1);
        CHECK(g.value(fwd.output).numel() == 4);
    }
}

TEST_CASE("fusion weights are a softmax over branch scores") {
    std::mt19937_64 rng(63);
    const Tensor x = random_window(12, 3, rng);
    ModelConfig cfg = tiny_config();
    const WaveletKernelBank bank = build_bank(cfg.bank);
    ParamStore params = init_model_params(cfg, bank, 7);
    REQUIRE(params.at("fusion.scores").shape == std::vector<int>{2});

    Graph g;
    const WlmcTensor wlmc = build_wlmc_tensor(transpose(x), cfg.wlmc);
    const ModelForward fwd = build_model_forward(g, x, &wlmc, cfg, bank, params);
    const Tensor& w = g.value(fwd.fusion_weights);
    CHECK(w.at(0) + w.at(1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w.at(0) == doctest::Approx(0.5)); // zero-initialized scores
}

TEST_CASE("end-to-end gradients pass the finite-difference check") {
    std::mt19937_64 rng(64);
    ModelConfig cfg = tiny_config();
    const WaveletKernelBank bank = build_bank(cfg.bank);
    const ParamStore params = init_model_params(cfg, bank, 8);
    const Tensor x = random_window(12, 3, rng);
    const WlmcTensor wlmc = build_wlmc_tensor(transpose(x), cfg.wlmc);

    Graph g;
    const ModelForward fwd = build_model_forward(g, x, &wlmc, cfg, bank, params);
    Tensor target({4});
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (double& v : target.data) v = d(rng);
    const NodeId loss = g.mse(fwd.output, g.input(target));
    g.backward(loss);
    for (const auto& [name, node] : fwd.binding.nodes) {
        INFO("param ", name);
        CHECK(g.finite_diff_check(node, loss, 1e-5) < 1e-4);
    }
}

TEST_CASE("training reduces loss, is deterministic, and early-stops") {
    std::mt19937_64 rng(65);
    ModelConfig cfg = tiny_config();
    const WaveletKernelBank bank = build_bank(cfg.bank);
    const std::vector<MtsWindow> samples = tiny_dataset(cfg, 40, rng);
    const NormStats stats = identity_stats(cfg.n_vars);

    TrainConfig tc;
    tc.epochs = 12;
    tc.batch_size = 8;
    tc.learning_rate = 5e-3;
    tc.seed = 3;
    WlmcCache cache;

    const TrainResult a = train(samples, stats, cfg, bank, tc, cache);
    REQUIRE(!a.curve.empty());
    CHECK(a.curve.back() < a.curve.front());
    CHECK(a.epochs_run <= tc.epochs);

    const TrainResult b = train(samples, stats, cfg, bank, tc, cache);
    CHECK(a.curve == b.curve); // bitwise reproducible
    for (const auto& [name, t] : a.params.tensors) CHECK(b.params.at(name).data == t.data);

    TrainConfig other = tc;
    other.seed = 4;
    const TrainResult c = train(samples, stats, cfg, bank, other, cache);
    CHECK(a.curve != c.curve);

    CHECK_THROWS_AS(train({}, stats, cfg, bank, tc, cache), ArgumentError);
    TrainConfig bad = tc;
    bad.epochs = 0;
    CHECK_THROWS_AS(train(samples, stats, cfg, bank, bad, cache), ConfigError);
}

TEST_CASE("diverging training raises a numeric error") {
    std::mt19937_64 rng(66);
    ModelConfig cfg = tiny_config();
    const WaveletKernelBank bank = build_bank(cfg.bank);
    std::vector<MtsWindow> samples = tiny_dataset(cfg, 10, rng);
    for (MtsWindow& w : samples)
        for (double& v : w.target.data) v *= 1e8;
    const NormStats stats = identity_stats(cfg.n_vars);
    TrainConfig tc;
    tc.epochs = 60;
    tc.learning_rate = 1e150; // guaranteed blow-up
    WlmcCache cache;
    CHECK_THROWS_AS(train(samples, stats, cfg, bank, tc, cache), NumericError);
}

TEST_CASE("predict denormalizes through the stats") {
    std::mt19937_64 rng(67);
    ModelConfig cfg = tiny_config();
    const WaveletKernelBank bank = build_bank(cfg.bank);
    const ParamStore params = init_model_params(cfg, bank, 9);
    const Tensor x = random_window(12, 3, rng);

    NormStats stats = identity_stats(cfg.n_vars);
    stats.mean[0] = 100.0;
    stats.stddev[0] = 10.0;
    WlmcCache cache;
    const ForecastResult fc = predict(x, 7, cfg, bank, params, stats, cache);
    CHECK(fc.window_id == 7);
    CHECK(fc.denormalized);
    const Tensor norm = model_forward(normalize_input(x, stats), cfg, bank, params, cache);
    for (int s = 0; s < 4; ++s)
        CHECK(fc.prediction.at(s) == doctest::Approx(norm.at(s) * 10.0 + 100.0).epsilon(1e-12));

    CHECK_THROWS_AS(predict(x, 0, cfg, bank, params, NormStats{}, cache), StateError);
}

TEST_CASE("checkpoint round trip is bitwise") {
    std::mt19937_64 rng(68);
    ModelConfig cfg = tiny_config();
    cfg.fusion_per_feature = true;
    const WaveletKernelBank bank = build_bank(cfg.bank);
    Checkpoint ckpt;
    ckpt.config = cfg;
    ckpt.params = init_model_params(cfg, bank, 10);
    ckpt.stats = identity_stats(cfg.n_vars);
    ckpt.stats.mean[1] = 42.0;
    ckpt.stats.constant_flags[2] = true;

    const fs::path path =
        fs::temp_directory_path() / ("wavecast_ckpt_" + std::to_string(::getpid()) + ".bin");
    save_checkpoint(path.string(), ckpt);
    const Checkpoint loaded = load_checkpoint(path.string());
    fs::remove(path);

    CHECK(loaded.config.input_len == cfg.input_len);
    CHECK(loaded.config.fusion_per_feature == cfg.fusion_per_feature);
    CHECK(loaded.config.wlmc.scales == cfg.wlmc.scales);
    CHECK(loaded.config.bank.wavelets.size() == cfg.bank.wavelets.size());
    CHECK(loaded.stats.mean == ckpt.stats.mean);
    CHECK(loaded.stats.constant_flags == ckpt.stats.constant_flags);
    REQUIRE(loaded.params.tensors.size() == ckpt.params.tensors.size());
    for (const auto& [name, t] : ckpt.params.tensors) {
        CHECK(loaded.params.at(name).shape == t.shape);
        CHECK(loaded.params.at(name).data == t.data); // bitwise
    }

    // predictions after reload match bitwise
    const Tensor x = random_window(12, 3, rng);
    WlmcCache cache;
    const WaveletKernelBank bank2 = build_bank(loaded.config.bank);
    const Tensor a = model_forward(x, cfg, bank, ckpt.params, cache);
    const Tensor b = model_forward(x, loaded.config, bank2, loaded.params, cache);
    CHECK(a.data == b.data);

    CHECK_THROWS_AS(load_checkpoint("/nonexistent/path.ckpt"), IoError);
}

TEST_CASE("checkpoint rejects foreign files") {
    const fs::path path =
        fs::temp_directory_path() / ("wavecast_notckpt_" + std::to_string(::getpid()) + ".bin");
    {
        std::ofstream os(path, std::ios::binary);
        os << "definitely not a checkpoint";
    }
    CHECK_THROWS_AS(load_checkpoint(path.string()), DataError);
    fs::remove(path);
}
