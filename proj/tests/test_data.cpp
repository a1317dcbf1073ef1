#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "wavecast/data.hpp"

using namespace wavecast;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("wavecast_data_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    os << text;
}

std::string read_text(const std::string& path) {
    std::ifstream is(path);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("iso-8601 parsing and formatting") {
    CHECK(parse_iso8601_utc("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_iso8601_utc("2020-01-01T00:00:00Z") == 1577836800);
    CHECK(parse_iso8601_utc("2022-11-13T07:30:15Z") == 1668324615);
    CHECK(format_iso8601_utc(1668324615) == "2022-11-13T07:30:15Z");
    for (std::int64_t ts : {0L, 951827696L, 1577836800L, 4102444800L})
        CHECK(parse_iso8601_utc(format_iso8601_utc(ts)) == ts);
    CHECK_THROWS_AS(parse_iso8601_utc("2020-01-01 00:00:00"), ParseError);
    CHECK_THROWS_AS(parse_iso8601_utc("2020-13-01T00:00:00Z"), ParseError);
    CHECK_THROWS_AS(parse_iso8601_utc("garbage"), ParseError);
}

TEST_CASE("cif is the energy-weighted emission mean") {
    CHECK(compute_cif({{100.0, 100.0}, {30.0, 820.0}}) == doctest::Approx(425.0));
    CHECK(compute_cif({{1.0}, {50.0}}) == doctest::Approx(50.0));
    CHECK_THROWS_AS(compute_cif({{0.0, 0.0}, {30.0, 820.0}}), DataError);
    CHECK_THROWS_AS(compute_cif({{-1.0}, {30.0}}), ArgumentError);
    CHECK_THROWS_AS(compute_cif({{1.0, 2.0}, {30.0}}), ArgumentError);
}

TEST_CASE("csv load: happy path, comments, gap handling") {
    TempDir dir;
    const std::string path = dir.file("grid.csv");
    write_text(path,
               "# a comment\n"
               "timestamp,cif,gld,reg,neg,temperature\n"
               "2020-01-01T00:00:00Z,400,1000,100,900,15\n"
               "2020-01-01T01:00:00Z,410,1010,110,900,14\n"
               "2020-01-01T03:00:00Z,430,1030,130,900,12\n");
    const auto records = load_csv(path);
    REQUIRE(records.size() == 4); // one interpolated hour
    CHECK(records[2].interpolated);
    CHECK(records[2].timestamp == parse_iso8601_utc("2020-01-01T02:00:00Z"));
    CHECK(records[2].cif == doctest::Approx(420.0));
    CHECK(records[2].gld == doctest::Approx(1020.0));
    CHECK_FALSE(records[0].interpolated);
}

TEST_CASE("csv load rejects bad data") {
    TempDir dir;
    const std::string head = "timestamp,cif,gld,reg,neg,temperature\n";

    write_text(dir.file("dup.csv"), head +
                                        "2020-01-01T00:00:00Z,400,1000,100,900,15\n"
                                        "2020-01-01T00:00:00Z,400,1000,100,900,15\n");
    CHECK_THROWS_AS(load_csv(dir.file("dup.csv")), DataError);

    write_text(dir.file("order.csv"), head +
                                          "2020-01-01T01:00:00Z,400,1000,100,900,15\n"
                                          "2020-01-01T00:00:00Z,400,1000,100,900,15\n");
    CHECK_THROWS_AS(load_csv(dir.file("order.csv")), DataError);

    write_text(dir.file("gap.csv"), head +
                                        "2020-01-01T00:00:00Z,400,1000,100,900,15\n"
                                        "2020-01-01T03:00:00Z,400,1000,100,900,15\n");
    CHECK_THROWS_AS(load_csv(dir.file("gap.csv")), DataError);

    write_text(dir.file("neg.csv"), head + "2020-01-01T00:00:00Z,400,-5,100,900,15\n");
    CHECK_THROWS_AS(load_csv(dir.file("neg.csv")), DataError);

    write_text(dir.file("badnum.csv"), head + "2020-01-01T00:00:00Z,abc,1000,100,900,15\n");
    CHECK_THROWS_AS(load_csv(dir.file("badnum.csv")), ParseError);

    write_text(dir.file("header.csv"), "time,cif\n");
    CHECK_THROWS_AS(load_csv(dir.file("header.csv")), ParseError);

    CHECK_THROWS_AS(load_csv(dir.file("missing.csv")), IoError);
}

TEST_CASE("mix file supplies cif when the column is absent") {
    TempDir dir;
    write_text(dir.file("mix.csv"),
               "timestamp,source,energy_mwh,emission_rate\n"
               "2020-01-01T00:00:00Z,wind,100,30\n"
               "2020-01-01T00:00:00Z,coal,100,820\n");
    write_text(dir.file("grid.csv"),
               "timestamp,gld,reg,neg,temperature\n"
               "2020-01-01T00:00:00Z,1000,100,900,15\n");
    const auto mix = load_mix_csv(dir.file("mix.csv"));
    REQUIRE(mix.size() == 1);
    CHECK(mix.begin()->second == doctest::Approx(425.0));

    const auto records = load_csv(dir.file("grid.csv"), &mix);
    REQUIRE(records.size() == 1);
    CHECK(records[0].cif == doctest::Approx(425.0));

    CHECK_THROWS_AS(load_csv(dir.file("grid.csv")), DataError); // no mix given
}

TEST_CASE("csv round trip preserves values") {
    TempDir dir;
    SynthConfig cfg;
    cfg.days = 3;
    const auto records = synthesize_grid(cfg);
    write_csv(dir.file("out.csv"), records, "key=value");
    const std::string text = read_text(dir.file("out.csv"));
    CHECK(text.rfind("# key=value\n", 0) == 0); // config echo comes first
    const auto loaded = load_csv(dir.file("out.csv"));
    REQUIRE(loaded.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded[i].timestamp == records[i].timestamp);
        CHECK(loaded[i].cif == doctest::Approx(records[i].cif).epsilon(1e-6));
        CHECK(loaded[i].gld == doctest::Approx(records[i].gld).epsilon(1e-6));
    }
}

TEST_CASE("window construction and counts") {
    SynthConfig cfg;
    cfg.days = 3;
    const auto records = synthesize_grid(cfg); // 72 records
    const WindowedDataset ds = make_windows(records, 24, 24, 1);
    CHECK(ds.samples.size() == 72 - 48 + 1);
    const MtsWindow& w = ds.samples[5];
    CHECK(w.id == 5);
    CHECK(w.x.shape == std::vector<int>{24, 5});
    CHECK(w.target.shape == std::vector<int>{24});
    CHECK(w.x.at(0, 0) == records[5].cif);
    CHECK(w.x.at(3, 4) == records[8].temperature);
    CHECK(w.target.at(0) == records[29].cif);

    const WindowedDataset strided = make_windows(records, 24, 24, 5);
    CHECK(strided.samples.size() == (72 - 48) / 5 + 1);

    CHECK_THROWS_AS(make_windows(std::vector<RawGridRecord>(records.begin(), records.begin() + 10),
                                 24, 24, 1),
                    DataError);
    CHECK_THROWS_AS(make_windows(records, 0, 24, 1), ArgumentError);
    CHECK_THROWS_AS(make_windows(records, 24, 24, 0), ArgumentError);
}

TEST_CASE("four years of hourly data yields 35017 windows") {
    // 2020 is a leap year: 4 years = 1461 days.
    std::vector<RawGridRecord> records(1461 * 24);
    const WindowedDataset ds = make_windows(records, 24, 24, 1);
    CHECK(ds.samples.size() == 35017);
}

TEST_CASE("normalization is fitted on training data only") {
    SynthConfig cfg;
    cfg.days = 4;
    const auto records = synthesize_grid(cfg);
    const WindowedDataset ds = make_windows(records, 24, 24, 1);
    const NormStats stats = fit_normalization(ds.samples);
    REQUIRE(stats.mean.size() == kNumVariables);

    const Tensor norm = normalize_input(ds.samples[0].x, stats);
    for (int v = 0; v < kNumVariables; ++v) {
        CHECK_FALSE(stats.constant_flags[static_cast<std::size_t>(v)]);
        CHECK(stats.stddev[static_cast<std::size_t>(v)] > 0.0);
    }
    const double back =
        norm.at(2, 0) * stats.stddev[0] + stats.mean[0]; // invert manually
    CHECK(back == doctest::Approx(ds.samples[0].x.at(2, 0)).epsilon(1e-12));

    const double z = normalize_target_value(500.0, stats);
    CHECK(denormalize_target_value(z, stats) == doctest::Approx(500.0).epsilon(1e-12));
    const Tensor t = Tensor::vec({400.0, 500.0});
    const Tensor round = denormalize_target(normalize_target(t, stats), stats);
    CHECK(round.at(0) == doctest::Approx(400.0).epsilon(1e-12));

    // constant variable: stddev forced to 1, flagged
    std::vector<MtsWindow> flat(1);
    flat[0].x = Tensor({4, kNumVariables}, 7.0);
    flat[0].target = Tensor({2}, 7.0);
    const NormStats cstats = fit_normalization(flat);
    for (int v = 0; v < kNumVariables; ++v) {
        CHECK(cstats.constant_flags[static_cast<std::size_t>(v)]);
        CHECK(cstats.stddev[static_cast<std::size_t>(v)] == 1.0);
    }
    CHECK_THROWS_AS(fit_normalization(std::vector<MtsWindow>{}), ArgumentError);
}

TEST_CASE("purged k-fold split") {
    const FoldSplit split = kfold_split(100, 5, 3);
    CHECK(split.fold_count == 5);
    // contiguous blocks of 20
    for (int f = 0; f < 5; ++f) {
        const auto test = split.test_indices(f);
        REQUIRE(test.size() == 20);
        CHECK(test.front() == f * 20);
        CHECK(test.back() == f * 20 + 19);
        const auto train = split.train_indices(f);
        for (int id : train) {
            CHECK((id < test.front() - 3 || id > test.back() + 3));
        }
        // middle folds lose 2 * purge_gap samples
        const std::size_t expected = 80 - (f == 0 || f == 4 ? 3u : 6u);
        CHECK(train.size() == expected);
    }
    CHECK_THROWS_AS(kfold_split(10, 11, 0), ArgumentError);
    CHECK_THROWS_AS(kfold_split(10, 2, -1), ArgumentError);

    // uneven: first n % k folds get one extra sample
    const FoldSplit uneven = kfold_split(11, 3, 0);
    CHECK(uneven.test_indices(0).size() == 4);
    CHECK(uneven.test_indices(1).size() == 4);
    CHECK(uneven.test_indices(2).size() == 3);
}

TEST_CASE("synthetic generator") {
    SynthConfig cfg;
    cfg.days = 5;
    const auto a = synthesize_grid(cfg);
    const auto b = synthesize_grid(cfg);
    REQUIRE(a.size() == 120);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].timestamp == b[i].timestamp); // deterministic
        CHECK(a[i].cif == b[i].cif);
        CHECK(a[i].gld == b[i].gld);
    }
    CHECK(a[0].timestamp == parse_iso8601_utc("2020-01-01T00:00:00Z"));
    for (const RawGridRecord& r : a) {
        CHECK(r.gld >= 0.0);
        CHECK(r.reg >= 0.0);
        CHECK(r.neg >= 0.0);
        CHECK(r.cif >= cfg.reg_rate - 1e-9);
        CHECK(r.cif <= cfg.neg_rate + 1e-9); // 1 ulp slack for the weighted mean
        CHECK(r.reg <= r.gld + 1e-9);
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        if (i % 24 < 6 || i % 24 > 18) CHECK(a[i].reg == 0.0); // no sun, no renewables

    SynthConfig other = cfg;
    other.seed = 99;
    const auto c = synthesize_grid(other);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].gld != c[i].gld) differs = true;
    CHECK(differs);

    CHECK_THROWS_AS(synthesize_grid(SynthConfig{.days = 1}), ArgumentError);
    SynthConfig bad = cfg;
    bad.events.push_back({100, 90, 0.5});
    CHECK_THROWS_AS(synthesize_grid(bad), ArgumentError);
}

TEST_CASE("curtailment events cut renewables and raise cif") {
    SynthConfig base;
    base.days = 3;
    SynthConfig with_event = base;
    with_event.events.push_back({30, 40, 0.8});
    const auto a = synthesize_grid(base);
    const auto b = synthesize_grid(with_event);
    for (int h = 30; h < 40; ++h) {
        const std::size_t i = static_cast<std::size_t>(h);
        if (a[i].reg > 0.0) {
            CHECK(b[i].reg == doctest::Approx(0.2 * a[i].reg));
            CHECK(b[i].cif > a[i].cif);
        }
    }
    CHECK(b[50].reg == a[50].reg); // outside the event
}
