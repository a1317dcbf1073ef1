#include "wavecast/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace wavecast {

const char* const kVariableNames[kNumVariables] = {"cif", "gld", "reg", "neg", "temperature"};

namespace {

constexpr std::int64_t kHour = 3600;

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_double(const std::string& text, int line_no) {
    try {
        std::size_t pos = 0;
        double v = std::stod(text, &pos);
        if (pos != text.size() || !std::isfinite(v))
            throw ParseError("bad numeric field at line " + std::to_string(line_no));
        return v;
    } catch (const std::invalid_argument&) {
        throw ParseError("bad numeric field at line " + std::to_string(line_no));
    } catch (const std::out_of_range&) {
        throw ParseError("numeric field out of range at line " + std::to_string(line_no));
    }
}

} // namespace

std::int64_t parse_iso8601_utc(const std::string& text) {
    int y, mo, d, h, mi, s;
    char tail = '\0';
    if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &s, &tail) != 7 ||
        tail != 'Z')
        throw ParseError("bad ISO-8601 timestamp: " + text);
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 ||
        s > 59)
        throw ParseError("timestamp field out of range: " + text);
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso8601_utc(std::int64_t unix_seconds) {
    std::int64_t days = unix_seconds / 86400;
    std::int64_t rem = unix_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                  static_cast<int>(rem / 3600), static_cast<int>((rem % 3600) / 60),
                  static_cast<int>(rem % 60));
    return buf;
}

double compute_cif(const GenerationMix& mix) {
    if (mix.energy_mwh.size() != mix.emission_rate.size())
        throw ArgumentError("generation mix arrays differ in length");
    double total = 0.0, weighted = 0.0;
    for (std::size_t i = 0; i < mix.energy_mwh.size(); ++i) {
        const double e = mix.energy_mwh[i];
        if (e < 0.0 || mix.emission_rate[i] < 0.0)
            throw ArgumentError("generation mix entries must be non-negative");
        total += e;
        weighted += e * mix.emission_rate[i];
    }
    if (total <= 0.0) throw DataError("undefined CIF: zero total generation");
    return weighted / total;
}

std::map<std::int64_t, double> load_mix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    std::map<std::int64_t, GenerationMix> by_time;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "timestamp,source,energy_mwh,emission_rate")
                throw ParseError("unexpected mix header: " + line);
            header_seen = true;
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != 4) throw ParseError("bad mix row at line " + std::to_string(line_no));
        GenerationMix& mix = by_time[parse_iso8601_utc(fields[0])];
        mix.energy_mwh.push_back(parse_double(fields[2], line_no));
        mix.emission_rate.push_back(parse_double(fields[3], line_no));
    }
    std::map<std::int64_t, double> cif;
    for (const auto& [ts, mix] : by_time) cif[ts] = compute_cif(mix);
    return cif;
}

std::vector<RawGridRecord> load_csv(const std::string& path,
                                    const std::map<std::int64_t, double>* mix_cif) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    const std::string full_header = "timestamp,cif,gld,reg,neg,temperature";
    const std::string nocif_header = "timestamp,gld,reg,neg,temperature";

    std::string line;
    int line_no = 0;
    bool header_seen = false;
    bool has_cif_column = true;
    std::vector<RawGridRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line == full_header) {
                has_cif_column = true;
            } else if (line == nocif_header) {
                if (!mix_cif)
                    throw DataError("csv lacks cif column and no generation-mix file was given");
                has_cif_column = false;
            } else {
                throw ParseError("unexpected header: " + line);
            }
            header_seen = true;
            continue;
        }
        auto fields = split_csv_line(line);
        const std::size_t expect = has_cif_column ? 6 : 5;
        if (fields.size() != expect)
            throw ParseError("wrong field count at line " + std::to_string(line_no));
        RawGridRecord rec;
        rec.timestamp = parse_iso8601_utc(fields[0]);
        std::size_t f = 1;
        if (has_cif_column) rec.cif = parse_double(fields[f++], line_no);
        rec.gld = parse_double(fields[f++], line_no);
        rec.reg = parse_double(fields[f++], line_no);
        rec.neg = parse_double(fields[f++], line_no);
        rec.temperature = parse_double(fields[f++], line_no);
        if (rec.gld < 0.0 || rec.reg < 0.0 || rec.neg < 0.0)
            throw DataError("negative power value at line " + std::to_string(line_no));
        if (!has_cif_column) {
            auto it = mix_cif->find(rec.timestamp);
            if (it == mix_cif->end())
                throw DataError("no generation mix for " + format_iso8601_utc(rec.timestamp));
            rec.cif = it->second;
        }
        if (!records.empty()) {
            const std::int64_t gap = rec.timestamp - records.back().timestamp;
            if (gap == 0) throw DataError("duplicate timestamp at line " + std::to_string(line_no));
            if (gap < 0)
                throw DataError("non-monotone timestamp at line " + std::to_string(line_no));
            if (gap == 2 * kHour) {
                // Fill a single missing hour by linear interpolation.
                const RawGridRecord& a = records.back();
                RawGridRecord mid;
                mid.timestamp = a.timestamp + kHour;
                mid.cif = 0.5 * (a.cif + rec.cif);
                mid.gld = 0.5 * (a.gld + rec.gld);
                mid.reg = 0.5 * (a.reg + rec.reg);
                mid.neg = 0.5 * (a.neg + rec.neg);
                mid.temperature = 0.5 * (a.temperature + rec.temperature);
                mid.interpolated = true;
                records.push_back(mid);
            } else if (gap != kHour) {
                throw DataError("gap longer than one hour at line " + std::to_string(line_no));
            }
        }
        records.push_back(rec);
    }
    if (!header_seen) throw ParseError("empty file: " + path);
    return records;
}

void write_csv(const std::string& path, const std::vector<RawGridRecord>& records,
               const std::string& config_echo) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    if (!config_echo.empty()) out << "# " << config_echo << "\n";
    out << "timestamp,cif,gld,reg,neg,temperature\n";
    char buf[160];
    for (const RawGridRecord& r : records) {
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%.6f",
                      format_iso8601_utc(r.timestamp).c_str(), r.cif, r.gld, r.reg, r.neg,
                      r.temperature);
        out << buf << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

WindowedDataset make_windows(const std::vector<RawGridRecord>& records, int input_len, int horizon,
                             int stride) {
    if (input_len < 1 || horizon < 1) throw ArgumentError("window lengths must be positive");
    if (stride < 1) throw ArgumentError("stride must be positive");
    const int len = static_cast<int>(records.size());
    const int need = input_len + horizon;
    if (len < need) throw DataError("insufficient data: need at least " + std::to_string(need) +
                                    " records, have " + std::to_string(len));
    WindowedDataset ds;
    ds.input_len = input_len;
    ds.horizon = horizon;
    ds.stride = stride;
    const int count = (len - need) / stride + 1;
    ds.samples.reserve(static_cast<std::size_t>(count));
    for (int w = 0; w < count; ++w) {
        const int start = w * stride;
        MtsWindow sample;
        sample.id = start;
        sample.x = Tensor({input_len, kNumVariables});
        for (int t = 0; t < input_len; ++t) {
            const RawGridRecord& r = records[static_cast<std::size_t>(start + t)];
            sample.x.at(t, 0) = r.cif;
            sample.x.at(t, 1) = r.gld;
            sample.x.at(t, 2) = r.reg;
            sample.x.at(t, 3) = r.neg;
            sample.x.at(t, 4) = r.temperature;
        }
        sample.target = Tensor({horizon});
        for (int s = 0; s < horizon; ++s)
            sample.target.at(s) = records[static_cast<std::size_t>(start + input_len + s)].cif;
        ds.samples.push_back(std::move(sample));
    }
    return ds;
}

NormStats fit_normalization(const std::vector<MtsWindow>& training_samples) {
    if (training_samples.empty()) throw ArgumentError("cannot fit normalization on empty set");
    const int n = training_samples[0].x.dim(1);
    NormStats stats;
    stats.mean.assign(static_cast<std::size_t>(n), 0.0);
    stats.stddev.assign(static_cast<std::size_t>(n), 0.0);
    stats.constant_flags.assign(static_cast<std::size_t>(n), false);
    std::size_t count = 0;
    for (const MtsWindow& s : training_samples) {
        if (s.x.ndim() != 2 || s.x.dim(1) != n)
            throw ShapeError("inconsistent window variable count");
        const int t_len = s.x.dim(0);
        for (int t = 0; t < t_len; ++t)
            for (int v = 0; v < n; ++v) stats.mean[static_cast<std::size_t>(v)] += s.x.at(t, v);
        count += static_cast<std::size_t>(t_len);
    }
    for (double& m : stats.mean) m /= static_cast<double>(count);
    for (const MtsWindow& s : training_samples) {
        const int t_len = s.x.dim(0);
        for (int t = 0; t < t_len; ++t)
            for (int v = 0; v < n; ++v) {
                const double d = s.x.at(t, v) - stats.mean[static_cast<std::size_t>(v)];
                stats.stddev[static_cast<std::size_t>(v)] += d * d;
            }
    }
    for (int v = 0; v < n; ++v) {
        double& sd = stats.stddev[static_cast<std::size_t>(v)];
        sd = std::sqrt(sd / static_cast<double>(count));
        if (sd <= 0.0) {
            sd = 1.0;
            stats.constant_flags[static_cast<std::size_t>(v)] = true;
        }
    }
    return stats;
}

Tensor normalize_input(const Tensor& x, const NormStats& stats) {
    if (x.ndim() != 2 || x.dim(1) != static_cast<int>(stats.mean.size()))
        throw ShapeError("normalize_input expects [T x N] matching the fitted stats");
    Tensor out = x;
    for (int t = 0; t < x.dim(0); ++t)
        for (int v = 0; v < x.dim(1); ++v)
            out.at(t, v) = (x.at(t, v) - stats.mean[static_cast<std::size_t>(v)]) /
                           stats.stddev[static_cast<std::size_t>(v)];
    return out;
}

double normalize_target_value(double v, const NormStats& stats) {
    return (v - stats.mean[kCifVariable]) / stats.stddev[kCifVariable];
}

double denormalize_target_value(double v, const NormStats& stats) {
    return v * stats.stddev[kCifVariable] + stats.mean[kCifVariable];
}

Tensor normalize_target(const Tensor& t, const NormStats& stats) {
    Tensor out = t;
    for (double& v : out.data) v = normalize_target_value(v, stats);
    return out;
}

Tensor denormalize_target(const Tensor& t, const NormStats& stats) {
    Tensor out = t;
    for (double& v : out.data) v = denormalize_target_value(v, stats);
    return out;
}

std::vector<int> FoldSplit::test_indices(int fold) const {
    std::vector<int> out;
    for (int i = 0; i < sample_count; ++i)
        if (fold_of[static_cast<std::size_t>(i)] == fold) out.push_back(i);
    return out;
}

std::vector<int> FoldSplit::train_indices(int fold) const {
    int lo = sample_count, hi = -1;
    for (int i = 0; i < sample_count; ++i)
        if (fold_of[static_cast<std::size_t>(i)] == fold) {
            lo = std::min(lo, i);
            hi = std::max(hi, i);
        }
    std::vector<int> out;
    for (int i = 0; i < sample_count; ++i) {
        if (fold_of[static_cast<std::size_t>(i)] == fold) continue;
        if (i >= lo - purge_gap && i <= hi + purge_gap) continue;
        out.push_back(i);
    }
    return out;
}

FoldSplit kfold_split(int sample_count, int fold_count, int purge_gap) {
    if (fold_count < 1 || fold_count > sample_count)
        throw ArgumentError("fold count must be in [1, sample count]");
    if (purge_gap < 0) throw ArgumentError("purge gap must be non-negative");
    FoldSplit split;
    split.sample_count = sample_count;
    split.fold_count = fold_count;
    split.purge_gap = purge_gap;
    split.fold_of.resize(static_cast<std::size_t>(sample_count));
    const int base = sample_count / fold_count;
    const int extra = sample_count % fold_count;
    int pos = 0;
    for (int f = 0; f < fold_count; ++f) {
        const int size = base + (f < extra ? 1 : 0);
        for (int i = 0; i < size; ++i) split.fold_of[static_cast<std::size_t>(pos++)] = f;
    }
    return split;
}

std::vector<RawGridRecord> synthesize_grid(const SynthConfig& cfg) {
    if (cfg.days < 2) throw ArgumentError("synthesize_grid needs days >= 2");
    if (cfg.penetration < 0.0 || cfg.penetration > 1.0)
        throw ArgumentError("penetration must be in [0, 1]");
    if (std::abs(cfg.weather_rho) >= 1.0 || std::abs(cfg.weather_rho_day) >= 1.0)
        throw ArgumentError("AR(1) coefficients must lie in (-1, 1)");
    const int hours = cfg.days * 24;
    for (const SynthEvent& ev : cfg.events) {
        if (ev.start_hour < 0 || ev.end_hour <= ev.start_hour || ev.end_hour > hours)
            throw ArgumentError("event range outside dataset");
        if (ev.curtail < 0.0 || ev.curtail > 1.0) throw ArgumentError("curtail must be in [0, 1]");
    }

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::int64_t t0 = parse_iso8601_utc("2020-01-01T00:00:00Z");
    const double two_pi = 2.0 * M_PI;

    const double beta = std::clamp(cfg.synoptic_weight, 0.0, 1.0);
    std::vector<RawGridRecord> records;
    records.reserve(static_cast<std::size_t>(hours));
    double weather = 0.0;  // stationary hourly AR(1), unit variance
    double synoptic = 0.0; // stationary daily AR(1), unit variance
    bool first = true;
    for (int h = 0; h < hours; ++h) {
        const int hd = h % 24;
        const int day = h / 24;
        const int dow = day % 7;

        const double noise_gld = gauss(rng);
        const double noise_temp = gauss(rng);
        const double shock = gauss(rng);
        if (first) {
            weather = shock;
            synoptic = gauss(rng);
            first = false;
        } else {
            weather = cfg.weather_rho * weather +
                      std::sqrt(1.0 - cfg.weather_rho * cfg.weather_rho) * shock;
            if (hd == 0) {
                const double rd = cfg.weather_rho_day;
                synoptic = rd * synoptic + std::sqrt(1.0 - rd * rd) * gauss(rng);
            }
        }
        const double weather_mix = std::sqrt(1.0 - beta) * weather + std::sqrt(beta) * synoptic;

        const double weekly = dow < 5 ? 1.0 : 0.85;
        double gld = cfg.base_load_mw * weekly *
                     (1.0 + 0.25 * std::sin(two_pi * (hd - 9) / 24.0)) *
                     (1.0 + cfg.noise * noise_gld);
        gld = std::max(gld, 0.05 * cfg.base_load_mw);

        const double bell = hd >= 6 && hd <= 18 ? std::sin(M_PI * (hd - 6) / 12.0) : 0.0;
        const double weather_factor = std::clamp(0.65 + 0.25 * weather_mix, 0.05, 1.0);
        double reg = cfg.penetration * gld * bell * weather_factor;
        for (const SynthEvent& ev : cfg.events)
            if (h >= ev.start_hour && h < ev.end_hour) reg *= 1.0 - ev.curtail;
        const double neg = std::max(gld - reg, 0.0);

        RawGridRecord rec;
        rec.timestamp = t0 + static_cast<std::int64_t>(h) * kHour;
        rec.gld = gld;
        rec.reg = reg;
        rec.neg = neg;
        rec.cif = compute_cif({{reg, neg}, {cfg.reg_rate, cfg.neg_rate}});
        rec.temperature = 18.0 + 8.0 * std::sin(two_pi * (hd - 8) / 24.0) +
                          4.0 * std::sin(two_pi * day / 365.25) + cfg.noise * 50.0 * noise_temp;
        records.push_back(rec);
    }
    return records;
}

} // namespace wavecast
