#include "wavecast/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace wavecast {

namespace {

struct Field {
    const char* name;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

int parse_int(const std::string& name, const std::string& v) {
    try {
        std::size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad integer for " + name + ": '" + v + "'");
    }
}

double parse_double(const std::string& name, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad number for " + name + ": '" + v + "'");
    }
}

bool parse_bool(const std::string& name, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("bad boolean for " + name + ": '" + v + "'");
}

std::uint64_t parse_u64(const std::string& name, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad seed for " + name + ": '" + v + "'");
    }
}

std::string fmt_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

#define STR_FIELD(key, member) \
    Field{key, [](const RunConfig& c) { return c.member; }, \
          [](RunConfig& c, const std::string& v) { c.member = v; }}
#define INT_FIELD(key, member) \
    Field{key, [](const RunConfig& c) { return std::to_string(c.member); }, \
          [](RunConfig& c, const std::string& v) { c.member = parse_int(key, v); }}
#define DBL_FIELD(key, member) \
    Field{key, [](const RunConfig& c) { return fmt_double(c.member); }, \
          [](RunConfig& c, const std::string& v) { c.member = parse_double(key, v); }}
#define BOOL_FIELD(key, member) \
    Field{key, [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }, \
          [](RunConfig& c, const std::string& v) { c.member = parse_bool(key, v); }}

const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        STR_FIELD("data", data_path),
        STR_FIELD("mix", mix_path),
        STR_FIELD("out_dir", out_dir),
        INT_FIELD("stride", stride),
        INT_FIELD("folds", folds),
        INT_FIELD("purge_gap", purge_gap),
        INT_FIELD("input_len", input_len),
        INT_FIELD("horizon", horizon),
        INT_FIELD("head_width", head_width),
        BOOL_FIELD("use_lt", use_lt),
        BOOL_FIELD("use_cv", use_cv),
        BOOL_FIELD("fusion_per_feature", fusion_per_feature),
        BOOL_FIELD("concat_first", concat_first),
        INT_FIELD("max_kernel_length", max_kernel_length),
        INT_FIELD("filters_per_length", filters_per_length),
        INT_FIELD("block_channels", block_channels),
        INT_FIELD("block_kernel", block_kernel),
        BOOL_FIELD("alpha_per_length", alpha_per_length),
        STR_FIELD("wavelets", wavelets),
        DBL_FIELD("bank_support", bank_support),
        DBL_FIELD("spread_min", spread_min),
        DBL_FIELD("spread_max", spread_max),
        INT_FIELD("cv_channels", cv_channels),
        INT_FIELD("cv_kernel_h", cv_kernel_h),
        INT_FIELD("cv_kernel_w", cv_kernel_w),
        BOOL_FIELD("onehot_dominant", onehot_dominant),
        INT_FIELD("scales_j", scales_j),
        DBL_FIELD("bandwidth", bandwidth),
        STR_FIELD("wlmc_wavelet", wlmc_wavelet),
        DBL_FIELD("cwt_support", cwt_support),
        DBL_FIELD("learning_rate", learning_rate),
        INT_FIELD("epochs", epochs),
        INT_FIELD("batch_size", batch_size),
        INT_FIELD("patience", patience),
        DBL_FIELD("val_fraction", val_fraction),
        INT_FIELD("train_stride", train_stride),
        Field{"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
              [](RunConfig& c, const std::string& v) { c.seed = parse_u64("seed", v); }},
        INT_FIELD("days", days),
        DBL_FIELD("penetration", penetration),
        DBL_FIELD("noise", noise),
        DBL_FIELD("weather_rho", weather_rho),
        DBL_FIELD("weather_rho_day", weather_rho_day),
        DBL_FIELD("synoptic_weight", synoptic_weight),
        DBL_FIELD("base_load_mw", base_load_mw),
        DBL_FIELD("reg_rate", reg_rate),
        DBL_FIELD("neg_rate", neg_rate),
    };
    return f;
}

#undef STR_FIELD
#undef INT_FIELD
#undef DBL_FIELD
#undef BOOL_FIELD

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

MotherWavelet wavelet_by_name(const std::string& name) {
    if (name == "morlet") return MotherWavelet::morlet();
    if (name == "mexican_hat") return MotherWavelet::mexican_hat();
    throw ConfigError("unknown wavelet: '" + name + "'");
}

} // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    for (const Field& f : fields())
        if (key == f.name) {
            f.set(*this, value);
            return;
        }
    throw ConfigError("unknown config key: '" + key + "'");
}

std::string RunConfig::echo() const {
    std::ostringstream os;
    bool first = true;
    for (const Field& f : fields()) {
        if (!first) os << " ";
        os << f.name << "=" << f.get(*this);
        first = false;
    }
    return os.str();
}

std::string default_config_text() {
    const RunConfig defaults;
    std::ostringstream os;
    for (const Field& f : fields()) os << f.name << " = " << f.get(defaults) << "\n";
    return os.str();
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path);
    RunConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected key = value");
        try {
            cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

ModelConfig RunConfig::model_config() const {
    ModelConfig m;
    m.input_len = input_len;
    m.horizon = horizon;
    m.head_width = head_width;
    m.use_lt = use_lt;
    m.use_cv = use_cv;
    m.fusion_per_feature = fusion_per_feature;
    m.concat_first = concat_first;
    m.mwkc.max_kernel_length = max_kernel_length;
    m.mwkc.filters_per_length = filters_per_length;
    m.mwkc.block_channels = block_channels;
    m.mwkc.block_kernel = block_kernel;
    m.mwkc.alpha_per_length = alpha_per_length;
    m.cvdwcc.channels = cv_channels;
    m.cvdwcc.kernel_h = cv_kernel_h;
    m.cvdwcc.kernel_w = cv_kernel_w;
    m.cvdwcc.onehot_dominant = onehot_dominant;
    m.wlmc.scales = dyadic_scales(scales_j);
    m.wlmc.bandwidth = bandwidth;
    m.wlmc.wavelet = wavelet_by_name(wlmc_wavelet);
    m.wlmc.cwt_support = cwt_support;
    m.bank.wavelets.clear();
    std::stringstream ss(wavelets);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string name = trim(item);
        if (!name.empty()) m.bank.wavelets.push_back(wavelet_by_name(name));
    }
    if (m.bank.wavelets.empty()) throw ConfigError("wavelets list is empty");
    m.bank.max_kernel_length = max_kernel_length;
    m.bank.filters_per_length = filters_per_length;
    m.bank.support = bank_support;
    m.bank.spread_min = spread_min;
    m.bank.spread_max = spread_max;
    return m;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig t;
    t.learning_rate = learning_rate;
    t.epochs = epochs;
    t.batch_size = batch_size;
    t.seed = seed;
    t.patience = patience;
    t.val_fraction = val_fraction;
    t.train_stride = train_stride;
    return t;
}

SynthConfig RunConfig::synth_config() const {
    SynthConfig s;
    s.seed = seed;
    s.days = days;
    s.penetration = penetration;
    s.reg_rate = reg_rate;
    s.neg_rate = neg_rate;
    s.base_load_mw = base_load_mw;
    s.noise = noise;
    s.weather_rho = weather_rho;
    s.weather_rho_day = weather_rho_day;
    s.synoptic_weight = synoptic_weight;
    return s;
}

} // namespace wavecast
