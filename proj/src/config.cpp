// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#include "pilotcs/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

namespace pilotcs
{

namespace
{

std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(trim(item));
    return out;
}

long long to_int(const std::string &key, const std::string &v)
{
    long long x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    return x;
}

double to_double(const std::string &key, const std::string &v)
{
    if (v == "inf" || v == "+inf")
        return std::numeric_limits<double>::infinity();
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size() || std::isnan(x))
        throw ConfigError(key, "expected a number, got '" + v + "'");
    return x;
}

bool to_bool(const std::string &key, const std::string &v)
{
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw ConfigError(key, "expected true/false, got '" + v + "'");
}

std::string fmt(double x)
{
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

template <class T> std::string join(const std::vector<T> &v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            s += ", ";
        if constexpr (std::is_same_v<T, double>)
            s += fmt(v[i]);
        else
            s += v[i];
    }
    return s;
}

std::vector<double> to_double_list(const std::string &key, const std::string &v)
{
    std::vector<double> out;
    for (const auto &item : split_list(v))
        out.push_back(to_double(key, item));
    return out;
}

int to_int32(const std::string &key, const std::string &v)
{
    const long long x = to_int(key, v);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        throw ConfigError(key, "integer out of range");
    return static_cast<int>(x);
}

struct Field
{
    const char *key;
    std::function<void(ExperimentConfig &, const std::string &)> set;
    std::function<std::string(const ExperimentConfig &)> get;
};

#define PCS_INT(name, member)                                                                                          \
    Field{name, [](ExperimentConfig &c, const std::string &v) { c.member = to_int32(name, v); },                       \
          [](const ExperimentConfig &c) { return std::to_string(c.member); }}
#define PCS_LONG(name, member)                                                                                         \
    Field{name, [](ExperimentConfig &c, const std::string &v) { c.member = to_int(name, v); },                         \
          [](const ExperimentConfig &c) { return std::to_string(c.member); }}
#define PCS_DOUBLE(name, member)                                                                                       \
    Field{name, [](ExperimentConfig &c, const std::string &v) { c.member = to_double(name, v); },                      \
          [](const ExperimentConfig &c) { return fmt(c.member); }}
#define PCS_BOOL(name, member)                                                                                         \
    Field{name, [](ExperimentConfig &c, const std::string &v) { c.member = to_bool(name, v); },                        \
          [](const ExperimentConfig &c) { return std::string(c.member ? "true" : "false"); }}

const std::vector<Field> &fields()
{
    static const std::vector<Field> f = {
        Field{"profile", [](ExperimentConfig &c, const std::string &v) { c.profile = parse_profile(v); },
              [](const ExperimentConfig &c) { return profile_name(c.profile); }},
        // system
        PCS_DOUBLE("carrier_freq_hz", system.carrier_freq_hz),
        PCS_DOUBLE("bandwidth_hz", system.bandwidth_hz),
        PCS_INT("num_subcarriers", system.num_subcarriers),
        PCS_INT("num_tx", system.num_tx),
        PCS_INT("num_rx", system.num_rx),
        PCS_INT("seq_len", system.seq_len),
        PCS_DOUBLE("tx_spacing", system.tx_spacing),
        PCS_DOUBLE("rx_spacing", system.rx_spacing),
        PCS_DOUBLE("total_power", system.total_power),
        PCS_INT("num_delay_taps", system.num_delay_taps),
        // grids
        PCS_INT("g_theta", grids.g_theta),
        PCS_INT("g_phi", grids.g_phi),
        PCS_INT("g_tau", grids.g_tau),
        // optimizer
        PCS_INT("p", optimizer.p),
        PCS_DOUBLE("q", optimizer.q),
        PCS_DOUBLE("lambda_bar", optimizer.lambda_bar),
        PCS_DOUBLE("learning_rate", optimizer.learning_rate),
        PCS_LONG("iterations", optimizer.iterations),
        PCS_DOUBLE("beta1", optimizer.beta1),
        PCS_DOUBLE("beta2", optimizer.beta2),
        PCS_DOUBLE("eps", optimizer.eps),
        PCS_DOUBLE("zero_threshold_rel", optimizer.zero_threshold_rel),
        PCS_LONG("trace_every", optimizer.trace_every),
        // channel
        PCS_INT("num_paths", channel.num_paths),
        PCS_DOUBLE("rician_k_db", channel.rician_k_db),
        PCS_BOOL("on_grid", channel.on_grid),
        // evaluation
        Field{"snr_db_list",
              [](ExperimentConfig &c, const std::string &v) {
                  c.evaluation.snr_db_list = to_double_list("snr_db_list", v);
              },
              [](const ExperimentConfig &c) { return join(c.evaluation.snr_db_list); }},
        PCS_INT("num_trials", evaluation.num_trials),
        Field{"solver", [](ExperimentConfig &c, const std::string &v) { c.evaluation.solver = v; },
              [](const ExperimentConfig &c) { return c.evaluation.solver; }},
        PCS_INT("max_sparsity", evaluation.max_sparsity),
        PCS_DOUBLE("residual_tol", evaluation.residual_tol),
        // run control
        Field{"base_seed",
              [](ExperimentConfig &c, const std::string &v) {
                  const long long s = to_int("base_seed", v);
                  if (s < 0)
                      throw ConfigError("base_seed", "must be >= 0");
                  c.base_seed = static_cast<std::uint64_t>(s);
              },
              [](const ExperimentConfig &c) { return std::to_string(c.base_seed); }},
        Field{"methods",
              [](ExperimentConfig &c, const std::string &v) { c.methods = v.empty() ? std::vector<std::string>{} : split_list(v); },
              [](const ExperimentConfig &c) { return join(c.methods); }},
        PCS_INT("target_q", target_q),
        Field{"lambda_list",
              [](ExperimentConfig &c, const std::string &v) { c.lambda_list = to_double_list("lambda_list", v); },
              [](const ExperimentConfig &c) { return join(c.lambda_list); }},
        PCS_INT("gradcheck_pairs", gradcheck_pairs),
        PCS_DOUBLE("gradcheck_step", gradcheck_step),
        PCS_DOUBLE("gradcheck_tol", gradcheck_tol),
        PCS_BOOL("allow_mismatch", allow_mismatch),
    };
    return f;
}

#undef PCS_INT
#undef PCS_LONG
#undef PCS_DOUBLE
#undef PCS_BOOL

const Field *find_field(const std::string &key)
{
    for (const auto &f : fields())
        if (key == f.key)
            return &f;
    return nullptr;
}

void need(bool ok, const char *key, const char *what)
{
    if (!ok)
        throw ConfigError(key, what);
}

template <class F> void check_section(const char *key, F &&fn)
{
    try {
        fn();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(key, e.what());
    }
}

} // namespace

Profile parse_profile(const std::string &name)
{
    if (name == "desk")
        return Profile::desk;
    if (name == "paper")
        return Profile::paper;
    throw ConfigError("profile", "expected 'desk' or 'paper', got '" + name + "'");
}

std::string profile_name(Profile p) { return p == Profile::desk ? "desk" : "paper"; }

ExperimentConfig profile_defaults(Profile p)
{
    ExperimentConfig c;
    c.profile = p;
    c.evaluation.snr_db_list = {-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0};
    if (p == Profile::paper) {
        // Library defaults already hold the paper-scale system and grids.
        c.channel.num_paths = 6;
        c.optimizer.iterations = 20000;
        c.optimizer.lambda_bar = 1.5;
        c.optimizer.trace_every = 100;
        c.lambda_list = {0.7, 1.0, 1.5, 2.0, 3.0, 5.0, 7.0};
        c.target_q = 9;
    } else {
        c.system.num_rx = 4;
        c.system.num_tx = 8;
        c.system.seq_len = 4;
        c.system.num_subcarriers = 16;
        c.system.num_delay_taps = 8;
        c.grids = {8, 16, 16};
        c.channel.num_paths = 3;
        c.optimizer.iterations = 2000;
        c.optimizer.lambda_bar = 0.8;
        c.optimizer.trace_every = 10;
        c.lambda_list = {0.2, 0.317, 0.502, 0.796, 1.26, 2.0};
        c.target_q = 0;
    }
    c.optimizer.seed = c.base_seed;
    return c;
}

void ExperimentConfig::validate() const
{
    const SystemConfig &s = system;
    const OptimizerConfig &o = optimizer;
    need(s.carrier_freq_hz > 0.0, "carrier_freq_hz", "must be > 0");
    need(s.bandwidth_hz > 0.0, "bandwidth_hz", "must be > 0");
    need(s.num_subcarriers >= 1, "num_subcarriers", "must be >= 1");
    need(s.num_tx >= 1, "num_tx", "must be >= 1");
    need(s.num_rx >= 1, "num_rx", "must be >= 1");
    need(s.seq_len >= 1, "seq_len", "must be >= 1");
    need(s.tx_spacing > 0.0, "tx_spacing", "must be > 0");
    need(s.rx_spacing > 0.0, "rx_spacing", "must be > 0");
    need(s.total_power > 0.0, "total_power", "must be > 0");
    need(s.num_delay_taps >= 1 && s.num_delay_taps <= s.num_subcarriers, "num_delay_taps",
         "must lie in [1, num_subcarriers]");
    need(grids.g_theta >= 1, "g_theta", "must be >= 1");
    need(grids.g_phi >= 1, "g_phi", "must be >= 1");
    need(grids.g_tau >= 2, "g_tau", "must be >= 2");
    need(o.p >= 2 && o.p % 2 == 0, "p", "must be an even integer >= 2");
    need(o.q > 0.0 && o.q <= 1.0, "q", "must lie in (0, 1]");
    need(o.lambda_bar >= 0.0 && std::isfinite(o.lambda_bar), "lambda_bar", "must be finite and >= 0");
    need(o.learning_rate > 0.0, "learning_rate", "must be > 0");
    need(o.iterations >= 0, "iterations", "must be >= 0");
    need(o.beta1 > 0.0 && o.beta1 < 1.0, "beta1", "must lie in (0, 1)");
    need(o.beta2 > 0.0 && o.beta2 < 1.0, "beta2", "must lie in (0, 1)");
    need(o.eps > 0.0, "eps", "must be > 0");
    need(o.zero_threshold_rel > 0.0 && o.zero_threshold_rel < 1.0, "zero_threshold_rel", "must lie in (0, 1)");
    need(o.trace_every >= 1, "trace_every", "must be >= 1");
    // Backstop for any constraint the library adds later.
    check_section("config", [&] {
        system.validate();
        grids.validate();
        optimizer.validate();
    });
    if (channel.num_paths < 1)
        throw ConfigError("num_paths", "must be >= 1");
    if (!std::isfinite(channel.rician_k_db))
        throw ConfigError("rician_k_db", "must be finite");
    if (evaluation.snr_db_list.empty())
        throw ConfigError("snr_db_list", "must not be empty");
    for (double s : evaluation.snr_db_list)
        if (s == -std::numeric_limits<double>::infinity())
            throw ConfigError("snr_db_list", "-inf is not a valid SNR");
    if (evaluation.num_trials < 1)
        throw ConfigError("num_trials", "must be >= 1");
    if (evaluation.solver != "omp")
        throw ConfigError("solver", "unsupported solver '" + evaluation.solver + "' (available: omp)");
    if (evaluation.max_sparsity < 0)
        throw ConfigError("max_sparsity", "must be >= 0");
    if (!(evaluation.residual_tol >= 0.0))
        throw ConfigError("residual_tol", "must be >= 0");
    if (target_q < 0 || target_q > system.num_subcarriers)
        throw ConfigError("target_q", "must lie in [0, num_subcarriers]");
    for (double l : lambda_list)
        if (!(l >= 0.0) || !std::isfinite(l))
            throw ConfigError("lambda_list", "entries must be finite and >= 0");
    if (gradcheck_pairs < 1)
        throw ConfigError("gradcheck_pairs", "must be >= 1");
    if (!(gradcheck_step > 0.0))
        throw ConfigError("gradcheck_step", "must be > 0");
    if (!(gradcheck_tol > 0.0))
        throw ConfigError("gradcheck_tol", "must be > 0");
    if (channel.on_grid && channel.num_paths > grids.total())
        throw ConfigError("num_paths", "exceeds the number of grid points for on-grid channels");
}

ExperimentConfig parse_config(const std::string &text, std::optional<Profile> profile_override,
                              const std::string &source)
{
    struct Entry
    {
        std::string key, value;
        int line;
    };
    std::vector<Entry> entries;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        Entry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
        if (e.key.empty())
            throw ConfigError("", source + ":" + std::to_string(line_no) + ": empty key");
        if (!find_field(e.key))
            throw ConfigError(e.key, source + ":" + std::to_string(line_no) + ": unknown key");
        if (!seen.insert(e.key).second)
            throw ConfigError(e.key, source + ":" + std::to_string(line_no) + ": duplicate key");
        entries.push_back(std::move(e));
    }

    Profile profile = Profile::desk;
    for (const auto &e : entries)
        if (e.key == "profile")
            profile = parse_profile(e.value);
    if (profile_override)
        profile = *profile_override;

    ExperimentConfig c = profile_defaults(profile);
    bool seed_given = false;
    for (const auto &e : entries) {
        if (e.key == "profile")
            continue;
        find_field(e.key)->set(c, e.value);
        seed_given = seed_given || e.key == "base_seed";
    }
    if (seed_given)
        c.optimizer.seed = c.base_seed;
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path &path, std::optional<Profile> profile_override)
{
    std::ifstream f(path);
    if (!f)
        throw ConfigError("config", "cannot read '" + path.string() + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), profile_override, path.string());
}

std::string to_config_text(const ExperimentConfig &config)
{
    std::string s;
    for (const auto &f : fields())
        s += std::string(f.key) + " = " + f.get(config) + "\n";
    return s;
}

} // namespace pilotcs
