#pragma once

// Experiment configuration: presets, the key=value config format, and its
// serialization (used for run manifests).
//
//     # comment
//     [params]
//     c = 0.035
//     theta = 1.5
//     [run]
//     runs = 300
//
// Keys may also appear before any section header; names are unique across
// sections. Unknown sections or keys are errors. A [manifest] section is
// informational and skipped when read back.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tisim/csv.hpp"
#include "tisim/engine.hpp"
#include "tisim/model.hpp"

namespace tisim {

enum class ExperimentKind { SingleRun, Ensemble, Dde, Sensitivity, BifurcationScan };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::SingleRun: return "single-run";
        case ExperimentKind::Ensemble: return "ensemble";
        case ExperimentKind::Dde: return "dde";
        case ExperimentKind::Sensitivity: return "sensitivity";
        case ExperimentKind::BifurcationScan: return "bifurcation-scan";
    }
    return "unknown";
}

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::Ensemble;
    std::string preset;
    std::string out = "tisim-out";
    ModelParams params{};
    InitialCondition init{};
    std::vector<double> thetas;   // empty: params.theta only
    double t0 = 0.0;
    double t_stop = 200.0;
    std::size_t runs = 100;
    std::uint64_t seed = 1;
    double grid_dt = 1.0;
    unsigned threads = 0;
    std::uint64_t event_cap = 2'000'000'000ULL;
    double density_bin = 1.0;
    double dde_step = 0.01;
    std::size_t bins = 200;
    bool raw = false;

    /// Delay values the experiment sweeps over.
    std::vector<double> delay_values() const {
        return thetas.empty() ? std::vector<double>{params.theta} : thetas;
    }
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& msg, int line = 0) : std::runtime_error(msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

namespace config_detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& v) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw std::invalid_argument("expected a number, got '" + v + "'");
    }
    return out;
}

inline std::uint64_t parse_uint(const std::string& v) {
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw std::invalid_argument("expected a nonnegative integer, got '" + v + "'");
    }
    return out;
}

inline Count parse_count(const std::string& v) {
    return static_cast<Count>(parse_uint(v));
}

inline bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("expected true/false, got '" + v + "'");
}

inline std::vector<double> parse_list(const std::string& v) {
    std::vector<double> out;
    if (trim(v).empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item)));
    return out;
}

inline std::string format_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += format_double(v[i]);
    }
    return s;
}

inline ExperimentKind parse_kind(const std::string& v) {
    for (auto k : {ExperimentKind::SingleRun, ExperimentKind::Ensemble, ExperimentKind::Dde,
                   ExperimentKind::Sensitivity, ExperimentKind::BifurcationScan}) {
        if (v == to_string(k)) return k;
    }
    throw std::invalid_argument("unknown experiment kind '" + v + "'");
}

struct Key {
    const char* section;
    const char* name;
    std::function<void(ExperimentSpec&, const std::string&)> set;
    std::function<std::string(const ExperimentSpec&)> get;
};

#define TISIM_DOUBLE_KEY(sec, name, field)                                                  \
    Key{sec, name, [](ExperimentSpec& s, const std::string& v) { s.field = parse_double(v); }, \
        [](const ExperimentSpec& s) { return format_double(s.field); }}

inline const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        Key{"experiment", "kind",
            [](ExperimentSpec& s, const std::string& v) { s.kind = parse_kind(v); },
            [](const ExperimentSpec& s) { return std::string(to_string(s.kind)); }},
        Key{"experiment", "preset", [](ExperimentSpec& s, const std::string& v) { s.preset = v; },
            [](const ExperimentSpec& s) { return s.preset; }},
        Key{"experiment", "out", [](ExperimentSpec& s, const std::string& v) { s.out = v; },
            [](const ExperimentSpec& s) { return s.out; }},
        Key{"experiment", "thetas",
            [](ExperimentSpec& s, const std::string& v) { s.thetas = parse_list(v); },
            [](const ExperimentSpec& s) { return format_list(s.thetas); }},
        TISIM_DOUBLE_KEY("params", "r", params.r),
        TISIM_DOUBLE_KEY("params", "b", params.b),
        TISIM_DOUBLE_KEY("params", "V", params.V),
        TISIM_DOUBLE_KEY("params", "p_T", params.p_T),
        TISIM_DOUBLE_KEY("params", "g_T", params.g_T),
        TISIM_DOUBLE_KEY("params", "p_E", params.p_E),
        TISIM_DOUBLE_KEY("params", "g_E", params.g_E),
        TISIM_DOUBLE_KEY("params", "mu_E", params.mu_E),
        TISIM_DOUBLE_KEY("params", "c", params.c),
        TISIM_DOUBLE_KEY("params", "p_I", params.p_I),
        TISIM_DOUBLE_KEY("params", "g_I", params.g_I),
        TISIM_DOUBLE_KEY("params", "mu_I", params.mu_I),
        TISIM_DOUBLE_KEY("params", "theta", params.theta),
        Key{"init", "T0", [](ExperimentSpec& s, const std::string& v) { s.init.T0 = parse_count(v); },
            [](const ExperimentSpec& s) { return std::to_string(s.init.T0); }},
        Key{"init", "E0", [](ExperimentSpec& s, const std::string& v) { s.init.E0 = parse_count(v); },
            [](const ExperimentSpec& s) { return std::to_string(s.init.E0); }},
        TISIM_DOUBLE_KEY("init", "I0", init.I0),
        TISIM_DOUBLE_KEY("run", "t0", t0),
        TISIM_DOUBLE_KEY("run", "t_stop", t_stop),
        Key{"run", "runs",
            [](ExperimentSpec& s, const std::string& v) { s.runs = parse_uint(v); },
            [](const ExperimentSpec& s) { return std::to_string(s.runs); }},
        Key{"run", "seed", [](ExperimentSpec& s, const std::string& v) { s.seed = parse_uint(v); },
            [](const ExperimentSpec& s) { return std::to_string(s.seed); }},
        TISIM_DOUBLE_KEY("run", "grid_dt", grid_dt),
        Key{"run", "threads",
            [](ExperimentSpec& s, const std::string& v) {
                s.threads = static_cast<unsigned>(parse_uint(v));
            },
            [](const ExperimentSpec& s) { return std::to_string(s.threads); }},
        Key{"run", "event_cap",
            [](ExperimentSpec& s, const std::string& v) { s.event_cap = parse_uint(v); },
            [](const ExperimentSpec& s) { return std::to_string(s.event_cap); }},
        TISIM_DOUBLE_KEY("run", "density_bin", density_bin),
        Key{"run", "raw", [](ExperimentSpec& s, const std::string& v) { s.raw = parse_bool(v); },
            [](const ExperimentSpec& s) { return std::string(s.raw ? "true" : "false"); }},
        TISIM_DOUBLE_KEY("dde", "step", dde_step),
        Key{"sensitivity", "bins",
            [](ExperimentSpec& s, const std::string& v) { s.bins = parse_uint(v); },
            [](const ExperimentSpec& s) { return std::to_string(s.bins); }},
    };
    return table;
}

#undef TISIM_DOUBLE_KEY

inline const Key* find_key(const std::string& section, const std::string& name) {
    for (const Key& k : keys()) {
        if (name == k.name && (section.empty() || section == k.section)) return &k;
    }
    return nullptr;
}

inline bool known_section(const std::string& s) {
    for (const Key& k : keys()) {
        if (s == k.section) return true;
    }
    return false;
}

}  // namespace config_detail

inline std::vector<double> theta_range(double step, int count) {
    std::vector<double> v;
    for (int k = 0; k < count; ++k) v.push_back(step * k);
    return v;
}

inline std::vector<std::string> preset_names() {
    return {"fig2", "fig3-sensitivity", "sensitivity-desk", "fig4-single", "fig4-bifurcation",
            "fig6-dde"};
}

/// Applies preset `name` on top of `s`. Throws ConfigError for unknown names.
inline void apply_preset(ExperimentSpec& s, const std::string& name) {
    const std::vector<double> seven = {0, 0.5, 1, 1.5, 2, 2.5, 3};
    s.preset = name;
    if (name == "fig2") {
        s.kind = ExperimentKind::Ensemble;
        s.params.c = 0.02;
        s.thetas = seven;
        s.runs = 1000;
        s.t_stop = 200;
    } else if (name == "fig3-sensitivity") {
        s.kind = ExperimentKind::Sensitivity;
        s.params.c = 0.02;
        // 0.1 k, k = 0..30, written as k/10 to get the nearest doubles
        s.thetas.clear();
        for (int k = 0; k <= 30; ++k) s.thetas.push_back(k / 10.0);
        s.runs = 1000;
        s.t_stop = 200;
    } else if (name == "sensitivity-desk") {
        s.kind = ExperimentKind::Sensitivity;
        s.params.c = 0.02;
        s.thetas = seven;
        s.runs = 200;
        s.t_stop = 200;
    } else if (name == "fig4-single") {
        s.kind = ExperimentKind::SingleRun;
        s.params.c = 0.035;
        s.thetas = {0, 1.5};
        s.t_stop = 10000;
    } else if (name == "fig4-bifurcation") {
        s.kind = ExperimentKind::BifurcationScan;
        s.params.c = 0.035;
        s.thetas = {0, 1.5, 2, 3};
        s.runs = 1000;
        s.t_stop = 1000;
    } else if (name == "fig6-dde") {
        s.kind = ExperimentKind::Dde;
        s.params.c = 0.035;
        s.thetas = seven;
        s.t_stop = 400;
        s.dde_step = 0.01;
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    s.init = InitialCondition{1, 0, 0.0};
}

struct ConfigEntry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
};

/// Tokenizes config text into entries; syntax errors carry line numbers.
inline std::vector<ConfigEntry> parse_config_entries(std::string_view text) {
    using config_detail::trim;
    std::vector<ConfigEntry> out;
    std::string section;
    bool skip_section = false;
    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view raw =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header",
                                  lineno);
            }
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            skip_section = section == "manifest";
            if (!skip_section && !config_detail::known_section(section)) {
                throw ConfigError(
                    "line " + std::to_string(lineno) + ": unknown section [" + section + "]",
                    lineno);
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value", lineno);
        }
        if (skip_section) continue;
        ConfigEntry e{section, trim(std::string_view(line).substr(0, eq)),
                      trim(std::string_view(line).substr(eq + 1)), lineno};
        if (e.key.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": empty key", lineno);
        }
        out.push_back(std::move(e));
    }
    return out;
}

/// Builds a spec from config text: defaults, then the preset named in the
/// text (or `preset_override`), then every other entry in order.
inline ExperimentSpec spec_from_config_text(std::string_view text,
                                            const std::string& preset_override = {}) {
    const std::vector<ConfigEntry> entries = parse_config_entries(text);
    ExperimentSpec spec;
    std::string preset = preset_override;
    for (const ConfigEntry& e : entries) {
        if (e.key == "preset" && preset_override.empty()) preset = e.value;
    }
    if (!preset.empty()) apply_preset(spec, preset);
    for (const ConfigEntry& e : entries) {
        const config_detail::Key* k = config_detail::find_key(e.section, e.key);
        if (!k) {
            throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + e.key + "'" +
                                  (e.section.empty() ? "" : " in [" + e.section + "]"),
                              e.line);
        }
        if (e.key == "preset") continue;
        try {
            k->set(spec, e.value);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError("line " + std::to_string(e.line) + ": " + e.key + ": " + ex.what(),
                              e.line);
        }
    }
    return spec;
}

inline ExperimentSpec parse_config(const std::string& path,
                                   const std::string& preset_override = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return spec_from_config_text(ss.str(), preset_override);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what(), e.line());
    }
}

/// Sets one key by name (command-line overrides); throws ConfigError.
inline void set_config_value(ExperimentSpec& spec, const std::string& key,
                             const std::string& value) {
    const config_detail::Key* k = config_detail::find_key("", key);
    if (!k) throw ConfigError("unknown key '" + key + "'");
    try {
        if (key == "preset") {
            apply_preset(spec, value);
        } else {
            k->set(spec, value);
        }
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(key + ": " + ex.what());
    }
}

/// Serializes every key, grouped by section, in table order.
inline std::string format_config(const ExperimentSpec& spec) {
    std::string out;
    std::string section;
    for (const auto& k : config_detail::keys()) {
        if (section != k.section) {
            section = k.section;
            out += (out.empty() ? "[" : "\n[") + section + "]\n";
        }
        out += std::string(k.name) + " = " + k.get(spec) + "\n";
    }
    return out;
}

}  // namespace tisim
