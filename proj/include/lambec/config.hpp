#pragma once

// Flat `key = value` run configuration.
//
// Every key lives in one of the sections medium., drive., quantum. or
// output. Frequency-like keys carry an explicit unit suffix: either
// `_over_2pi_hz` (a value f such that the angular frequency is 2 pi f) or
// `_over_omega` (a ratio to the probe carrier frequency). Optional
// quantities accept the literal `auto`.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "lambda_medium.hpp"
#include "units.hpp"

namespace lambec {

enum class ValueKind { real, integer, boolean, text };
enum class Constraint { any, positive, non_negative };
enum class Source { preset, user };

struct KeySpec {
    std::string name;
    ValueKind kind;
    std::string default_value;
    Constraint constraint = Constraint::any;
    bool optional = false;  // accepts `auto`
    std::vector<std::string> choices = {};
};

inline const std::vector<KeySpec>& config_keys() {
    using V = ValueKind;
    using C = Constraint;
    static const std::vector<KeySpec> keys = {
        {"scenario", V::text, "", C::any},
        {"medium.gamma_31_over_2pi_hz", V::real, "5000000", C::positive},
        {"medium.gamma_32_over_2pi_hz", V::real, "5000000", C::positive},
        {"medium.gamma_12_over_2pi_hz", V::real, "38000", C::positive},
        {"medium.mu_31_c_m", V::real, "2.2e-29", C::positive},
        {"medium.mu_32_c_m", V::real, "2.2e-29", C::positive},
        {"medium.omega_12_over_2pi_hz", V::real, "1772000000", C::positive},
        {"medium.omega_over_2pi_hz", V::real, "508985497453310.7", C::positive},
        {"medium.density_per_cm3", V::real, "3.3e12", C::positive},
        {"medium.n_atoms", V::integer, "1000", C::positive},
        {"medium.volume_m3", V::real, "auto", C::positive, true},

        {"drive.coupling_intensity_mw_per_cm2", V::real, "55", C::non_negative, true},
        {"drive.g1_over_2pi_hz", V::real, "auto", C::non_negative, true},
        {"drive.probe_intensity_uw_per_cm2", V::real, "80", C::non_negative, true},
        {"drive.probe_amplitude_v_per_m", V::real, "auto", C::non_negative, true},
        {"drive.delta_over_2pi_hz", V::real, "0", C::any},
        {"drive.coupling_detuning_over_2pi_hz", V::real, "0", C::any},
        {"drive.sweep_min_over_2pi_hz", V::real, "-2000000", C::any},
        {"drive.sweep_max_over_2pi_hz", V::real, "2000000", C::any},
        {"drive.sweep_points", V::integer, "401", C::positive},
        {"drive.derivative_step_over_2pi_hz", V::real, "10000", C::positive},

        {"quantum.k1_over_omega", V::real, "3.04e-7", C::positive, true},
        {"quantum.k2_over_omega", V::real, "-3.01e-9", C::any, true},
        {"quantum.delta_over_omega", V::real, "2.4e-8", C::any},
        {"quantum.n0", V::real, "25", C::positive},
        {"quantum.propagation", V::text, "order2", C::any, false,
         {"exact", "order0", "order1", "order2"}},
        {"quantum.m_cutoff", V::integer, "auto", C::non_negative, true},
        {"quantum.t_start_ns", V::real, "0", C::non_negative},
        {"quantum.t_stop_ns", V::real, "1", C::positive},
        {"quantum.samples", V::integer, "4096", C::positive},
        {"quantum.m_min", V::integer, "2", C::non_negative},
        {"quantum.m_max", V::integer, "60", C::non_negative},
        {"quantum.sector_m", V::integer, "25", C::non_negative},
        {"quantum.timescale_corrections", V::boolean, "false", C::any},
        {"quantum.row_a_k1_over_omega", V::real, "3e-7", C::positive},
        {"quantum.row_a_k2_over_omega", V::real, "-3e-9", C::any},
        {"quantum.row_b_k1_over_omega", V::real, "3e-7", C::positive},
        {"quantum.row_b_k2_over_omega", V::real, "-3e-10", C::any},
        {"quantum.row_c_k1_over_omega", V::real, "3e-6", C::positive},
        {"quantum.row_c_k2_over_omega", V::real, "-3e-10", C::any},

        {"output.directory", V::text, ".", C::any},
        {"output.prefix", V::text, "", C::any},
    };
    return keys;
}

inline const KeySpec* find_key(std::string_view name) {
    for (const KeySpec& k : config_keys())
        if (k.name == name) return &k;
    return nullptr;
}

using ConfigValue = std::variant<std::monostate, double, long long, bool, std::string>;

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline ConfigValue parse_value(const KeySpec& k, const std::string& raw, int line) {
    if (k.optional && raw == "auto") return std::monostate{};
    switch (k.kind) {
        case ValueKind::real: {
            double v = 0.0;
            const auto* end = raw.data() + raw.size();
            const auto res = std::from_chars(raw.data(), end, v);
            if (raw.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v))
                throw ParseError("expected a number for " + k.name + ", got '" + raw + "'", line);
            if (k.constraint == Constraint::positive && !(v > 0.0))
                throw ParseError(k.name + " must be positive, got " + raw, line);
            if (k.constraint == Constraint::non_negative && v < 0.0)
                throw ParseError(k.name + " must be non-negative, got " + raw, line);
            return v;
        }
        case ValueKind::integer: {
            long long v = 0;
            const auto* end = raw.data() + raw.size();
            const auto res = std::from_chars(raw.data(), end, v);
            if (raw.empty() || res.ec != std::errc() || res.ptr != end)
                throw ParseError("expected an integer for " + k.name + ", got '" + raw + "'",
                                 line);
            if (k.constraint == Constraint::positive && v <= 0)
                throw ParseError(k.name + " must be positive, got " + raw, line);
            if (k.constraint == Constraint::non_negative && v < 0)
                throw ParseError(k.name + " must be non-negative, got " + raw, line);
            return v;
        }
        case ValueKind::boolean:
            if (raw == "true") return true;
            if (raw == "false") return false;
            throw ParseError("expected true or false for " + k.name + ", got '" + raw + "'", line);
        case ValueKind::text:
            if (!k.choices.empty() &&
                std::find(k.choices.begin(), k.choices.end(), raw) == k.choices.end())
                throw ParseError("invalid choice '" + raw + "' for " + k.name, line);
            return raw;
    }
    return std::monostate{};
}

inline std::string unknown_key_message(const std::string& key) {
    for (const KeySpec& k : config_keys()) {
        if (k.name.rfind(key + "_", 0) == 0 &&
            (k.name.ends_with("_over_2pi_hz") || k.name.ends_with("_over_omega")))
            return "unit suffix missing for '" + key + "' (expected '" + k.name + "')";
        if (k.name.find('.') != std::string::npos &&
            k.name.substr(k.name.find('.') + 1).rfind(key, 0) == 0)
            return "unknown key '" + key + "' (keys need a section prefix, e.g. '" + k.name +
                   "')";
    }
    return "unknown key '" + key + "'";
}

}  // namespace detail

class RunConfig {
public:
    RunConfig() {
        for (const KeySpec& k : config_keys()) {
            values_[k.name] = detail::parse_value(k, k.default_value, 0);
            sources_[k.name] = Source::preset;
        }
    }

    void set(const std::string& key, const std::string& raw, int line = 0) {
        const KeySpec* k = find_key(key);
        if (!k) throw ParseError(detail::unknown_key_message(key), line);
        values_[key] = detail::parse_value(*k, raw, line);
        sources_[key] = Source::user;
    }

    // Applies a scenario preset to keys the user has not set.
    void preset(const std::string& key, const std::string& raw) {
        const KeySpec* k = find_key(key);
        if (!k) throw DomainError("unknown preset key " + key);
        if (sources_.at(key) == Source::user) return;
        values_[key] = detail::parse_value(*k, raw, 0);
    }

    bool is_auto(const std::string& key) const {
        return std::holds_alternative<std::monostate>(values_.at(key));
    }
    bool user_set(const std::string& key) const { return sources_.at(key) == Source::user; }
    Source source(const std::string& key) const { return sources_.at(key); }

    double real(const std::string& key) const {
        const ConfigValue& v = values_.at(key);
        if (auto p = std::get_if<double>(&v)) return *p;
        throw DomainError("config key " + key + " has no numeric value");
    }
    std::optional<double> optional_real(const std::string& key) const {
        if (is_auto(key)) return std::nullopt;
        return real(key);
    }
    long long integer(const std::string& key) const {
        const ConfigValue& v = values_.at(key);
        if (auto p = std::get_if<long long>(&v)) return *p;
        throw DomainError("config key " + key + " has no integer value");
    }
    std::optional<long long> optional_integer(const std::string& key) const {
        if (is_auto(key)) return std::nullopt;
        return integer(key);
    }
    bool boolean(const std::string& key) const { return std::get<bool>(values_.at(key)); }
    const std::string& text(const std::string& key) const {
        return std::get<std::string>(values_.at(key));
    }

    std::string value_string(const std::string& key) const {
        const ConfigValue& v = values_.at(key);
        if (std::holds_alternative<std::monostate>(v)) return "auto";
        if (auto p = std::get_if<double>(&v)) return detail::format_real(*p);
        if (auto p = std::get_if<long long>(&v)) return std::to_string(*p);
        if (auto p = std::get_if<bool>(&v)) return *p ? "true" : "false";
        return std::get<std::string>(v);
    }

    friend bool operator==(const RunConfig& a, const RunConfig& b) {
        return a.values_ == b.values_;
    }

private:
    std::map<std::string, ConfigValue> values_;
    std::map<std::string, Source> sources_;
};

inline void validate_config(const RunConfig& cfg) {
    auto exclusive = [&](const char* a, const char* b) {
        if (!cfg.is_auto(a) && !cfg.is_auto(b) && cfg.user_set(a) && cfg.user_set(b))
            throw ParseError(std::string("only one of ") + a + " and " + b + " may be given", 0);
        if (cfg.is_auto(a) && cfg.is_auto(b))
            throw ParseError(std::string("one of ") + a + " and " + b + " is required", 0);
    };
    exclusive("drive.coupling_intensity_mw_per_cm2", "drive.g1_over_2pi_hz");
    exclusive("drive.probe_intensity_uw_per_cm2", "drive.probe_amplitude_v_per_m");
    if (cfg.real("drive.sweep_max_over_2pi_hz") <= cfg.real("drive.sweep_min_over_2pi_hz"))
        throw ParseError("drive.sweep_max_over_2pi_hz must exceed drive.sweep_min_over_2pi_hz", 0);
    if (cfg.real("quantum.t_stop_ns") < cfg.real("quantum.t_start_ns"))
        throw ParseError("quantum.t_stop_ns must not precede quantum.t_start_ns", 0);
    if (cfg.integer("quantum.m_max") < cfg.integer("quantum.m_min"))
        throw ParseError("quantum.m_max must not be below quantum.m_min", 0);
}

// Applies `key = value` lines from `text` on top of `cfg`.
inline void apply_config_text(RunConfig& cfg, std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value', got '" + body + "'", number);
        cfg.set(detail::trim(body.substr(0, eq)), detail::trim(body.substr(eq + 1)), number);
    }
}

// Exclusive pairs: when the user picks one side the preset side is reset.
inline void resolve_exclusive_inputs(RunConfig& cfg) {
    auto pick = [&](const char* preferred, const char* other) {
        if (cfg.user_set(preferred) && !cfg.is_auto(preferred) && !cfg.user_set(other))
            cfg.preset(other, "auto");
    };
    pick("drive.g1_over_2pi_hz", "drive.coupling_intensity_mw_per_cm2");
    pick("drive.probe_amplitude_v_per_m", "drive.probe_intensity_uw_per_cm2");
}

inline RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    apply_config_text(cfg, text);
    resolve_exclusive_inputs(cfg);
    validate_config(cfg);
    return cfg;
}

inline std::string serialize(const RunConfig& cfg) {
    std::ostringstream os;
    for (const KeySpec& k : config_keys()) {
        const std::string v = cfg.value_string(k.name);
        if (k.name == "scenario" && v.empty()) continue;
        os << k.name << " = " << v << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Conversion to physics inputs.

inline MediumParams medium_from(const RunConfig& c) {
    MediumParams m;
    m.gamma31 = hz_to_rad(c.real("medium.gamma_31_over_2pi_hz"));
    m.gamma32 = hz_to_rad(c.real("medium.gamma_32_over_2pi_hz"));
    m.gamma12 = hz_to_rad(c.real("medium.gamma_12_over_2pi_hz"));
    m.mu31 = c.real("medium.mu_31_c_m");
    m.mu32 = c.real("medium.mu_32_c_m");
    m.omega12 = hz_to_rad(c.real("medium.omega_12_over_2pi_hz"));
    m.omega = hz_to_rad(c.real("medium.omega_over_2pi_hz"));
    m.density = per_cm3_to_per_m3(c.real("medium.density_per_cm3"));
    m.n_atoms = static_cast<double>(c.integer("medium.n_atoms"));
    m.volume = c.optional_real("medium.volume_m3");
    m.validate();
    return m;
}

inline DriveParams drive_from(const RunConfig& c, const MediumParams& m) {
    DriveParams d;
    if (auto g1 = c.optional_real("drive.g1_over_2pi_hz"))
        d.g1 = hz_to_rad(*g1);
    else
        d.g1 = rabi_from_intensity(
            mw_per_cm2_to_w_per_m2(c.real("drive.coupling_intensity_mw_per_cm2")), m.mu31);
    if (auto a = c.optional_real("drive.probe_amplitude_v_per_m"))
        d.probe_amplitude = *a;
    else
        d.probe_amplitude = amplitude_from_intensity(
            uw_per_cm2_to_w_per_m2(c.real("drive.probe_intensity_uw_per_cm2")));
    d.delta_p = hz_to_rad(c.real("drive.delta_over_2pi_hz"));
    d.delta_c = hz_to_rad(c.real("drive.coupling_detuning_over_2pi_hz"));
    return d;
}

}  // namespace lambec
