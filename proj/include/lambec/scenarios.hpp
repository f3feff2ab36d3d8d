#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "lambda_medium.hpp"
#include "spectral.hpp"
#include "version.hpp"

namespace lambec {

enum class ScenarioId {
    fig2,
    fig3,
    fig4,
    fig5,
    fig6,
    table1,
    susceptibility,
    spectrum,
    dynamics,
    timescales
};

inline constexpr ScenarioId all_scenarios[] = {
    ScenarioId::fig2,   ScenarioId::fig3,           ScenarioId::fig4,     ScenarioId::fig5,
    ScenarioId::fig6,   ScenarioId::table1,         ScenarioId::susceptibility,
    ScenarioId::spectrum, ScenarioId::dynamics,     ScenarioId::timescales};

inline const char* scenario_name(ScenarioId id) {
    switch (id) {
        case ScenarioId::fig2: return "fig2";
        case ScenarioId::fig3: return "fig3";
        case ScenarioId::fig4: return "fig4";
        case ScenarioId::fig5: return "fig5";
        case ScenarioId::fig6: return "fig6";
        case ScenarioId::table1: return "table1";
        case ScenarioId::susceptibility: return "susceptibility";
        case ScenarioId::spectrum: return "spectrum";
        case ScenarioId::dynamics: return "dynamics";
        case ScenarioId::timescales: return "timescales";
    }
    return "?";
}

inline std::optional<ScenarioId> scenario_from_name(std::string_view name) {
    for (ScenarioId id : all_scenarios)
        if (name == scenario_name(id)) return id;
    return std::nullopt;
}

class ScenarioError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// CSV.

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string format_number(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string();
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    template <class... Cells>
    void row(const Cells&... cells) {
        std::vector<std::string> r;
        (r.push_back(cell(cells)), ...);
        if (r.size() != header_.size()) throw DomainError("CSV row width mismatch");
        rows_.push_back(std::move(r));
    }

    std::string str() const {
        std::ostringstream os;
        write_line(os, header_);
        for (const auto& r : rows_) write_line(os, r);
        return os.str();
    }

private:
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    static std::string cell(double v) { return format_number(v); }
    static std::string cell(const std::optional<double>& v) { return format_number(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long long v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "true" : "false"; }

    static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

inline std::string series_csv(const TimeSeries& s) {
    CsvTable t({"t_ns", "n_mean", "n2_mean", "q"});
    for (std::size_t i = 0; i < s.size(); ++i)
        t.row(s.times[i] * 1e9, s.n_mean[i], s.n2_mean[i], s.q[i]);
    return t.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing", path.string());
    out << content;
    out.close();
    if (!out) throw IoError("write failed", path.string());
}

inline void write_series(const TimeSeries& s, const std::filesystem::path& path) {
    write_text_file(path, series_csv(s));
}

// ---------------------------------------------------------------------------
// Model resolution.

inline QuantumModel quantum_model_from(const RunConfig& c) {
    const MediumParams m = medium_from(c);
    QuantumModel q;
    q.omega_p = m.omega;
    q.delta = c.real("quantum.delta_over_omega") * q.omega_p;
    q.n_atoms = m.n_atoms;
    const auto k1 = c.optional_real("quantum.k1_over_omega");
    const auto k2 = c.optional_real("quantum.k2_over_omega");
    if (k1 && k2) {
        q.k1 = *k1 * q.omega_p;
        q.k2 = *k2 * q.omega_p;
    } else {
        DriveParams d = drive_from(c, m);
        d.delta_p = q.delta;
        const CouplingConstants cc = coupling_constants(m, d);
        q.k1 = k1 ? *k1 * q.omega_p : cc.k1;
        q.k2 = k2 ? *k2 * q.omega_p : cc.k2;
    }
    return q;
}

inline std::vector<double> detuning_grid(const RunConfig& c) {
    const double lo = c.real("drive.sweep_min_over_2pi_hz");
    const double hi = c.real("drive.sweep_max_over_2pi_hz");
    const int n = static_cast<int>(c.integer("drive.sweep_points"));
    return uniform_times(lo, hi, n);
}

inline std::vector<double> time_grid(const RunConfig& c) {
    return uniform_times(c.real("quantum.t_start_ns") * 1e-9, c.real("quantum.t_stop_ns") * 1e-9,
                         static_cast<int>(c.integer("quantum.samples")));
}

inline std::optional<int> cutoff_from(const RunConfig& c) {
    if (auto v = c.optional_integer("quantum.m_cutoff")) return static_cast<int>(*v);
    return std::nullopt;
}

struct TableRow {
    std::string label;
    double k1_over_omega;
    double k2_over_omega;
};

inline std::vector<TableRow> table_rows(const RunConfig& c) {
    std::vector<TableRow> rows;
    for (const char* label : {"a", "b", "c"}) {
        const std::string base = std::string("quantum.row_") + label;
        rows.push_back({label, c.real(base + "_k1_over_omega"), c.real(base + "_k2_over_omega")});
    }
    return rows;
}

inline void apply_scenario_presets(ScenarioId id, RunConfig& c) {
    switch (id) {
        case ScenarioId::susceptibility:
            c.preset("drive.sweep_min_over_2pi_hz", "-40000000");
            c.preset("drive.sweep_max_over_2pi_hz", "40000000");
            c.preset("drive.sweep_points", "801");
            break;
        case ScenarioId::fig5:
            c.preset("quantum.t_start_ns", "0");
            c.preset("quantum.t_stop_ns", "1");
            break;
        default:
            break;
    }
}

// ---------------------------------------------------------------------------

struct Artifact {
    std::string name;
    std::string content;
};

struct ScenarioOutput {
    std::vector<Artifact> artifacts;
    std::vector<std::string> warnings;
};

namespace detail {

inline void optical_scenarios(ScenarioId id, const RunConfig& c, ScenarioOutput& out) {
    const MediumParams m = medium_from(c);
    const DriveParams base = drive_from(c, m);
    const double step = hz_to_rad(c.real("drive.derivative_step_over_2pi_hz"));
    const std::vector<double> grid = detuning_grid(c);

    if (id == ScenarioId::fig2) {
        CsvTable t({"delta_over_2pi_hz", "n_p2_m2_per_v2", "eta_p2_m_per_v2", "n_p", "eta_p_per_m"});
        for (double f : grid) {
            const OpticalResponse r = optical_response(m, base.with_detuning(hz_to_rad(f)), step);
            t.row(f, r.n_p2, r.eta_p2, r.n_p, r.eta_p);
        }
        out.artifacts.push_back({"fig2.csv", t.str()});
    } else if (id == ScenarioId::fig3) {
        CsvTable t({"delta_over_2pi_hz", "n_g", "v_g_m_per_s", "eta_p_per_m"});
        for (double f : grid) {
            const OpticalResponse r = optical_response(m, base.with_detuning(hz_to_rad(f)), step);
            t.row(f, r.n_g, r.v_g, r.eta_p);
        }
        out.artifacts.push_back({"fig3.csv", t.str()});
    } else {
        CsvTable t({"delta_over_2pi_hz", "re_chi1", "im_chi1", "re_chi3_m2_per_v2",
                    "im_chi3_m2_per_v2", "eta_p_per_m"});
        for (double f : grid) {
            const DriveParams d = base.with_detuning(hz_to_rad(f));
            const SusceptibilityResult s = susceptibilities(m, d);
            t.row(f, s.chi1.real(), s.chi1.imag(), s.chi3.real(), s.chi3.imag(),
                  total_absorption(m, d));
        }
        out.artifacts.push_back({"susceptibility.csv", t.str()});
        CsvTable roots({"delta_over_2pi_hz"});
        for (double d : find_transparency_points(m, base, hz_to_rad(grid.front()),
                                                 hz_to_rad(grid.back()),
                                                 static_cast<int>(grid.size())))
            roots.row(rad_to_hz(d));
        out.artifacts.push_back({"transparency_points.csv", roots.str()});
    }
}

inline void fig4_scenario(const RunConfig& c, ScenarioOutput& out) {
    const QuantumModel q = quantum_model_from(c);
    const HalfInteger r = HalfInteger::from_double(0.5 * q.n_atoms);
    CsvTable t({"M", "deltaE_order0", "deltaE_order1", "deltaE_order2"});
    for (const auto& row : spectrum_error_study(
             static_cast<int>(c.integer("quantum.m_min")), static_cast<int>(c.integer("quantum.m_max")),
             r, q.omega_p, q.delta, q.k1, q.k2, q.n_atoms))
        t.row(row.M, row.error[0], row.error[1], row.error[2]);
    out.artifacts.push_back({"fig4.csv", t.str()});
}

inline void spectrum_scenario(const RunConfig& c, ScenarioOutput& out) {
    const QuantumModel q = quantum_model_from(c);
    const HalfInteger r = HalfInteger::from_double(0.5 * q.n_atoms);
    const int M = static_cast<int>(c.integer("quantum.sector_m"));
    const IrrepSector s = require_valid(classify_sector(M, r, q.k1, q.k2));
    const SectorSpectrum sp = exact_spectrum(build_sector_hamiltonian(s, q.omega_p, q.delta, q.n_atoms));
    const RVector e0 = perturbative_spectrum(s, q.delta, 0);
    const RVector e1 = perturbative_spectrum(s, q.delta, 1);
    const RVector e2 = perturbative_spectrum(s, q.delta, 2);
    CsvTable t({"index", "m_tilde", "exact_over_omega", "order0_over_omega", "order1_over_omega",
                "order2_over_omega"});
    for (int i = 0; i < s.dim; ++i)
        t.row(i, i - s.r_tilde.value(), sp.exact(i) / q.omega_p, e0(i) / q.omega_p,
              e1(i) / q.omega_p, e2(i) / q.omega_p);
    out.artifacts.push_back({"spectrum.csv", t.str()});
}

inline QuantumState state_from(const RunConfig& c, const QuantumModel& q, ScenarioOutput& out) {
    QuantumState st = initial_state(c.real("quantum.n0"), q.n_atoms, cutoff_from(c), q.k1, q.k2);
    if (st.truncation_warning)
        out.warnings.push_back("truncated Poisson mass " + format_number(st.truncated_mass) +
                               " exceeds 1e-3");
    return st;
}

inline Propagation propagation_from(const RunConfig& c) {
    const std::string& p = c.text("quantum.propagation");
    if (p == "exact") return Propagation::exact;
    if (p == "order0") return Propagation::order0;
    if (p == "order1") return Propagation::order1;
    return Propagation::order2;
}

inline void dynamics_scenarios(ScenarioId id, const RunConfig& c, ScenarioOutput& out) {
    const QuantumModel q = quantum_model_from(c);
    const QuantumState st = state_from(c, q, out);
    const std::vector<double> times = time_grid(c);
    if (id == ScenarioId::fig5) {
        out.artifacts.push_back(
            {"fig5_order2.csv", series_csv(evolve_expectations(st, q, times, Propagation::order2))});
        out.artifacts.push_back(
            {"fig5_exact.csv", series_csv(evolve_expectations(st, q, times, Propagation::exact))});
        out.artifacts.push_back({"fig5_zero_order.csv", series_csv(zero_order_expectations(st, q, times))});
    } else {
        out.artifacts.push_back(
            {"dynamics.csv", series_csv(evolve_expectations(st, q, times, propagation_from(c)))});
    }
}

inline Timescales row_timescales(const RunConfig& c, double k1, double k2, double delta) {
    const double r = 0.5 * static_cast<double>(c.integer("medium.n_atoms"));
    return timescales(c.real("quantum.n0"), r, -r, k1, k2, delta,
                      c.boolean("quantum.timescale_corrections"));
}

inline void table_scenarios(ScenarioId id, const RunConfig& c, ScenarioOutput& out) {
    const double omega = hz_to_rad(c.real("medium.omega_over_2pi_hz"));
    const double delta = c.real("quantum.delta_over_omega") * omega;
    const double ns = 1e9;
    if (id == ScenarioId::table1) {
        CsvTable t({"row", "k1_over_omega", "k2_over_omega", "T_R_ns", "tau_col1_ns",
                    "tau_col2_ns", "tau_rev_ns"});
        for (const TableRow& row : table_rows(c)) {
            const Timescales ts =
                row_timescales(c, row.k1_over_omega * omega, row.k2_over_omega * omega, delta);
            auto scaled = [&](std::optional<double> v) -> std::optional<double> {
                return v ? std::optional<double>(*v * ns) : std::nullopt;
            };
            t.row(row.label, row.k1_over_omega, row.k2_over_omega, ts.t_rabi * ns,
                  ts.t_col_small_k2 * ns, scaled(ts.t_col_large_k2), scaled(ts.t_revival));
        }
        out.artifacts.push_back({"table1.csv", t.str()});
        return;
    }
    const QuantumModel q = quantum_model_from(c);
    const Timescales ts = row_timescales(c, q.k1, q.k2, q.delta);
    auto scaled = [&](std::optional<double> v) -> std::optional<double> {
        return v ? std::optional<double>(*v * ns) : std::nullopt;
    };
    CsvTable t({"T_R_ns", "tau_col1_ns", "tau_col2_ns", "tau_rev_ns", "collapse_regime",
                "tau_col1_corrected_ns", "tau_col2_corrected_ns"});
    t.row(ts.t_rabi * ns, ts.t_col_small_k2 * ns, scaled(ts.t_col_large_k2), scaled(ts.t_revival),
          std::string(ts.large_k2_applicable ? "large_k2" : "small_k2"),
          scaled(ts.t_col_small_k2_corrected), scaled(ts.t_col_large_k2_corrected));
    out.artifacts.push_back({"timescales.csv", t.str()});
}

inline void fig6_scenario(const RunConfig& c, ScenarioOutput& out) {
    const double omega = hz_to_rad(c.real("medium.omega_over_2pi_hz"));
    const double delta = c.real("quantum.delta_over_omega") * omega;
    const double r = 0.5 * static_cast<double>(c.integer("medium.n_atoms"));
    const double n0 = c.real("quantum.n0");
    const int samples = static_cast<int>(c.integer("quantum.samples"));
    CsvTable summary({"row", "collapse_ns", "revival_onset_ns", "revival_peak_ns",
                      "tau_col_ns", "tau_rev_ns"});
    for (const TableRow& row : table_rows(c)) {
        const double k1 = row.k1_over_omega * omega;
        const double k2 = row.k2_over_omega * omega;
        const Timescales ts = row_timescales(c, k1, k2, delta);
        DirectSumParams p{n0, r, k1, k2, delta, 0};
        p.n_max = cutoff_from(c).value_or(default_cutoff(n0, k1, k2));
        double t0 = c.real("quantum.t_start_ns") * 1e-9;
        double t1 = c.real("quantum.t_stop_ns") * 1e-9;
        if (!c.user_set("quantum.t_stop_ns")) t1 = 1.5 * ts.t_revival.value_or(100.0 * ts.t_rabi);
        const DirectSum ds = direct_sum(p, uniform_times(t0, t1, samples));
        CsvTable t({"t_ns", "n_mean", "envelope"});
        for (std::size_t i = 0; i < ds.times.size(); ++i)
            t.row(ds.times[i] * 1e9, ds.n_mean[i], ds.envelope[i]);
        out.artifacts.push_back({"fig6_" + row.label + ".csv", t.str()});
        const EnvelopeFeatures f = envelope_features(ds.times, ds.envelope);
        auto ns = [](std::optional<double> v) -> std::optional<double> {
            return v ? std::optional<double>(*v * 1e9) : std::nullopt;
        };
        summary.row(row.label, ns(f.collapse), ns(f.revival_onset), ns(f.revival_peak),
                    ts.t_collapse() * 1e9, ns(ts.t_revival));
    }
    out.artifacts.push_back({"fig6_summary.csv", summary.str()});
}

}  // namespace detail

// Pure computation; nothing touches the filesystem.
inline ScenarioOutput compute_scenario(ScenarioId id, RunConfig cfg) {
    const std::string name = scenario_name(id);
    const std::string& declared = cfg.text("scenario");
    if (!declared.empty() && declared != name)
        throw ScenarioError(name + ": config declares scenario '" + declared + "'");
    apply_scenario_presets(id, cfg);
    ScenarioOutput out;
    try {
        validate_config(cfg);
        switch (id) {
            case ScenarioId::fig2:
            case ScenarioId::fig3:
            case ScenarioId::susceptibility:
                detail::optical_scenarios(id, cfg, out);
                break;
            case ScenarioId::fig4: detail::fig4_scenario(cfg, out); break;
            case ScenarioId::spectrum: detail::spectrum_scenario(cfg, out); break;
            case ScenarioId::fig5:
            case ScenarioId::dynamics: detail::dynamics_scenarios(id, cfg, out); break;
            case ScenarioId::fig6: detail::fig6_scenario(cfg, out); break;
            case ScenarioId::table1:
            case ScenarioId::timescales: detail::table_scenarios(id, cfg, out); break;
        }
    } catch (const Error& e) {
        throw ScenarioError(name + ": " + e.what());
    }
    return out;
}

inline std::string manifest_json(ScenarioId id, const RunConfig& cfg, const ScenarioOutput& out) {
    nlohmann::ordered_json j;
    j["tool"] = "lambec";
    j["version"] = LAMBEC_VERSION;
    j["scenario"] = scenario_name(id);
    nlohmann::ordered_json config = nlohmann::ordered_json::array();
    for (const KeySpec& k : config_keys()) {
        config.push_back({{"key", k.name},
                          {"value", cfg.value_string(k.name)},
                          {"source", cfg.source(k.name) == Source::user ? "user" : "preset"}});
    }
    j["config"] = config;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const Artifact& a : out.artifacts) files.push_back(a.name);
    j["artifacts"] = files;
    j["warnings"] = out.warnings;
    return j.dump(2) + "\n";
}

struct RunResult {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;
};

// Computes the scenario and writes its CSV files plus a manifest into
// `dir`. Either every file is written or none is left behind.
inline RunResult run_scenario(ScenarioId id, const RunConfig& cfg,
                              const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    ScenarioOutput out = compute_scenario(id, cfg);
    RunConfig resolved = cfg;
    apply_scenario_presets(id, resolved);
    const std::string prefix = cfg.text("output.prefix");
    out.artifacts.push_back(
        {std::string(scenario_name(id)) + "_manifest.json", manifest_json(id, resolved, out)});

    RunResult result;
    result.warnings = out.warnings;
    std::vector<fs::path> written;
    try {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create output directory", dir.string());
        for (const Artifact& a : out.artifacts) {
            const fs::path final_path = dir / (prefix + a.name);
            const fs::path tmp = final_path.string() + ".partial";
            written.push_back(tmp);
            write_text_file(tmp, a.content);
        }
        for (const Artifact& a : out.artifacts) {
            const fs::path final_path = dir / (prefix + a.name);
            fs::rename(final_path.string() + ".partial", final_path);
            result.files.push_back(final_path);
        }
    } catch (...) {
        std::error_code ec;
        for (const fs::path& p : written) fs::remove(p, ec);
        for (const fs::path& p : result.files) fs::remove(p, ec);
        throw;
    }
    return result;
}

}  // namespace lambec
