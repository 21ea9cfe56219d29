#pragma once

// Command-line workflows: trace, sweep, verify-oracle, synthesize.
//
// Exit codes: 0 success, 1 quantitative check failed, 2 I/O or parse error,
// 3 config/domain error, 4 numerical accuracy error.
//
// Config files hold one `key = value` per line; `#` starts a comment and lists
// are comma separated. Angles are radians unless suffixed with `deg`.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "onepulse/bloch.hpp"
#include "onepulse/error.hpp"
#include "onepulse/experiment.hpp"
#include "onepulse/fitting.hpp"
#include "onepulse/format.hpp"
#include "onepulse/pulse.hpp"
#include "onepulse/rz_oracle.hpp"
#include "onepulse/trace_csv.hpp"

namespace onepulse::cli {

inline constexpr std::string_view tool_version = "1.0.0";

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int check_failed = 1;
inline constexpr int io_or_parse = 2;
inline constexpr int config = 3;
inline constexpr int accuracy = 4;
} // namespace exit_code

[[nodiscard]] inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::parse:
    case ErrorKind::io: return exit_code::io_or_parse;
    case ErrorKind::accuracy:
    case ErrorKind::non_return: return exit_code::accuracy;
    case ErrorKind::unfittable:
    case ErrorKind::degenerate_reference: return exit_code::check_failed;
    case ErrorKind::domain:
    case ErrorKind::config:
    case ErrorKind::window:
    case ErrorKind::ill_posed: return exit_code::config;
    }
    return exit_code::config;
}

// ---------------------------------------------------------------------------
// Config text

struct ConfigEntry {
    std::string value;
    std::size_t line = 0;
};

class ConfigFile {
public:
    static inline const std::vector<std::string> known_keys{
        "pump_polarization", "probe_polarization",    "precession_period_ps", "exciton_lifetime_ps",
        "control_polarization", "control_detuning_ratio", "control_offset_ps", "visibility_loss_eta",
        "overall_scale",     "sample_times_ps",       "sample_range_ps",      "noise_sigma",
        "noise_seed",        "alphas",                "detuning_ratios",      "oracle_step",
        "oracle_half_span",  "oracle_method",         "oracle_rel_tol",       "axis",
        "rotation_angle"};

    static ConfigFile parse(std::istream& in) {
        ConfigFile cfg;
        std::string raw;
        std::size_t n = 0;
        while (std::getline(in, raw)) {
            ++n;
            std::string_view line(raw);
            if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw Error(ErrorKind::parse, "line " + std::to_string(n) + ": expected 'key = value'");
            const std::string key(trim(line.substr(0, eq)));
            const std::string value(trim(line.substr(eq + 1)));
            if (std::find(known_keys.begin(), known_keys.end(), key) == known_keys.end())
                throw Error(ErrorKind::parse, "line " + std::to_string(n) + ": unknown key '" + key + "'");
            if (value.empty())
                throw Error(ErrorKind::parse, "line " + std::to_string(n) + ": key '" + key + "' has no value");
            if (!cfg.entries_.emplace(key, ConfigEntry{value, n}).second)
                throw Error(ErrorKind::parse, "line " + std::to_string(n) + ": duplicate key '" + key + "'");
        }
        return cfg;
    }

    static ConfigFile parse_text(const std::string& text) {
        std::istringstream in(text);
        return parse(in);
    }

    static ConfigFile load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorKind::io, "cannot open config file " + path.string());
        return parse(in);
    }

    [[nodiscard]] bool has(const std::string& key) const { return entries_.count(key) != 0; }

    [[nodiscard]] std::optional<double> number(const std::string& key) const {
        const auto* e = find(key);
        if (!e) return std::nullopt;
        return parse_number(e->value, key, e->line, false);
    }

    [[nodiscard]] std::optional<double> angle(const std::string& key) const {
        const auto* e = find(key);
        if (!e) return std::nullopt;
        return parse_number(e->value, key, e->line, true);
    }

    [[nodiscard]] std::optional<std::vector<double>> numbers(const std::string& key, bool angles = false) const {
        const auto* e = find(key);
        if (!e) return std::nullopt;
        std::vector<double> out;
        std::string_view rest(e->value);
        while (true) {
            const auto comma = rest.find(',');
            out.push_back(parse_number(trim(rest.substr(0, comma)), key, e->line, angles));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        return out;
    }

    [[nodiscard]] std::optional<PolarizationAngles> polarization(const std::string& key) const {
        const auto v = numbers(key, true);
        if (!v) return std::nullopt;
        const auto* e = find(key);
        if (v->size() != 2)
            throw Error(ErrorKind::parse, "line " + std::to_string(e->line) + ": '" + key + "' needs two angles (theta, phi)");
        try {
            return PolarizationAngles::make((*v)[0], (*v)[1]);
        } catch (const Error& err) {
            throw Error(ErrorKind::config, key + ": " + err.what());
        }
    }

    [[nodiscard]] std::optional<std::string> text(const std::string& key) const {
        const auto* e = find(key);
        if (!e) return std::nullopt;
        return e->value;
    }

    /// Parses a free-standing angle such as "1.5708" or "90deg".
    static double parse_angle(std::string_view token, const std::string& field) {
        try {
            return parse_number(token, field, 0, true);
        } catch (const Error&) {
            throw Error(ErrorKind::parse, field + ": cannot parse '" + std::string(token) + "' as an angle");
        }
    }

    [[nodiscard]] std::size_t line_of(const std::string& key) const {
        const auto* e = find(key);
        return e ? e->line : 0;
    }

private:
    std::map<std::string, ConfigEntry> entries_;

    [[nodiscard]] const ConfigEntry* find(const std::string& key) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? nullptr : &it->second;
    }

    static std::string_view trim(std::string_view s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string_view::npos) return {};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static double parse_number(std::string_view token, const std::string& key, std::size_t line, bool angle) {
        std::string_view t = trim(token);
        bool degrees = false;
        if (angle && t.size() > 3 && t.substr(t.size() - 3) == "deg") {
            degrees = true;
            t = trim(t.substr(0, t.size() - 3));
        }
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
            throw Error(ErrorKind::parse, "line " + std::to_string(line) + ": field '" + key + "': cannot parse '" +
                                              std::string(token) + "' as a number");
        return degrees ? v * pi / 180.0 : v;
    }
};

[[nodiscard]] inline ExperimentConfig experiment_from_config(const ConfigFile& f) {
    ExperimentConfig c;
    if (auto p = f.polarization("pump_polarization")) c.pump_polarization = *p;
    if (auto p = f.polarization("probe_polarization")) c.probe_polarization = *p;
    if (auto v = f.number("precession_period_ps")) c.precession_period_ps = *v;
    if (auto v = f.number("exciton_lifetime_ps")) c.exciton_lifetime_ps = *v;
    if (auto p = f.polarization("control_polarization")) {
        c.control = ControlPulseSpec{*p, f.number("control_detuning_ratio").value_or(0.0), 0.0};
    } else if (f.has("control_detuning_ratio")) {
        throw Error(ErrorKind::config, "control_detuning_ratio (line " + std::to_string(f.line_of("control_detuning_ratio")) +
                                           ") requires control_polarization");
    }
    if (auto v = f.number("control_offset_ps")) c.control_offset_ps = *v;
    if (auto v = f.number("visibility_loss_eta")) c.visibility_loss_eta = *v;
    if (auto v = f.number("overall_scale")) c.overall_scale = *v;
    if (auto v = f.number("noise_sigma")) c.noise_sigma = *v;
    if (auto v = f.number("noise_seed")) {
        if (!(*v >= 0.0) || *v != std::floor(*v))
            throw Error(ErrorKind::parse, "line " + std::to_string(f.line_of("noise_seed")) + ": noise_seed must be a non-negative integer");
        c.noise_seed = static_cast<std::uint64_t>(*v);
    }
    if (f.has("sample_times_ps") && f.has("sample_range_ps"))
        throw Error(ErrorKind::config, "sample_times_ps and sample_range_ps are mutually exclusive");
    if (auto v = f.numbers("sample_times_ps")) c.sample_times_ps = *v;
    if (auto v = f.numbers("sample_range_ps")) {
        if (v->size() != 3 || !((*v)[2] >= 2.0) || (*v)[2] != std::floor((*v)[2]))
            throw Error(ErrorKind::config, "sample_range_ps: expected 'start, stop, count' with integer count >= 2");
        const auto count = static_cast<std::size_t>((*v)[2]);
        c.sample_times_ps.resize(count);
        for (std::size_t i = 0; i < count; ++i)
            c.sample_times_ps[i] = (*v)[0] + ((*v)[1] - (*v)[0]) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    c.validate();
    return c;
}

[[nodiscard]] inline std::vector<double> default_alphas() {
    std::vector<double> a(7);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = (pi / 2.0) * static_cast<double>(i) / 6.0;
    return a;
}

[[nodiscard]] inline std::vector<double> default_oracle_detunings() {
    std::vector<double> d;
    for (int i = -6; i <= 6; ++i) d.push_back(0.5 * i);
    return d;
}

[[nodiscard]] inline IntegrationGrid oracle_grid_from_config(const ConfigFile& f) {
    IntegrationGrid g;
    if (auto v = f.number("oracle_half_span")) {
        g.t_start = -*v;
        g.t_end = *v;
    }
    if (auto v = f.number("oracle_step")) g.step = *v;
    if (auto v = f.number("oracle_rel_tol")) g.rel_tol = *v;
    if (auto m = f.text("oracle_method")) {
        if (*m == "rk4")
            g.method = IntegrationMethod::rk4;
        else if (*m == "adaptive")
            g.method = IntegrationMethod::adaptive;
        else
            throw Error(ErrorKind::parse, "line " + std::to_string(f.line_of("oracle_method")) +
                                              ": oracle_method must be 'rk4' or 'adaptive'");
    }
    g.validate();
    return g;
}

// ---------------------------------------------------------------------------
// Output

namespace detail {

class RunRecorder {
public:
    RunRecorder(std::string command, std::filesystem::path out_dir)
        : command_(std::move(command)), out_dir_(std::move(out_dir)), start_(std::chrono::steady_clock::now()) {
        std::error_code ec;
        std::filesystem::create_directories(out_dir_, ec);
        if (ec) throw Error(ErrorKind::io, "cannot create output directory " + out_dir_.string() + ": " + ec.message());
    }

    void write(const std::string& name, const std::string& content) {
        const auto path = out_dir_ / name;
        std::ofstream out(path, std::ios::binary);
        out << content;
        if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
        outputs_.push_back(name);
    }

    /// Written last; lists everything emitted before it.
    void finish(const nlohmann::json& resolved_config) {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        nlohmann::json m{{"command", command_},
                         {"tool_version", tool_version},
                         {"resolved_config", resolved_config},
                         {"outputs", outputs_},
                         {"wall_clock_seconds", seconds}};
        std::ofstream out(out_dir_ / "manifest.json", std::ios::binary);
        out << m.dump(2) << '\n';
        if (!out) throw Error(ErrorKind::io, "cannot write manifest.json");
    }

private:
    std::string command_;
    std::filesystem::path out_dir_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> outputs_;
};

inline nlohmann::json canonical_to_json(const std::string& canonical) {
    nlohmann::json j = nlohmann::json::object();
    std::istringstream in(canonical);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return j;
}

inline std::string trace_csv_text(const Trace& t) {
    std::ostringstream os;
    write_trace_csv(os, t);
    return os.str();
}

inline ConfigFile load_optional(const std::optional<std::filesystem::path>& path) {
    return path ? ConfigFile::load(*path) : ConfigFile{};
}

template <class F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code::io_or_parse;
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Commands

/// Simulates one trace; writes trace.csv and manifest.json.
inline int cmd_trace(const std::optional<std::filesystem::path>& config_path, const std::filesystem::path& out_dir) {
    return detail::guarded([&] {
        const ExperimentConfig config = experiment_from_config(detail::load_optional(config_path));
        const Trace trace = simulate_trace(config);
        detail::RunRecorder rec("trace", out_dir);
        rec.write("trace.csv", detail::trace_csv_text(trace));
        if (trace.meta.overlap_samples > 0)
            std::cerr << "note: " << trace.meta.overlap_samples
                      << " samples fall inside the pulse-overlap window around dt = control_offset\n";
        rec.finish(detail::canonical_to_json(config.canonical_text()));
        return exit_code::ok;
    });
}

/// Sweep family, fits, normalization, sign resolution; writes per-trace CSVs,
/// summary.csv, sweep.json and manifest.json.
inline int cmd_sweep(const std::optional<std::filesystem::path>& config_path, const std::string& family_name,
                     const std::filesystem::path& out_dir) {
    return detail::guarded([&] {
        const ConfigFile file = detail::load_optional(config_path);
        const ExperimentConfig base = experiment_from_config(file);
        const SweepFamily family = parse_sweep_family(family_name);
        const Sweep sweep = family == SweepFamily::detuning
                                ? sweep_detuning(base, file.numbers("detuning_ratios").value_or(std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0}))
                                : sweep_polarization(base, family, file.numbers("alphas", true).value_or(default_alphas()));

        detail::RunRecorder rec("sweep", out_dir);
        nlohmann::json entries = nlohmann::json::array();
        for (std::size_t i = 0; i < sweep.traces.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "trace_%03zu.csv", i);
            rec.write(name, detail::trace_csv_text(sweep.traces[i]));
            nlohmann::json e{{"file", name},
                             {"fingerprint", sweep.traces[i].fingerprint},
                             {"reference", i == 0},
                             {"overlap_samples", sweep.traces[i].meta.overlap_samples},
                             {"extrapolated", sweep.traces[i].meta.extrapolated}};
            if (i > 0) e[family == SweepFamily::detuning ? "detuning_ratio" : "alpha_rad"] = sweep.params[i - 1];
            entries.push_back(std::move(e));
        }

        const double tau = base.exciton_lifetime_ps;
        const double period = base.precession_period_ps;
        const FitResult reference = fit_trace(sweep.traces.front(), tau, period, period);

        std::vector<FitResult> fits;
        std::vector<std::size_t> fitted_index;
        bool any_failed = false;
        for (std::size_t i = 1; i < sweep.traces.size(); ++i) {
            try {
                fits.push_back(normalize_against_reference(fit_trace(sweep.traces[i], tau, period, period), reference));
                fitted_index.push_back(i - 1);
            } catch (const Error& e) {
                any_failed = true;
                std::cerr << "fit failed for trace " << i << ": " << e.what() << '\n';
                entries[i]["fit_error"] = e.what();
            }
        }
        fits = resolve_sign(fits);

        const bool with_rotation = family == SweepFamily::detuning;
        std::string summary = "param,v_signed,delta_phi_rad,rms_residual";
        summary += with_rotation ? ",rotation_rad\n" : "\n";
        for (std::size_t k = 0; k < fits.size(); ++k) {
            summary += fits[k].csv_row(sweep.params[fitted_index[k]]);
            if (with_rotation) summary += ',' + format_double(rotation_from_phase_shift(fits[k].delta_phi));
            summary += '\n';
            entries[fitted_index[k] + 1]["fit"] = fits[k].to_json();
        }
        entries[0]["fit"] = reference.to_json();
        rec.write("summary.csv", summary);

        nlohmann::json sweep_json{{"family", to_string(family)},
                                  {"config_fingerprint", base.fingerprint()},
                                  {"window_start_ps", period},
                                  {"traces", entries}};
        rec.write("sweep.json", sweep_json.dump(2) + "\n");

        nlohmann::json resolved = detail::canonical_to_json(base.canonical_text());
        resolved["family"] = to_string(family);
        resolved[family == SweepFamily::detuning ? "detuning_ratios" : "alphas"] = sweep.params;
        rec.finish(resolved);
        return any_failed ? exit_code::check_failed : exit_code::ok;
    });
}

/// Runs the Schrodinger-equation oracle; writes oracle_report.json/.txt. Exit 0 iff pass.
inline int cmd_verify_oracle(const std::vector<double>& detunings, double tolerance, const IntegrationGrid& grid,
                             const std::filesystem::path& out_dir) {
    return detail::guarded([&] {
        if (detunings.empty()) throw Error(ErrorKind::config, "detuning_ratios: list is empty");
        if (!(tolerance > 0.0)) throw Error(ErrorKind::config, "tolerance must be > 0");
        const VerificationReport report = verify_detuning_law(detunings, tolerance, grid);
        std::cout << report.to_table();
        detail::RunRecorder rec("verify-oracle", out_dir);
        rec.write("oracle_report.json", report.to_json().dump(2) + "\n");
        rec.write("oracle_report.txt", report.to_table());
        rec.finish({{"detuning_ratios", detunings},
                    {"tolerance_rad", tolerance},
                    {"t_start", grid.t_start},
                    {"t_end", grid.t_end},
                    {"step", grid.step},
                    {"method", grid.method == IntegrationMethod::rk4 ? "rk4" : "adaptive"},
                    {"rel_tol", grid.rel_tol}});
        return report.passed ? exit_code::ok : exit_code::check_failed;
    });
}

/// Designs the pulse for a rotation by `delta` about the axis at (theta, phi); writes pulse_spec.json.
inline int cmd_synthesize(double axis_theta, double axis_phi, double delta, const std::filesystem::path& out_dir) {
    return detail::guarded([&] {
        const PolarizationAngles axis_angles = PolarizationAngles::make(axis_theta, axis_phi);
        const UnitVector3 axis = axis_from_polarization(axis_angles);
        const ControlPulseSpec spec = synthesize_gate(axis, delta);
        const Unitary2 u = control_unitary(spec);
        nlohmann::json entries = nlohmann::json::array();
        for (const cplx& z : u.m) entries.push_back({z.real(), z.imag()});
        nlohmann::json out{{"theta", spec.polarization.theta},
                           {"phi", spec.polarization.phi},
                           {"detuning_ratio", spec.detuning_ratio},
                           {"target_delta_rad", delta},
                           {"predicted_delta_rad", phase_from_detuning(spec.detuning_ratio)},
                           {"axis", {axis.x, axis.y, axis.z}},
                           {"unitary_row_major_re_im", entries},
                           {"operator_fidelity", operator_fidelity(u, rotation_operator(axis, delta))}};
        detail::RunRecorder rec("synthesize", out_dir);
        rec.write("pulse_spec.json", out.dump(2) + "\n");
        rec.finish({{"axis_theta", axis_angles.theta}, {"axis_phi", axis_angles.phi}, {"delta_rad", delta}});
        return exit_code::ok;
    });
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(int argc, const char* const* argv) {
    CLI::App app{"Single-pulse exciton-spin control: simulation, oracle and gate synthesis"};
    app.set_version_flag("--version", std::string(tool_version));
    app.require_subcommand(1);

    std::optional<std::string> config;
    std::string out_dir;
    std::string family;
    double tolerance = 1e-3;
    std::optional<std::string> theta, phi, delta;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "key = value config file");
        sub->add_option("--out", out_dir, "output directory")->required();
    };
    auto* trace = app.add_subcommand("trace", "simulate one pump/control/probe trace");
    add_common(trace);
    auto* sweep = app.add_subcommand("sweep", "polarization or detuning sweep with fits");
    add_common(sweep);
    sweep->add_option("--family", family, "equatorial | meridional | detuning")->required();
    auto* oracle = app.add_subcommand("verify-oracle", "check the detuning law against direct integration");
    add_common(oracle);
    oracle->add_option("--tolerance", tolerance, "max allowed phase error (rad)");
    auto* synth = app.add_subcommand("synthesize", "pulse for a target rotation");
    add_common(synth);
    synth->add_option("--theta", theta, "axis polar angle (rad, or e.g. 90deg)");
    synth->add_option("--phi", phi, "axis azimuth (rad, or e.g. 90deg)");
    synth->add_option("--delta", delta, "rotation angle (rad, or e.g. 90deg)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_code::ok : exit_code::io_or_parse;
    }

    const std::optional<std::filesystem::path> config_path =
        config ? std::optional<std::filesystem::path>(*config) : std::nullopt;

    if (trace->parsed()) return cmd_trace(config_path, out_dir);
    if (sweep->parsed()) return cmd_sweep(config_path, family, out_dir);

    ConfigFile file;
    IntegrationGrid grid;
    std::vector<double> detunings;
    double axis_theta = 0.0, axis_phi = 0.0, rotation = pi;
    const int status = detail::guarded([&] {
        file = detail::load_optional(config_path);
        if (oracle->parsed()) {
            grid = oracle_grid_from_config(file);
            detunings = file.numbers("detuning_ratios").value_or(default_oracle_detunings());
            return exit_code::ok;
        }
        // flags override config keys
        auto flag_angle = [](const std::optional<std::string>& s, const std::string& flag) -> std::optional<double> {
            if (!s) return std::nullopt;
            return ConfigFile::parse_angle(*s, flag);
        };
        const auto axis = file.numbers("axis", true);
        if (axis && axis->size() != 2)
            throw Error(ErrorKind::parse, "line " + std::to_string(file.line_of("axis")) + ": 'axis' needs two angles");
        axis_theta = flag_angle(theta, "--theta").value_or(axis ? (*axis)[0] : 0.0);
        axis_phi = flag_angle(phi, "--phi").value_or(axis ? (*axis)[1] : 0.0);
        const auto d = flag_angle(delta, "--delta");
        if (!d && !file.has("rotation_angle"))
            throw Error(ErrorKind::config, "synthesize needs a rotation angle (--delta or rotation_angle)");
        rotation = d ? *d : *file.angle("rotation_angle");
        return exit_code::ok;
    });
    if (status != exit_code::ok) return status;
    if (oracle->parsed()) return cmd_verify_oracle(detunings, tolerance, grid, out_dir);
    return cmd_synthesize(axis_theta, axis_phi, rotation, out_dir);
}

} // namespace onepulse::cli
