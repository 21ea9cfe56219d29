#pragma once

// Brute-force check of the detuning-to-phase law: integrate the driven
// two-level Schrodinger equation through a 2pi sech pulse and read off the
// phase left on the coupled level.
//
// Time is measured in units of 1/sigma. In the frame rotating at the pulse
// carrier the Hamiltonian is
//
//     H(t) = 1/2 [[0, Omega(t)], [Omega(t), -2 Delta']],   Omega(t) = 2 sech(t)
//
// with c_g the coupled exciton amplitude and c_e the biexciton amplitude.
// The detuning sits on the biexciton level; c_g picks up no frame phase, and
// the zero-drive reference run is kept anyway so the extraction does not
// depend on that bookkeeping.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <future>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <json.hpp>

#include "onepulse/bloch.hpp"
#include "onepulse/error.hpp"
#include "onepulse/pulse.hpp"

namespace onepulse {

struct TwoLevelAmplitudes {
    cplx c_g{1.0, 0.0};
    cplx c_e{0.0, 0.0};

    [[nodiscard]] double norm_squared() const { return std::norm(c_g) + std::norm(c_e); }
};

enum class IntegrationMethod { rk4, adaptive };

struct IntegrationGrid {
    double t_start = -25.0;
    double t_end = 25.0;
    double step = 1e-3; // fixed step for rk4, initial step for adaptive
    IntegrationMethod method = IntegrationMethod::rk4;
    double rel_tol = 1e-12; // adaptive only

    void validate() const {
        if (!(t_start < 0.0 && t_end > 0.0)) throw Error(ErrorKind::domain, "integration grid must straddle t = 0");
        if (!(t_start <= -20.0 && t_end >= 20.0))
            throw Error(ErrorKind::domain, "integration grid must cover at least [-20, 20] in units of 1/sigma");
        if (!(step > 0.0) || !std::isfinite(step) || step > t_end - t_start)
            throw Error(ErrorKind::domain, "integration step must be positive and smaller than the grid span");
        if (method == IntegrationMethod::adaptive && !(rel_tol > 0.0))
            throw Error(ErrorKind::domain, "adaptive integration needs rel_tol > 0");
    }

    /// Number of fixed steps; the effective step is span / count.
    [[nodiscard]] std::size_t step_count() const {
        return static_cast<std::size_t>(std::ceil((t_end - t_start) / step - 1e-9));
    }
};

struct SechIntegration {
    TwoLevelAmplitudes final;
    double max_norm_drift = 0.0; // max over the trajectory of | |c|^2 - 1 |
};

namespace detail {

using OracleState = std::array<cplx, 2>;

struct SechDrive {
    SechPulseParams pulse;
    double drive_scale;

    void operator()(const OracleState& c, OracleState& dcdt, double t) const {
        const double half_rabi = 0.5 * drive_scale * pulse.rabi_frequency(t);
        const double detuning = pulse.detuning_ratio();
        constexpr cplx minus_i{0.0, -1.0};
        dcdt[0] = minus_i * (half_rabi * c[1]);
        dcdt[1] = minus_i * (half_rabi * c[0] - detuning * c[1]);
    }
};

inline double norm_drift(const OracleState& c) { return std::abs(std::norm(c[0]) + std::norm(c[1]) - 1.0); }

} // namespace detail

/// Integrates from (c_g, c_e) = (1, 0) at grid.t_start. `drive_scale` multiplies the
/// Rabi frequency; anything but 1 breaks the 2pi area and exists for test harnesses.
[[nodiscard]] inline SechIntegration integrate_sech_pulse(double detuning_ratio, const IntegrationGrid& grid,
                                                          double drive_scale = 1.0) {
    grid.validate();
    const detail::SechDrive rhs{SechPulseParams(1.0, detuning_ratio), drive_scale};
    detail::OracleState c{cplx{1.0}, cplx{0.0}};
    double drift = 0.0;

    if (grid.method == IntegrationMethod::rk4) {
        const std::size_t n = grid.step_count();
        const double h = (grid.t_end - grid.t_start) / static_cast<double>(n);
        detail::OracleState k1, k2, k3, k4, tmp;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = grid.t_start + static_cast<double>(i) * h;
            rhs(c, k1, t);
            for (int j = 0; j < 2; ++j) tmp[j] = c[j] + (h / 2.0) * k1[j];
            rhs(tmp, k2, t + h / 2.0);
            for (int j = 0; j < 2; ++j) tmp[j] = c[j] + (h / 2.0) * k2[j];
            rhs(tmp, k3, t + h / 2.0);
            for (int j = 0; j < 2; ++j) tmp[j] = c[j] + h * k3[j];
            rhs(tmp, k4, t + h);
            for (int j = 0; j < 2; ++j) c[j] += (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            drift = std::max(drift, detail::norm_drift(c));
        }
    } else {
        namespace odeint = boost::numeric::odeint;
        auto stepper = odeint::make_controlled(grid.rel_tol * 1e-3, grid.rel_tol,
                                               odeint::runge_kutta_dopri5<detail::OracleState>());
        odeint::integrate_adaptive(stepper, rhs, c, grid.t_start, grid.t_end, grid.step,
                                   [&drift](const detail::OracleState& s, double) {
                                       drift = std::max(drift, detail::norm_drift(s));
                                   });
    }

    if (drift > 1e-6)
        throw Error(ErrorKind::accuracy, "integration grid too coarse: norm drift " + std::to_string(drift) +
                                             " exceeds 1e-6; refine the step");
    return {{c[0], c[1]}, drift};
}

/// Phase retardation of the coupled level relative to a zero-drive run, in [0, 2pi).
[[nodiscard]] inline double extract_geometric_phase(const TwoLevelAmplitudes& final,
                                                    const TwoLevelAmplitudes& reference) {
    if (std::abs(final.c_e) > 1e-4)
        throw Error(ErrorKind::non_return,
                    "pulse did not return the population (|c_e| = " + std::to_string(std::abs(final.c_e)) + ")");
    return wrap_two_pi(-std::arg(final.c_g / reference.c_g));
}

struct OraclePoint {
    double detuning_ratio = 0.0;
    double delta_ode = 0.0;
    double delta_analytic = 0.0;
    double abs_error = 0.0;
    double final_excited_pop = 0.0;
};

[[nodiscard]] inline OraclePoint oracle_point(double detuning_ratio, const IntegrationGrid& grid = {}) {
    const SechIntegration driven = integrate_sech_pulse(detuning_ratio, grid);
    const SechIntegration reference = integrate_sech_pulse(detuning_ratio, grid, 0.0);
    OraclePoint p;
    p.detuning_ratio = detuning_ratio;
    p.delta_ode = extract_geometric_phase(driven.final, reference.final);
    p.delta_analytic = phase_from_detuning(detuning_ratio);
    p.abs_error = angular_distance(p.delta_ode, p.delta_analytic);
    p.final_excited_pop = std::norm(driven.final.c_e);
    return p;
}

struct VerificationReport {
    std::vector<OraclePoint> points;
    double tolerance = 0.0;
    double max_error = 0.0;
    double max_final_excited_pop = 0.0;
    bool passed = false;

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : points)
            pts.push_back({{"detuning_ratio", p.detuning_ratio},
                           {"delta_ode_rad", p.delta_ode},
                           {"delta_analytic_rad", p.delta_analytic},
                           {"abs_error_rad", p.abs_error},
                           {"final_excited_pop", p.final_excited_pop}});
        return {{"points", pts},
                {"tolerance_rad", tolerance},
                {"max_abs_error_rad", max_error},
                {"max_final_excited_pop", max_final_excited_pop},
                {"passed", passed}};
    }

    [[nodiscard]] std::string to_table() const {
        std::ostringstream os;
        os << std::setw(12) << "Delta/sigma" << std::setw(20) << "delta_ode" << std::setw(20) << "delta_analytic"
           << std::setw(14) << "|error|" << std::setw(14) << "|c_e|^2" << '\n';
        for (const auto& p : points) {
            os << std::setw(12) << std::defaultfloat << p.detuning_ratio << std::fixed << std::setprecision(15)
               << std::setw(20) << p.delta_ode << std::setw(20) << p.delta_analytic << std::scientific
               << std::setprecision(3) << std::setw(14) << p.abs_error << std::setw(14) << p.final_excited_pop
               << std::defaultfloat << std::setprecision(6) << '\n';
        }
        os << std::scientific << std::setprecision(3) << "max |error| = " << max_error << " rad (tolerance "
           << tolerance << "), max |c_e|^2 = " << max_final_excited_pop << " -> " << (passed ? "PASS" : "FAIL")
           << '\n';
        return os.str();
    }
};

/// Runs the oracle at every detuning (concurrently) and compares with the analytic law.
[[nodiscard]] inline VerificationReport verify_detuning_law(const std::vector<double>& detuning_grid, double tolerance,
                                                   const IntegrationGrid& grid = {}) {
    if (detuning_grid.empty()) throw Error(ErrorKind::domain, "detuning grid is empty");
    if (!(tolerance > 0.0)) throw Error(ErrorKind::domain, "tolerance must be > 0");
    grid.validate();

    std::vector<std::future<OraclePoint>> jobs;
    jobs.reserve(detuning_grid.size());
    for (double d : detuning_grid) jobs.push_back(std::async(std::launch::async, [d, grid] { return oracle_point(d, grid); }));

    VerificationReport report;
    report.tolerance = tolerance;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        try {
            report.points.push_back(jobs[i].get());
        } catch (const Error& e) {
            throw Error(e.kind(), "oracle failed at Delta/sigma = " + std::to_string(detuning_grid[i]) + ": " + e.what());
        }
        report.max_error = std::max(report.max_error, report.points.back().abs_error);
        report.max_final_excited_pop = std::max(report.max_final_excited_pop, report.points.back().final_excited_pop);
    }
    report.passed = report.max_error < tolerance && report.max_final_excited_pop < 1e-8;
    return report;
}

} // namespace onepulse
