#pragma once

// Visibility and phase-shift extraction.
//
// Traces are fitted to  C e^{-dt/tau} [1 - V cos(2 pi dt / T + dphi)]  with tau
// and T held fixed. With the envelope divided out the model is linear,
//
//     y = a + b cos(w dt) + c sin(w dt),   a = C, b = -C V cos(dphi), c = C V sin(dphi),
//
// so the fit is a 3x3 normal-equation solve with no iteration. Only samples
// strictly after window_start are used: at dt = T exactly the control pulse
// has not acted yet.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "onepulse/bloch.hpp"
#include "onepulse/error.hpp"
#include "onepulse/experiment.hpp"
#include "onepulse/format.hpp"
#include "onepulse/trace_csv.hpp"

namespace onepulse {

/// Below this visibility the phase shift carries no information.
inline constexpr double visibility_floor = 1e-6;

struct FitResult {
    double c = 0.0;
    double v = 0.0; // signed after resolve_sign, >= 0 straight out of fit_trace
    double delta_phi = 0.0;
    double rms_residual = 0.0;
    std::size_t n_samples_used = 0;
    std::vector<std::string> warnings;

    [[nodiscard]] bool phase_defined() const { return std::abs(v) >= visibility_floor; }

    [[nodiscard]] nlohmann::json to_json() const {
        return {{"c", c},
                {"v_signed", v},
                {"delta_phi_rad", delta_phi},
                {"rms_residual", rms_residual},
                {"n_samples", n_samples_used},
                {"warnings", warnings}};
    }

    /// `param,v_signed,delta_phi_rad,rms_residual`
    [[nodiscard]] std::string csv_row(double param) const {
        return format_double(param) + ',' + format_double(v) + ',' + format_double(delta_phi) + ',' +
               format_double(rms_residual);
    }
};

[[nodiscard]] inline FitResult fit_trace(const Trace& trace, double tau_ps, double period_ps, double window_start_ps) {
    if (!(tau_ps > 0.0) || !(period_ps > 0.0)) throw Error(ErrorKind::domain, "tau and T must be > 0");
    const double omega = two_pi / period_ps;

    Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    std::size_t used = 0;
    for (const auto& s : trace.samples) {
        if (!(s.delta_t_ps > window_start_ps)) continue;
        const Eigen::Vector3d f(1.0, std::cos(omega * s.delta_t_ps), std::sin(omega * s.delta_t_ps));
        normal += f * f.transpose();
        rhs += f * (s.signal * std::exp(s.delta_t_ps / tau_ps));
        ++used;
    }
    if (used < 8)
        throw Error(ErrorKind::window, "fit window holds " + std::to_string(used) + " samples; at least 8 are needed");

    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(normal, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    if (!(lmin > 0.0) || lmax / lmin > 1e8)
        throw Error(ErrorKind::ill_posed, "fit is ill-posed: samples do not resolve the precession (condition number " +
                                              format_double(lmin > 0.0 ? lmax / lmin : INFINITY) + ")");

    const Eigen::Vector3d x = normal.ldlt().solve(rhs);
    const double a = x[0], b = x[1], c = x[2];
    if (!(a > 0.0)) throw Error(ErrorKind::unfittable, "trace has no positive mean level; nothing to fit");

    double sq = 0.0;
    for (const auto& s : trace.samples) {
        if (!(s.delta_t_ps > window_start_ps)) continue;
        const double w = omega * s.delta_t_ps;
        const double model = std::exp(-s.delta_t_ps / tau_ps) * (a + b * std::cos(w) + c * std::sin(w));
        sq += (s.signal - model) * (s.signal - model);
    }

    FitResult r;
    r.c = a;
    r.v = std::hypot(b, c) / a;
    r.delta_phi = wrap_two_pi(std::atan2(c / a, -b / a));
    r.rms_residual = std::sqrt(sq / static_cast<double>(used));
    r.n_samples_used = used;
    return r;
}

/// Visibility relative to the reference, phase measured from the reference phase.
[[nodiscard]] inline FitResult normalize_against_reference(const FitResult& result, const FitResult& reference) {
    if (!(reference.v > visibility_floor))
        throw Error(ErrorKind::degenerate_reference, "reference trace visibility " + format_double(reference.v) +
                                                         " is too small to normalize against");
    FitResult r = result;
    r.v = result.v / reference.v;
    r.delta_phi = wrap_two_pi(result.delta_phi - reference.delta_phi);
    return r;
}

/// Turns a sweep of V >= 0 fits into a continuous signed-visibility curve.
///
/// A raw fit cannot return V < 0; a sign change shows up instead as a pi jump
/// in dphi next to a near-zero |V|. Walking the sweep in order, every such jump
/// toggles the branch, and results on the negative branch get V -> -V,
/// dphi -> dphi - pi. Points with |V| below the visibility floor inherit the
/// branch phase of their predecessor.
[[nodiscard]] inline std::vector<FitResult> resolve_sign(const std::vector<FitResult>& results) {
    std::vector<FitResult> out = results;
    if (results.size() < 2) return out;

    constexpr double jump_tolerance = 0.3;
    constexpr double near_zero = 0.2;
    double sign = 1.0;
    std::ptrdiff_t last = -1; // last point with a defined phase
    double min_abs_v = std::numeric_limits<double>::infinity();

    for (std::size_t i = 0; i < results.size(); ++i) {
        const FitResult& raw = results[i];
        if (!raw.phase_defined()) {
            out[i].v = sign * raw.v;
            if (last >= 0) out[i].delta_phi = out[static_cast<std::size_t>(last)].delta_phi;
            out[i].warnings.emplace_back("visibility below 1e-6; phase shift is meaningless");
            min_abs_v = std::min(min_abs_v, std::abs(raw.v));
            continue;
        }
        if (last >= 0) {
            const FitResult& prev = results[static_cast<std::size_t>(last)];
            const double jump = angular_distance(raw.delta_phi, prev.delta_phi);
            if (std::abs(jump - pi) < jump_tolerance) {
                const double smallest = std::min({min_abs_v, std::abs(prev.v), std::abs(raw.v)});
                if (smallest <= near_zero)
                    sign = -sign;
                else
                    out[i].warnings.emplace_back("ambiguous pi phase jump with |V| > 0.2; sign left unresolved");
            }
        }
        out[i].v = sign * raw.v;
        if (sign < 0.0) out[i].delta_phi = wrap_two_pi(raw.delta_phi - pi);
        last = static_cast<std::ptrdiff_t>(i);
        min_abs_v = std::numeric_limits<double>::infinity();
    }
    return out;
}

/// Azimuthal rotation of the spin implied by a normalized phase shift.
///
/// The spin precesses toward decreasing azimuth, so a control that advances the
/// azimuth by delta shows up as dphi = -delta in the fitted trace.
[[nodiscard]] inline double rotation_from_phase_shift(double delta_phi) { return wrap_two_pi(-delta_phi); }

} // namespace onepulse
