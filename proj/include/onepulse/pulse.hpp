#pragma once

// Detuned 2pi hyperbolic-secant control pulses.
//
// A 2pi sech pulse of bandwidth sigma, detuned by Delta from the biexciton
// resonance, imprints a phase delta = pi - 2 atan(Delta/sigma) on the exciton
// component cross-polarized to it. On the Bloch sphere that is a rotation by
// delta about the pulse polarization axis.

#include <cmath>
#include <string>

#include "onepulse/bloch.hpp"
#include "onepulse/error.hpp"

namespace onepulse {

struct ControlPulseSpec {
    PolarizationAngles polarization{};
    double detuning_ratio = 0.0; // Delta / sigma
    double arrival_time_ps = 0.0;

    void validate() const {
        if (!std::isfinite(detuning_ratio)) throw Error(ErrorKind::config, "control detuning_ratio must be finite");
        if (!(arrival_time_ps >= 0.0)) throw Error(ErrorKind::config, "control arrival_time must be >= 0");
    }
};

/// Sech envelope with the area pinned to 2pi.
class SechPulseParams {
public:
    static constexpr double area = two_pi;

    SechPulseParams(double sigma, double detuning) : sigma_(sigma), detuning_(detuning) {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorKind::domain, "pulse bandwidth sigma must be > 0");
        if (!std::isfinite(detuning)) throw Error(ErrorKind::domain, "pulse detuning must be finite");
    }

    [[nodiscard]] double sigma() const { return sigma_; }
    [[nodiscard]] double detuning() const { return detuning_; }
    [[nodiscard]] double detuning_ratio() const { return detuning_ / sigma_; }

    /// Rabi frequency Omega(t) = (area sigma / pi) sech(sigma t); integrates to `area`.
    [[nodiscard]] double rabi_frequency(double t) const { return area * sigma_ / pi / std::cosh(sigma_ * t); }

private:
    double sigma_;
    double detuning_;
};

[[nodiscard]] inline double phase_from_detuning(double detuning_ratio) {
    if (!std::isfinite(detuning_ratio)) throw Error(ErrorKind::domain, "detuning ratio must be finite");
    return pi - 2.0 * std::atan(detuning_ratio);
}

/// Inverse of phase_from_detuning; delta must lie strictly inside (0, 2pi).
[[nodiscard]] inline double detuning_from_phase(double delta) {
    if (!(delta > 0.0 && delta < two_pi))
        throw Error(ErrorKind::domain,
                    "rotation angle " + std::to_string(delta) +
                        " rad is outside (0, 2pi) and cannot be reached by one 2pi sech pulse at finite detuning");
    return std::tan((pi - delta) / 2.0);
}

[[nodiscard]] inline Unitary2 control_unitary(const ControlPulseSpec& spec) {
    return rotation_operator(axis_from_polarization(spec.polarization), phase_from_detuning(spec.detuning_ratio));
}

/// Pulse realizing a rotation by `delta` about `axis`, up to global phase.
[[nodiscard]] inline ControlPulseSpec synthesize_gate(const UnitVector3& axis, double delta) {
    if (!(std::abs(axis.norm() - 1.0) <= 1e-9)) throw Error(ErrorKind::domain, "rotation axis is not a unit vector");
    if (!(delta > 0.0 && delta < two_pi))
        throw Error(ErrorKind::domain, "rotation angle " + std::to_string(delta) +
                                           " rad is unreachable: single pulses cover (0, 2pi); "
                                           "delta = 0 or 2pi is the identity and needs no pulse");
    return {polarization_from_axis(axis), detuning_from_phase(delta), 0.0};
}

} // namespace onepulse
