#pragma once

// Spin-state algebra on the exciton Bloch sphere.
//
// Basis {|H>, |V>}; the sphere axes are z = |H>, x = |R> = (|H> + i|V>)/sqrt2
// and y = (|H> - |V>)/sqrt2, so that the state at polar angles (theta, phi)
//
//     |X(theta, phi)> = cos(theta/2)|H> + i e^{i phi} sin(theta/2)|V>
//
// has Bloch vector (cos phi sin theta, sin phi sin theta, cos theta).
// The Pauli matrices below are fixed by that requirement.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "onepulse/error.hpp"

namespace onepulse {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Wraps an angle into [0, 2pi).
[[nodiscard]] inline double wrap_two_pi(double angle) {
    double r = std::fmod(angle, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi || r == 0.0) r = 0.0; // also folds -0.0
    return r;
}

/// Smallest absolute difference between two angles, in [0, pi].
[[nodiscard]] inline double angular_distance(double a, double b) {
    const double d = wrap_two_pi(a - b);
    return d > pi ? two_pi - d : d;
}

struct SpinState {
    cplx h{1.0, 0.0};
    cplx v{0.0, 0.0};

    [[nodiscard]] double norm_squared() const { return std::norm(h) + std::norm(v); }

    /// Validating constructor: |h|^2 + |v|^2 must be 1 within 1e-12.
    static SpinState make(cplx h, cplx v) {
        SpinState s{h, v};
        if (!(std::abs(s.norm_squared() - 1.0) <= 1e-12))
            throw Error(ErrorKind::domain, "spin state is not normalized");
        return s;
    }
};

struct PolarizationAngles {
    double theta = 0.0;
    double phi = 0.0;

    /// Canonical angles: theta in [0, pi], phi in [0, 2pi), phi = 0 at the poles.
    static PolarizationAngles make(double theta, double phi) {
        if (!std::isfinite(theta) || !std::isfinite(phi))
            throw Error(ErrorKind::domain, "polarization angles must be finite");
        constexpr double slack = 1e-12;
        if (theta < -slack || theta > pi + slack)
            throw Error(ErrorKind::domain, "polar angle theta must lie in [0, pi], got " + std::to_string(theta));
        theta = std::clamp(theta, 0.0, pi);
        phi = (theta == 0.0 || theta == pi) ? 0.0 : wrap_two_pi(phi);
        return {theta, phi};
    }
};

struct UnitVector3 {
    double x = 0.0;
    double y = 0.0;
    double z = 1.0;

    [[nodiscard]] double norm() const { return std::sqrt(x * x + y * y + z * z); }

    static UnitVector3 normalized(double x, double y, double z) {
        const double n = std::sqrt(x * x + y * y + z * z);
        if (!(n > 0.0) || !std::isfinite(n))
            throw Error(ErrorKind::domain, "cannot normalize a zero or non-finite vector");
        return {x / n, y / n, z / n};
    }
};

/// 2x2 complex matrix in the {|H>, |V>} basis, row-major.
struct Unitary2 {
    std::array<cplx, 4> m{cplx{1.0}, cplx{0.0}, cplx{0.0}, cplx{1.0}};

    [[nodiscard]] const cplx& operator()(int r, int c) const { return m[static_cast<std::size_t>(2 * r + c)]; }
    [[nodiscard]] cplx& operator()(int r, int c) { return m[static_cast<std::size_t>(2 * r + c)]; }

    static Unitary2 identity() { return {}; }

    [[nodiscard]] Unitary2 adjoint() const {
        return {{std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])}};
    }

    [[nodiscard]] cplx det() const { return m[0] * m[3] - m[1] * m[2]; }

    [[nodiscard]] cplx trace() const { return m[0] + m[3]; }

    friend Unitary2 operator*(const Unitary2& a, const Unitary2& b) {
        Unitary2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j);
        return r;
    }

    /// Max entrywise deviation of U U^dagger from the identity.
    [[nodiscard]] double unitarity_error() const {
        const Unitary2 p = *this * adjoint();
        double e = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) e = std::max(e, std::abs(p(i, j) - cplx{i == j ? 1.0 : 0.0}));
        return e;
    }
};

namespace pauli {
inline const Unitary2 x{{cplx{0.0}, cplx{0.0, -1.0}, cplx{0.0, 1.0}, cplx{0.0}}};
inline const Unitary2 y{{cplx{0.0}, cplx{-1.0}, cplx{-1.0}, cplx{0.0}}};
inline const Unitary2 z{{cplx{1.0}, cplx{0.0}, cplx{0.0}, cplx{-1.0}}};
} // namespace pauli

[[nodiscard]] inline SpinState state_from_angles(const PolarizationAngles& a) {
    return {cplx{std::cos(a.theta / 2.0)}, cplx{0.0, 1.0} * std::polar(std::sin(a.theta / 2.0), a.phi)};
}

[[nodiscard]] inline PolarizationAngles angles_from_state(const SpinState& s) {
    const double mh = std::abs(s.h);
    const double mv = std::abs(s.v);
    const double theta = 2.0 * std::atan2(mv, mh);
    if (mv == 0.0 || mh == 0.0) return PolarizationAngles::make(theta, 0.0);
    return PolarizationAngles::make(theta, std::arg(s.v) - std::arg(s.h) - pi / 2.0);
}

/// The antipodal state |X(pi - theta, pi + phi)>.
[[nodiscard]] inline SpinState cross_state(const PolarizationAngles& a) {
    return {cplx{std::sin(a.theta / 2.0)}, cplx{0.0, -1.0} * std::polar(std::cos(a.theta / 2.0), a.phi)};
}

[[nodiscard]] inline UnitVector3 axis_from_polarization(const PolarizationAngles& a) {
    return {std::cos(a.phi) * std::sin(a.theta), std::sin(a.phi) * std::sin(a.theta), std::cos(a.theta)};
}

[[nodiscard]] inline PolarizationAngles polarization_from_axis(const UnitVector3& n) {
    const double theta = std::atan2(std::hypot(n.x, n.y), n.z);
    return PolarizationAngles::make(theta, std::atan2(n.y, n.x));
}

/// R_n(delta) = exp(i sigma.n delta/2): a clockwise rotation by delta about n.
[[nodiscard]] inline Unitary2 rotation_operator(const UnitVector3& n, double delta) {
    if (!(std::abs(n.norm() - 1.0) <= 1e-9)) throw Error(ErrorKind::domain, "rotation axis is not a unit vector");
    const double c = std::cos(delta / 2.0);
    const cplx is{0.0, std::sin(delta / 2.0)};
    // sigma.n = [[nz, -i nx - ny], [i nx - ny, -nz]]
    return {{c + is * n.z, is * cplx{-n.y, -n.x}, is * cplx{-n.y, n.x}, c - is * n.z}};
}

[[nodiscard]] inline SpinState apply(const Unitary2& u, const SpinState& s) {
    return {u(0, 0) * s.h + u(0, 1) * s.v, u(1, 0) * s.h + u(1, 1) * s.v};
}

[[nodiscard]] inline cplx inner(const SpinState& a, const SpinState& b) {
    return std::conj(a.h) * b.h + std::conj(a.v) * b.v;
}

[[nodiscard]] inline double fidelity(const SpinState& a, const SpinState& b) {
    return std::min(1.0, std::norm(inner(a, b)));
}

/// Phase-insensitive overlap of two gates, |tr(U^dagger W)|^2 / 4.
[[nodiscard]] inline double operator_fidelity(const Unitary2& u, const Unitary2& w) {
    return std::norm((u.adjoint() * w).trace()) / 4.0;
}

/// Expectation vector (<sigma_x>, <sigma_y>, <sigma_z>).
[[nodiscard]] inline std::array<double, 3> bloch_vector(const SpinState& s) {
    const cplx hv = std::conj(s.h) * s.v;
    return {2.0 * hv.imag(), -2.0 * hv.real(), std::norm(s.h) - std::norm(s.v)};
}

} // namespace onepulse
