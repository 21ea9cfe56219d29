// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>

#include "oracles.hpp"
#include "onepulse/experiment.hpp"
#include "onepulse/fitting.hpp"
#include "onepulse/pulse.hpp"
#include "onepulse/rz_oracle.hpp"

using namespace onepulse;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %d. %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

UnitVector3 random_axis(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    return UnitVector3::normalized(g(rng), g(rng), g(rng));
}

PolarizationAngles random_angles(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return PolarizationAngles::make(std::acos(1.0 - 2.0 * u(rng)), two_pi * u(rng));
}

std::vector<FitResult> sweep_fits(const Sweep& s, const ExperimentConfig& base) {
    const double tau = base.exciton_lifetime_ps, period = base.precession_period_ps;
    const FitResult ref = fit_trace(s.traces[0], tau, period, period);
    std::vector<FitResult> out;
    for (std::size_t i = 1; i < s.traces.size(); ++i)
        out.push_back(normalize_against_reference(fit_trace(s.traces[i], tau, period, period), ref));
    return resolve_sign(out);
}

Outcome oracle_equivalence() {
    std::vector<double> grid;
    for (int i = -6; i <= 6; ++i) grid.push_back(0.5 * i);
    const auto start = std::chrono::steady_clock::now();
    const auto r = verify_detuning_law(grid, 1e-3);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    // independent check of the analytic column
    double worst = 0.0;
    for (const auto& p : r.points)
        worst = std::max(worst, std::abs(p.delta_ode - (oracle::pi - 2.0 * std::atan(p.detuning_ratio))));
    return {r.passed && worst < 1e-3 && r.max_final_excited_pop < 1e-8 && secs < 5.0,
            fmt("max |err| = %.3g rad, max |c_e|^2 = %.3g, %.2f s", worst, r.max_final_excited_pop, secs)};
}

Outcome detuning_endpoints() {
    const ExperimentConfig base;
    const auto fits = sweep_fits(sweep_detuning(base, {-1.0, 0.0, 1.0}), base);
    const double want[] = {3 * oracle::pi / 2, oracle::pi, oracle::pi / 2};
    double dmax = 0.0, vmax = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        dmax = std::max(dmax, angular_distance(rotation_from_phase_shift(fits[i].delta_phi), want[i]));
        vmax = std::max(vmax, std::abs(fits[i].v - 1.0));
    }
    return {dmax < 1e-3 && vmax < 1e-6, fmt("max |delta - want| = %.3g rad, max |V - 1| = %.3g", dmax, vmax)};
}

Outcome equatorial_law() {
    const ExperimentConfig base;
    const auto alphas = oracle::linspace(0.0, oracle::pi / 2, 7);
    const auto fits = sweep_fits(sweep_polarization(base, SweepFamily::equatorial, alphas), base);
    double pmax = 0.0, vmax = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        pmax = std::max(pmax, angular_distance(fits[i].delta_phi, 2.0 * alphas[i]));
        vmax = std::max(vmax, std::abs(fits[i].v - 1.0));
    }
    return {pmax < 1e-6 && vmax < 1e-6, fmt("max |dphi - 2 alpha| = %.3g rad, max |V - 1| = %.3g", pmax, vmax)};
}

Outcome meridional_law() {
    const ExperimentConfig base;
    const auto alphas = oracle::linspace(0.0, oracle::pi / 2, 7);
    const auto fits = sweep_fits(sweep_polarization(base, SweepFamily::meridional, alphas), base);
    double pmax = 0.0, vmax = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        pmax = std::max(pmax, angular_distance(fits[i].delta_phi, 0.0));
        vmax = std::max(vmax, std::abs(fits[i].v - std::cos(2.0 * alphas[i])));
    }
    return {pmax < 1e-6 && vmax < 1e-6, fmt("max |V - cos 2alpha| = %.3g, max |dphi| = %.3g rad", vmax, pmax)};
}

Outcome synthesis_round_trip() {
    std::mt19937_64 rng(5005);
    std::uniform_real_distribution<double> d(0.01, two_pi - 0.01);
    double worst = 1.0;
    for (int i = 0; i < 1000; ++i) {
        const UnitVector3 axis = random_axis(rng);
        const double delta = d(rng);
        worst = std::min(worst, operator_fidelity(control_unitary(synthesize_gate(axis, delta)), rotation_operator(axis, delta)));
    }
    return {worst >= 1.0 - 1e-10, fmt("min operator fidelity = 1 - %.3g", 1.0 - worst)};
}

Outcome fit_exactness() {
    std::mt19937_64 rng(6006);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double tau = 1000.0, period = 122.0;
    double cmax = 0.0, vmax = 0.0, pmax = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double c = 0.01 + 10.0 * u(rng), v = u(rng), dphi = two_pi * u(rng);
        Trace t;
        for (double x : default_sample_times()) t.samples.push_back({x, oracle::fit_functional(x, c, v, dphi, tau, period)});
        const FitResult r = fit_trace(t, tau, period, period);
        cmax = std::max(cmax, std::abs(r.c - c));
        vmax = std::max(vmax, std::abs(r.v - v));
        if (v >= visibility_floor) pmax = std::max(pmax, angular_distance(r.delta_phi, dphi));
    }
    return {cmax < 1e-9 && vmax < 1e-9 && pmax < 1e-9,
            fmt("max errors: C %.3g, V %.3g, dphi %.3g rad", cmax, vmax, pmax)};
}

Outcome causality() {
    std::mt19937_64 rng(7007);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t compared = 0, mismatched = 0;
    for (int i = 0; i < 100; ++i) {
        ExperimentConfig with;
        with.pump_polarization = random_angles(rng);
        with.probe_polarization = random_angles(rng);
        with.precession_period_ps = 50.0 + 200.0 * u(rng);
        with.exciton_lifetime_ps = 100.0 + 2000.0 * u(rng);
        with.visibility_loss_eta = u(rng);
        with.overall_scale = 0.1 + 5.0 * u(rng);
        with.control = ControlPulseSpec{random_angles(rng), 6.0 * u(rng) - 3.0, 0.0};
        ExperimentConfig without = with;
        without.control.reset();
        const Trace a = simulate_trace(with), b = simulate_trace(without);
        for (std::size_t k = 0; k < a.samples.size(); ++k) {
            if (a.samples[k].delta_t_ps > with.precession_period_ps) break;
            ++compared;
            if (std::memcmp(&a.samples[k].signal, &b.samples[k].signal, sizeof(double)) != 0) ++mismatched;
        }
    }
    return {compared > 0 && mismatched == 0, fmt("%.0f samples compared, %.0f differ", double(compared), double(mismatched))};
}

Outcome algebraic_suite() {
    std::mt19937_64 rng(8008);
    std::uniform_real_distribution<double> d(-7.0, 7.0);
    double unitarity = 0.0, ortho = 0.0, compose = 0.0, spinor = 0.0, roundtrip = 0.0, bloch = 0.0;
    for (int i = 0; i < 200; ++i) {
        const UnitVector3 n = random_axis(rng);
        const double a = d(rng), b = d(rng);
        unitarity = std::max(unitarity, rotation_operator(n, a).unitarity_error());

        const auto pol = random_angles(rng);
        ortho = std::max(ortho, std::abs(inner(state_from_angles(pol), cross_state(pol))));

        const Unitary2 lhs = rotation_operator(n, a) * rotation_operator(n, b), rhs = rotation_operator(n, a + b);
        for (std::size_t k = 0; k < 4; ++k) compose = std::max(compose, std::abs(lhs.m[k] - rhs.m[k]));

        const Unitary2 full = rotation_operator(n, two_pi);
        spinor = std::max({spinor, std::abs(full(0, 0) + 1.0), std::abs(full(1, 1) + 1.0), std::abs(full(0, 1)),
                           std::abs(full(1, 0))});

        const auto back = angles_from_state(state_from_angles(pol));
        roundtrip = std::max({roundtrip, std::abs(back.theta - pol.theta), angular_distance(back.phi, pol.phi)});

        const auto rotated = bloch_vector(apply(rotation_operator(n, a), state_from_angles(pol)));
        const auto classical = oracle::rodrigues(oracle::sphere_point(pol.theta, pol.phi), {n.x, n.y, n.z}, -a);
        for (std::size_t k = 0; k < 3; ++k) bloch = std::max(bloch, std::abs(rotated[k] - classical[k]));
    }
    const bool pass = unitarity < 1e-12 && ortho < 1e-12 && compose < 1e-10 && spinor < 1e-15 && roundtrip < 1e-10 &&
                      bloch < 1e-10;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "unitarity %.2g, orthogonality %.2g, composition %.2g, 2pi sign %.2g, angles %.2g, rodrigues %.2g",
                  unitarity, ortho, compose, spinor, roundtrip, bloch);
    return {pass, buf};
}

Outcome convergence() {
    std::string detail;
    bool pass = true;
    double prev = -1.0;
    for (double h : {0.1, 0.05, 0.025, 0.0125}) {
        IntegrationGrid g;
        g.step = h;
        const double err = std::abs(oracle_point(1.0, g).delta_ode - oracle::pi / 2);
        if (prev > 0.0 && prev / 8.0 >= 1e-10 && err > prev / 8.0) pass = false;
        if (prev > 0.0) detail += fmt("h=%g ratio %.1f; ", h, prev / err);
        prev = err;
    }
    return {pass, detail + fmt("final error %.3g rad", prev)};
}

} // namespace

int main() {
    report(1, "detuning law vs direct integration", oracle_equivalence);
    report(2, "detuning sweep endpoints", detuning_endpoints);
    report(3, "equatorial sweep phase law", equatorial_law);
    report(4, "meridional sweep visibility law", meridional_law);
    report(5, "gate synthesis round trip", synthesis_round_trip);
    report(6, "fit exactness", fit_exactness);
    report(7, "causality", causality);
    report(8, "algebraic suite", algebraic_suite);
    report(9, "integrator convergence", convergence);
    std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
