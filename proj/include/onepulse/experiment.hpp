#pragma once

// Pump / control / probe simulation.
//
// The pump prepares the exciton in the state matching its polarization; the
// spin then precesses about the H-V axis with period T while the population
// decays with lifetime tau. An optional 2pi control pulse rotates the spin
// instantaneously at t_c = dt - control_offset, and the probe at dt absorbs in
// proportion to the overlap with the state cross-polarized to it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "onepulse/bloch.hpp"
#include "onepulse/error.hpp"
#include "onepulse/format.hpp"
#include "onepulse/pulse.hpp"

namespace onepulse {

/// Samples with |dt - control_offset| below this see overlapping pulses.
inline constexpr double pulse_overlap_window_ps = 9.0;

inline const PolarizationAngles polarization_L{pi / 2.0, pi};
inline const PolarizationAngles polarization_V{pi, 0.0};

[[nodiscard]] inline std::vector<double> default_sample_times() {
    std::vector<double> t(601);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
    return t;
}

struct ExperimentConfig {
    PolarizationAngles pump_polarization = polarization_L;
    PolarizationAngles probe_polarization = polarization_L;
    double precession_period_ps = 122.0;
    double exciton_lifetime_ps = 1000.0; // may be +inf
    std::optional<ControlPulseSpec> control;
    std::optional<double> control_offset_ps; // defaults to the precession period
    double visibility_loss_eta = 1.0;
    double overall_scale = 1.0;
    std::vector<double> sample_times_ps = default_sample_times();
    double noise_sigma = 0.0; // additive Gaussian noise, off by default
    std::uint64_t noise_seed = 1;

    [[nodiscard]] double control_offset() const { return control_offset_ps.value_or(precession_period_ps); }

    void validate() const {
        auto fail = [](const std::string& field, const std::string& why) {
            throw Error(ErrorKind::config, field + ": " + why);
        };
        if (!(precession_period_ps > 0.0) || !std::isfinite(precession_period_ps))
            fail("precession_period_ps", "must be finite and > 0");
        if (!(exciton_lifetime_ps > 0.0)) fail("exciton_lifetime_ps", "must be > 0");
        if (!(control_offset() > 0.0) || !std::isfinite(control_offset())) fail("control_offset_ps", "must be > 0");
        if (!(visibility_loss_eta >= 0.0 && visibility_loss_eta <= 1.0))
            fail("visibility_loss_eta", "must lie in [0, 1]");
        if (!(overall_scale > 0.0) || !std::isfinite(overall_scale)) fail("overall_scale", "must be finite and > 0");
        if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) fail("noise_sigma", "must be finite and >= 0");
        if (sample_times_ps.empty()) fail("sample_times_ps", "must not be empty");
        for (std::size_t i = 0; i < sample_times_ps.size(); ++i) {
            if (!(sample_times_ps[i] >= 0.0) || !std::isfinite(sample_times_ps[i]))
                fail("sample_times_ps", "values must be finite and >= 0");
            if (i > 0 && !(sample_times_ps[i] > sample_times_ps[i - 1]))
                fail("sample_times_ps", "values must be strictly increasing");
        }
        if (control) {
            try {
                control->validate();
            } catch (const Error& e) {
                fail("control", e.what());
            }
        }
    }

    /// Every resolved setting as `key = value` lines; the fingerprint hashes this text.
    [[nodiscard]] std::string canonical_text() const {
        std::ostringstream os;
        auto angles = [](const PolarizationAngles& a) { return format_double(a.theta) + ", " + format_double(a.phi); };
        os << "pump_polarization = " << angles(pump_polarization) << '\n'
           << "probe_polarization = " << angles(probe_polarization) << '\n'
           << "precession_period_ps = " << format_double(precession_period_ps) << '\n'
           << "exciton_lifetime_ps = " << format_double(exciton_lifetime_ps) << '\n';
        if (control) {
            os << "control_polarization = " << angles(control->polarization) << '\n'
               << "control_detuning_ratio = " << format_double(control->detuning_ratio) << '\n';
        }
        os << "control_offset_ps = " << format_double(control_offset()) << '\n'
           << "visibility_loss_eta = " << format_double(visibility_loss_eta) << '\n'
           << "overall_scale = " << format_double(overall_scale) << '\n'
           << "noise_sigma = " << format_double(noise_sigma) << '\n'
           << "noise_seed = " << noise_seed << '\n'
           << "sample_times_ps = ";
        for (std::size_t i = 0; i < sample_times_ps.size(); ++i)
            os << (i ? ", " : "") << format_double(sample_times_ps[i]);
        os << '\n';
        return os.str();
    }

    [[nodiscard]] std::string fingerprint() const { return fnv1a_hex(canonical_text()); }
};

struct TraceSample {
    double delta_t_ps = 0.0;
    double signal = 0.0;
};

struct TraceMetadata {
    bool control_present = false;
    std::size_t overlap_samples = 0; // samples inside the pulse-overlap window
    bool extrapolated = false;       // sweep parameter outside its nominal range
};

struct Trace {
    std::vector<TraceSample> samples;
    std::string fingerprint;
    TraceMetadata meta;
};

/// Free precession: diag(1, exp(-2 pi i duration / T)) in the {|H>, |V>} basis.
[[nodiscard]] inline SpinState precess(const SpinState& s, double duration_ps, double period_ps) {
    return {s.h, s.v * std::polar(1.0, -two_pi * duration_ps / period_ps)};
}

[[nodiscard]] inline double decay_envelope(double delta_t_ps, const ExperimentConfig& config) {
    return config.overall_scale * std::exp(-delta_t_ps / config.exciton_lifetime_ps);
}

/// Probe absorption: C e^{-dt/tau} |<X_bar(probe)|state>|^2.
[[nodiscard]] inline double probe_signal(const SpinState& state, const PolarizationAngles& probe_pol,
                                         double delta_t_ps, const ExperimentConfig& config) {
    return decay_envelope(delta_t_ps, config) * fidelity(state, cross_state(probe_pol));
}

[[nodiscard]] inline Trace simulate_trace(const ExperimentConfig& config) {
    config.validate();
    const SpinState pump = state_from_angles(config.pump_polarization);
    const double period = config.precession_period_ps;
    const double offset = config.control_offset();
    const double eta = config.visibility_loss_eta;
    const std::optional<Unitary2> gate =
        config.control ? std::optional<Unitary2>(control_unitary(*config.control)) : std::nullopt;
    const double probe_z = bloch_vector(cross_state(config.probe_polarization))[2];

    std::mt19937_64 rng(config.noise_seed);
    std::normal_distribution<double> noise(0.0, config.noise_sigma > 0.0 ? config.noise_sigma : 1.0);

    Trace trace;
    trace.fingerprint = config.fingerprint();
    trace.meta.control_present = gate.has_value();
    trace.samples.reserve(config.sample_times_ps.size());
    for (double dt : config.sample_times_ps) {
        const double t_control = dt - offset;
        double signal;
        if (gate && t_control > 0.0) {
            SpinState s = precess(pump, t_control, period);
            s = apply(*gate, s);
            s = precess(s, dt - t_control, period);
            signal = probe_signal(s, config.probe_polarization, dt, config);
            if (eta != 1.0) {
                // damp the oscillation toward its precession average
                const double mean = decay_envelope(dt, config) * (1.0 + bloch_vector(s)[2] * probe_z) / 2.0;
                signal = mean + eta * (signal - mean);
            }
        } else {
            signal = probe_signal(precess(pump, dt, period), config.probe_polarization, dt, config);
        }
        if (config.noise_sigma > 0.0) signal = std::max(0.0, signal + noise(rng));
        if (gate && std::abs(t_control) < pulse_overlap_window_ps) ++trace.meta.overlap_samples;
        trace.samples.push_back({dt, signal});
    }
    return trace;
}

enum class SweepFamily { equatorial, meridional, detuning };

[[nodiscard]] inline std::string to_string(SweepFamily f) {
    switch (f) {
    case SweepFamily::equatorial: return "equatorial";
    case SweepFamily::meridional: return "meridional";
    case SweepFamily::detuning: return "detuning";
    }
    return "unknown";
}

[[nodiscard]] inline SweepFamily parse_sweep_family(const std::string& name) {
    if (name == "equatorial") return SweepFamily::equatorial;
    if (name == "meridional") return SweepFamily::meridional;
    if (name == "detuning") return SweepFamily::detuning;
    throw Error(ErrorKind::config, "unknown sweep family '" + name + "' (expected equatorial, meridional or detuning)");
}

/// traces[0] is the no-control reference; traces[i + 1] belongs to params[i].
struct Sweep {
    SweepFamily family = SweepFamily::equatorial;
    std::vector<double> params;
    std::vector<Trace> traces;
};

[[nodiscard]] inline Trace reference_trace(const ExperimentConfig& base) {
    ExperimentConfig ref = base;
    ref.control.reset();
    return simulate_trace(ref);
}

/// Resonant-pulse sweep over alpha: control polarization (pi/2, pi + alpha) for the
/// equatorial family, (pi/2 + alpha, pi) for the meridional one.
[[nodiscard]] inline Sweep sweep_polarization(const ExperimentConfig& base, SweepFamily family,
                                              const std::vector<double>& alphas) {
    if (family == SweepFamily::detuning) throw Error(ErrorKind::config, "polarization sweep needs an angular family");
    if (alphas.empty()) throw Error(ErrorKind::config, "alphas: sweep needs at least one angle");
    Sweep sweep{family, alphas, {}};
    sweep.traces.push_back(reference_trace(base));
    const double detuning = base.control ? base.control->detuning_ratio : 0.0;
    for (double alpha : alphas) {
        ExperimentConfig cfg = base;
        // meridional angles past the pole fold back onto the same great circle
        const PolarizationAngles pol =
            family == SweepFamily::equatorial
                ? PolarizationAngles::make(pi / 2.0, pi + alpha)
                : polarization_from_axis(UnitVector3::normalized(-std::cos(alpha), 0.0, -std::sin(alpha)));
        cfg.control = ControlPulseSpec{pol, detuning, 0.0};
        Trace t = simulate_trace(cfg);
        t.meta.extrapolated = alpha < 0.0 || alpha > pi / 2.0;
        sweep.traces.push_back(std::move(t));
    }
    return sweep;
}

/// Detuning sweep at fixed control polarization (default V).
[[nodiscard]] inline Sweep sweep_detuning(const ExperimentConfig& base, const std::vector<double>& detuning_ratios) {
    if (detuning_ratios.empty()) throw Error(ErrorKind::config, "detuning_ratios: sweep needs at least one value");
    Sweep sweep{SweepFamily::detuning, detuning_ratios, {}};
    sweep.traces.push_back(reference_trace(base));
    const PolarizationAngles pol = base.control ? base.control->polarization : polarization_V;
    for (double ratio : detuning_ratios) {
        ExperimentConfig cfg = base;
        cfg.control = ControlPulseSpec{pol, ratio, 0.0};
        sweep.traces.push_back(simulate_trace(cfg));
    }
    return sweep;
}

} // namespace onepulse
