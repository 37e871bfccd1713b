#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace zeno {

/// Knobs of one protocol run: N projective measurements spaced by tau, repeated
/// Q times, with a square-wave control of amplitude control_amplitude.
/// Times in seconds, control_amplitude in rad/s.
struct ProtocolConfig {
    int n_measurements = 18;
    double tau = 3e-6;
    int repetitions = 14;
    double control_amplitude = 0.0;
    double measurement_duration = 0.0;
    std::uint64_t master_seed = 0;

    /// Throws InvalidArgument when an invariant does not hold.
    void validate() const;

    /// N=18, Q=14, Omega_0 = 2pi x 43.3 kHz, tau_m = 0.6 us, tau = 3 us.
    static ProtocolConfig defaults();
};

/// Strictly increasing list of measurement spacings (seconds).
class TauGrid {
public:
    /// Validates: non-empty, all > 0, strictly increasing.
    explicit TauGrid(std::vector<double> taus);

    std::size_t size() const { return taus_.size(); }
    double operator[](std::size_t k) const { return taus_[k]; }
    std::span<const double> values() const { return taus_; }

private:
    std::vector<double> taus_;
};

/// k uniformly spaced values with both endpoints included.
TauGrid make_tau_grid(double tau_min, double tau_max, int k);

/// Piecewise-constant control Omega_c(t): interval_values()[j-1] is the value on
/// [(j-1) tau, j tau), j = 1..N, in rad/s.
class ControlWaveform {
public:
    ControlWaveform(std::vector<double> interval_values, double tau);

    std::span<const double> interval_values() const { return values_; }
    double tau() const { return tau_; }
    int size() const { return static_cast<int>(values_.size()); }

    /// Integral of Omega_c over interval j (1-based), in rad.
    double interval_integral(int j) const;

    /// Integral of Omega_c over [t0, t1], clipped to [0, N tau].
    double integral(double t0, double t1) const;

private:
    std::vector<double> values_;
    double tau_;
};

/// Omega_c(t) = sum_j (-1)^j omega0 W_j(t): the first interval is negative.
ControlWaveform square_wave_control(double omega0, int n, double tau);

}  // namespace zeno
