#pragma once

// Stationary noise fields Omega_n(t): analytic models, harmonic-sum synthesis
// and exact time integrals of sampled realizations.
//
// PSD convention (one-sided, cosine pairing):
//     <Omega_n(t) Omega_n(t')> = int_0^inf S(w) cos(w (t - t')) dw
// so that int_0^inf S(w) dw is the field variance.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace zeno {

/// Omega_n(t) = amplitude * sin(frequency * t + phi). An empty fixed_phase
/// means phi is drawn uniformly from [0, 2pi) per realization.
struct SingleTone {
    double amplitude = 0.0;  // rad/s
    double frequency = 0.0;  // rad/s
    std::optional<double> fixed_phase;
};

/// S(w) = C exp(-(w - center)^2 / (2 sigma^2)), C fixed by int_0^inf S = rms^2.
struct GaussianPsd {
    double center = 0.0;
    double sigma = 0.0;
    double rms_amplitude = 0.0;
};

/// S(w) = C (fwhm/2)^2 / ((w - center)^2 + (fwhm/2)^2), C fixed by int_0^inf S = rms^2.
struct LorentzianPsd {
    double center = 0.0;
    double fwhm = 0.0;
    double rms_amplitude = 0.0;
};

using NoiseModel = std::variant<SingleTone, GaussianPsd, LorentzianPsd>;

std::string_view kind_name(const NoiseModel& model);
bool is_broadband(const NoiseModel& model);

/// Throws InvalidArgument if a frequency or width is not strictly positive or an
/// amplitude is negative.
void validate(const NoiseModel& model);

/// One-sided S(omega). Broadband models only: a single tone is a spectral line
/// and has no density (InvalidArgument). Negative omega is an InvalidArgument.
double psd_value(const NoiseModel& model, double omega);

/// Analytic autocorrelation <Omega_n(t) Omega_n(t + dt)>; even in dt.
/// Single tone: (A^2/2) cos(w dt). Broadband: cosine transform of the PSD by
/// adaptive quadrature (relative tolerance ~1e-8).
double autocorrelation(const NoiseModel& model, double dt);

struct FrequencyBand {
    double lo = 0.0;  // rad/s
    double hi = 0.0;
};

struct Tone {
    double frequency = 0.0;  // rad/s, > 0
    double amplitude = 0.0;  // rad/s
    double phase = 0.0;      // rad
};

/// Omega_n(t) = sum_m a_m cos(w_m t + phi_m).
class NoiseRealization {
public:
    explicit NoiseRealization(std::vector<Tone> tones);

    /// One zero-amplitude tone: the null field.
    static NoiseRealization silent();

    std::span<const Tone> tones() const { return tones_; }

    double value(double t) const;

    /// Integrals over [(j-1) tau, j tau) for j = 1..n, from one pass over the
    /// n + 1 boundaries.
    std::vector<double> interval_integrals(double tau, int n) const;

private:
    std::vector<Tone> tones_;
};

/// Deterministic in (model, m_tones, band, seed).
///   single tone: one tone, m_tones ignored, phase = phi - pi/2.
///   broadband:   m_tones on the midpoint grid of band, a_m = sqrt(2 S(w_m) dw),
///                phases i.i.d. uniform on [0, 2pi).
NoiseRealization sample_realization(const NoiseModel& model, int m_tones, FrequencyBand band,
                                    std::uint64_t seed);

/// Exact closed-form int_{t0}^{t1} Omega_n(t) dt.
double noise_integral(const NoiseRealization& r, double t0, double t1);

/// Uniform double in [0, 1) from 53 random bits; identical on every platform.
double uniform_unit(std::uint64_t bits);

}  // namespace zeno
