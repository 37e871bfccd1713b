#include "zeno/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "zeno/error.hpp"
#include "zeno/units.hpp"

namespace zeno {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

// int_0^inf exp(-(w - c)^2 / (2 s^2)) dw
double gaussian_mass(const GaussianPsd& g) {
    return g.sigma * std::sqrt(units::pi / 2.0) * (1.0 + std::erf(g.center / (g.sigma * std::sqrt(2.0))));
}

// int_0^inf h^2 / ((w - c)^2 + h^2) dw, h = fwhm / 2
double lorentzian_mass(const LorentzianPsd& l) {
    const double h = 0.5 * l.fwhm;
    return h * (units::pi / 2.0 + std::atan(l.center / h));
}

double gaussian_shape(const GaussianPsd& g, double w) {
    const double x = (w - g.center) / g.sigma;
    return std::exp(-0.5 * x * x);
}

double lorentzian_shape(const LorentzianPsd& l, double w) {
    const double h = 0.5 * l.fwhm;
    const double x = w - l.center;
    return h * h / (x * x + h * h);
}

double gaussian_autocorrelation(const GaussianPsd& g, double dt) {
    // The integrand is negligible beyond 12 sigma; panels no wider than half a
    // cosine period keep each Gauss-Kronrod call smooth.
    const double lo = std::max(0.0, g.center - 12.0 * g.sigma);
    const double hi = g.center + 12.0 * g.sigma;
    double width = g.sigma;
    if (dt > 0.0) width = std::min(width, units::pi / dt);
    const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
    const double h = (hi - lo) / panels;
    auto f = [&](double w) { return gaussian_shape(g, w) * std::cos(w * dt); };
    double acc = 0.0;
    for (int i = 0; i < panels; ++i) {
        acc += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo + i * h, lo + (i + 1) * h,
                                                                              15, 1e-12);
    }
    return g.rms_amplitude * g.rms_amplitude * acc / gaussian_mass(g);
}

double lorentzian_autocorrelation(const LorentzianPsd& l, double dt) {
    // Whole-line transform in closed form, minus the (smooth, monotone) part of
    // the line shape that lies at negative frequency.
    const double h = 0.5 * l.fwhm;
    const double full = units::pi * h * std::exp(-h * dt) * std::cos(l.center * dt);
    auto mirrored = [&](double w) {
        const double x = w + l.center;
        return h * h / (x * x + h * h);
    };
    boost::math::quadrature::ooura_fourier_cos<double> integrator(1e-12);
    const auto [negative_part, rel_err] = integrator.integrate(mirrored, dt);
    (void)rel_err;
    return l.rms_amplitude * l.rms_amplitude * (full - negative_part) / lorentzian_mass(l);
}

}  // namespace

std::string_view kind_name(const NoiseModel& model) {
    return std::visit(overloaded{
                          [](const SingleTone&) { return std::string_view("single_tone"); },
                          [](const GaussianPsd&) { return std::string_view("gaussian_psd"); },
                          [](const LorentzianPsd&) { return std::string_view("lorentzian_psd"); },
                      },
                      model);
}

bool is_broadband(const NoiseModel& model) { return !std::holds_alternative<SingleTone>(model); }

void validate(const NoiseModel& model) {
    std::visit(overloaded{
                   [](const SingleTone& s) {
                       if (!(s.frequency > 0.0)) throw InvalidArgument("single tone frequency must be > 0");
                       if (!(s.amplitude >= 0.0)) throw InvalidArgument("single tone amplitude must be >= 0");
                       if (s.fixed_phase && !std::isfinite(*s.fixed_phase)) {
                           throw InvalidArgument("single tone phase must be finite");
                       }
                   },
                   [](const GaussianPsd& g) {
                       if (!(g.center > 0.0)) throw InvalidArgument("gaussian center must be > 0");
                       if (!(g.sigma > 0.0)) throw InvalidArgument("gaussian sigma must be > 0");
                       if (!(g.rms_amplitude >= 0.0)) throw InvalidArgument("rms amplitude must be >= 0");
                   },
                   [](const LorentzianPsd& l) {
                       if (!(l.center > 0.0)) throw InvalidArgument("lorentzian center must be > 0");
                       if (!(l.fwhm > 0.0)) throw InvalidArgument("lorentzian fwhm must be > 0");
                       if (!(l.rms_amplitude >= 0.0)) throw InvalidArgument("rms amplitude must be >= 0");
                   },
               },
               model);
}

double psd_value(const NoiseModel& model, double omega) {
    if (omega < 0.0) throw InvalidArgument("psd_value: negative frequency");
    return std::visit(overloaded{
                          [](const SingleTone&) -> double {
                              throw InvalidArgument("psd_value: a single tone is a spectral line");
                          },
                          [&](const GaussianPsd& g) {
                              return g.rms_amplitude * g.rms_amplitude * gaussian_shape(g, omega) /
                                     gaussian_mass(g);
                          },
                          [&](const LorentzianPsd& l) {
                              return l.rms_amplitude * l.rms_amplitude * lorentzian_shape(l, omega) /
                                     lorentzian_mass(l);
                          },
                      },
                      model);
}

double autocorrelation(const NoiseModel& model, double dt) {
    dt = std::abs(dt);
    return std::visit(overloaded{
                          [&](const SingleTone& s) {
                              return 0.5 * s.amplitude * s.amplitude * std::cos(s.frequency * dt);
                          },
                          [&](const GaussianPsd& g) {
                              if (dt == 0.0) return g.rms_amplitude * g.rms_amplitude;
                              return gaussian_autocorrelation(g, dt);
                          },
                          [&](const LorentzianPsd& l) {
                              if (dt == 0.0) return l.rms_amplitude * l.rms_amplitude;
                              return lorentzian_autocorrelation(l, dt);
                          },
                      },
                      model);
}

NoiseRealization::NoiseRealization(std::vector<Tone> tones) : tones_(std::move(tones)) {
    if (tones_.empty()) throw InvalidArgument("a noise realization needs at least one tone");
    for (const Tone& t : tones_) {
        if (!(t.frequency > 0.0)) throw InvalidArgument("tone frequencies must be > 0");
    }
}

NoiseRealization NoiseRealization::silent() { return NoiseRealization({Tone{1.0, 0.0, 0.0}}); }

double NoiseRealization::value(double t) const {
    double acc = 0.0;
    for (const Tone& tone : tones_) acc += tone.amplitude * std::cos(tone.frequency * t + tone.phase);
    return acc;
}

std::vector<double> NoiseRealization::interval_integrals(double tau, int n) const {
    std::vector<double> out(static_cast<std::size_t>(std::max(n, 0)), 0.0);
    for (const Tone& tone : tones_) {
        if (tone.amplitude == 0.0) continue;
        const double scale = tone.amplitude / tone.frequency;
        double previous = std::sin(tone.phase);
        for (int j = 1; j <= n; ++j) {
            const double current = std::sin(tone.frequency * (j * tau) + tone.phase);
            out[j - 1] += scale * (current - previous);
            previous = current;
        }
    }
    return out;
}

double uniform_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

NoiseRealization sample_realization(const NoiseModel& model, int m_tones, FrequencyBand band,
                                    std::uint64_t seed) {
    validate(model);
    std::mt19937_64 rng(seed);
    if (const auto* s = std::get_if<SingleTone>(&model)) {
        const double phi = s->fixed_phase ? *s->fixed_phase : units::two_pi * uniform_unit(rng());
        return NoiseRealization({Tone{s->frequency, s->amplitude, phi - units::pi / 2.0}});
    }
    if (!(band.lo < band.hi) || !(band.lo >= 0.0)) throw InvalidArgument("empty synthesis band");
    if (m_tones < 1) throw InvalidArgument("m_tones must be >= 1");
    const double dw = (band.hi - band.lo) / m_tones;
    std::vector<Tone> tones(static_cast<std::size_t>(m_tones));
    for (int m = 0; m < m_tones; ++m) {
        const double w = band.lo + (m + 0.5) * dw;
        tones[m] = Tone{w, std::sqrt(2.0 * psd_value(model, w) * dw), units::two_pi * uniform_unit(rng())};
    }
    return NoiseRealization(std::move(tones));
}

double noise_integral(const NoiseRealization& r, double t0, double t1) {
    if (t1 == t0) return 0.0;
    // sin(b) - sin(a) = 2 cos((a + b)/2) sin((b - a)/2): no cancellation for short spans.
    double acc = 0.0;
    for (const Tone& tone : r.tones()) {
        const double mid = tone.frequency * 0.5 * (t0 + t1) + tone.phase;
        const double half = tone.frequency * 0.5 * (t1 - t0);
        acc += tone.amplitude / tone.frequency * 2.0 * std::cos(mid) * std::sin(half);
    }
    return acc;
}

}  // namespace zeno
