#include "zeno/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "zeno/error.hpp"

namespace zeno {
namespace {

void check_lengths(const ControlWaveform& control, int n) {
    if (control.size() != n) {
        throw InvalidArgument("control waveform has " + std::to_string(control.size()) +
                              " intervals, expected " + std::to_string(n));
    }
}

}  // namespace

AlphaSequence::AlphaSequence(std::vector<double> alphas) : alphas_(std::move(alphas)) {
    for (double a : alphas_) {
        if (!std::isfinite(a)) throw InvalidArgument("alpha values must be finite");
    }
}

double AlphaSequence::sum_of_squares() const {
    double acc = 0.0;
    for (double a : alphas_) acc += a * a;
    return acc;
}

double AlphaSequence::max_abs() const {
    double m = 0.0;
    for (double a : alphas_) m = std::max(m, std::abs(a));
    return m;
}

AlphaSequence alphas(const ControlWaveform& control, const NoiseRealization& noise, int n, double tau) {
    check_lengths(control, n);
    std::vector<double> a = noise.interval_integrals(tau, n);
    const auto values = control.interval_values();
    for (int j = 0; j < n; ++j) a[j] += values[j] * tau;
    return AlphaSequence(std::move(a));
}

double survival_probability(const AlphaSequence& a) {
    double p = 1.0;
    for (double alpha : a.values()) {
        const double c = std::cos(alpha);
        p *= c * c;
    }
    return p;
}

double FactorizedProbabilities::p_c() const { return std::exp(log_p_c); }
double FactorizedProbabilities::p_n() const { return std::exp(log_p_n); }
double FactorizedProbabilities::p_cn() const { return std::exp(log_p_cn); }
double FactorizedProbabilities::weak_zeno() const { return std::exp(log_p_c + log_p_n + log_p_cn); }

namespace {

FactorizedProbabilities factorize(std::span<const double> control_part, std::span<const double> noise_part) {
    FactorizedProbabilities f;
    for (std::size_t j = 0; j < control_part.size(); ++j) {
        f.log_p_c -= control_part[j] * control_part[j];
        f.log_p_n -= noise_part[j] * noise_part[j];
        f.log_p_cn -= 2.0 * control_part[j] * noise_part[j];
    }
    return f;
}

std::vector<double> control_integrals(const ControlWaveform& control, double tau) {
    std::vector<double> out(control.interval_values().begin(), control.interval_values().end());
    for (double& v : out) v *= tau;
    return out;
}

}  // namespace

FactorizedProbabilities factorized_probabilities(const ControlWaveform& control,
                                                 const NoiseRealization& noise, int n, double tau) {
    check_lengths(control, n);
    return factorize(control_integrals(control, tau), noise.interval_integrals(tau, n));
}

double unitary_oracle(const ControlWaveform& control, const NoiseRealization& noise, int n, double tau,
                      int substeps) {
    check_lengths(control, n);
    if (substeps < 1) throw InvalidArgument("unitary_oracle needs substeps >= 1");
    using cplx = std::complex<double>;
    const auto values = control.interval_values();
    const double slice = tau / substeps;
    double survival = 1.0;
    for (int j = 0; j < n; ++j) {
        cplx up{1.0, 0.0};
        cplx down{0.0, 0.0};
        for (int s = 0; s < substeps; ++s) {
            const double t0 = j * tau + s * slice;
            const double t1 = (s + 1 == substeps) ? (j + 1) * tau : t0 + slice;
            const double theta = values[j] * (t1 - t0) + noise_integral(noise, t0, t1);
            // exp(-i theta sigma_x) = cos(theta) 1 - i sin(theta) sigma_x
            const cplx c{std::cos(theta), 0.0};
            const cplx is{0.0, -std::sin(theta)};
            const cplx new_up = c * up + is * down;
            const cplx new_down = is * up + c * down;
            up = new_up;
            down = new_down;
        }
        survival *= std::norm(up);
        // The projection leaves |0> up to a global phase.
    }
    return survival;
}

SurvivalRecord simulate_repetition(const ControlWaveform& control, const NoiseRealization& noise, double tau,
                                   std::uint64_t seed) {
    const int n = control.size();
    const std::vector<double> noise_part = noise.interval_integrals(tau, n);
    const std::vector<double> control_part = control_integrals(control, tau);

    std::vector<double> a(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) a[j] = control_part[j] + noise_part[j];
    const AlphaSequence seq(std::move(a));
    const FactorizedProbabilities f = factorize(control_part, noise_part);

    SurvivalRecord r;
    r.tau = tau;
    r.realization_seed = seed;
    r.p = survival_probability(seq);
    r.p_c = f.p_c();
    r.p_n = f.p_n();
    r.p_cn = f.p_cn();
    r.max_abs_alpha = seq.max_abs();
    return r;
}

}  // namespace zeno
