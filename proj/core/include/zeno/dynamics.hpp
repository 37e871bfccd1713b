#pragma once

// Survival of a two-level probe, initially |0>, driven by
// (Omega_c + Omega_n) sigma_x and projected onto |0> every tau.
//
// Phase convention: interval j rotates the state by exp(-i alpha_j sigma_x),
// alpha_j = int_{(j-1)tau}^{j tau} (Omega_c + Omega_n) dt, so it survives with
// probability cos^2(alpha_j).

#include <cstdint>
#include <span>
#include <vector>

#include "zeno/noise.hpp"
#include "zeno/protocol.hpp"

namespace zeno {

class AlphaSequence {
public:
    explicit AlphaSequence(std::vector<double> alphas);

    std::span<const double> values() const { return alphas_; }
    int size() const { return static_cast<int>(alphas_.size()); }
    double sum_of_squares() const;
    double max_abs() const;

private:
    std::vector<double> alphas_;
};

/// alpha_j = control_j * tau + int Omega_n over interval j, exact.
/// Throws InvalidArgument if control.size() != n.
AlphaSequence alphas(const ControlWaveform& control, const NoiseRealization& noise, int n, double tau);

/// prod_j cos^2(alpha_j).
double survival_probability(const AlphaSequence& a);

/// Weak-Zeno factors P_c, P_n, P_cn, held as logarithms so that
/// log_p_c + log_p_n + log_p_cn == -sum alpha_j^2 up to round-off.
struct FactorizedProbabilities {
    double log_p_c = 0.0;
    double log_p_n = 0.0;
    double log_p_cn = 0.0;

    double p_c() const;
    double p_n() const;
    double p_cn() const;
    /// exp(-sum alpha_j^2) = P_c P_n P_cn.
    double weak_zeno() const;
};

FactorizedProbabilities factorized_probabilities(const ControlWaveform& control,
                                                 const NoiseRealization& noise, int n, double tau);

/// Independent route: explicit state-vector evolution with `substeps` exact
/// rotations per interval and a projection onto |0> after each interval.
double unitary_oracle(const ControlWaveform& control, const NoiseRealization& noise, int n,
                      double tau, int substeps);

struct SurvivalRecord {
    double tau = 0.0;  // s
    std::uint64_t realization_seed = 0;
    double p = 0.0;
    double p_c = 0.0;
    double p_n = 0.0;
    double p_cn = 0.0;
    /// max_j |alpha_j|, > 1 flags a realization outside the weak-Zeno regime.
    double max_abs_alpha = 0.0;
};

/// One protocol repetition: exact P plus the factorized terms. The interval
/// integrals are computed once and shared by both routes.
SurvivalRecord simulate_repetition(const ControlWaveform& control, const NoiseRealization& noise,
                                   double tau, std::uint64_t seed);

}  // namespace zeno
