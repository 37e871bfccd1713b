#pragma once

// chi estimation from survival statistics and spectrum reconstruction by
// filter orthogonalization.

#include <optional>
#include <span>
#include <vector>

#include "zeno/filters.hpp"
#include "zeno/matrix.hpp"
#include "zeno/noise.hpp"

namespace zeno {

struct ChiPoint {
    double tau = 0.0;  // s
    double chi = 0.0;
    double std_error = 0.0;
    int q_used = 0;
};

struct ChiEstimate {
    std::vector<ChiPoint> points;

    std::vector<double> taus() const;
    std::vector<double> values() const;
};

/// chi = 1/4 Var[ln(p_i / p_reference)] (unbiased, Q - 1), which equals
/// 1/4 <ln^2 P_cn> when ln(P/P_c) ~ ln P_cn. std_error from Var[s^2] ~ 2 s^4 / (Q - 1),
/// propagated through the 1/4.
/// Throws DomainError if a probability is <= 0 (or the reference is), InvalidArgument if Q < 2.
ChiPoint chi_from_survivals(std::span<const double> p_samples, double p_reference, double tau = 0.0);

struct ReconstructionResult {
    std::vector<double> s_rec;        // on the bank grid, may be negative
    std::vector<double> eigenvalues;  // all K, descending
    int kept = 0;
    std::vector<double> coefficients;              // c_k for the kept modes
    std::vector<std::vector<double>> orthonormal;  // F^_k for the kept modes
    std::optional<double> fidelity_chi;
    std::optional<double> fidelity_spectrum;
};

/// Keeps modes with lambda_k >= epsilon * lambda_max (and lambda_k > 0),
/// c_k = lambda_k^{-1/2} sum_l V_kl chi_l, S_rec = sum_k c_k F^_k.
/// Throws InvalidArgument on a size mismatch, NumericError if every mode is truncated.
ReconstructionResult reconstruct_spectrum(std::span<const double> chi, const FilterBank& bank,
                                          double epsilon);

/// Overlap of the L2-normalized vectors; in [-1, 1]. InvalidArgument on a zero vector.
double fidelity_chi(std::span<const double> chi_data, std::span<const double> chi_theory);

/// int_band s_rec s_orig dw of the two L2-normalized (on the band) functions, by
/// trapezoid on the grid points inside the band. clamp_negative zeroes negative s_rec
/// values first.
double fidelity_spectrum(std::span<const double> s_rec, std::span<const double> s_orig,
                         const FrequencyGrid& grid, FrequencyBand band, bool clamp_negative = false);

/// Everything needed to rebuild a square-wave filter bank at shifted times.
struct FilterBankSpec {
    double control_amplitude = 0.0;  // rad/s
    int n_measurements = 0;
    std::vector<double> taus;
    FrequencyGrid grid;

    FilterBank build() const;
};

struct OffsetPairing {
    ChiEstimate chi;  // same chi values, tau relabelled to tau_k + offset
    FilterBank bank;  // filters evaluated at tau_k + offset
};

/// Pairs the unchanged chi data with filters at tau_k + offset.
/// Requires 0 <= offset < smallest tau spacing.
OffsetPairing tau_offset_correction(const ChiEstimate& chi, const FilterBankSpec& spec, double offset);

}  // namespace zeno
