#pragma once

// Filter functions of the effective (interval-averaged) control.
//
// With the one-sided PSD convention of noise.hpp,
//     chi = 1/4 <ln^2 P_cn> = int_0^inf S(w) F(w) dw,   F(w) = |G(w)|^2,
//     G(w) = int_0^{N tau} Omega~_c(t) e^{-i w t} dt,
// i.e. the normalization constant in front of |G|^2 is 1 (and likewise for the
// single-tone closed form). The Monte-Carlo keystone test pins this.

#include <span>
#include <vector>

#include "zeno/matrix.hpp"
#include "zeno/noise.hpp"
#include "zeno/protocol.hpp"

namespace zeno {

/// Omega~_c: values[j-1] = int of Omega_c over interval j (rad).
struct EffectiveControl {
    std::vector<double> values;
    double tau = 0.0;
};

EffectiveControl effective_control(const ControlWaveform& control);

/// F(omega) = |G(omega)|^2 in rad^2 s^2. Even in omega, continuous at 0.
double filter_function(const EffectiveControl& ec, double omega);

/// Uniform grid on [lo, hi] with trapezoid weights.
class FrequencyGrid {
public:
    FrequencyGrid(double lo, double hi, int points);

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    int size() const { return static_cast<int>(values_.size()); }
    double step() const { return step_; }
    std::span<const double> values() const { return values_; }
    std::span<const double> weights() const { return weights_; }

    /// Trapezoid rule over the whole grid.
    double integrate(std::span<const double> f) const;
    /// Trapezoid of f * g.
    double inner(std::span<const double> f, std::span<const double> g) const;

    bool operator==(const FrequencyGrid& other) const;

private:
    double lo_;
    double hi_;
    double step_;
    std::vector<double> values_;
    std::vector<double> weights_;
};

struct FilterBank {
    FrequencyGrid grid;
    std::vector<double> taus;
    std::vector<std::vector<double>> filters;  // filters[k][i] = F_k(grid[i])
    Matrix overlap;                            // A_kl on the grid

    std::size_t size() const { return filters.size(); }
};

/// Evaluates every control on the grid and assembles A.
FilterBank make_filter_bank(std::span<const EffectiveControl> controls, const FrequencyGrid& grid);

/// Filters of the square-wave control (amplitude omega0, n intervals) at each tau.
FilterBank square_wave_filter_bank(double omega0, int n, std::span<const double> taus,
                                   const FrequencyGrid& grid);

/// A_kl = int F_k F_l dw by trapezoid on the bank grid; symmetric by construction.
/// Throws InvalidArgument if a row does not match the grid.
Matrix overlap_matrix(const FilterBank& bank);

/// chi = int_{omega_lo}^{omega_hi} S F dw by panelled adaptive Gauss-Kronrod
/// (relative tolerance 1e-6, NumericError with the achieved estimate otherwise).
/// Single tone: closed form (A^2/2) F(w_N), independent of the limits.
double chi_theory(const NoiseModel& model, const EffectiveControl& ec, double omega_lo, double omega_hi);
double chi_theory(const NoiseModel& model, const EffectiveControl& ec, double omega_cut);

}  // namespace zeno
