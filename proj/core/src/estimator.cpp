#include "zeno/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zeno/error.hpp"
#include "zeno/symmetric_eigen.hpp"

namespace zeno {

std::vector<double> ChiEstimate::taus() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.tau);
    return out;
}

std::vector<double> ChiEstimate::values() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.chi);
    return out;
}

ChiPoint chi_from_survivals(std::span<const double> p_samples, double p_reference, double tau) {
    const std::size_t q = p_samples.size();
    if (q < 2) throw InvalidArgument("chi_from_survivals needs Q >= 2 samples");
    if (!(p_reference > 0.0)) throw DomainError("reference probability must be > 0");
    const double log_ref = std::log(p_reference);

    // Two-pass variance of ln(p / p_ref).
    std::vector<double> x(q);
    double mean = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
        if (!(p_samples[i] > 0.0)) {
            throw DomainError("survival probability " + std::to_string(p_samples[i]) +
                              " <= 0: realization outside the weak-Zeno regime");
        }
        x[i] = std::log(p_samples[i]) - log_ref;
        mean += x[i];
    }
    mean /= static_cast<double>(q);
    double ss = 0.0;
    for (double xi : x) ss += (xi - mean) * (xi - mean);
    const double variance = ss / static_cast<double>(q - 1);

    ChiPoint out;
    out.tau = tau;
    out.chi = 0.25 * variance;
    out.std_error = 0.25 * variance * std::sqrt(2.0 / static_cast<double>(q - 1));
    out.q_used = static_cast<int>(q);
    return out;
}

ReconstructionResult reconstruct_spectrum(std::span<const double> chi, const FilterBank& bank, double epsilon) {
    const std::size_t k = bank.filters.size();
    if (k == 0) throw InvalidArgument("reconstruction needs a non-empty filter bank");
    if (chi.size() != k) {
        throw InvalidArgument("chi data has " + std::to_string(chi.size()) + " points, filter bank has " +
                              std::to_string(k));
    }
    if (bank.overlap.rows() != k || bank.overlap.cols() != k) {
        throw InvalidArgument("filter bank overlap matrix does not match its filters");
    }
    if (!(epsilon >= 0.0)) throw InvalidArgument("truncation threshold must be >= 0");

    const EigenDecomposition eig = symmetric_eigendecomposition(bank.overlap);
    const double lambda_max = eig.eigenvalues.front();

    ReconstructionResult out;
    out.eigenvalues = eig.eigenvalues;
    const std::size_t points = static_cast<std::size_t>(bank.grid.size());
    out.s_rec.assign(points, 0.0);
    for (std::size_t m = 0; m < k; ++m) {
        const double lambda = eig.eigenvalues[m];
        if (!(lambda > 0.0) || lambda < epsilon * lambda_max) continue;
        const double inv_sqrt = 1.0 / std::sqrt(lambda);
        std::vector<double> basis(points, 0.0);
        double coefficient = 0.0;
        for (std::size_t l = 0; l < k; ++l) {
            const double v = eig.vectors(m, l);
            coefficient += v * chi[l];
            const auto& row = bank.filters[l];
            for (std::size_t i = 0; i < points; ++i) basis[i] += v * row[i];
        }
        coefficient *= inv_sqrt;
        for (std::size_t i = 0; i < points; ++i) {
            basis[i] *= inv_sqrt;
            out.s_rec[i] += coefficient * basis[i];
        }
        out.coefficients.push_back(coefficient);
        out.orthonormal.push_back(std::move(basis));
        ++out.kept;
    }
    if (out.kept == 0) throw NumericError("every eigenmode was truncated; lower epsilon");
    return out;
}

double fidelity_chi(std::span<const double> chi_data, std::span<const double> chi_theory) {
    if (chi_data.size() != chi_theory.size()) throw InvalidArgument("fidelity_chi: length mismatch");
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < chi_data.size(); ++i) {
        dot += chi_data[i] * chi_theory[i];
        na += chi_data[i] * chi_data[i];
        nb += chi_theory[i] * chi_theory[i];
    }
    if (na == 0.0 || nb == 0.0) throw InvalidArgument("fidelity_chi: zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double fidelity_spectrum(std::span<const double> s_rec, std::span<const double> s_orig, const FrequencyGrid& grid,
                         FrequencyBand band, bool clamp_negative) {
    const auto omegas = grid.values();
    if (s_rec.size() != omegas.size() || s_orig.size() != omegas.size()) {
        throw InvalidArgument("fidelity_spectrum: spectra do not match the grid");
    }
    // Trapezoid over the grid points that fall inside the band (with a relative
    // slack so band edges equal to grid edges are included).
    const double slack = 1e-12 * std::max(std::abs(band.lo), std::abs(band.hi));
    std::size_t first = omegas.size();
    std::size_t last = 0;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        if (omegas[i] >= band.lo - slack && omegas[i] <= band.hi + slack) {
            first = std::min(first, i);
            last = i;
        }
    }
    if (first >= last) throw InvalidArgument("fidelity_spectrum: band covers fewer than two grid points");

    auto rec = [&](std::size_t i) { return clamp_negative ? std::max(0.0, s_rec[i]) : s_rec[i]; };
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
        const double w = (i == first || i == last) ? 0.5 : 1.0;
        dot += w * rec(i) * s_orig[i];
        na += w * rec(i) * rec(i);
        nb += w * s_orig[i] * s_orig[i];
    }
    if (na == 0.0 || nb == 0.0) throw InvalidArgument("fidelity_spectrum: zero spectrum on the band");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

FilterBank FilterBankSpec::build() const {
    return square_wave_filter_bank(control_amplitude, n_measurements, taus, grid);
}

OffsetPairing tau_offset_correction(const ChiEstimate& chi, const FilterBankSpec& spec, double offset) {
    if (chi.points.size() != spec.taus.size()) throw InvalidArgument("chi data and filter spec differ in length");
    if (!(offset >= 0.0)) throw InvalidArgument("tau offset must be >= 0");
    for (std::size_t k = 1; k < spec.taus.size(); ++k) {
        if (!(offset < spec.taus[k] - spec.taus[k - 1])) {
            throw InvalidArgument("tau offset must be smaller than the tau grid spacing");
        }
    }
    ChiEstimate relabelled = chi;
    FilterBankSpec shifted = spec;
    for (std::size_t k = 0; k < shifted.taus.size(); ++k) {
        shifted.taus[k] += offset;
        relabelled.points[k].tau = shifted.taus[k];
    }
    return OffsetPairing{std::move(relabelled), shifted.build()};
}

}  // namespace zeno
