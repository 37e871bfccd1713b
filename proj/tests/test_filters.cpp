#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "zeno/error.hpp"
#include "zeno/filters.hpp"
#include "zeno/symmetric_eigen.hpp"

using namespace zeno;
using oracle::khz;
using oracle::pi;

namespace {

const double omega0 = khz(43.3);
const GaussianPsd gaussian{khz(167), khz(50.0 / std::sqrt(2.0)), khz(12)};
const LorentzianPsd lorentzian{khz(167), khz(50), khz(12)};

EffectiveControl square(double tau, int n = 18, double w = omega0) {
    return effective_control(square_wave_control(w, n, tau));
}

std::vector<double> reference_taus() {
    const TauGrid g = make_tau_grid(1.5e-6, 4.5e-6, 15);
    return {g.values().begin(), g.values().end()};
}

}  // namespace

TEST(EffectiveControl, ZeroAndTwoIntervalSquareWave) {
    for (double v : square(2e-6, 5, 0.0).values) EXPECT_EQ(v, 0.0);
    const EffectiveControl ec = square(2e-6, 2);
    ASSERT_EQ(ec.values.size(), 2u);
    EXPECT_EQ(ec.values[0], -omega0 * 2e-6);
    EXPECT_EQ(ec.values[1], omega0 * 2e-6);
    EXPECT_EQ(ec.tau, 2e-6);
}

TEST(EffectiveControl, ArbitraryPiecewiseMatchesQuadrature) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1e5, 1e5);
    std::vector<double> v(12);
    for (double& x : v) x = u(rng);
    const double tau = 1.7e-6;
    const EffectiveControl ec = effective_control(ControlWaveform(v, tau));
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double quad = oracle::simpson([&](double) { return v[j]; }, j * tau, (j + 1) * tau, 100);
        EXPECT_NEAR(ec.values[j], quad, 1e-12 * std::abs(quad));
    }
}

TEST(FilterFunction, ZeroControlVanishes) {
    const EffectiveControl ec = square(3e-6, 18, 0.0);
    for (double w : {0.0, khz(100), khz(167), khz(300)}) EXPECT_EQ(filter_function(ec, w), 0.0);
}

TEST(FilterFunction, MatchesBruteForceTransform) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(18);
    for (double& x : v) x = u(rng);
    const EffectiveControl ec{v, 2.3e-6};
    for (double w : {khz(10), khz(120), khz(167), khz(251), khz(600)}) {
        const double brute = oracle::filter_brute(v, ec.tau, w, 4000);
        EXPECT_NEAR(filter_function(ec, w), brute, 1e-9 * brute) << w;
    }
}

TEST(FilterFunction, NonNegativeEvenAndContinuousAtZero) {
    const EffectiveControl ec{{0.3, -0.1, 0.7, 0.2}, 2e-6};
    const double at0 = filter_function(ec, 0.0);
    EXPECT_NEAR(at0, std::pow((0.3 - 0.1 + 0.7 + 0.2) * 2e-6, 2), 1e-24);
    EXPECT_NEAR(filter_function(ec, 1e-3), at0, 1e-9 * at0);
    for (double w = 0.0; w < khz(1000); w += khz(3.1)) {
        EXPECT_GE(filter_function(ec, w), 0.0);
        EXPECT_EQ(filter_function(ec, w), filter_function(ec, -w));
    }
}

TEST(FilterFunction, SquareWavePeaksNearControlFundamental) {
    // The sinc envelope pulls the maximum slightly below pi / tau (~0.4 %).
    const double tau = 3e-6;
    const EffectiveControl ec = square(tau);
    const double step = khz(1);
    double best = 0.0;
    double arg = 0.0;
    for (double w = step; w <= 2 * pi / tau; w += step) {
        const double f = filter_function(ec, w);
        if (f > best) {
            best = f;
            arg = w;
        }
    }
    EXPECT_LT(std::abs(arg - pi / tau), 0.005 * pi / tau);
    EXPECT_LT(std::abs(arg - khz(166.7)), 1.5 * step);
}

TEST(ChiTheory, ZeroAmplitudeNoise) {
    const EffectiveControl ec = square(3e-6);
    EXPECT_EQ(chi_theory(GaussianPsd{khz(167), khz(35), 0.0}, ec, khz(100), khz(300)), 0.0);
    EXPECT_EQ(chi_theory(SingleTone{0.0, khz(167), std::nullopt}, ec, khz(300)), 0.0);
}

TEST(ChiTheory, SingleToneClosedForm) {
    const double a = khz(12);
    const double wn = khz(167);
    for (double tau : reference_taus()) {
        const EffectiveControl ec = square(tau);
        EXPECT_DOUBLE_EQ(chi_theory(SingleTone{a, wn, std::nullopt}, ec, khz(300)),
                         0.5 * a * a * filter_function(ec, wn));
    }
}

TEST(ChiTheory, SingleToneDirichletProfile) {
    // |sum_j (-1)^j e^{-i w (j-1) tau}| = |sin(N d / 2) / sin(d / 2)|, d = w tau - pi.
    const double a = khz(12);
    const double wn = khz(167);
    const int n = 18;
    for (double tau : reference_taus()) {
        const double d = wn * tau - pi;
        const double dirichlet = std::abs(d) < 1e-12 ? n : std::sin(n * d / 2) / std::sin(d / 2);
        const double half = 0.5 * wn * tau;
        const double expected = 0.5 * a * a * std::pow(omega0 * tau * tau * std::sin(half) / half * dirichlet, 2);
        EXPECT_NEAR(chi_theory(SingleTone{a, wn, std::nullopt}, square(tau), khz(300)), expected, 1e-10 * expected);
    }
}

TEST(ChiTheory, SingleToneResonanceIsMaximal) {
    const auto taus = reference_taus();
    std::vector<double> chi;
    for (double tau : taus) chi.push_back(chi_theory(SingleTone{khz(12), khz(167), std::nullopt}, square(tau), 0.0));
    const auto peak = std::max_element(chi.begin(), chi.end()) - chi.begin();
    const double resonant = pi / khz(167);
    const auto closest = std::min_element(taus.begin(), taus.end(),
                                          [&](double x, double y) {
                                              return std::abs(x - resonant) < std::abs(y - resonant);
                                          }) -
                         taus.begin();
    EXPECT_EQ(peak, closest);
}

TEST(ChiTheory, BroadbandMatchesSimpson) {
    for (const NoiseModel& m : {NoiseModel{gaussian}, NoiseModel{lorentzian}}) {
        for (double tau : {1.5e-6, 3e-6, 4.2e-6}) {
            const EffectiveControl ec = square(tau);
            const double expected = oracle::simpson(
                [&](double w) { return psd_value(m, w) * oracle::filter_brute(ec.values, tau, w, 128); }, khz(100),
                khz(300), 3000);
            EXPECT_NEAR(chi_theory(m, ec, khz(100), khz(300)), expected, 1e-6 * expected) << tau;
        }
    }
}

TEST(ChiTheory, QuadraticInControlAndNoiseAmplitude) {
    const double tau = 2.7e-6;
    const double base = chi_theory(gaussian, square(tau), khz(100), khz(300));
    EXPECT_NEAR(chi_theory(gaussian, square(tau, 18, 2 * omega0), khz(100), khz(300)), 4 * base, 1e-9 * base);
    GaussianPsd louder = gaussian;
    louder.rms_amplitude *= 2;
    EXPECT_NEAR(chi_theory(louder, square(tau), khz(100), khz(300)), 4 * base, 1e-9 * base);
}

TEST(ChiTheory, CutoffOverloadStartsAtZero) {
    const EffectiveControl ec = square(2e-6);
    EXPECT_NEAR(chi_theory(lorentzian, ec, khz(400)), chi_theory(lorentzian, ec, 0.0, khz(400)), 1e-15);
    EXPECT_THROW(chi_theory(lorentzian, ec, khz(300), khz(100)), InvalidArgument);
}

TEST(FrequencyGrid, TrapezoidWeights) {
    const FrequencyGrid g(1.0, 3.0, 5);
    EXPECT_EQ(g.size(), 5);
    EXPECT_DOUBLE_EQ(g.step(), 0.5);
    const std::vector<double> one(5, 1.0);
    EXPECT_DOUBLE_EQ(g.integrate(one), 2.0);
    const std::vector<double> lin{1.0, 1.5, 2.0, 2.5, 3.0};
    EXPECT_DOUBLE_EQ(g.integrate(lin), 4.0);
    EXPECT_THROW(FrequencyGrid(3.0, 1.0, 5), InvalidArgument);
    EXPECT_THROW(FrequencyGrid(1.0, 3.0, 1), InvalidArgument);
    EXPECT_THROW(g.integrate(std::vector<double>(4, 1.0)), InvalidArgument);
}

TEST(OverlapMatrix, SingleFilterIsPositive) {
    const FrequencyGrid grid(khz(100), khz(300), 2001);
    const double tau[] = {3e-6};
    const FilterBank bank = square_wave_filter_bank(omega0, 18, tau, grid);
    ASSERT_EQ(bank.overlap.rows(), 1u);
    EXPECT_GT(bank.overlap(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(bank.overlap(0, 0), grid.inner(bank.filters[0], bank.filters[0]));
}

TEST(OverlapMatrix, DuplicateRowsAreRankDeficient) {
    const FrequencyGrid grid(khz(100), khz(300), 2001);
    const double taus[] = {2e-6, 3e-6, 3e-6, 4e-6};
    const FilterBank bank = square_wave_filter_bank(omega0, 18, taus, grid);
    const auto eig = symmetric_eigendecomposition(bank.overlap);
    EXPECT_LT(std::abs(eig.eigenvalues.back()), 1e-10 * eig.eigenvalues.front());
    EXPECT_GT(eig.eigenvalues[2], 1e-6 * eig.eigenvalues.front());
}

TEST(OverlapMatrix, ConvergedAgainstFinerGrid) {
    const auto taus = reference_taus();
    const FilterBank coarse = square_wave_filter_bank(omega0, 18, taus, FrequencyGrid(khz(100), khz(300), 2001));
    const FilterBank fine = square_wave_filter_bank(omega0, 18, taus, FrequencyGrid(khz(100), khz(300), 20001));
    for (std::size_t k = 0; k < taus.size(); ++k) {
        for (std::size_t l = 0; l < taus.size(); ++l) {
            const double scale = std::sqrt(fine.overlap(k, k) * fine.overlap(l, l));
            EXPECT_NEAR(coarse.overlap(k, l), fine.overlap(k, l), 1e-4 * std::max(std::abs(fine.overlap(k, l)), 1e-3 * scale))
                << k << "," << l;
        }
    }
}

TEST(OverlapMatrix, SymmetricPositiveSemidefinite) {
    const FilterBank bank =
        square_wave_filter_bank(omega0, 18, reference_taus(), FrequencyGrid(khz(100), khz(300), 2001));
    for (std::size_t k = 0; k < bank.size(); ++k) {
        for (std::size_t l = 0; l < bank.size(); ++l) EXPECT_EQ(bank.overlap(k, l), bank.overlap(l, k));
        for (double f : bank.filters[k]) EXPECT_GE(f, 0.0);
    }
    const auto eig = symmetric_eigendecomposition(bank.overlap);
    for (double lambda : eig.eigenvalues) EXPECT_GE(lambda, -1e-10 * eig.eigenvalues.front());
}

TEST(OverlapMatrix, GridMismatchRejected) {
    FilterBank bank = square_wave_filter_bank(omega0, 18, reference_taus(), FrequencyGrid(khz(100), khz(300), 201));
    bank.filters[3].pop_back();
    EXPECT_THROW(overlap_matrix(bank), InvalidArgument);
}
