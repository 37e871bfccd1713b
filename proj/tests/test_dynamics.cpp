#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "zeno/dynamics.hpp"
#include "zeno/error.hpp"

using namespace zeno;
using oracle::khz;
using oracle::pi;

namespace {

const double omega0 = khz(43.3);
const FrequencyBand band{khz(100), khz(300)};

}  // namespace

TEST(Alphas, ZeroFields) {
    const auto a = alphas(square_wave_control(0.0, 5, 2e-6), NoiseRealization::silent(), 5, 2e-6);
    for (double v : a.values()) EXPECT_EQ(v, 0.0);
}

TEST(Alphas, ControlOnlyClosedForm) {
    const double tau = 2.5e-6;
    const auto a = alphas(square_wave_control(omega0, 18, tau), NoiseRealization::silent(), 18, tau);
    for (int j = 1; j <= 18; ++j) EXPECT_DOUBLE_EQ(a.values()[j - 1], (j % 2 ? -1.0 : 1.0) * omega0 * tau);
}

TEST(Alphas, SingleToneMatchesQuadrature) {
    const double tau = 3e-6;
    const ControlWaveform c = square_wave_control(omega0, 18, tau);
    const NoiseRealization r = sample_realization(SingleTone{khz(12), khz(167), 0.0}, 1, band, 0);
    const auto a = alphas(c, r, 18, tau);
    for (int j = 1; j <= 18; ++j) {
        const double ctl = c.interval_values()[j - 1];
        const double quad = oracle::simpson([&](double t) { return ctl + khz(12) * std::sin(khz(167) * t); },
                                            (j - 1) * tau, j * tau, 20000);
        EXPECT_LT(std::abs(a.values()[j - 1] - quad), 1e-8 * std::abs(quad)) << j;
    }
}

TEST(Alphas, LengthMismatchRejected) {
    EXPECT_THROW(alphas(square_wave_control(omega0, 4, 1e-6), NoiseRealization::silent(), 5, 1e-6), InvalidArgument);
}

TEST(Survival, Limits) {
    EXPECT_EQ(survival_probability(AlphaSequence({0.0, 0.0, 0.0})), 1.0);
    EXPECT_NEAR(survival_probability(AlphaSequence({pi / 4, pi / 4})), 0.25, 1e-15);
    EXPECT_NEAR(survival_probability(AlphaSequence({0.1, pi / 2, 0.2})), 0.0, 1e-30);
}

TEST(Survival, NonFiniteAlphaRejected) {
    EXPECT_THROW(AlphaSequence({0.1, std::nan("")}), InvalidArgument);
}

TEST(Survival, SecondOrderAccuracy) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> a(18);
        double s2 = 0.0;
        double s4 = 0.0;
        for (double& x : a) {
            x = u(rng);
            s2 += x * x;
            s4 += x * x * x * x;
        }
        const double lp = std::log(survival_probability(AlphaSequence(a)));
        EXPECT_LE(std::abs(lp + s2), s4);
    }
}

TEST(Survival, ZenoLimitForFixedTotalTime) {
    const double total = 18e-6;
    double previous = 0.0;
    for (int n : {9, 18, 36, 72}) {
        const double tau = total / n;
        const double p = survival_probability(
            alphas(square_wave_control(omega0, n, tau), NoiseRealization::silent(), n, tau));
        EXPECT_GT(p, previous) << n;
        previous = p;
    }
    EXPECT_GT(previous, 0.5);
}

TEST(Factorized, ZeroNoise) {
    const double tau = 2e-6;
    const auto f = factorized_probabilities(square_wave_control(omega0, 18, tau), NoiseRealization::silent(), 18, tau);
    EXPECT_EQ(f.p_n(), 1.0);
    EXPECT_EQ(f.p_cn(), 1.0);
    EXPECT_NEAR(f.p_c(), std::exp(-18 * omega0 * omega0 * tau * tau), 1e-15);
}

TEST(Factorized, ControlOnlyReferenceValue) {
    const double tau = 2e-6;
    const double wt = 2 * pi * 43.3e3 * 2e-6;
    const auto f = factorized_probabilities(square_wave_control(omega0, 18, tau), NoiseRealization::silent(), 18, tau);
    EXPECT_NEAR(f.p_c(), std::exp(-18 * wt * wt), 1e-15);
    EXPECT_NEAR(f.p_c(), 4.9e-3, 0.1e-3);
}

TEST(Factorized, CrossTermFlipsWithNoiseSign) {
    const double tau = 3e-6;
    const ControlWaveform c = square_wave_control(omega0, 18, tau);
    const auto a = factorized_probabilities(c, sample_realization(SingleTone{khz(12), khz(167), 0.0}, 1, band, 0), 18,
                                            tau);
    const auto b = factorized_probabilities(c, sample_realization(SingleTone{khz(12), khz(167), pi}, 1, band, 0), 18,
                                            tau);
    EXPECT_NEAR(a.p_cn() * b.p_cn(), 1.0, 1e-12);
    EXPECT_NE(a.p_cn(), 1.0);
}

TEST(Factorized, IdentityOverRandomizedSweep) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> tau_dist(1.5e-6, 4.5e-6);
    const NoiseModel models[] = {SingleTone{khz(12), khz(167), std::nullopt},
                                 GaussianPsd{khz(167), khz(35.355), khz(12)}, LorentzianPsd{khz(167), khz(50), khz(12)}};
    for (int i = 0; i < 60; ++i) {
        const double tau = tau_dist(rng);
        const ControlWaveform c = square_wave_control(i % 2 ? omega0 : 0.0, 18, tau);
        const NoiseRealization r = sample_realization(models[i % 3], 400, band, 100 + i);
        const auto f = factorized_probabilities(c, r, 18, tau);
        const double s2 = alphas(c, r, 18, tau).sum_of_squares();
        EXPECT_NEAR(f.log_p_c + f.log_p_n + f.log_p_cn, -s2, 1e-12 * std::max(1.0, s2));
    }
}

TEST(UnitaryOracle, ZeroFields) {
    EXPECT_EQ(unitary_oracle(square_wave_control(0.0, 6, 2e-6), NoiseRealization::silent(), 6, 2e-6, 3), 1.0);
}

TEST(UnitaryOracle, ControlOnlyAnySubsteps) {
    for (int n : {1, 7, 18}) {
        for (double tau : {1.5e-6, 3.3e-6}) {
            const double expected = std::pow(std::cos(omega0 * tau), 2 * n);
            for (int substeps : {1, 7, 64}) {
                EXPECT_NEAR(
                    unitary_oracle(square_wave_control(omega0, n, tau), NoiseRealization::silent(), n, tau, substeps),
                    expected, 1e-12);
            }
        }
    }
}

TEST(UnitaryOracle, SingleToneAgreesWithProduct) {
    const double tau = 3e-6;
    const ControlWaveform c = square_wave_control(omega0, 18, tau);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const NoiseRealization r = sample_realization(SingleTone{khz(12), khz(167), std::nullopt}, 1, band, seed);
        const double product = survival_probability(alphas(c, r, 18, tau));
        EXPECT_LT(std::abs(unitary_oracle(c, r, 18, tau, 16) - product), 1e-10);
    }
}

TEST(UnitaryOracle, RejectsZeroSubsteps) {
    EXPECT_THROW(unitary_oracle(square_wave_control(omega0, 2, 1e-6), NoiseRealization::silent(), 2, 1e-6, 0),
                 InvalidArgument);
}

TEST(SimulateRepetition, RecordIsConsistent) {
    const double tau = 2.2e-6;
    const ControlWaveform c = square_wave_control(omega0, 18, tau);
    const NoiseRealization r = sample_realization(LorentzianPsd{khz(167), khz(50), khz(12)}, 400, band, 3);
    const SurvivalRecord rec = simulate_repetition(c, r, tau, 3);
    const AlphaSequence a = alphas(c, r, 18, tau);
    EXPECT_EQ(rec.realization_seed, 3u);
    EXPECT_EQ(rec.tau, tau);
    EXPECT_EQ(rec.p, survival_probability(a));
    EXPECT_EQ(rec.max_abs_alpha, a.max_abs());
    EXPECT_GE(rec.p, 0.0);
    EXPECT_LE(rec.p, 1.0);
    EXPECT_NEAR(std::log(rec.p_c * rec.p_n * rec.p_cn), -a.sum_of_squares(), 1e-12);
}

TEST(CrossTerm, LogMeanVanishesForRandomPhase) {
    const double tau = 3e-6;
    const ControlWaveform c = square_wave_control(omega0, 18, tau);
    std::vector<double> logs;
    for (std::uint64_t seed = 0; seed < 5000; ++seed) {
        const NoiseRealization r = sample_realization(SingleTone{khz(12), khz(167), std::nullopt}, 1, band, seed);
        logs.push_back(factorized_probabilities(c, r, 18, tau).log_p_cn);
    }
    const auto [mean, se] = oracle::mean_se(logs);
    EXPECT_LT(std::abs(mean), 3 * se);
}
