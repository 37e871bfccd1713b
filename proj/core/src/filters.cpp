#include "zeno/filters.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <variant>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "zeno/error.hpp"
#include "zeno/units.hpp"

namespace zeno {

EffectiveControl effective_control(const ControlWaveform& control) {
    EffectiveControl ec;
    ec.tau = control.tau();
    ec.values.reserve(static_cast<std::size_t>(control.size()));
    for (int j = 1; j <= control.size(); ++j) ec.values.push_back(control.interval_integral(j));
    return ec;
}

double filter_function(const EffectiveControl& ec, double omega) {
    // G(w) = tau e^{-i w tau/2} sinc(w tau/2) sum_j v_j e^{-i w (j-1) tau}
    const double half = 0.5 * omega * ec.tau;
    const double sinc = (half == 0.0) ? 1.0 : std::sin(half) / half;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t j = 0; j < ec.values.size(); ++j) {
        const double phase = omega * ec.tau * static_cast<double>(j);
        re += ec.values[j] * std::cos(phase);
        im -= ec.values[j] * std::sin(phase);
    }
    const double envelope = ec.tau * sinc;
    return envelope * envelope * (re * re + im * im);
}

FrequencyGrid::FrequencyGrid(double lo, double hi, int points) : lo_(lo), hi_(hi) {
    if (points < 2) throw InvalidArgument("frequency grid needs at least 2 points");
    if (!(lo >= 0.0) || !(lo < hi)) throw InvalidArgument("frequency grid needs 0 <= lo < hi");
    step_ = (hi - lo) / (points - 1);
    values_.resize(static_cast<std::size_t>(points));
    weights_.assign(static_cast<std::size_t>(points), step_);
    for (int i = 0; i < points; ++i) values_[i] = lo + step_ * i;
    values_.back() = hi;
    weights_.front() = weights_.back() = 0.5 * step_;
}

double FrequencyGrid::integrate(std::span<const double> f) const {
    if (f.size() != values_.size()) throw InvalidArgument("function does not match the frequency grid");
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += weights_[i] * f[i];
    return acc;
}

double FrequencyGrid::inner(std::span<const double> f, std::span<const double> g) const {
    if (f.size() != values_.size() || g.size() != values_.size()) {
        throw InvalidArgument("function does not match the frequency grid");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += weights_[i] * f[i] * g[i];
    return acc;
}

bool FrequencyGrid::operator==(const FrequencyGrid& other) const {
    return lo_ == other.lo_ && hi_ == other.hi_ && values_.size() == other.values_.size();
}

Matrix overlap_matrix(const FilterBank& bank) {
    const std::size_t k = bank.filters.size();
    for (const auto& row : bank.filters) {
        if (static_cast<int>(row.size()) != bank.grid.size()) {
            throw InvalidArgument("filter row does not match the bank grid");
        }
    }
    Matrix a(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            a(i, j) = bank.grid.inner(bank.filters[i], bank.filters[j]);
            a(j, i) = a(i, j);
        }
    }
    return a;
}

FilterBank make_filter_bank(std::span<const EffectiveControl> controls, const FrequencyGrid& grid) {
    FilterBank bank{grid, {}, {}, {}};
    bank.taus.reserve(controls.size());
    bank.filters.reserve(controls.size());
    const auto omegas = grid.values();
    for (const EffectiveControl& ec : controls) {
        std::vector<double> row(omegas.size());
        for (std::size_t i = 0; i < omegas.size(); ++i) row[i] = filter_function(ec, omegas[i]);
        bank.taus.push_back(ec.tau);
        bank.filters.push_back(std::move(row));
    }
    bank.overlap = overlap_matrix(bank);
    return bank;
}

FilterBank square_wave_filter_bank(double omega0, int n, std::span<const double> taus, const FrequencyGrid& grid) {
    std::vector<EffectiveControl> controls;
    controls.reserve(taus.size());
    for (double tau : taus) controls.push_back(effective_control(square_wave_control(omega0, n, tau)));
    return make_filter_bank(controls, grid);
}

namespace {

double psd_scale(const NoiseModel& model) {
    if (const auto* g = std::get_if<GaussianPsd>(&model)) return g->sigma;
    if (const auto* l = std::get_if<LorentzianPsd>(&model)) return 0.5 * l->fwhm;
    return 0.0;
}

}  // namespace

double chi_theory(const NoiseModel& model, const EffectiveControl& ec, double omega_lo, double omega_hi) {
    validate(model);
    if (const auto* s = std::get_if<SingleTone>(&model)) {
        return 0.5 * s->amplitude * s->amplitude * filter_function(ec, s->frequency);
    }
    if (!(omega_lo >= 0.0) || !(omega_lo < omega_hi)) {
        throw InvalidArgument("chi_theory needs 0 <= omega_lo < omega_hi");
    }
    // F varies on the scale pi / (N tau); S on its width. Panels resolve both.
    const double n = static_cast<double>(std::max<std::size_t>(ec.values.size(), 1));
    const double width = std::min(0.5 * units::pi / (n * ec.tau), psd_scale(model));
    const int panels = std::max(1, static_cast<int>(std::ceil((omega_hi - omega_lo) / width)));
    const double h = (omega_hi - omega_lo) / panels;
    auto integrand = [&](double w) { return psd_value(model, w) * filter_function(ec, w); };

    double total = 0.0;
    double error = 0.0;
    for (int i = 0; i < panels; ++i) {
        double panel_error = 0.0;
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            integrand, omega_lo + i * h, omega_lo + (i + 1) * h, 15, 1e-10, &panel_error);
        error += panel_error;
    }
    if (error > 1e-6 * std::abs(total)) {
        std::ostringstream msg;
        msg << "chi_theory: relative tolerance 1e-6 not reached (estimate " << error / std::abs(total) << ")";
        throw NumericError(msg.str());
    }
    return total;
}

double chi_theory(const NoiseModel& model, const EffectiveControl& ec, double omega_cut) {
    return chi_theory(model, ec, 0.0, omega_cut);
}

}  // namespace zeno
