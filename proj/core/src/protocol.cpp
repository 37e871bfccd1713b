#include "zeno/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zeno/error.hpp"
#include "zeno/units.hpp"

namespace zeno {

void ProtocolConfig::validate() const {
    if (n_measurements < 1) throw InvalidArgument("n_measurements must be >= 1");
    if (!(tau > 0.0)) throw InvalidArgument("tau must be > 0");
    if (repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
    if (!(control_amplitude >= 0.0)) throw InvalidArgument("control_amplitude must be >= 0");
    if (!(measurement_duration >= 0.0)) throw InvalidArgument("measurement_duration must be >= 0");
    if (!(tau > measurement_duration)) {
        throw InvalidArgument("tau must exceed measurement_duration");
    }
}

ProtocolConfig ProtocolConfig::defaults() {
    ProtocolConfig c;
    c.n_measurements = 18;
    c.tau = 3e-6;
    c.repetitions = 14;
    c.control_amplitude = units::khz_to_angular(43.3);
    c.measurement_duration = units::us_to_s(0.6);
    c.master_seed = 0;
    return c;
}

TauGrid::TauGrid(std::vector<double> taus) : taus_(std::move(taus)) {
    if (taus_.empty()) throw InvalidArgument("tau grid must not be empty");
    for (std::size_t k = 0; k < taus_.size(); ++k) {
        if (!(taus_[k] > 0.0) || !std::isfinite(taus_[k])) {
            throw InvalidArgument("tau grid values must be finite and > 0");
        }
        if (k > 0 && !(taus_[k - 1] < taus_[k])) {
            throw InvalidArgument("tau grid must be strictly increasing (index " + std::to_string(k) + ")");
        }
    }
}

TauGrid make_tau_grid(double tau_min, double tau_max, int k) {
    if (!(tau_min > 0.0) || !(tau_min < tau_max)) {
        throw InvalidArgument("invalid tau range: need 0 < tau_min < tau_max");
    }
    if (k < 2) throw InvalidArgument("tau grid needs k >= 2 points");
    std::vector<double> taus(static_cast<std::size_t>(k));
    const double step = (tau_max - tau_min) / static_cast<double>(k - 1);
    for (int i = 0; i < k; ++i) taus[i] = tau_min + step * i;
    taus.back() = tau_max;
    return TauGrid(std::move(taus));
}

ControlWaveform::ControlWaveform(std::vector<double> interval_values, double tau)
    : values_(std::move(interval_values)), tau_(tau) {
    if (values_.empty()) throw InvalidArgument("control waveform needs at least one interval");
    if (!(tau_ > 0.0)) throw InvalidArgument("control waveform tau must be > 0");
}

double ControlWaveform::interval_integral(int j) const {
    if (j < 1 || j > size()) throw InvalidArgument("interval index out of range");
    return values_[j - 1] * tau_;
}

double ControlWaveform::integral(double t0, double t1) const {
    const double end = tau_ * size();
    t0 = std::clamp(t0, 0.0, end);
    t1 = std::clamp(t1, 0.0, end);
    if (t1 <= t0) return 0.0;
    double acc = 0.0;
    const int first = std::min(static_cast<int>(t0 / tau_), size() - 1);
    for (int j = first; j < size(); ++j) {
        const double a = std::max(t0, j * tau_);
        const double b = std::min(t1, (j + 1) * tau_);
        if (b <= a) {
            if (j * tau_ >= t1) break;
            continue;
        }
        acc += values_[j] * (b - a);
    }
    return acc;
}

ControlWaveform square_wave_control(double omega0, int n, double tau) {
    if (!(omega0 >= 0.0)) throw InvalidArgument("control amplitude must be >= 0");
    if (n < 1) throw InvalidArgument("square wave needs n >= 1");
    std::vector<double> values(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) values[j - 1] = (j % 2 == 0) ? omega0 : -omega0;
    return ControlWaveform(std::move(values), tau);
}

}  // namespace zeno
