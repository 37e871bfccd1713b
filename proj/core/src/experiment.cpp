#include "zeno/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <climits>
#include <cstdint>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "zeno/csv.hpp"
#include "zeno/error.hpp"
#include "zeno/units.hpp"

namespace zeno {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// config parsing

class ObjectReader {
public:
    ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
        if (!object_.is_object()) throw ConfigError(where() + ": expected a JSON object");
    }

    bool has(const char* key) {
        seen_.emplace_back(key);
        return object_.contains(key) && !object_.at(key).is_null();
    }

    double number(const char* key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = object_.at(key);
        if (!v.is_number()) throw ConfigError("key '" + qualified(key) + "': expected a number");
        return v.get<double>();
    }

    int integer(const char* key, int fallback) {
        if (!has(key)) return fallback;
        const json& v = object_.at(key);
        if (!v.is_number_integer()) throw ConfigError("key '" + qualified(key) + "': expected an integer");
        return v.get<int>();
    }

    std::uint64_t unsigned_integer(const char* key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const json& v = object_.at(key);
        if (!v.is_number_unsigned()) {
            throw ConfigError("key '" + qualified(key) + "': expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    bool boolean(const char* key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = object_.at(key);
        if (!v.is_boolean()) throw ConfigError("key '" + qualified(key) + "': expected true or false");
        return v.get<bool>();
    }

    std::string string(const char* key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = object_.at(key);
        if (!v.is_string()) throw ConfigError("key '" + qualified(key) + "': expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const char* key) {
        if (!has(key)) return {};
        const json& v = object_.at(key);
        if (!v.is_array()) throw ConfigError("key '" + qualified(key) + "': expected an array of numbers");
        std::vector<double> out;
        for (const json& x : v) {
            if (!x.is_number()) throw ConfigError("key '" + qualified(key) + "': expected an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    FrequencyBand band_khz(const char* key, FrequencyBand fallback) {
        if (!has(key)) return fallback;
        const auto v = numbers(key);
        if (v.size() != 2) throw ConfigError("key '" + qualified(key) + "': expected [lo, hi]");
        if (!(v[0] >= 0.0 && v[0] < v[1])) throw ConfigError("key '" + qualified(key) + "': need 0 <= lo < hi");
        return {units::khz_to_angular(v[0]), units::khz_to_angular(v[1])};
    }

    const json& child(const char* key) {
        seen_.emplace_back(key);
        return object_.at(key);
    }

    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void reject_unknown() const {
        for (const auto& [key, value] : object_.items()) {
            if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
                throw ConfigError("unknown key '" + qualified(key) + "'");
            }
        }
    }

private:
    std::string where() const { return path_.empty() ? "config" : path_; }

    const json& object_;
    std::string path_;
    std::vector<std::string> seen_;
};

NoiseModel parse_noise(ObjectReader& r, int& m_tones, FrequencyBand& band) {
    const std::string kind = r.string("kind", "single_tone");
    m_tones = r.integer("m_tones", m_tones);
    band = r.band_khz("band_khz", band);
    const double center = units::khz_to_angular(r.number("center_khz", 167.0));
    if (kind == "single_tone") {
        SingleTone s;
        s.frequency = center;
        s.amplitude = units::khz_to_angular(r.number("amplitude_khz", 12.0));
        if (r.has("phase")) {
            const json& phase = r.child("phase");
            if (phase.is_number()) {
                s.fixed_phase = phase.get<double>();
            } else if (!(phase.is_string() && phase.get<std::string>() == "random")) {
                throw ConfigError("key '" + r.qualified("phase") + "': expected \"random\" or a number (rad)");
            }
        }
        return s;
    }
    const double rms = units::khz_to_angular(r.number("rms_amplitude_khz", 12.0));
    if (kind == "gaussian_psd") {
        return GaussianPsd{center, units::khz_to_angular(r.number("sigma_khz", 50.0 / std::sqrt(2.0))), rms};
    }
    if (kind == "lorentzian_psd") {
        return LorentzianPsd{center, units::khz_to_angular(r.number("fwhm_khz", 50.0)), rms};
    }
    throw ConfigError("key '" + r.qualified("kind") + "': unknown noise kind '" + kind +
                      "' (single_tone, gaussian_psd, lorentzian_psd)");
}

ExperimentConfig from_json(const json& root) {
    ExperimentConfig c = ExperimentConfig::defaults();
    ObjectReader r(root, "");

    c.protocol.n_measurements = r.integer("n_measurements", c.protocol.n_measurements);
    c.protocol.repetitions = r.integer("q_repetitions", c.protocol.repetitions);
    if (r.has("control_amplitude_khz")) {
        c.protocol.control_amplitude = units::khz_to_angular(r.number("control_amplitude_khz", 0.0));
    }
    if (r.has("measurement_duration_us")) {
        c.protocol.measurement_duration = units::us_to_s(r.number("measurement_duration_us", 0.0));
    }
    c.protocol.master_seed = r.unsigned_integer("master_seed", c.protocol.master_seed);

    const auto explicit_taus = r.numbers("taus_us");
    const double tau_min = r.number("tau_min_us", 1.5);
    const double tau_max = r.number("tau_max_us", 4.5);
    const int k_taus = r.integer("k_taus", 15);
    try {
        if (!explicit_taus.empty()) {
            std::vector<double> taus;
            for (double t : explicit_taus) taus.push_back(units::us_to_s(t));
            c.taus = TauGrid(std::move(taus));
        } else {
            c.taus = make_tau_grid(units::us_to_s(tau_min), units::us_to_s(tau_max), k_taus);
        }
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("tau grid (tau_min_us/tau_max_us/k_taus/taus_us): ") + e.what());
    }
    c.protocol.tau = c.taus[0];

    c.simulate_measurement_duration = r.boolean("simulate_measurement_duration", c.simulate_measurement_duration);
    c.workers = r.integer("workers", c.workers);

    if (r.has("noise")) {
        ObjectReader nr(r.child("noise"), "noise");
        c.noise = parse_noise(nr, c.m_tones, c.synthesis_band);
        nr.reject_unknown();
    }

    if (r.has("reconstruction")) {
        ObjectReader rr(r.child("reconstruction"), "reconstruction");
        auto& s = c.reconstruction;
        s.epsilon = rr.number("epsilon", s.epsilon);
        s.grid_points = rr.integer("grid_points", s.grid_points);
        s.band = rr.band_khz("band_khz", s.band);
        s.clamp_negative = rr.boolean("clamp_negative", s.clamp_negative);
        if (rr.has("tau_offset_us")) s.tau_offset = units::us_to_s(rr.number("tau_offset_us", 0.0));
        const std::string reference = rr.string("reference", "analytic");
        if (reference == "analytic") {
            s.reference = ReferenceMode::analytic_control;
        } else if (reference == "sample_mean") {
            s.reference = ReferenceMode::sample_mean;
        } else {
            throw ConfigError("key 'reconstruction.reference': expected \"analytic\" or \"sample_mean\"");
        }
        const std::string source = rr.string("chi_source", "exact");
        if (source == "exact") {
            s.chi_source = ChiSource::exact;
        } else if (source == "weak_zeno") {
            s.chi_source = ChiSource::weak_zeno;
        } else {
            throw ConfigError("key 'reconstruction.chi_source': expected \"exact\" or \"weak_zeno\"");
        }
        rr.reject_unknown();
    }
    r.reject_unknown();
    c.validate();
    return c;
}

std::pair<int, int> line_and_column(std::string_view text, std::size_t byte) {
    int line = 1;
    int column = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

// Shortest value v in file units with to_si(v) == si exactly, so a manifest
// echo reruns bit-identically and reads cleanly.
template <class ToSi>
double file_units(double si, double approx, ToSi to_si) {
    double best = approx;
    std::size_t best_len = SIZE_MAX;
    double v = approx;
    for (int i = 0; i < 8; ++i) v = std::nextafter(v, -INFINITY);
    for (int i = 0; i <= 16; ++i, v = std::nextafter(v, INFINITY)) {
        if (to_si(v) != si) continue;
        const std::size_t len = csv::format(v).size();
        if (len < best_len) {
            best = v;
            best_len = len;
        }
    }
    return best;
}

double khz(double omega) { return file_units(omega, units::angular_to_khz(omega), units::khz_to_angular); }
double us(double seconds) { return file_units(seconds, units::s_to_us(seconds), units::us_to_s); }

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["n_measurements"] = c.protocol.n_measurements;
    json taus = json::array();
    for (double t : c.taus.values()) taus.push_back(us(t));
    j["taus_us"] = taus;
    j["q_repetitions"] = c.protocol.repetitions;
    j["control_amplitude_khz"] = khz(c.protocol.control_amplitude);
    j["measurement_duration_us"] = us(c.protocol.measurement_duration);
    j["master_seed"] = c.protocol.master_seed;
    j["simulate_measurement_duration"] = c.simulate_measurement_duration;
    j["workers"] = c.workers;

    json n;
    n["kind"] = std::string(kind_name(c.noise));
    n["m_tones"] = c.m_tones;
    n["band_khz"] = {khz(c.synthesis_band.lo), khz(c.synthesis_band.hi)};
    if (const auto* s = std::get_if<SingleTone>(&c.noise)) {
        n["center_khz"] = khz(s->frequency);
        n["amplitude_khz"] = khz(s->amplitude);
        if (s->fixed_phase) {
            n["phase"] = *s->fixed_phase;
        } else {
            n["phase"] = "random";
        }
    } else if (const auto* g = std::get_if<GaussianPsd>(&c.noise)) {
        n["center_khz"] = khz(g->center);
        n["sigma_khz"] = khz(g->sigma);
        n["rms_amplitude_khz"] = khz(g->rms_amplitude);
    } else if (const auto* l = std::get_if<LorentzianPsd>(&c.noise)) {
        n["center_khz"] = khz(l->center);
        n["fwhm_khz"] = khz(l->fwhm);
        n["rms_amplitude_khz"] = khz(l->rms_amplitude);
    }
    j["noise"] = n;

    const auto& s = c.reconstruction;
    json r;
    r["epsilon"] = s.epsilon;
    r["grid_points"] = s.grid_points;
    r["band_khz"] = {khz(s.band.lo), khz(s.band.hi)};
    r["clamp_negative"] = s.clamp_negative;
    r["tau_offset_us"] = us(s.tau_offset);
    r["reference"] = s.reference == ReferenceMode::analytic_control ? "analytic" : "sample_mean";
    r["chi_source"] = s.chi_source == ChiSource::exact ? "exact" : "weak_zeno";
    j["reconstruction"] = r;
    return j;
}

json config_to_si_json(const ExperimentConfig& c) {
    json j;
    j["n_measurements"] = c.protocol.n_measurements;
    j["taus_s"] = std::vector<double>(c.taus.values().begin(), c.taus.values().end());
    j["q_repetitions"] = c.protocol.repetitions;
    j["control_amplitude_rad_s"] = c.protocol.control_amplitude;
    j["measurement_duration_s"] = c.protocol.measurement_duration;
    j["master_seed"] = c.protocol.master_seed;
    j["simulate_measurement_duration"] = c.simulate_measurement_duration;
    json n;
    n["kind"] = std::string(kind_name(c.noise));
    n["m_tones"] = c.m_tones;
    n["band_rad_s"] = {c.synthesis_band.lo, c.synthesis_band.hi};
    if (const auto* s = std::get_if<SingleTone>(&c.noise)) {
        n["frequency_rad_s"] = s->frequency;
        n["amplitude_rad_s"] = s->amplitude;
        n["phase_rad"] = s->fixed_phase ? json(*s->fixed_phase) : json("random");
    } else if (const auto* g = std::get_if<GaussianPsd>(&c.noise)) {
        n["center_rad_s"] = g->center;
        n["sigma_rad_s"] = g->sigma;
        n["rms_amplitude_rad_s"] = g->rms_amplitude;
    } else if (const auto* l = std::get_if<LorentzianPsd>(&c.noise)) {
        n["center_rad_s"] = l->center;
        n["fwhm_rad_s"] = l->fwhm;
        n["rms_amplitude_rad_s"] = l->rms_amplitude;
    }
    j["noise"] = n;
    j["reconstruction"] = {{"epsilon", c.reconstruction.epsilon},
                           {"grid_points", c.reconstruction.grid_points},
                           {"band_rad_s", {c.reconstruction.band.lo, c.reconstruction.band.hi}},
                           {"clamp_negative", c.reconstruction.clamp_negative},
                           {"tau_offset_s", c.reconstruction.tau_offset}};
    return j;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

std::optional<json> read_json_if_present(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        return json::parse(in);
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

bool same_tau(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
    try {
        protocol.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("protocol: ") + e.what());
    }
    if (protocol.repetitions < 2) {
        throw ConfigError("key 'q_repetitions': chi estimation needs Q >= 2 repetitions per tau");
    }
    if (!(taus[0] > protocol.measurement_duration)) {
        throw ConfigError("key 'tau_min_us': every tau must exceed measurement_duration_us");
    }
    try {
        zeno::validate(noise);
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("noise: ") + e.what());
    }
    if (m_tones < 1) throw ConfigError("key 'noise.m_tones': must be >= 1");
    if (!(synthesis_band.lo >= 0.0 && synthesis_band.lo < synthesis_band.hi)) {
        throw ConfigError("key 'noise.band_khz': need 0 <= lo < hi");
    }
    const auto& r = reconstruction;
    if (!(r.epsilon >= 0.0)) throw ConfigError("key 'reconstruction.epsilon': must be >= 0");
    if (r.grid_points < 2) throw ConfigError("key 'reconstruction.grid_points': must be >= 2");
    if (!(r.band.lo >= 0.0 && r.band.lo < r.band.hi)) {
        throw ConfigError("key 'reconstruction.band_khz': need 0 <= lo < hi");
    }
    if (!(r.tau_offset >= 0.0)) throw ConfigError("key 'reconstruction.tau_offset_us': must be >= 0");
    for (std::size_t k = 1; k < taus.size(); ++k) {
        if (!(r.tau_offset < taus[k] - taus[k - 1])) {
            throw ConfigError("key 'reconstruction.tau_offset_us': must be smaller than the tau spacing");
        }
    }
    if (workers < 0) throw ConfigError("key 'workers': must be >= 0");
}

ExperimentConfig ExperimentConfig::defaults() {
    ProtocolConfig protocol = ProtocolConfig::defaults();
    TauGrid taus = make_tau_grid(1.5e-6, 4.5e-6, 15);
    protocol.tau = taus[0];
    const FrequencyBand band{units::khz_to_angular(100.0), units::khz_to_angular(300.0)};
    ReconstructionSettings reconstruction;
    reconstruction.band = band;
    return ExperimentConfig{
        .protocol = protocol,
        .taus = std::move(taus),
        .noise = SingleTone{units::khz_to_angular(12.0), units::khz_to_angular(167.0), std::nullopt},
        .m_tones = 400,
        .synthesis_band = band,
        .simulate_measurement_duration = false,
        .workers = 0,
        .reconstruction = reconstruction,
    };
}

ExperimentConfig parse_config(std::string_view json_text, std::string_view source) {
    json root;
    try {
        root = json::parse(json_text.begin(), json_text.end());
    } catch (const json::parse_error& e) {
        const auto [line, column] = line_and_column(json_text, e.byte);
        std::ostringstream msg;
        msg << source << ":" << line << ":" << column << ": JSON parse error: " << e.what();
        throw ConfigError(msg.str());
    }
    if (root.is_object() && root.contains("config") && root.contains("seeds")) root = root.at("config");
    try {
        return from_json(root);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(source) + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string(source) + ": " + e.what());
    }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string());
}

std::string to_config_json(const ExperimentConfig& config) { return config_to_json(config).dump(2); }

void apply_overrides(ExperimentConfig& config, const Overrides& o) {
    if (o.q) config.protocol.repetitions = *o.q;
    if (o.seed) config.protocol.master_seed = *o.seed;
    if (o.epsilon) config.reconstruction.epsilon = *o.epsilon;
    if (o.clamp_negative) config.reconstruction.clamp_negative = true;
    if (o.tau_offset_us) config.reconstruction.tau_offset = units::us_to_s(*o.tau_offset_us);
    if (o.workers) config.workers = *o.workers;
    config.validate();
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k, std::uint64_t q) {
    return splitmix64(splitmix64(splitmix64(master) ^ k) ^ q);
}

SimulationOutput simulate(const ExperimentConfig& config) {
    const std::size_t k_count = config.taus.size();
    const std::size_t q_count = static_cast<std::size_t>(config.protocol.repetitions);
    const int n = config.protocol.n_measurements;
    const double extension = config.simulate_measurement_duration ? 0.5 * config.protocol.measurement_duration : 0.0;

    std::vector<ControlWaveform> controls;
    std::vector<double> dynamic_taus;
    for (std::size_t k = 0; k < k_count; ++k) {
        const double tau = config.taus[k] + extension;
        dynamic_taus.push_back(tau);
        controls.push_back(square_wave_control(config.protocol.control_amplitude, n, tau));
    }

    SimulationOutput out;
    out.records.resize(k_count * q_count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        try {
            for (std::size_t idx = next++; idx < out.records.size(); idx = next++) {
                const std::size_t k = idx / q_count;
                const std::size_t q = idx % q_count;
                const std::uint64_t seed = derive_seed(config.protocol.master_seed, k, q);
                const NoiseRealization noise =
                    sample_realization(config.noise, config.m_tones, config.synthesis_band, seed);
                SurvivalRecord rec = simulate_repetition(controls[k], noise, dynamic_taus[k], seed);
                rec.tau = config.taus[k];
                out.records[idx] = rec;
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = out.records.size();
        }
    };

    unsigned workers = config.workers > 0 ? static_cast<unsigned>(config.workers) : std::thread::hardware_concurrency();
    workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(std::max<std::size_t>(out.records.size(), 1)));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    for (const auto& r : out.records) {
        if (r.max_abs_alpha > 1.0) ++out.weak_zeno_violations;
    }
    return out;
}

ChiTable estimate_chi(const ExperimentConfig& config, std::span<const SurvivalRecord> records) {
    if (records.empty()) throw MissingInputError("no survival records: run `simulate` first");

    std::vector<std::vector<const SurvivalRecord*>> groups;
    for (const SurvivalRecord& r : records) {
        if (groups.empty() || !same_tau(groups.back().front()->tau, r.tau)) groups.emplace_back();
        groups.back().push_back(&r);
    }
    if (groups.size() != config.taus.size()) {
        throw ConfigError("survival records cover " + std::to_string(groups.size()) + " tau values, config has " +
                          std::to_string(config.taus.size()));
    }

    ChiTable table;
    const auto theory = theory_chi(config);
    for (std::size_t k = 0; k < groups.size(); ++k) {
        if (!same_tau(groups[k].front()->tau, config.taus[k])) {
            throw ConfigError("survival records do not follow the config tau grid (index " + std::to_string(k) + ")");
        }
        std::vector<double> p;
        p.reserve(groups[k].size());
        for (const SurvivalRecord* r : groups[k]) {
            p.push_back(config.reconstruction.chi_source == ChiSource::exact ? r->p : r->p_c * r->p_n * r->p_cn);
        }
        double reference = groups[k].front()->p_c;
        if (config.reconstruction.reference == ReferenceMode::sample_mean) {
            reference = 0.0;
            for (double x : p) reference += x;
            reference /= static_cast<double>(p.size());
        }
        table.estimate.points.push_back(chi_from_survivals(p, reference, config.taus[k]));
        table.chi_theory.push_back(theory[k]);
    }
    return table;
}

std::vector<double> theory_chi(const ExperimentConfig& config) {
    std::vector<double> out;
    out.reserve(config.taus.size());
    for (double tau : config.taus.values()) {
        const EffectiveControl ec = effective_control(
            square_wave_control(config.protocol.control_amplitude, config.protocol.n_measurements, tau));
        out.push_back(chi_theory(config.noise, ec, config.synthesis_band.lo, config.synthesis_band.hi));
    }
    return out;
}

FrequencyGrid reconstruction_grid(const ExperimentConfig& config) {
    return FrequencyGrid(config.reconstruction.band.lo, config.reconstruction.band.hi,
                         config.reconstruction.grid_points);
}

FilterBankSpec filter_bank_spec(const ExperimentConfig& config) {
    return FilterBankSpec{config.protocol.control_amplitude, config.protocol.n_measurements,
                          std::vector<double>(config.taus.values().begin(), config.taus.values().end()),
                          reconstruction_grid(config)};
}

std::vector<double> original_spectrum(const NoiseModel& model, const FrequencyGrid& grid) {
    std::vector<double> s(static_cast<std::size_t>(grid.size()), 0.0);
    if (!is_broadband(model)) return s;
    const auto omegas = grid.values();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = psd_value(model, omegas[i]);
    return s;
}

ReconstructionReport reconstruct(const ExperimentConfig& config, const ChiTable& chi) {
    const FilterBankSpec spec = filter_bank_spec(config);
    OffsetPairing pairing = tau_offset_correction(chi.estimate, spec, config.reconstruction.tau_offset);
    const auto values = pairing.chi.values();
    ReconstructionResult result = reconstruct_spectrum(values, pairing.bank, config.reconstruction.epsilon);

    std::vector<double> s_orig = original_spectrum(config.noise, pairing.bank.grid);
    const bool data_nonzero = std::any_of(values.begin(), values.end(), [](double v) { return v != 0.0; });
    const bool theory_nonzero =
        std::any_of(chi.chi_theory.begin(), chi.chi_theory.end(), [](double v) { return v != 0.0; });
    if (data_nonzero && theory_nonzero) result.fidelity_chi = fidelity_chi(values, chi.chi_theory);
    if (is_broadband(config.noise) && data_nonzero) {
        result.fidelity_spectrum = fidelity_spectrum(result.s_rec, s_orig, pairing.bank.grid,
                                                     config.reconstruction.band, config.reconstruction.clamp_negative);
    }
    return ReconstructionReport{std::move(result), std::move(pairing.bank), std::move(s_orig)};
}

// ---------------------------------------------------------------------------
// files

void write_survivals(const std::filesystem::path& path, std::span<const SurvivalRecord> records) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(records.size());
    for (const SurvivalRecord& r : records) {
        rows.push_back({csv::format(us(r.tau)), csv::format(r.realization_seed), csv::format(r.p),
                        csv::format(r.p_c), csv::format(r.p_n), csv::format(r.p_cn)});
    }
    csv::write(path, {"tau_us", "seed", "p", "p_c", "p_n", "p_cn"}, rows);
}

std::vector<SurvivalRecord> read_survivals(const std::filesystem::path& path) {
    csv::Table t;
    try {
        t = csv::read(path);
    } catch (const MissingInputError&) {
        throw MissingInputError("missing input " + path.string() + ": run `simulate` first");
    }
    if (t.rows.empty()) throw MissingInputError(path.string() + " has no data rows: run `simulate` first");
    const auto tau = t.doubles("tau_us");
    const auto seed = t.integers("seed");
    const auto p = t.doubles("p");
    const auto p_c = t.doubles("p_c");
    const auto p_n = t.doubles("p_n");
    const auto p_cn = t.doubles("p_cn");
    std::vector<SurvivalRecord> out(t.rows.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].tau = units::us_to_s(tau[i]);
        out[i].realization_seed = seed[i];
        out[i].p = p[i];
        out[i].p_c = p_c[i];
        out[i].p_n = p_n[i];
        out[i].p_cn = p_cn[i];
    }
    return out;
}

void write_chi(const std::filesystem::path& path, const ChiTable& table) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < table.estimate.points.size(); ++k) {
        const ChiPoint& p = table.estimate.points[k];
        rows.push_back({csv::format(us(p.tau)), csv::format(p.chi), csv::format(p.std_error),
                        csv::format(table.chi_theory.at(k))});
    }
    csv::write(path, {"tau_us", "chi", "std_error", "chi_theory"}, rows);
}

ChiTable read_chi(const std::filesystem::path& path) {
    csv::Table t;
    try {
        t = csv::read(path);
    } catch (const MissingInputError&) {
        throw MissingInputError("missing input " + path.string() + ": run `chi` first");
    }
    if (t.rows.empty()) throw MissingInputError(path.string() + " has no data rows: run `chi` first");
    const auto tau = t.doubles("tau_us");
    const auto chi = t.doubles("chi");
    const auto se = t.doubles("std_error");
    ChiTable table;
    table.chi_theory = t.doubles("chi_theory");
    for (std::size_t i = 0; i < tau.size(); ++i) {
        table.estimate.points.push_back(ChiPoint{units::us_to_s(tau[i]), chi[i], se[i], 0});
    }
    return table;
}

StageResult stage_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const SimulationOutput sim = simulate(config);
    write_survivals(out_dir / files::survivals, sim.records);

    json seeds = json::array();
    const std::size_t q_count = static_cast<std::size_t>(config.protocol.repetitions);
    for (std::size_t i = 0; i < sim.records.size(); ++i) {
        seeds.push_back({{"k", i / q_count}, {"q", i % q_count}, {"seed", sim.records[i].realization_seed}});
    }
    json manifest;
    manifest["config"] = config_to_json(config);
    manifest["config_si"] = config_to_si_json(config);
    manifest["master_seed"] = config.protocol.master_seed;
    manifest["seeds"] = seeds;
    manifest["weak_zeno_violations"] = sim.weak_zeno_violations;
    manifest["created_utc"] = utc_timestamp();
    manifest["outputs"] = {files::survivals, files::chi, files::spectrum, files::eigen, files::summary};
    write_json(out_dir / files::manifest, manifest);
    return StageResult{sim.weak_zeno_violations};
}

void stage_chi(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    const auto records = read_survivals(out_dir / files::survivals);
    write_chi(out_dir / files::chi, estimate_chi(config, records));
}

ReconstructionReport stage_reconstruct(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    const ChiTable chi = read_chi(out_dir / files::chi);
    if (chi.estimate.points.size() != config.taus.size()) {
        throw ConfigError("chi.csv has " + std::to_string(chi.estimate.points.size()) + " rows, config has " +
                          std::to_string(config.taus.size()) + " taus");
    }
    ReconstructionReport report = reconstruct(config, chi);
    const auto& res = report.result;

    const auto omegas = report.bank.grid.values();
    std::vector<std::vector<std::string>> rows;
    rows.reserve(omegas.size());
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        rows.push_back({csv::format(khz(omegas[i])), csv::format(res.s_rec[i]),
                        csv::format(report.s_orig[i])});
    }
    csv::write(out_dir / files::spectrum, {"omega_khz", "s_rec", "s_orig"}, rows);

    rows.clear();
    for (std::size_t k = 0; k < res.eigenvalues.size(); ++k) {
        rows.push_back({csv::format(static_cast<int>(k + 1)), csv::format(res.eigenvalues[k])});
    }
    csv::write(out_dir / files::eigen, {"k", "lambda"}, rows);

    json summary;
    summary["fidelity_chi"] = nullable(res.fidelity_chi);
    summary["fidelity_spectrum"] = nullable(res.fidelity_spectrum);
    summary["kept_modes"] = res.kept;
    summary["k_taus"] = config.taus.size();
    summary["epsilon"] = config.reconstruction.epsilon;
    summary["clamp_negative"] = config.reconstruction.clamp_negative;
    summary["tau_offset_us"] = us(config.reconstruction.tau_offset);
    summary["coefficients"] = res.coefficients;

    if (const auto manifest = read_json_if_present(out_dir / files::manifest)) {
        if (manifest->contains("weak_zeno_violations")) {
            summary["weak_zeno_violations"] = manifest->at("weak_zeno_violations");
        }
    }
    // <P> against the analytic control-only P_c, per tau.
    if (std::filesystem::exists(out_dir / files::survivals)) {
        const auto records = read_survivals(out_dir / files::survivals);
        json means = json::array();
        std::size_t i = 0;
        while (i < records.size()) {
            std::size_t j = i;
            double sum = 0.0;
            double sum_sq = 0.0;
            while (j < records.size() && same_tau(records[j].tau, records[i].tau)) {
                sum += records[j].p;
                sum_sq += records[j].p * records[j].p;
                ++j;
            }
            const double q = static_cast<double>(j - i);
            const double mean = sum / q;
            const double var = q > 1 ? std::max(0.0, (sum_sq - q * mean * mean) / (q - 1)) : 0.0;
            means.push_back({{"tau_us", us(records[i].tau)},
                             {"mean_p", mean},
                             {"std_error", std::sqrt(var / q)},
                             {"p_c", records[i].p_c}});
            i = j;
        }
        summary["survival_means"] = means;
    }
    summary["parameters"] = config_to_json(config);
    write_json(out_dir / files::summary, summary);
    return report;
}

void stage_theory(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto chi = theory_chi(config);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < chi.size(); ++k) {
        rows.push_back({csv::format(us(config.taus[k])), csv::format(chi[k])});
    }
    csv::write(out_dir / files::chi_theory, {"tau_us", "chi_theory"}, rows);

    const FilterBank bank = filter_bank_spec(config).build();
    std::vector<std::string> header{"omega_khz"};
    for (std::size_t k = 0; k < bank.size(); ++k) header.push_back("F_" + std::to_string(k + 1));
    rows.clear();
    const auto omegas = bank.grid.values();
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        std::vector<std::string> row{csv::format(khz(omegas[i]))};
        for (const auto& f : bank.filters) row.push_back(csv::format(f[i]));
        rows.push_back(std::move(row));
    }
    csv::write(out_dir / files::filters, header, rows);

    header.clear();
    rows.clear();
    for (std::size_t k = 0; k < bank.size(); ++k) header.push_back("A_" + std::to_string(k + 1));
    for (std::size_t k = 0; k < bank.size(); ++k) {
        std::vector<std::string> row;
        for (std::size_t l = 0; l < bank.size(); ++l) row.push_back(csv::format(bank.overlap(k, l)));
        rows.push_back(std::move(row));
    }
    csv::write(out_dir / files::overlap, header, rows);
}

FidelityReport stage_fidelity(const ExperimentConfig& original, const std::filesystem::path& out_dir) {
    csv::Table spectrum;
    try {
        spectrum = csv::read(out_dir / files::spectrum);
    } catch (const MissingInputError&) {
        throw MissingInputError("missing input " + (out_dir / files::spectrum).string() + ": run `reconstruct` first");
    }
    if (spectrum.rows.size() < 2) throw MissingInputError("spectrum.csv has no data: run `reconstruct` first");
    const auto omega_khz = spectrum.doubles("omega_khz");
    const auto s_rec = spectrum.doubles("s_rec");
    const FrequencyGrid grid(units::khz_to_angular(omega_khz.front()), units::khz_to_angular(omega_khz.back()),
                             static_cast<int>(omega_khz.size()));

    FidelityReport report;
    if (is_broadband(original.noise)) {
        report.fidelity_spectrum = fidelity_spectrum(s_rec, original_spectrum(original.noise, grid), grid,
                                                     original.reconstruction.band,
                                                     original.reconstruction.clamp_negative);
    }
    const ChiTable chi = read_chi(out_dir / files::chi);
    report.fidelity_chi = fidelity_chi(chi.estimate.values(), theory_chi(original));

    json j;
    j["original_noise"] = std::string(kind_name(original.noise));
    j["fidelity_spectrum"] = nullable(report.fidelity_spectrum);
    j["fidelity_chi"] = report.fidelity_chi;
    write_json(out_dir / files::fidelity, j);
    return report;
}

StageResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    const StageResult sim = stage_simulate(config, out_dir);
    stage_chi(config, out_dir);
    stage_reconstruct(config, out_dir);
    return sim;
}

}  // namespace zeno
