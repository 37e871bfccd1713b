#pragma once

// Protocol orchestration: configuration, seed derivation, the (tau_k, q)
// simulation sweep and the file-based pipeline stages
//
//     simulate -> survivals.csv, manifest.json
//     chi      -> chi.csv
//     reconstruct -> spectrum.csv, eigen.csv, summary.json
//     theory   -> chi_theory.csv, filters.csv, overlap.csv
//     fidelity -> fidelity.json
//
// Every stage re-reads its upstream CSV, so stages can be rerun on their own
// and `run_experiment` is exactly simulate + chi + reconstruct.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zeno/dynamics.hpp"
#include "zeno/estimator.hpp"
#include "zeno/filters.hpp"
#include "zeno/noise.hpp"
#include "zeno/protocol.hpp"

namespace zeno {

enum class ReferenceMode { analytic_control, sample_mean };
enum class ChiSource { exact, weak_zeno };

struct ReconstructionSettings {
    double epsilon = 1e-3;
    int grid_points = 2001;
    FrequencyBand band{};  // rad/s
    bool clamp_negative = false;
    double tau_offset = 0.0;  // s
    ReferenceMode reference = ReferenceMode::analytic_control;
    ChiSource chi_source = ChiSource::exact;
};

/// Fully resolved experiment, SI units throughout.
struct ExperimentConfig {
    ProtocolConfig protocol;  // protocol.tau is the first grid point
    TauGrid taus;
    NoiseModel noise;
    int m_tones = 400;
    FrequencyBand synthesis_band{};
    /// Lengthen every free-evolution interval by measurement_duration / 2 in the
    /// dynamics (outputs keep the nominal tau). Models a finite projection pulse.
    bool simulate_measurement_duration = false;
    int workers = 0;  // 0: one per hardware thread
    ReconstructionSettings reconstruction;

    /// Throws ConfigError naming the offending key.
    void validate() const;

    /// Single tone with random phase at the reference parameters:
    /// N=18, Q=14, Omega_0 = 2pi 43.3 kHz, Omega_n0 = 2pi 12 kHz, w_N = 2pi 167 kHz,
    /// tau in [1.5, 4.5] us (K=15), band [100, 300] kHz.
    static ExperimentConfig defaults();
};

/// Parses the JSON config (or a manifest.json, whose "config" member is used).
/// Frequencies in the file are ordinary kHz, times in us.
/// Throws ConfigError with line/column or key diagnostics.
ExperimentConfig parse_config(std::string_view json_text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// The config in file units (kHz, us); parse_config(to_config_json(c)) == c.
std::string to_config_json(const ExperimentConfig& config);

/// Command-line overrides applied on top of a loaded config.
struct Overrides {
    std::optional<int> q;
    std::optional<std::uint64_t> seed;
    std::optional<double> epsilon;
    bool clamp_negative = false;
    std::optional<double> tau_offset_us;
    std::optional<int> workers;
};

void apply_overrides(ExperimentConfig& config, const Overrides& overrides);

/// Stateless split-mix avalanche of (master, k, q).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k, std::uint64_t q);

struct SimulationOutput {
    std::vector<SurvivalRecord> records;  // ordered by (k, q)
    int weak_zeno_violations = 0;         // realizations with some |alpha_j| > 1
};

/// Runs the K x Q sweep on `config.workers` threads; the output does not depend
/// on the worker count.
SimulationOutput simulate(const ExperimentConfig& config);

struct ChiTable {
    ChiEstimate estimate;
    std::vector<double> chi_theory;
};

/// Groups the records by tau (they must follow the config's grid) and applies
/// chi_from_survivals per group.
ChiTable estimate_chi(const ExperimentConfig& config, std::span<const SurvivalRecord> records);

/// chi_theory at every tau of the grid (integration over the synthesis band).
std::vector<double> theory_chi(const ExperimentConfig& config);

FrequencyGrid reconstruction_grid(const ExperimentConfig& config);
FilterBankSpec filter_bank_spec(const ExperimentConfig& config);

/// Model PSD on the grid; all zeros for a single tone (no density).
std::vector<double> original_spectrum(const NoiseModel& model, const FrequencyGrid& grid);

struct ReconstructionReport {
    ReconstructionResult result;
    FilterBank bank;
    std::vector<double> s_orig;
};

/// Filter bank at tau_k + tau_offset, reconstruction, and both fidelities
/// (fidelity_spectrum only for broadband noise).
ReconstructionReport reconstruct(const ExperimentConfig& config, const ChiTable& chi);

namespace files {
inline constexpr const char* survivals = "survivals.csv";
inline constexpr const char* chi = "chi.csv";
inline constexpr const char* spectrum = "spectrum.csv";
inline constexpr const char* eigen = "eigen.csv";
inline constexpr const char* summary = "summary.json";
inline constexpr const char* manifest = "manifest.json";
inline constexpr const char* chi_theory = "chi_theory.csv";
inline constexpr const char* filters = "filters.csv";
inline constexpr const char* overlap = "overlap.csv";
inline constexpr const char* fidelity = "fidelity.json";
}  // namespace files

void write_survivals(const std::filesystem::path& path, std::span<const SurvivalRecord> records);
std::vector<SurvivalRecord> read_survivals(const std::filesystem::path& path);
void write_chi(const std::filesystem::path& path, const ChiTable& table);
ChiTable read_chi(const std::filesystem::path& path);

struct StageResult {
    int weak_zeno_violations = 0;
};

StageResult stage_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir);
void stage_chi(const ExperimentConfig& config, const std::filesystem::path& out_dir);
ReconstructionReport stage_reconstruct(const ExperimentConfig& config, const std::filesystem::path& out_dir);
void stage_theory(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct FidelityReport {
    std::optional<double> fidelity_spectrum;
    double fidelity_chi = 0.0;
};

/// Scores out_dir/spectrum.csv and out_dir/chi.csv against the noise model of
/// `original` (which may differ from the model that produced the data).
FidelityReport stage_fidelity(const ExperimentConfig& original, const std::filesystem::path& out_dir);

/// simulate + chi + reconstruct.
StageResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace zeno
