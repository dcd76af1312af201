#pragma once

#include "lfc/analysis.hpp"
#include "lfc/lmi.hpp"
#include "lfc/model.hpp"
#include "lfc/sim.hpp"
#include "lfc/synthesis.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lfc::io {

inline constexpr const char* kToolVersion = "lfckit 0.1.0";

std::string slurp(const std::string& path);
// FNV-1a 64-bit fingerprint, lowercase hex.
std::string fnv1a_hex(const std::string& data);

// Parsed run configuration: the system, the design targets and the
// simulation scenario.
struct RunConfig {
    std::vector<model::AreaParams> areas;
    model::TieLines ties;
    synthesis::DesignSpec design;
    std::optional<Vec> state_weights; // diagonal Cx override
    std::optional<Vec> error_weights; // diagonal Ce override
    sim::DisturbanceSchedule schedule;
    sim::SimConfig simc;
    std::string source_path;
    std::string content_hash;
};

// Throws ConfigError on unreadable or malformed input.
RunConfig load_config(const std::string& path);

model::CompositeSystem build_system(const RunConfig& cfg);
model::OutputSelection output_selection(const RunConfig& cfg,
                                        const model::CompositeSystem& sys);

// --- gains ----------------------------------------------------------------

struct GainsFile {
    synthesis::GainSet gains;
    synthesis::DesignSpec design;
    std::string strategy;    // "integrated" | "separated"
    std::string config_hash; // hash of the config the design was run with
};

// Full-precision serialization; identical inputs give identical bytes.
void save_gains(const std::string& path, const GainsFile& gf,
                const lmi::LmiSolution* certificate = nullptr);
GainsFile load_gains(const std::string& path);

void save_certificate(const std::string& path, const lmi::LmiSolution& sol);

// --- run artifacts ----------------------------------------------------------

void write_trajectory_csv(const std::string& path, const sim::Trajectory& t);
void write_metrics_json(const std::string& path, const sim::Metrics& m,
                        const std::string& label);
std::string metrics_table(const std::vector<std::pair<std::string, sim::Metrics>>& entries);
void write_plot_script(const std::string& path, const std::string& csv_name, int n_areas);
void write_spectra_csv(const std::string& path, const analysis::VerificationReport& rep);
void write_verification_json(const std::string& path, const analysis::VerificationReport& rep,
                             const std::string& gains_path);

// --- manifest ---------------------------------------------------------------

// Creates or extends <run_dir>/manifest.json with artifact entries.
void manifest_update(const std::string& run_dir, const std::string& config_path,
                     const std::string& config_hash, const std::string& strategy,
                     const std::vector<std::pair<std::string, std::string>>& artifacts);

// --- reports ----------------------------------------------------------------

struct ReportResult {
    std::string text;
    std::vector<std::string> missing; // artifacts a complete run should have
};

ReportResult build_report(const std::string& run_dir);
std::string build_comparison_report(const std::string& dir_a, const std::string& dir_b);

} // namespace lfc::io
