#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jadd/detection.hpp"
#include "jadd/metrics.hpp"
#include "jadd/model.hpp"
#include "jadd/sic.hpp"

namespace jadd {

enum class RunMode { Uncoded, Coded, Sic };

struct TrialOptions {
    DetectorKind detector = DetectorKind::SSL;
    DetectorConfig config;
    RunMode mode = RunMode::Uncoded;
    std::string code = "conv13";
    int n_sic = 10;
    int i_max = 10;
};

/// Metrics of one slot.
struct TrialOutcome {
    std::uint32_t adep_errors = 0;
    std::uint32_t devices = 0;
    BitTally bits;
    double mse = 0.0;
    int iterations = 0;
    bool failed = false;
};

/// Aggregate over trials, keyed by trial index so merging is exact and
/// independent of completion order.
struct TrialRecord {
    Scenario scenario;
    std::string detector;
    std::map<std::uint64_t, TrialOutcome> outcomes;
    double wall_seconds = 0.0;

    void merge(const TrialRecord& other);

    std::uint64_t trials() const;
    std::uint64_t failures() const;
    std::uint64_t adep_errors() const;
    std::uint64_t adep_decisions() const;
    BitTally bits() const;
    double adep() const;
    double ber() const;
    double mse() const;
    double mean_iterations() const;
};

/// Runs one slot with the scenario's fixed spreading matrix.
TrialOutcome run_trial(const Scenario& scenario, const SpreadingMatrix& S, std::uint64_t trial_index,
                       const TrialOptions& options);

/// Trials first_trial .. first_trial + n_trials - 1. Worker count comes from
/// JADD_WORKERS (default 1).
TrialRecord run_trials(const Scenario& scenario, const TrialOptions& options, std::uint64_t n_trials,
                       std::uint64_t first_trial = 0);

int worker_count();

struct SweepSpec {
    /// One of M, snr_db, T, lambda0, nsic.
    std::string axis = "M";
    /// Axis values as written; "auto" on the lambda0 axis selects the default initialization.
    std::vector<std::string> values;
    std::uint64_t trials = 100;
    std::vector<std::string> detectors{"ssl", "asl"};
    std::string output;
    Scenario scenario;
    TrialOptions options;
};

SweepSpec parse_sweep_spec(const nlohmann::json& j);
nlohmann::json sweep_spec_to_json(const SweepSpec& spec);

struct ResultRow {
    std::string axis;
    std::string detector;
    double adep = 0.0;
    double adep_ci = 0.0;
    /// True when no activity error occurred; `adep` then holds the resolution 1/(trials K).
    bool adep_below_resolution = false;
    double ber = 0.0;
    double ber_ci = 0.0;
    double mse = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;

    bool operator==(const ResultRow&) const = default;
};

ResultRow summarize(const std::string& axis_value, const TrialRecord& record);

std::vector<ResultRow> run_sweep(const SweepSpec& spec);

/// Writes `<path>` as CSV and `<path>.json` as the manifest.
void emit_results(const std::vector<ResultRow>& table, const std::string& path,
                  const nlohmann::json& config_echo = nlohmann::json::object());

std::vector<ResultRow> load_results(const std::string& path);

/// Source version baked in at build time.
std::string build_version();

}  // namespace jadd
