#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "optnet/market_sim.hpp"
#include "optnet/neural.hpp"
#include "optnet/pricing.hpp"
#include "optnet/sample.hpp"

namespace optnet {

/// How ingested market samples are split into train and evaluation sets.
/// A random split evaluates on a same-distribution "validation" role; a
/// chronological split evaluates on a distribution-shifted "test" role.
struct SplitSpec {
    enum class Kind { random, chronological };
    Kind kind = Kind::random;
    double fraction = 0.8;   // share of rows that go to training
    std::uint64_t seed = 0;  // random splits only

    /// Parses "random:<fraction>:<seed>" or "chrono[logical]:<fraction>".
    static SplitSpec parse(const std::string& text);
    std::string to_string() const;
};

/// Ingestion settings for market-bar CSV files.
struct MarketSpec {
    std::vector<std::string> paths;
    double r = 0.0;
    double q = 0.0;
    double day_count_days = 365.0;  // tau = calendar time to expiry / this many days
    SplitSpec split{};
};

/// Parsed market data: one Sample per bar, in file order, with the bar
/// timestamps kept for chronological splitting.
struct MarketData {
    std::vector<Sample> samples;
    std::vector<std::int64_t> timestamps;  // epoch seconds, parallel to samples
    std::size_t dropped_long_tau = 0;      // bars with tau > 1
};

/// Reads and validates market-bar CSVs (header
/// `timestamp_utc,underlying_close,option_close,strike,expiry_utc`).
/// Malformed rows raise with file and line number.
MarketData load_market_csv(const std::vector<std::string>& paths, double r, double q,
                           double day_count_days);

/// Applies a split to parsed market data.
struct IngestSplit {
    std::vector<Sample> train;
    std::vector<Sample> eval;
    Role eval_role = Role::validation;
    std::size_t dropped_long_tau = 0;
};
IngestSplit split_market_data(const MarketData& data, const SplitSpec& split);

/// Convenience: load + split in one call.
IngestSplit ingest_market_csv(const MarketSpec& spec);

/// Full study configuration. In simulated mode each trial regenerates its
/// datasets from seeds derived from (base_seed + trial_index); in market
/// mode the files are parsed once and random splits are redrawn per trial.
struct ExperimentConfig {
    Activation activation = Activation::logistic;
    int k = 4;
    int epochs = 100;
    int batch_size = 128;
    int n_trials = 1000;
    std::uint64_t base_seed = 1;
    AdamConfig adam{};
    bool train_price = true;      // train the price model
    bool train_timevalue = true;  // train the timevalue model
    bool price_space = false;  // also record the timevalue model's price-space MSE
    bool simulated = true;
    SimConfig sim{};
    MarketSpec market{};

    void validate() const;
};

/// Per-trial learning curves: mse[model][role_index][epoch], with model 0
/// the price model and model 1 the timevalue model. The timevalue model's
/// price-space curves are populated only when requested. Final parameters
/// are kept for tail diagnostics.
struct TrialResult {
    std::vector<Role> roles;
    std::array<std::vector<std::vector<double>>, 2> mse;
    std::vector<std::vector<double>> price_space_mse;
    MlpParams final_price;
    MlpParams final_timevalue;
};

/// Trial-averaged curves. Means are arithmetic means of MSE across trials
/// (log10 is applied at reporting time); stddev is the population standard
/// deviation across trials.
struct StudyResult {
    ExperimentConfig config;
    std::vector<Role> roles;
    std::array<std::vector<std::vector<double>>, 2> mean;
    std::array<std::vector<std::vector<double>>, 2> stddev;
    std::vector<std::vector<double>> price_space_mean;
    std::vector<std::vector<double>> price_space_stddev;
};

/// Runs one paired trial: both models see identical data and shuffle
/// orders and differ only in target and initialization draw.
TrialResult run_trial(const ExperimentConfig& config, int trial_index);

/// Runs n_trials trials (in parallel across `jobs` workers) and reduces
/// them in trial order, so the result is independent of scheduling. When
/// `raw` is non-null the individual trial results are also returned.
StudyResult run_study(const ExperimentConfig& config, unsigned jobs = 1,
                      std::vector<TrialResult>* raw = nullptr);

/// Writes the curve CSV `epoch,model,role,mse,log10_mse,stddev` with rows
/// ordered by epoch, then model, then role. Byte-deterministic.
void emit_curves(const StudyResult& study, const std::string& path);

/// Study snapshot (JSON) used by the `emit` subcommand.
void save_study(const StudyResult& study, const std::string& path);
StudyResult load_study(const std::string& path);

/// Parses an ISO-8601 UTC timestamp ("YYYY-MM-DD[THH:MM[:SS]][Z]") to epoch
/// seconds; throws std::invalid_argument on malformed input.
std::int64_t parse_iso8601_utc(const std::string& text);

}  // namespace optnet
