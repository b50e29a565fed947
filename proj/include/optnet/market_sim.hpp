#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "optnet/pricing.hpp"
#include "optnet/sample.hpp"

namespace optnet {

/// Simulated-market configuration. The simulated year has
/// days_per_month * months daily steps (360 by default) and every derived
/// dataset is a pure function of (config, seed).
struct SimConfig {
    double s0 = 100.0;
    MarketParams params{};
    int days_per_month = 30;
    int months = 12;
    std::uint64_t seed = 1;

    int total_days() const { return days_per_month * months; }

    void validate() const {
        params.validate();
        if (!(s0 > 0.0)) throw std::invalid_argument("SimConfig: s0 must be > 0");
        if (days_per_month < 1 || months < 1)
            throw std::invalid_argument("SimConfig: days_per_month and months must be >= 1");
    }
};

/// One listed contract. Strikes are positive multiples of 5; expiries sit
/// on month-end day indices and may extend past the simulated year (the
/// dataset then only covers the days inside it).
struct OptionContract {
    double strike = 0.0;
    int expiry_day = 0;
    int issue_day = 0;
};

/// Key used to deduplicate (strike, expiry) listings.
using ContractKey = std::pair<long, int>;

/// GBM daily-step price path of length total_days + 1 with path[0] = s0.
/// Log increments are i.i.d. normal with mean mu/total_days and variance
/// sigma^2/total_days, drawn by inverse CDF from the seeded stream, so the
/// series is bit-identical for a given config on every platform.
std::vector<double> simulate_path(const SimConfig& config);

/// Contracts listed on `day` at underlying price `price`: every strike K
/// that is a multiple of 5 with 0.8 < price/K < 1.25 (strict), each paired
/// with the ends of the next six months after `day` plus the first two
/// later quarter months (month index divisible by 3, months counted from 1
/// at the start of the simulation). Pairs already present in `issued` are
/// skipped and new ones inserted; pass nullptr to list unconditionally.
std::vector<OptionContract> issue_options(int day, double price, const SimConfig& config,
                                          std::set<ContractKey>* issued = nullptr);

/// Simulated train or validation dataset: one path, daily issuance, one
/// Sample per (day, live contract) pair with Black-Scholes targets.
/// tau = (expiry_day - day) / total_days. The two roles draw from
/// independent sub-streams of config.seed and are otherwise identical in
/// construction.
std::vector<Sample> build_dataset(const SimConfig& config, Role role);

/// Tail test set: for each ratio and each of n_series fresh paths, a single
/// contract with strike s0/ratio tracked daily over the whole year
/// (total_days samples per series, tau > 0 throughout).
std::vector<Sample> build_tail_test_set(const SimConfig& config,
                                        const std::vector<double>& ratios = {0.5, 2.0},
                                        int n_series = 10);

/// Expiry-boundary test set: n samples with moneyness ~ Uniform(0.8, 1.25),
/// tau = 0, price target (s-1)+ and zero time value.
std::vector<Sample> build_expiry_test_set(int n, std::uint64_t seed);

/// Writes samples as CSV with header `s,tau,c_over_k,v_over_k`, one sample
/// per row at full double precision.
void write_samples_csv(const std::string& path, const std::vector<Sample>& samples);

}  // namespace optnet
