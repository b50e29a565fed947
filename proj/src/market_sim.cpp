#include "optnet/market_sim.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "optnet/rng.hpp"

namespace optnet {
namespace {

// sub-stream tags under a dataset seed
constexpr std::uint64_t kTrainStream = 0x11;
constexpr std::uint64_t kValidationStream = 0x12;
constexpr std::uint64_t kTailStream = 0x13;

Sample make_sample(double moneyness, double tau, const MarketParams& params) {
    const NormalizedQuote quote{moneyness, tau};
    const double tv = time_value(quote, params);
    return Sample{moneyness, tau, tv + intrinsic_value(quote, params), tv};
}

}  // namespace

std::vector<double> simulate_path(const SimConfig& config) {
    config.validate();
    const int n = config.total_days();
    const double mean = config.params.mu / n;
    const double stddev = config.params.sigma / std::sqrt(static_cast<double>(n));

    Rng rng(config.seed);
    std::vector<double> path(static_cast<std::size_t>(n) + 1);
    path[0] = config.s0;
    double log_sum = 0.0;
    for (int t = 1; t <= n; ++t) {
        log_sum += rng.normal(mean, stddev);
        path[static_cast<std::size_t>(t)] = config.s0 * std::exp(log_sum);
    }
    return path;
}

std::vector<OptionContract> issue_options(int day, double price, const SimConfig& config,
                                          std::set<ContractKey>* issued) {
    if (!(price > 0.0)) throw std::invalid_argument("issue_options: price must be > 0");
    const int dpm = config.days_per_month;

    // expiry months: the six month-ends strictly after `day`, then the
    // first two later months with index divisible by 3
    const int first_month = day / dpm + 1;
    std::vector<int> expiry_days;
    for (int m = first_month; m < first_month + 6; ++m) expiry_days.push_back(m * dpm);
    int quarter = first_month + 6;
    while (quarter % 3 != 0) ++quarter;
    expiry_days.push_back(quarter * dpm);
    expiry_days.push_back((quarter + 3) * dpm);

    std::vector<OptionContract> contracts;
    const long lowest = std::max(5L, 5L * static_cast<long>(std::floor(price / 1.25 / 5.0)));
    const long highest = 5L * static_cast<long>(std::ceil(price / 0.8 / 5.0));
    for (long strike = lowest; strike <= highest; strike += 5) {
        const double ratio = price / static_cast<double>(strike);
        if (!(ratio > 0.8 && ratio < 1.25)) continue;
        for (int expiry : expiry_days) {
            if (issued && !issued->insert({strike, expiry}).second) continue;
            contracts.push_back({static_cast<double>(strike), expiry, day});
        }
    }
    return contracts;
}

std::vector<Sample> build_dataset(const SimConfig& config, Role role) {
    if (role != Role::train && role != Role::validation)
        throw std::invalid_argument("build_dataset: role must be train or validation");

    SimConfig path_config = config;
    path_config.seed = derive_seed(
        config.seed, role == Role::train ? kTrainStream : kValidationStream);
    const std::vector<double> path = simulate_path(path_config);
    const int total = config.total_days();

    std::set<ContractKey> issued;
    std::vector<OptionContract> contracts;
    for (int day = 0; day <= total; ++day) {
        auto fresh = issue_options(day, path[static_cast<std::size_t>(day)], config, &issued);
        contracts.insert(contracts.end(), fresh.begin(), fresh.end());
    }

    std::vector<Sample> samples;
    for (int day = 0; day <= total; ++day) {
        const double price = path[static_cast<std::size_t>(day)];
        for (const auto& c : contracts) {
            if (day < c.issue_day || day > c.expiry_day) continue;
            const double tau = static_cast<double>(c.expiry_day - day) / total;
            samples.push_back(make_sample(price / c.strike, tau, config.params));
        }
    }
    return samples;
}

std::vector<Sample> build_tail_test_set(const SimConfig& config, const std::vector<double>& ratios,
                                        int n_series) {
    config.validate();
    for (double ratio : ratios)
        if (!(ratio > 0.0))
            throw std::invalid_argument("build_tail_test_set: ratios must be > 0");

    const int total = config.total_days();
    std::vector<Sample> samples;
    samples.reserve(ratios.size() * static_cast<std::size_t>(n_series) *
                    static_cast<std::size_t>(total));
    for (std::size_t ri = 0; ri < ratios.size(); ++ri) {
        const double strike = config.s0 / ratios[ri];
        // tag the stream by the ratio's bit pattern, so a merged call and
        // per-ratio calls produce the same series for the same ratio
        const std::uint64_t ratio_tag = std::bit_cast<std::uint64_t>(ratios[ri]);
        for (int si = 0; si < n_series; ++si) {
            SimConfig path_config = config;
            path_config.seed = derive_seed(config.seed, kTailStream, ratio_tag,
                                           static_cast<std::uint64_t>(si));
            const std::vector<double> path = simulate_path(path_config);
            for (int day = 0; day < total; ++day) {
                const double tau = static_cast<double>(total - day) / total;
                samples.push_back(
                    make_sample(path[static_cast<std::size_t>(day)] / strike, tau, config.params));
            }
        }
    }
    return samples;
}

std::vector<Sample> build_expiry_test_set(int n, std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("build_expiry_test_set: n must be > 0");
    Rng rng(seed);
    std::vector<Sample> samples;
    samples.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double s = rng.uniform(0.8, 1.25);
        samples.push_back(Sample{s, 0.0, std::max(s - 1.0, 0.0), 0.0});
    }
    return samples;
}

void write_samples_csv(const std::string& path, const std::vector<Sample>& samples) {
    std::FILE* file = std::fopen(path.c_str(), "wb");
    if (!file) throw std::runtime_error("write_samples_csv: cannot open " + path);
    std::fputs("s,tau,c_over_k,v_over_k\n", file);
    for (const auto& s : samples)
        std::fprintf(file, "%.17g,%.17g,%.17g,%.17g\n", s.moneyness, s.tau, s.price, s.timevalue);
    if (std::fclose(file) != 0) throw std::runtime_error("write_samples_csv: write failed: " + path);
}

}  // namespace optnet
