#include "optnet/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "optnet/parallel.hpp"
#include "optnet/rng.hpp"

namespace optnet {
namespace {

// per-trial sub-stream tags
constexpr std::uint64_t kSimDataStream = 0;
constexpr std::uint64_t kInitPriceStream = 1;
constexpr std::uint64_t kInitTimevalueStream = 2;
constexpr std::uint64_t kShuffleStream = 3;
constexpr std::uint64_t kSplitStream = 4;
constexpr std::uint64_t kExpirySetStream = 5;

constexpr int kExpirySetSize = 50000;

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

double parse_double_field(const std::string& field, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size() || !std::isfinite(v))
        throw std::runtime_error(where + ": bad numeric field '" + field + "'");
    return v;
}

// Howard Hinnant's days-from-civil; epoch day 0 is 1970-01-01.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

int parse_digits(const std::string& text, std::size_t pos, std::size_t count) {
    int value = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i])))
            throw std::invalid_argument("bad timestamp: " + text);
        value = value * 10 + (text[i] - '0');
    }
    return value;
}

MarketParams ingest_params(double r, double q) {
    // sigma/mu are not consumed by intrinsic_value; keep them valid
    return MarketParams{r, q, 1.0, 0.0};
}

double price_space_mse(const MlpParams& net, Activation act, std::span<const Sample> samples,
                       const MarketParams& params) {
    const std::size_t k = net.w_s.size();
    std::vector<double> z(k), h(k);
    double sum = 0.0;
    for (const Sample& sample : samples) {
        hidden_layer(net, act, sample.moneyness, sample.tau, z, h);
        double pred = 0.0;
        for (std::size_t i = 0; i < k; ++i) pred += net.w_out[i] * h[i];
        pred += intrinsic_value({sample.moneyness, sample.tau}, params);
        const double d = pred - sample.price;
        sum += d * d;
    }
    return sum / static_cast<double>(samples.size());
}

struct TrialSets {
    std::vector<Role> roles;
    std::vector<std::vector<Sample>> sets;  // parallel to roles; sets[0] is train
    MarketParams params;                    // for price-space reconstruction
};

TrialSets build_trial_sets(const ExperimentConfig& config, std::uint64_t trial_seed,
                           const MarketData* market) {
    TrialSets out;
    if (config.simulated) {
        SimConfig sc = config.sim;
        sc.seed = derive_seed(trial_seed, kSimDataStream);
        out.roles = {Role::train, Role::validation, Role::tail_05, Role::tail_20, Role::expiry};
        out.sets.push_back(build_dataset(sc, Role::train));
        out.sets.push_back(build_dataset(sc, Role::validation));
        out.sets.push_back(build_tail_test_set(sc, {0.5}));
        out.sets.push_back(build_tail_test_set(sc, {2.0}));
        out.sets.push_back(
            build_expiry_test_set(kExpirySetSize, derive_seed(trial_seed, kExpirySetStream)));
        out.params = config.sim.params;
        return out;
    }

    SplitSpec split = config.market.split;
    if (split.kind == SplitSpec::Kind::random)
        split.seed = derive_seed(trial_seed, kSplitStream, split.seed);
    IngestSplit parts = split_market_data(*market, split);
    if (parts.train.empty() || parts.eval.empty())
        throw std::runtime_error("run_trial: market split produced an empty set");
    out.roles = {Role::train, parts.eval_role};
    out.sets.push_back(std::move(parts.train));
    out.sets.push_back(std::move(parts.eval));
    out.params = ingest_params(config.market.r, config.market.q);
    return out;
}

TrialResult run_trial_impl(const ExperimentConfig& config, int trial_index,
                           const MarketData* market) {
    const std::uint64_t trial_seed = config.base_seed + static_cast<std::uint64_t>(trial_index);
    TrialSets data = build_trial_sets(config, trial_seed, market);
    const std::size_t n_roles = data.roles.size();
    const std::size_t n_epochs = static_cast<std::size_t>(config.epochs);

    TrialResult result;
    result.roles = data.roles;
    for (int model = 0; model < 2; ++model)
        if (model == 0 ? config.train_price : config.train_timevalue)
            result.mse[static_cast<std::size_t>(model)].assign(
                n_roles, std::vector<double>(n_epochs, 0.0));
    if (config.price_space)
        result.price_space_mse.assign(n_roles, std::vector<double>(n_epochs, 0.0));

    for (int model = 0; model < 2; ++model) {
        if (!(model == 0 ? config.train_price : config.train_timevalue)) continue;
        const Target target = model == 0 ? Target::price : Target::timevalue;
        MlpParams params = init_params(
            config.k,
            derive_seed(trial_seed, model == 0 ? kInitPriceStream : kInitTimevalueStream));
        AdamState adam(config.k, config.adam);
        const std::uint64_t shuffle_base = derive_seed(trial_seed, kShuffleStream);

        for (std::size_t epoch = 0; epoch < n_epochs; ++epoch) {
            const double train_mse =
                train_epoch(params, adam, config.activation, data.sets[0], config.batch_size,
                            derive_seed(shuffle_base, epoch), target);
            result.mse[static_cast<std::size_t>(model)][0][epoch] = train_mse;
            for (std::size_t ri = 1; ri < n_roles; ++ri)
                result.mse[static_cast<std::size_t>(model)][ri][epoch] =
                    dataset_mse(params, config.activation, data.sets[ri], target);
            if (config.price_space && target == Target::timevalue)
                for (std::size_t ri = 0; ri < n_roles; ++ri)
                    result.price_space_mse[ri][epoch] =
                        price_space_mse(params, config.activation, data.sets[ri], data.params);
        }
        (model == 0 ? result.final_price : result.final_timevalue) = std::move(params);
    }
    return result;
}

// Mean and population standard deviation across trials, accumulated in
// trial order so the reduction does not depend on scheduling.
template <class Curves>
void reduce_curves(const std::vector<TrialResult>& trials, const Curves& curves_of,
                   std::vector<std::vector<double>>& mean_out,
                   std::vector<std::vector<double>>& std_out) {
    const auto& first = curves_of(trials.front());
    const std::size_t n_roles = first.size();
    mean_out.assign(n_roles, {});
    std_out.assign(n_roles, {});
    for (std::size_t ri = 0; ri < n_roles; ++ri) {
        const std::size_t n_epochs = first[ri].size();
        std::vector<double> mean(n_epochs, 0.0), var(n_epochs, 0.0);
        for (const auto& t : trials)
            for (std::size_t e = 0; e < n_epochs; ++e) mean[e] += curves_of(t)[ri][e];
        for (std::size_t e = 0; e < n_epochs; ++e) mean[e] /= static_cast<double>(trials.size());
        for (const auto& t : trials)
            for (std::size_t e = 0; e < n_epochs; ++e) {
                const double d = curves_of(t)[ri][e] - mean[e];
                var[e] += d * d;
            }
        for (std::size_t e = 0; e < n_epochs; ++e)
            var[e] = std::sqrt(var[e] / static_cast<double>(trials.size()));
        mean_out[ri] = std::move(mean);
        std_out[ri] = std::move(var);
    }
}

void format_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

nlohmann::json curves_to_json(const std::vector<std::vector<double>>& curves) {
    return nlohmann::json(curves);
}

std::vector<std::vector<double>> curves_from_json(const nlohmann::json& j) {
    return j.get<std::vector<std::vector<double>>>();
}

}  // namespace

SplitSpec SplitSpec::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = text.find(':', start);
        if (pos == std::string::npos) {
            parts.push_back(text.substr(start));
            break;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    if (parts.empty()) throw std::invalid_argument("split: empty spec");

    SplitSpec spec;
    if (parts[0] == "random") {
        if (parts.size() != 3) throw std::invalid_argument("split: expected random:<fraction>:<seed>");
        spec.kind = Kind::random;
        spec.fraction = parse_double_field(parts[1], "split fraction");
        spec.seed = std::strtoull(parts[2].c_str(), nullptr, 10);
    } else if (parts[0] == "chrono" || parts[0] == "chronological") {
        if (parts.size() != 2)
            throw std::invalid_argument("split: expected chronological:<fraction>");
        spec.kind = Kind::chronological;
        spec.fraction = parse_double_field(parts[1], "split fraction");
    } else {
        throw std::invalid_argument("split: unknown kind '" + parts[0] + "'");
    }
    if (!(spec.fraction > 0.0 && spec.fraction < 1.0))
        throw std::invalid_argument("split: fraction must be in (0, 1)");
    return spec;
}

std::string SplitSpec::to_string() const {
    std::ostringstream os;
    if (kind == Kind::random)
        os << "random:" << fraction << ":" << seed;
    else
        os << "chronological:" << fraction;
    return os.str();
}

std::int64_t parse_iso8601_utc(const std::string& text) {
    if (text.size() < 10 || text[4] != '-' || text[7] != '-')
        throw std::invalid_argument("bad timestamp: " + text);
    const int year = parse_digits(text, 0, 4);
    const int month = parse_digits(text, 5, 2);
    const int day = parse_digits(text, 8, 2);
    if (month < 1 || month > 12 || day < 1 || day > 31)
        throw std::invalid_argument("bad timestamp: " + text);

    int hour = 0, minute = 0, second = 0;
    std::size_t pos = 10;
    if (pos < text.size() && (text[pos] == 'T' || text[pos] == ' ')) {
        hour = parse_digits(text, pos + 1, 2);
        if (pos + 3 >= text.size() || text[pos + 3] != ':')
            throw std::invalid_argument("bad timestamp: " + text);
        minute = parse_digits(text, pos + 4, 2);
        pos += 6;
        if (pos < text.size() && text[pos] == ':') {
            second = parse_digits(text, pos + 1, 2);
            pos += 3;
        }
        if (hour > 23 || minute > 59 || second > 59)
            throw std::invalid_argument("bad timestamp: " + text);
    }
    if (pos < text.size() && text[pos] == 'Z') ++pos;
    if (pos != text.size()) throw std::invalid_argument("bad timestamp: " + text);

    return days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second;
}

MarketData load_market_csv(const std::vector<std::string>& paths, double r, double q,
                           double day_count_days) {
    if (paths.empty()) throw std::invalid_argument("load_market_csv: no input files");
    if (!(day_count_days > 0.0))
        throw std::invalid_argument("load_market_csv: day count must be > 0");
    const MarketParams params = ingest_params(r, q);
    const double tau_denom = day_count_days * 86400.0;

    MarketData data;
    for (const std::string& path : paths) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("load_market_csv: cannot open " + path);
        std::string line;
        std::size_t line_no = 0;

        if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line) != "timestamp_utc,underlying_close,option_close,strike,expiry_utc")
            throw std::runtime_error(path + ":1: unexpected header '" + line + "'");

        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (trim(line).empty()) continue;
            const std::string where = path + ":" + std::to_string(line_no);
            const auto fields = split_fields(line);
            if (fields.size() != 5)
                throw std::runtime_error(where + ": expected 5 fields, got " +
                                         std::to_string(fields.size()));
            std::int64_t ts, expiry;
            try {
                ts = parse_iso8601_utc(fields[0]);
                expiry = parse_iso8601_utc(fields[4]);
            } catch (const std::invalid_argument& e) {
                throw std::runtime_error(where + ": " + e.what());
            }
            const double underlying = parse_double_field(fields[1], where);
            const double option = parse_double_field(fields[2], where);
            const double strike = parse_double_field(fields[3], where);
            if (!(underlying > 0.0 && option > 0.0 && strike > 0.0))
                throw std::runtime_error(where + ": prices must be positive");
            if (expiry < ts) throw std::runtime_error(where + ": expiry before timestamp");

            const double tau = static_cast<double>(expiry - ts) / tau_denom;
            if (tau > 1.0) {
                ++data.dropped_long_tau;
                continue;
            }
            const double s = underlying / strike;
            const double price = option / strike;
            const double tv = price - intrinsic_value({s, tau}, params);
            data.samples.push_back(Sample{s, tau, price, tv});
            data.timestamps.push_back(ts);
        }
    }
    return data;
}

IngestSplit split_market_data(const MarketData& data, const SplitSpec& split) {
    const std::size_t n = data.samples.size();
    const std::size_t n_train =
        static_cast<std::size_t>(std::floor(split.fraction * static_cast<double>(n)));

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    IngestSplit out;
    out.dropped_long_tau = data.dropped_long_tau;
    if (split.kind == SplitSpec::Kind::random) {
        Rng rng(split.seed);
        rng.shuffle(order);
        out.eval_role = Role::validation;
    } else {
        std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            return data.timestamps[a] < data.timestamps[b];
        });
        out.eval_role = Role::test;
    }
    out.train.reserve(n_train);
    out.eval.reserve(n - n_train);
    for (std::size_t i = 0; i < n; ++i) {
        const Sample& s = data.samples[order[i]];
        (i < n_train ? out.train : out.eval).push_back(s);
    }
    return out;
}

IngestSplit ingest_market_csv(const MarketSpec& spec) {
    return split_market_data(
        load_market_csv(spec.paths, spec.r, spec.q, spec.day_count_days), spec.split);
}

void ExperimentConfig::validate() const {
    if (k < 1) throw std::invalid_argument("config: k must be >= 1");
    if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (n_trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (!train_price && !train_timevalue)
        throw std::invalid_argument("config: at least one model must be trained");
    if (price_space && !train_timevalue)
        throw std::invalid_argument("config: price_space output needs the timevalue model");
    if (simulated)
        sim.validate();
    else if (market.paths.empty())
        throw std::invalid_argument("config: market mode needs input files");
}

TrialResult run_trial(const ExperimentConfig& config, int trial_index) {
    config.validate();
    if (config.simulated) return run_trial_impl(config, trial_index, nullptr);
    const MarketData data = load_market_csv(config.market.paths, config.market.r,
                                            config.market.q, config.market.day_count_days);
    return run_trial_impl(config, trial_index, &data);
}

StudyResult run_study(const ExperimentConfig& config, unsigned jobs,
                      std::vector<TrialResult>* raw) {
    config.validate();
    MarketData market;
    if (!config.simulated)
        market = load_market_csv(config.market.paths, config.market.r, config.market.q,
                                 config.market.day_count_days);
    const MarketData* market_ptr = config.simulated ? nullptr : &market;

    std::vector<TrialResult> trials(static_cast<std::size_t>(config.n_trials));
    parallel_for(trials.size(), jobs, [&](std::size_t i) {
        trials[i] = run_trial_impl(config, static_cast<int>(i), market_ptr);
    });

    StudyResult study;
    study.config = config;
    study.roles = trials.front().roles;
    for (std::size_t model = 0; model < 2; ++model) {
        if (trials.front().mse[model].empty()) continue;
        reduce_curves(
            trials, [model](const TrialResult& t) -> const auto& { return t.mse[model]; },
            study.mean[model], study.stddev[model]);
    }
    if (config.price_space)
        reduce_curves(
            trials, [](const TrialResult& t) -> const auto& { return t.price_space_mse; },
            study.price_space_mean, study.price_space_stddev);
    if (raw) *raw = std::move(trials);
    return study;
}

void emit_curves(const StudyResult& study, const std::string& path) {
    if (study.roles.empty()) throw std::invalid_argument("emit_curves: empty study");
    std::string out = "epoch,model,role,mse,log10_mse,stddev\n";
    std::size_t n_epochs = 0;
    for (const auto& model_mean : study.mean)
        if (!model_mean.empty()) n_epochs = model_mean[0].size();

    auto emit_row = [&out](std::size_t epoch, std::string_view model, std::string_view role,
                           double mse_value, double sd) {
        out += std::to_string(epoch + 1);
        out += ',';
        out += model;
        out += ',';
        out += role;
        out += ',';
        format_double(out, mse_value);
        out += ',';
        format_double(out, std::log10(mse_value));
        out += ',';
        format_double(out, sd);
        out += '\n';
    };

    for (std::size_t e = 0; e < n_epochs; ++e) {
        for (std::size_t model = 0; model < 2; ++model) {
            if (study.mean[model].empty()) continue;
            for (std::size_t ri = 0; ri < study.roles.size(); ++ri)
                emit_row(e, model == 0 ? "price" : "timevalue", role_name(study.roles[ri]),
                         study.mean[model][ri][e], study.stddev[model][ri][e]);
        }
        if (!study.price_space_mean.empty())
            for (std::size_t ri = 0; ri < study.roles.size(); ++ri)
                emit_row(e, "timevalue_pricespace", role_name(study.roles[ri]),
                         study.price_space_mean[ri][e], study.price_space_stddev[ri][e]);
    }

    std::FILE* file = std::fopen(path.c_str(), "wb");
    if (!file) throw std::runtime_error("emit_curves: cannot open " + path);
    const std::size_t written = std::fwrite(out.data(), 1, out.size(), file);
    const bool close_ok = std::fclose(file) == 0;
    if (written != out.size() || !close_ok)
        throw std::runtime_error("emit_curves: write failed: " + path);
}

void save_study(const StudyResult& study, const std::string& path) {
    nlohmann::json j;
    j["schema"] = "optnet-study-v1";
    j["activation"] = std::string(activation_name(study.config.activation));
    j["k"] = study.config.k;
    j["epochs"] = study.config.epochs;
    j["batch_size"] = study.config.batch_size;
    j["n_trials"] = study.config.n_trials;
    j["base_seed"] = study.config.base_seed;
    j["train_price"] = study.config.train_price;
    j["train_timevalue"] = study.config.train_timevalue;
    j["price_space"] = study.config.price_space;
    j["simulated"] = study.config.simulated;
    j["adam"] = {{"learning_rate", study.config.adam.learning_rate},
                 {"beta1", study.config.adam.beta1},
                 {"beta2", study.config.adam.beta2},
                 {"epsilon", study.config.adam.epsilon}};
    std::vector<std::string> roles;
    for (Role r : study.roles) roles.emplace_back(role_name(r));
    j["roles"] = roles;
    j["mean"] = {curves_to_json(study.mean[0]), curves_to_json(study.mean[1])};
    j["stddev"] = {curves_to_json(study.stddev[0]), curves_to_json(study.stddev[1])};
    if (!study.price_space_mean.empty()) {
        j["price_space_mean"] = curves_to_json(study.price_space_mean);
        j["price_space_stddev"] = curves_to_json(study.price_space_stddev);
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_study: cannot open " + path);
    out << j.dump(1) << '\n';
    if (!out) throw std::runtime_error("save_study: write failed: " + path);
}

StudyResult load_study(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_study: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_study: " + path + ": " + e.what());
    }
    if (j.value("schema", "") != "optnet-study-v1")
        throw std::runtime_error("load_study: " + path + ": not a study snapshot");

    StudyResult study;
    study.config.activation = activation_from_name(j.at("activation").get<std::string>());
    study.config.k = j.at("k").get<int>();
    study.config.epochs = j.at("epochs").get<int>();
    study.config.batch_size = j.at("batch_size").get<int>();
    study.config.n_trials = j.at("n_trials").get<int>();
    study.config.base_seed = j.at("base_seed").get<std::uint64_t>();
    study.config.train_price = j.value("train_price", true);
    study.config.train_timevalue = j.value("train_timevalue", true);
    study.config.price_space = j.at("price_space").get<bool>();
    study.config.simulated = j.at("simulated").get<bool>();
    const auto& adam = j.at("adam");
    study.config.adam.learning_rate = adam.at("learning_rate").get<double>();
    study.config.adam.beta1 = adam.at("beta1").get<double>();
    study.config.adam.beta2 = adam.at("beta2").get<double>();
    study.config.adam.epsilon = adam.at("epsilon").get<double>();

    for (const auto& name : j.at("roles")) {
        const std::string text = name.get<std::string>();
        bool found = false;
        for (Role r : {Role::train, Role::validation, Role::tail_05, Role::tail_20, Role::expiry,
                       Role::test})
            if (role_name(r) == text) {
                study.roles.push_back(r);
                found = true;
            }
        if (!found) throw std::runtime_error("load_study: unknown role " + text);
    }
    study.mean[0] = curves_from_json(j.at("mean").at(0));
    study.mean[1] = curves_from_json(j.at("mean").at(1));
    study.stddev[0] = curves_from_json(j.at("stddev").at(0));
    study.stddev[1] = curves_from_json(j.at("stddev").at(1));
    if (j.contains("price_space_mean")) {
        study.price_space_mean = curves_from_json(j.at("price_space_mean"));
        study.price_space_stddev = curves_from_json(j.at("price_space_stddev"));
    }
    return study;
}

}  // namespace optnet
