// optnet command-line front end: dataset generation, training studies,
// market-data ingestion, analytic bound checks, and curve emission.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "optnet/experiment.hpp"
#include "optnet/market_sim.hpp"
#include "optnet/neural.hpp"
#include "optnet/rng.hpp"
#include "optnet/verify.hpp"

namespace fs = std::filesystem;
using namespace optnet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBoundFailed = 2;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

using KeyValues = std::vector<std::pair<std::string, std::string>>;

fs::path prepare_run_dir(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

// Every run logs its fully resolved configuration; the file is enough to
// reproduce the run bit for bit.
void write_config(const fs::path& dir, const KeyValues& kv) {
    std::FILE* file = std::fopen((dir / "config.txt").string().c_str(), "wb");
    if (!file) throw std::runtime_error("cannot write config.txt in " + dir.string());
    for (const auto& [key, value] : kv)
        std::fprintf(file, "%s = %s\n", key.c_str(), value.c_str());
    std::fclose(file);
}

unsigned default_jobs() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

std::string trim_ws(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Expands `key = value` lines from a config file into option tokens for the
// subcommand. Unknown keys are errors; keys also present on the command
// line are skipped, so explicit flags win.
std::vector<std::string> config_file_tokens(const CLI::App* cmd, const std::string& path,
                                            const std::vector<std::string>& cli_args) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);

    std::vector<std::string> tokens;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim_ws(line);
        if (text.empty() || text[0] == '#') continue;
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 'key = value'");
        const std::string key = trim_ws(text.substr(0, eq));
        const std::string value = trim_ws(text.substr(eq + 1));
        const std::string flag = "--" + key;

        const CLI::Option* option = cmd->get_option_no_throw(flag);
        if (!option || key == "config")
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": unknown config key '" + key + "'");
        bool overridden = false;
        for (const auto& arg : cli_args)
            if (arg == flag || arg.rfind(flag + "=", 0) == 0) overridden = true;
        if (overridden) continue;

        if (option->get_expected_min() == 0) {  // flag option
            if (value == "true" || value == "1" || value == "yes")
                tokens.push_back(flag);
            else if (!(value == "false" || value == "0" || value == "no"))
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": flag key '" + key + "' needs a boolean value");
        } else {
            tokens.push_back(flag);
            tokens.push_back(value);
        }
    }
    return tokens;
}

struct StudyFlags {
    std::string model = "both";
    std::string activation = "sigmoid";
    int k = 4;
    int epochs = 100;
    int batch = 128;
    int trials = 1;
    std::uint64_t seed = 1;
    unsigned jobs = default_jobs();
    double lr = 1e-3;
    bool price_space = false;
    std::string out;
    // simulated-market knobs
    double s0 = 100.0;
    double mu = 0.1;
    double sigma = 0.2;
    double r = 0.02;
    double q = 0.0;
    // market-data mode (active when inputs are given)
    std::vector<std::string> inputs;
    double daycount = 365.0;
    std::string split = "random:0.8:0";
};

void add_study_options(CLI::App* cmd, StudyFlags& f, const std::string& default_out) {
    f.out = default_out;
    cmd->add_option("--model", f.model, "price|timevalue|both")
        ->check(CLI::IsMember({"price", "timevalue", "both"}))
        ->capture_default_str();
    cmd->add_option("--activation", f.activation, "hidden activation name")->capture_default_str();
    cmd->add_option("--k", f.k, "hidden units")->capture_default_str();
    cmd->add_option("--epochs", f.epochs, "training epochs")->capture_default_str();
    cmd->add_option("--batch", f.batch, "batch size")->capture_default_str();
    cmd->add_option("--trials", f.trials, "independent trials")->capture_default_str();
    cmd->add_option("--seed", f.seed, "base seed")->capture_default_str();
    cmd->add_option("--jobs", f.jobs, "worker threads")->capture_default_str();
    cmd->add_option("--lr", f.lr, "Adam learning rate")->capture_default_str();
    cmd->add_flag("--price-space", f.price_space,
                  "also emit the timevalue model's price-space curves");
    cmd->add_option("--out", f.out, "output directory")->capture_default_str();
    cmd->add_option("--s0", f.s0, "initial underlying price")->capture_default_str();
    cmd->add_option("--mu", f.mu, "drift per year")->capture_default_str();
    cmd->add_option("--sigma", f.sigma, "volatility per sqrt(year)")->capture_default_str();
    cmd->add_option("--r", f.r, "risk-free rate")->capture_default_str();
    cmd->add_option("--q", f.q, "dividend yield")->capture_default_str();
    cmd->add_option("--input", f.inputs,
                    "market-bar CSV files; switches from simulated to market data");
    cmd->add_option("--daycount", f.daycount, "days per year for market tau")
        ->capture_default_str();
    cmd->add_option("--split", f.split, "market split: random:<frac>:<seed> or chronological:<frac>")
        ->capture_default_str();
}

ExperimentConfig to_experiment_config(const StudyFlags& f) {
    ExperimentConfig config;
    config.activation = activation_from_name(f.activation);
    config.k = f.k;
    config.epochs = f.epochs;
    config.batch_size = f.batch;
    config.n_trials = f.trials;
    config.base_seed = f.seed;
    config.adam.learning_rate = f.lr;
    config.train_price = f.model != "timevalue";
    config.train_timevalue = f.model != "price";
    config.price_space = f.price_space;
    if (f.inputs.empty()) {
        config.simulated = true;
        config.sim.s0 = f.s0;
        config.sim.params = MarketParams{f.r, f.q, f.sigma, f.mu};
    } else {
        config.simulated = false;
        config.market.paths = f.inputs;
        config.market.r = f.r;
        config.market.q = f.q;
        config.market.day_count_days = f.daycount;
        config.market.split = SplitSpec::parse(f.split);
    }
    return config;
}

KeyValues study_config_kv(const std::string& command, const StudyFlags& f,
                          const ExperimentConfig& config) {
    KeyValues kv;
    kv.emplace_back("command", command);
    kv.emplace_back("model", f.model);
    kv.emplace_back("activation", std::string(activation_name(config.activation)));
    kv.emplace_back("k", std::to_string(config.k));
    kv.emplace_back("epochs", std::to_string(config.epochs));
    kv.emplace_back("batch", std::to_string(config.batch_size));
    kv.emplace_back("trials", std::to_string(config.n_trials));
    kv.emplace_back("seed", std::to_string(config.base_seed));
    kv.emplace_back("lr", fmt(config.adam.learning_rate));
    kv.emplace_back("adam_beta1", fmt(config.adam.beta1));
    kv.emplace_back("adam_beta2", fmt(config.adam.beta2));
    kv.emplace_back("adam_epsilon", fmt(config.adam.epsilon));
    kv.emplace_back("price_space", config.price_space ? "true" : "false");
    kv.emplace_back("data", config.simulated ? "simulated" : "market");
    if (config.simulated) {
        kv.emplace_back("s0", fmt(config.sim.s0));
        kv.emplace_back("mu", fmt(config.sim.params.mu));
        kv.emplace_back("sigma", fmt(config.sim.params.sigma));
        kv.emplace_back("r", fmt(config.sim.params.r));
        kv.emplace_back("q", fmt(config.sim.params.q));
        kv.emplace_back("days_per_month", std::to_string(config.sim.days_per_month));
        kv.emplace_back("months", std::to_string(config.sim.months));
        kv.emplace_back("quarter_months", "month index divisible by 3, months from 1");
        kv.emplace_back("day_count", "tau = days-to-expiry / days-per-year (simulated year)");
    } else {
        std::string joined;
        for (const auto& p : config.market.paths) {
            if (!joined.empty()) joined += ";";
            joined += p;
        }
        kv.emplace_back("input", joined);
        kv.emplace_back("r", fmt(config.market.r));
        kv.emplace_back("q", fmt(config.market.q));
        kv.emplace_back("daycount", fmt(config.market.day_count_days));
        kv.emplace_back("split", config.market.split.to_string());
    }
    return kv;
}

int cmd_simulate(const StudyFlags& f) {
    SimConfig config;
    config.s0 = f.s0;
    config.params = MarketParams{f.r, f.q, f.sigma, f.mu};
    config.seed = f.seed;
    config.validate();

    const fs::path dir = prepare_run_dir(f.out);
    KeyValues kv;
    kv.emplace_back("command", "simulate");
    kv.emplace_back("seed", std::to_string(config.seed));
    kv.emplace_back("s0", fmt(config.s0));
    kv.emplace_back("mu", fmt(config.params.mu));
    kv.emplace_back("sigma", fmt(config.params.sigma));
    kv.emplace_back("r", fmt(config.params.r));
    kv.emplace_back("q", fmt(config.params.q));
    kv.emplace_back("days_per_month", std::to_string(config.days_per_month));
    kv.emplace_back("months", std::to_string(config.months));
    kv.emplace_back("quarter_months", "month index divisible by 3, months from 1");
    write_config(dir, kv);

    const auto train = build_dataset(config, Role::train);
    const auto validation = build_dataset(config, Role::validation);
    const auto tail_05 = build_tail_test_set(config, {0.5});
    const auto tail_20 = build_tail_test_set(config, {2.0});
    const auto expiry = build_expiry_test_set(50000, derive_seed(config.seed, 5));
    write_samples_csv((dir / "train.csv").string(), train);
    write_samples_csv((dir / "validation.csv").string(), validation);
    write_samples_csv((dir / "tail_0.5.csv").string(), tail_05);
    write_samples_csv((dir / "tail_2.0.csv").string(), tail_20);
    write_samples_csv((dir / "expiry.csv").string(), expiry);
    std::cout << "wrote " << train.size() << " train, " << validation.size() << " validation, "
              << tail_05.size() + tail_20.size() << " tail, " << expiry.size()
              << " expiry samples to " << dir.string() << "\n";
    return kExitOk;
}

int cmd_study(const std::string& command, const StudyFlags& f, bool snapshot_params) {
    const ExperimentConfig config = to_experiment_config(f);
    config.validate();

    const fs::path dir = prepare_run_dir(f.out);
    write_config(dir, study_config_kv(command, f, config));

    std::vector<TrialResult> trials;
    const StudyResult study = run_study(config, f.jobs, &trials);
    save_study(study, (dir / "study.json").string());
    emit_curves(study, (dir / "curves.csv").string());
    if (snapshot_params) {
        if (config.train_price)
            write_params_csv((dir / "params_price.csv").string(), trials.front().final_price);
        if (config.train_timevalue)
            write_params_csv((dir / "params_timevalue.csv").string(),
                             trials.front().final_timevalue);
    }
    std::cout << "study complete: " << config.n_trials << " trial(s), curves in "
              << (dir / "curves.csv").string() << "\n";
    return kExitOk;
}

int cmd_ingest(const std::vector<std::string>& inputs, double r, double q, double daycount,
               const std::string& split_text, const std::string& out) {
    MarketSpec spec;
    spec.paths = inputs;
    spec.r = r;
    spec.q = q;
    spec.day_count_days = daycount;
    spec.split = SplitSpec::parse(split_text);

    const fs::path dir = prepare_run_dir(out);
    KeyValues kv;
    kv.emplace_back("command", "ingest");
    std::string joined;
    for (const auto& p : inputs) {
        if (!joined.empty()) joined += ";";
        joined += p;
    }
    kv.emplace_back("input", joined);
    kv.emplace_back("r", fmt(r));
    kv.emplace_back("q", fmt(q));
    kv.emplace_back("daycount", fmt(daycount));
    kv.emplace_back("split", spec.split.to_string());
    write_config(dir, kv);

    const IngestSplit parts = ingest_market_csv(spec);
    write_samples_csv((dir / "train.csv").string(), parts.train);
    const std::string eval_name = std::string(role_name(parts.eval_role)) + ".csv";
    write_samples_csv((dir / eval_name).string(), parts.eval);

    std::FILE* report = std::fopen((dir / "report.txt").string().c_str(), "wb");
    if (!report) throw std::runtime_error("cannot write report.txt");
    std::fprintf(report, "train samples: %zu\n", parts.train.size());
    std::fprintf(report, "%s samples: %zu\n", role_name(parts.eval_role).data(),
                 parts.eval.size());
    std::fprintf(report, "bars dropped (tau > 1): %zu\n", parts.dropped_long_tau);
    std::fclose(report);

    std::cout << "ingested " << parts.train.size() + parts.eval.size() << " samples ("
              << parts.train.size() << " train, " << parts.eval.size() << " "
              << role_name(parts.eval_role) << ", " << parts.dropped_long_tau
              << " dropped for tau > 1) to " << dir.string() << "\n";
    return kExitOk;
}

int cmd_verify(const std::string& check, std::uint64_t seed, unsigned jobs,
               const std::string& out) {
    const fs::path dir = prepare_run_dir(out);
    const fs::path reports = dir / "reports";
    fs::create_directories(reports);
    KeyValues kv;
    kv.emplace_back("command", "verify");
    kv.emplace_back("check", check);
    kv.emplace_back("seed", std::to_string(seed));
    write_config(dir, kv);

    const MarketParams params{};  // r=0.02, q=0, sigma=0.2
    bool pass = true;

    if (check == "mills") {
        const BoundReport report = check_mills_bound(default_mills_grid());
        std::cout << report.to_text();
        report.write_csv((reports / "mills.csv").string());
        pass = report.pass;
    } else if (check == "integrability") {
        for (int p : {1, 2}) {
            const ShellDecayReport report = check_timevalue_integrability(params, p);
            std::cout << report.to_text();
            report.write_csv((reports / ("integrability_p" + std::to_string(p) + ".csv")).string());
            pass = pass && report.pass;
        }
    } else if (check == "lemma3") {
        const SigmoidBoundConstants consts{};
        const SigmoidBoundGrids grids = default_sigmoid_bound_grids(consts);
        const BoundReport report =
            check_sigmoid_difference_bound(consts, grids.beta, grids.x1, grids.x2);
        std::cout << report.to_text();
        report.write_csv((reports / "sigmoid_difference.csv").string());
        pass = report.pass;
    } else if (check == "tailprobe") {
        ExperimentConfig config;
        config.n_trials = 1;
        config.base_seed = seed;
        const TrialResult trial = run_trial(config, 0);
        const std::vector<double> s_grid{2, 3, 4, 5, 6, 7, 8, 9, 10};
        const std::vector<double> tau_grid{0.25, 0.5, 1.0};
        const TailProbeResult probe =
            tail_generalization_probe(trial.final_price, trial.final_timevalue,
                                      config.activation, config.sim.params, s_grid, tau_grid);
        std::cout << probe.to_text();
        probe.write_csv((reports / "tail_probe.csv").string());
        // the dichotomy at the most extreme grid point
        pass = probe.price_model_error.back() > probe.timevalue_model_error.back();
        std::cout << "tail dichotomy at (s=10, tau=1): " << (pass ? "PASS" : "FAIL") << "\n";
    } else if (check == "uatsweep") {
        const UatSweepResult sweep =
            empirical_uat_sweep({1, 2, 4, 8}, {4.0, 8.0}, params, 5, seed, jobs);
        std::cout << sweep.to_text();
        sweep.write_csv((reports / "uat_sweep.csv").string());
        pass = sweep.monotone_in_k;
    } else {
        throw CLI::ValidationError("--check",
                                   "unknown check '" + check +
                                       "' (expected mills|integrability|lemma3|tailprobe|uatsweep)");
    }
    return pass ? kExitOk : kExitBoundFailed;
}

int cmd_emit(const std::string& study_path, const std::string& out) {
    if (out.empty()) throw std::invalid_argument("emit: --out must not be empty");
    fs::path source(study_path);
    if (fs::is_directory(source)) source /= "study.json";
    fs::path target(out);
    const bool directory_mode = fs::is_directory(target) || out.back() == '/';
    if (directory_mode) {
        fs::create_directories(target);
        KeyValues kv;
        kv.emplace_back("command", "emit");
        kv.emplace_back("study", source.string());
        write_config(target, kv);
        target /= "curves.csv";
    } else if (target.has_parent_path()) {
        fs::create_directories(target.parent_path());
    }
    const StudyResult study = load_study(source.string());
    emit_curves(study, target.string());
    std::cout << "wrote " << target.string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"strike-normalized option-pricing decision-function benchmark"};
    app.require_subcommand(1);

    // simulate
    StudyFlags sim_flags;
    auto* simulate = app.add_subcommand("simulate", "generate the simulated datasets as CSV");
    sim_flags.out = "out/simulate";
    simulate->add_option("--seed", sim_flags.seed, "path seed")->capture_default_str();
    simulate->add_option("--s0", sim_flags.s0, "initial underlying price")->capture_default_str();
    simulate->add_option("--mu", sim_flags.mu, "drift per year")->capture_default_str();
    simulate->add_option("--sigma", sim_flags.sigma, "volatility per sqrt(year)")
        ->capture_default_str();
    simulate->add_option("--r", sim_flags.r, "risk-free rate")->capture_default_str();
    simulate->add_option("--q", sim_flags.q, "dividend yield")->capture_default_str();
    simulate->add_option("--out", sim_flags.out, "output directory")->capture_default_str();

    // train / study
    StudyFlags train_flags, study_flags;
    auto* train = app.add_subcommand("train", "single-run training with parameter snapshots");
    add_study_options(train, train_flags, "out/train");
    auto* study = app.add_subcommand("study", "multi-trial averaged study");
    study_flags.trials = 1000;
    add_study_options(study, study_flags, "out/study");

    // ingest
    std::vector<std::string> ingest_inputs;
    double ingest_r = 0.0, ingest_q = 0.0, ingest_daycount = 365.0;
    std::string ingest_split = "random:0.8:0";
    std::string ingest_out = "out/ingest";
    std::string ingest_schema = "marketbar";
    auto* ingest = app.add_subcommand("ingest", "convert market-bar CSVs into sample sets");
    ingest->add_option("--input", ingest_inputs, "market-bar CSV files")->required();
    ingest->add_option("--schema", ingest_schema, "input schema")
        ->check(CLI::IsMember({"marketbar"}))
        ->capture_default_str();
    ingest->add_option("--r", ingest_r, "risk-free rate")->capture_default_str();
    ingest->add_option("--q", ingest_q, "dividend yield")->capture_default_str();
    ingest->add_option("--daycount", ingest_daycount, "days per year for tau")
        ->capture_default_str();
    ingest->add_option("--split", ingest_split,
                       "random:<frac>:<seed> or chronological:<frac>")
        ->capture_default_str();
    ingest->add_option("--out", ingest_out, "output directory")->capture_default_str();

    // verify
    std::string verify_check;
    std::uint64_t verify_seed = 1;
    unsigned verify_jobs = default_jobs();
    std::string verify_out = "out/verify";
    auto* verify = app.add_subcommand("verify", "numerical checks of the analytic bounds");
    verify->add_option("--check", verify_check, "mills|integrability|lemma3|tailprobe|uatsweep")
        ->required();
    verify->add_option("--seed", verify_seed, "seed for the trained-model checks")
        ->capture_default_str();
    verify->add_option("--jobs", verify_jobs, "worker threads")->capture_default_str();
    verify->add_option("--out", verify_out, "output directory")->capture_default_str();

    // emit
    std::string emit_study, emit_out = "out/emit/curves.csv";
    auto* emit = app.add_subcommand("emit", "re-emit the curve CSV from a study snapshot");
    emit->add_option("--study", emit_study, "study.json (or its directory)")->required();
    emit->add_option("--out", emit_out, "output CSV path (or directory)")->capture_default_str();

    std::string config_sink;
    for (CLI::App* sub : {simulate, train, study, ingest, verify, emit})
        sub->add_option("--config", config_sink, "plain key = value config file; flags override");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        if (!args.empty()) {
            CLI::App* sub = nullptr;
            for (CLI::App* s : {simulate, train, study, ingest, verify, emit})
                if (s->get_name() == args[0]) sub = s;
            std::string config_path;
            for (std::size_t i = 1; i < args.size(); ++i) {
                if (args[i] == "--config" && i + 1 < args.size())
                    config_path = args[i + 1];
                else if (args[i].rfind("--config=", 0) == 0)
                    config_path = args[i].substr(9);
            }
            if (sub && !config_path.empty()) {
                const auto extra = config_file_tokens(sub, config_path, args);
                args.insert(args.begin() + 1, extra.begin(), extra.end());
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim_flags);
        if (train->parsed()) return cmd_study("train", train_flags, /*snapshot_params=*/true);
        if (study->parsed()) return cmd_study("study", study_flags, /*snapshot_params=*/false);
        if (ingest->parsed())
            return cmd_ingest(ingest_inputs, ingest_r, ingest_q, ingest_daycount, ingest_split,
                              ingest_out);
        if (verify->parsed()) return cmd_verify(verify_check, verify_seed, verify_jobs, verify_out);
        if (emit->parsed()) return cmd_emit(emit_study, emit_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
