#include "optnet/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "optnet/market_sim.hpp"
#include "optnet/parallel.hpp"
#include "optnet/quadrature.hpp"
#include "optnet/rng.hpp"

namespace optnet {
namespace {

void write_bound_csv(const std::string& path, const std::string& check,
                     const std::vector<BoundPoint>& points) {
    std::FILE* file = std::fopen(path.c_str(), "wb");
    if (!file) throw std::runtime_error("write_csv: cannot open " + path);
    std::fputs("check,point,lhs,rhs,slack\n", file);
    for (const auto& p : points)
        std::fprintf(file, "%s,%s,%.17g,%.17g,%.17g\n", check.c_str(), p.label.c_str(), p.lhs,
                     p.rhs, p.slack());
    if (std::fclose(file) != 0) throw std::runtime_error("write_csv: write failed: " + path);
}

BoundReport finalize_report(std::string check, std::string grid, std::vector<BoundPoint> points,
                            bool strict) {
    BoundReport report;
    report.check = std::move(check);
    report.grid_description = std::move(grid);
    report.points = std::move(points);
    if (report.points.empty()) throw std::invalid_argument(report.check + ": empty grid");
    report.witness = 0;
    for (std::size_t i = 0; i < report.points.size(); ++i)
        if (report.points[i].slack() > report.points[report.witness].slack()) report.witness = i;
    report.max_slack = report.points[report.witness].slack();
    report.pass = strict ? report.max_slack < 0.0 : report.max_slack <= 0.0;
    return report;
}

double logistic_fn(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::string format_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::string BoundReport::to_text() const {
    std::ostringstream os;
    os << "check: " << check << "\n";
    os << "grid: " << grid_description << "\n";
    os << "points: " << points.size() << "\n";
    os << "result: " << (pass ? "PASS" : "FAIL") << "\n";
    const auto& w = points[witness];
    os << (pass ? "tightest point: " : "violated at: ") << w.label << "  lhs=" << format_g(w.lhs)
       << "  rhs=" << format_g(w.rhs) << "  slack=" << format_g(w.slack()) << "\n";
    return os.str();
}

void BoundReport::write_csv(const std::string& path) const {
    write_bound_csv(path, check, points);
}

BoundReport check_mills_bound(const std::vector<double>& t_grid) {
    std::vector<BoundPoint> points;
    points.reserve(t_grid.size());
    for (double t : t_grid) {
        if (!(t > 0.0)) throw std::invalid_argument("check_mills_bound: t must be > 0");
        // upper tail through the CDF's negative-argument path (no 1 - N(t)
        // cancellation)
        const double lhs = norm_cdf(-t);
        const double rhs = 0.5 * std::exp(-0.5 * t * t);
        points.push_back({"t=" + format_g(t), lhs, rhs});
    }
    return finalize_report("mills", format_g(t_grid.front()) + " <= t <= " +
                                        format_g(t_grid.back()) + " (" +
                                        std::to_string(t_grid.size()) + " points)",
                           std::move(points), /*strict=*/true);
}

std::vector<double> default_mills_grid() {
    const int n = 200;
    const double lo = 1e-3, hi = 10.0;
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i)
        grid[static_cast<std::size_t>(i)] =
            lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    return grid;
}

std::string ShellDecayReport::to_text() const {
    std::ostringstream os;
    os << "check: integrability (p=" << p << ")\n";
    os << "shells:\n";
    for (const auto& s : shells)
        os << "  [" << format_g(s.lo) << ", " << format_g(s.hi)
           << "]: " << format_g(s.integral) << "\n";
    os << "consecutive ratios (checked once shell start >= " << format_g(decay_threshold_s)
       << "):\n";
    for (const auto& r : ratios)
        os << "  I(j=" << r.j + 1 << ")/I(j=" << r.j << ") = " << format_g(r.ratio)
           << (r.checked ? "  [checked]" : "") << "\n";
    os << "result: " << (pass ? "PASS" : "FAIL") << "\n";
    return os.str();
}

void ShellDecayReport::write_csv(const std::string& path) const {
    std::FILE* file = std::fopen(path.c_str(), "wb");
    if (!file) throw std::runtime_error("write_csv: cannot open " + path);
    std::fputs("check,point,lhs,rhs,slack\n", file);
    // shells as informational rows; checked ratios against the 0.1 target
    for (const auto& s : shells)
        std::fprintf(file, "integrability_p%d,shell_j=%d,%.17g,nan,nan\n", p, s.j, s.integral);
    for (const auto& r : ratios)
        if (r.checked)
            std::fprintf(file, "integrability_p%d,ratio_j=%d,%.17g,0.1,%.17g\n", p, r.j, r.ratio,
                         r.ratio - 0.1);
    if (std::fclose(file) != 0) throw std::runtime_error("write_csv: write failed: " + path);
}

ShellDecayReport check_timevalue_integrability(const MarketParams& params, int p,
                                               int s_max_exponent) {
    params.validate();
    if (p != 1 && p != 2) throw std::invalid_argument("integrability: p must be 1 or 2");
    if (s_max_exponent < 1) throw std::invalid_argument("integrability: need at least one shell");

    ShellDecayReport report;
    report.p = p;

    for (int j = 0; j <= s_max_exponent; ++j) {
        const double lo = std::pow(2.0, j);
        const double hi = 2.0 * lo;
        const double integral = integrate_fixed(
            [&](double tau) {
                if (tau <= 0.0) return 0.0;
                return integrate_adaptive(
                    [&](double s) {
                        const double g = time_value({s, tau}, params);
                        return p == 1 ? std::fabs(g) : g * g;
                    },
                    lo, hi, 1e-9);
            },
            0.0, 1.0, 64);
        report.shells.push_back({j, lo, hi, integral});
    }

    bool pass = true;
    bool any_checked = false;
    for (std::size_t i = 0; i + 1 < report.shells.size(); ++i) {
        const auto& a = report.shells[i];
        const auto& b = report.shells[i + 1];
        const double ratio = b.integral / a.integral;
        const bool checked = a.lo >= report.decay_threshold_s;
        if (checked) {
            any_checked = true;
            if (!(ratio < 0.1)) pass = false;
        }
        report.ratios.push_back({a.j, ratio, checked});
    }
    report.pass = pass && any_checked;
    return report;
}

double SigmoidBoundConstants::envelope() const {
    return std::fabs(y2) + std::max(std::fabs(theta1), std::fabs(theta2));
}

double SigmoidBoundConstants::x_cut() const { return 2.0 * envelope() / std::fabs(y1); }

double SigmoidBoundConstants::beta_cut() const { return 1.0 / envelope(); }

double SigmoidBoundConstants::amplitude() const { return std::fabs(theta1 - theta2); }

void SigmoidBoundConstants::validate() const {
    if (y1 == 0.0) throw std::invalid_argument("sigmoid bound: y1 must be nonzero");
    if (envelope() <= 0.0)
        throw std::invalid_argument("sigmoid bound: degenerate constants (envelope = 0)");
}

BoundReport check_sigmoid_difference_bound(const SigmoidBoundConstants& consts,
                                           const std::vector<double>& beta_grid,
                                           const std::vector<double>& x1_grid,
                                           const std::vector<double>& x2_grid) {
    consts.validate();
    const double beta_cut = consts.beta_cut();
    const double x_cut = consts.x_cut();
    const double amplitude = consts.amplitude();

    std::vector<BoundPoint> points;
    points.reserve(beta_grid.size() * x1_grid.size() * x2_grid.size());
    for (double beta : beta_grid) {
        if (!(beta > beta_cut))
            throw std::invalid_argument("sigmoid bound: grid beta must exceed beta threshold");
        for (double x1 : x1_grid) {
            if (!(std::fabs(x1) > x_cut))
                throw std::invalid_argument("sigmoid bound: grid |x1| must exceed x threshold");
            for (double x2 : x2_grid) {
                if (!(x2 >= 0.0 && x2 <= 1.0))
                    throw std::invalid_argument("sigmoid bound: x2 must be in [0, 1]");
                const double dot = consts.y1 * x1 + consts.y2 * x2;
                const double lhs = std::fabs(logistic_fn(beta * (dot + consts.theta1)) -
                                             logistic_fn(beta * (dot + consts.theta2)));
                const double rhs =
                    beta_cut * amplitude * std::exp(-0.5 * beta_cut * std::fabs(consts.y1 * x1));
                points.push_back({"beta=" + format_g(beta) + ";x1=" + format_g(x1) +
                                      ";x2=" + format_g(x2),
                                  lhs, rhs});
            }
        }
    }
    std::ostringstream grid;
    grid << beta_grid.size() << " betas > " << format_g(beta_cut) << ", " << x1_grid.size()
         << " x1 with |x1| > " << format_g(x_cut) << ", " << x2_grid.size() << " x2 in [0,1]";
    return finalize_report("sigmoid_difference", grid.str(), std::move(points), /*strict=*/false);
}

SigmoidBoundGrids default_sigmoid_bound_grids(const SigmoidBoundConstants& consts) {
    consts.validate();
    const double beta_cut = consts.beta_cut();
    const double x_cut = consts.x_cut();
    SigmoidBoundGrids grids;
    for (double f : {1.0001, 1.5, 2.0, 5.0, 20.0, 100.0}) grids.beta.push_back(beta_cut * f);
    for (double f : {1.0001, 1.5, 2.0, 4.0, 10.0, 30.0}) {
        grids.x1.push_back(x_cut * f);
        grids.x1.push_back(-x_cut * f);
    }
    grids.x2 = {0.0, 0.25, 0.5, 0.75, 1.0};
    return grids;
}

std::string TailProbeResult::to_text() const {
    std::ostringstream os;
    os << "check: tail_probe (price-space absolute error)\n";
    os << "price net output bound (sum |w_out| * sup|h|): " << format_g(price_net_output_bound)
       << "\n";
    os << "s";
    for (double tau : tau_grid) os << "  err_f(tau=" << format_g(tau) << ")";
    for (double tau : tau_grid) os << "  err_g(tau=" << format_g(tau) << ")";
    os << "\n";
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        os << format_g(s_grid[i]);
        for (std::size_t j = 0; j < tau_grid.size(); ++j)
            os << "  " << format_g(price_model_error[i * tau_grid.size() + j]);
        for (std::size_t j = 0; j < tau_grid.size(); ++j)
            os << "  " << format_g(timevalue_model_error[i * tau_grid.size() + j]);
        os << "\n";
    }
    return os.str();
}

void TailProbeResult::write_csv(const std::string& path) const {
    std::FILE* file = std::fopen(path.c_str(), "wb");
    if (!file) throw std::runtime_error("write_csv: cannot open " + path);
    std::fputs("check,point,lhs,rhs,slack\n", file);
    // lhs = price-model error, rhs = timevalue-model error at the same point
    for (std::size_t i = 0; i < s_grid.size(); ++i)
        for (std::size_t j = 0; j < tau_grid.size(); ++j) {
            const std::size_t at = i * tau_grid.size() + j;
            std::fprintf(file, "tail_probe,s=%g;tau=%g,%.17g,%.17g,%.17g\n", s_grid[i],
                         tau_grid[j], price_model_error[at], timevalue_model_error[at],
                         price_model_error[at] - timevalue_model_error[at]);
        }
    if (std::fclose(file) != 0) throw std::runtime_error("write_csv: write failed: " + path);
}

TailProbeResult tail_generalization_probe(const MlpParams& price_net, const MlpParams& tv_net,
                                          Activation act, const MarketParams& params,
                                          const std::vector<double>& s_grid,
                                          const std::vector<double>& tau_grid) {
    if (s_grid.empty() || tau_grid.empty())
        throw std::invalid_argument("tail_generalization_probe: empty grid");

    TailProbeResult result;
    result.s_grid = s_grid;
    result.tau_grid = tau_grid;
    result.price_model_error.reserve(s_grid.size() * tau_grid.size());
    result.timevalue_model_error.reserve(s_grid.size() * tau_grid.size());

    double out_bound = 0.0;
    for (double w : price_net.w_out) out_bound += std::fabs(w);
    result.price_net_output_bound = activation_is_bounded(act) ? out_bound : 0.0;

    for (double s : s_grid) {
        for (double tau : tau_grid) {
            const NormalizedQuote quote{s, tau};
            const double f = call_value(quote, params);
            const double fitted_price = forward(price_net, act, s, tau);
            const double reconstructed =
                forward(tv_net, act, s, tau) + intrinsic_value(quote, params);
            result.price_model_error.push_back(std::fabs(fitted_price - f));
            result.timevalue_model_error.push_back(std::fabs(reconstructed - f));
        }
    }
    return result;
}

std::string UatSweepResult::to_text() const {
    std::ostringstream os;
    os << "check: uat_sweep (approximation-capacity illustration, not a proof)\n";
    os << "L2 fit error of a width-k net to the time-value surface, median over seeds:\n";
    for (const auto& c : cells)
        os << "  k=" << c.k << "  s_max=" << format_g(c.s_max)
           << "  l2_error=" << format_g(c.l2_error) << "\n";
    os << "nonincreasing in k (5% band): " << (monotone_in_k ? "PASS" : "FAIL") << "\n";
    return os.str();
}

void UatSweepResult::write_csv(const std::string& path) const {
    std::FILE* file = std::fopen(path.c_str(), "wb");
    if (!file) throw std::runtime_error("write_csv: cannot open " + path);
    std::fputs("check,point,lhs,rhs,slack\n", file);
    for (const auto& c : cells)
        std::fprintf(file, "uat_sweep,k=%d;s_max=%g,%.17g,nan,nan\n", c.k, c.s_max, c.l2_error);
    if (std::fclose(file) != 0) throw std::runtime_error("write_csv: write failed: " + path);
}

UatSweepResult empirical_uat_sweep(const std::vector<int>& k_list,
                                   const std::vector<double>& s_max_list,
                                   const MarketParams& params, int n_seeds,
                                   std::uint64_t base_seed, unsigned jobs) {
    params.validate();
    if (k_list.empty() || s_max_list.empty() || n_seeds < 1)
        throw std::invalid_argument("empirical_uat_sweep: empty sweep");

    struct Task {
        int k;
        double s_max;
        int seed_index;
    };
    std::vector<Task> tasks;
    for (double s_max : s_max_list)
        for (int k : k_list)
            for (int seed = 0; seed < n_seeds; ++seed) tasks.push_back({k, s_max, seed});

    const int grid_s = 64, grid_tau = 16;
    const int epochs = 300, batch_size = 128;

    std::vector<double> errors(tasks.size(), 0.0);
    parallel_for(tasks.size(), jobs, [&](std::size_t ti) {
        const Task& task = tasks[ti];
        // training grid: uniform cell midpoints over [0, s_max] x [0, 1]
        std::vector<Sample> grid;
        grid.reserve(static_cast<std::size_t>(grid_s) * grid_tau);
        for (int i = 0; i < grid_s; ++i)
            for (int j = 0; j < grid_tau; ++j) {
                const double s = task.s_max * (i + 0.5) / grid_s;
                const double tau = (j + 0.5) / static_cast<double>(grid_tau);
                const NormalizedQuote quote{s, tau};
                const double tv = time_value(quote, params);
                grid.push_back(Sample{s, tau, tv + intrinsic_value(quote, params), tv});
            }

        const std::uint64_t seed =
            derive_seed(base_seed, static_cast<std::uint64_t>(task.seed_index),
                        static_cast<std::uint64_t>(task.k),
                        static_cast<std::uint64_t>(task.s_max * 16.0));
        MlpParams net = init_params(task.k, derive_seed(seed, 1));
        AdamConfig adam_config;
        adam_config.learning_rate = 0.01;
        AdamState adam(task.k, adam_config);
        for (int epoch = 0; epoch < epochs; ++epoch)
            train_epoch(net, adam, Activation::logistic, grid, batch_size,
                        derive_seed(seed, 2, static_cast<std::uint64_t>(epoch)),
                        Target::timevalue);

        const double sq_err = integrate_fixed(
            [&](double tau) {
                return integrate_fixed(
                    [&](double s) {
                        const double d =
                            forward(net, Activation::logistic, s, tau) - time_value({s, tau}, params);
                        return d * d;
                    },
                    0.0, task.s_max, 64);
            },
            0.0, 1.0, 16);
        errors[ti] = std::sqrt(std::max(sq_err, 0.0));
    });

    UatSweepResult result;
    result.monotone_in_k = true;
    std::size_t ti = 0;
    for (double s_max : s_max_list) {
        double previous = 0.0;
        for (std::size_t ki = 0; ki < k_list.size(); ++ki) {
            std::vector<double> seed_errors;
            for (int seed = 0; seed < n_seeds; ++seed) seed_errors.push_back(errors[ti++]);
            std::sort(seed_errors.begin(), seed_errors.end());
            const double median = seed_errors[seed_errors.size() / 2];
            result.cells.push_back({k_list[ki], s_max, median});
            if (ki > 0 && median > previous * 1.05) result.monotone_in_k = false;
            previous = median;
        }
    }
    return result;
}

}  // namespace optnet
