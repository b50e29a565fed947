#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optnet/neural.hpp"
#include "optnet/pricing.hpp"

namespace optnet {

/// One evaluated inequality: the bound holds at the point iff lhs <= rhs
/// (strictly, for the strict checks); slack = lhs - rhs.
struct BoundPoint {
    std::string label;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack() const { return lhs - rhs; }
};

/// Grid evaluation of an analytic bound. Passes iff no point violates it;
/// the witness is the point of maximal slack (the closest call or the
/// worst violation).
struct BoundReport {
    std::string check;
    std::string grid_description;
    std::vector<BoundPoint> points;
    double max_slack = 0.0;
    std::size_t witness = 0;
    bool pass = false;

    std::string to_text() const;
    void write_csv(const std::string& path) const;
};

/// Gaussian upper-tail (Mills-ratio) bound: for t > 0,
///   1 - N(t) < 0.5 * exp(-t^2 / 2),
/// evaluated through norm_cdf. Strict inequality required at every point.
BoundReport check_mills_bound(const std::vector<double>& t_grid);

/// 200 log-spaced points on [1e-3, 10].
std::vector<double> default_mills_grid();

/// Dyadic-shell integrals of |g|^p over [2^j, 2^(j+1)] x [0,1]: adaptive
/// Gauss-Kronrod in moneyness (rel tol 1e-9), 64-point fixed rule in tau.
/// Passes iff consecutive shell ratios stay below 0.1 once the shell start
/// reaches decay_threshold_s, certifying super-polynomial tail decay.
struct ShellDecayReport {
    int p = 1;
    struct Shell {
        int j;
        double lo, hi;
        double integral;
    };
    std::vector<Shell> shells;
    struct RatioPoint {
        int j;  // ratio of shell j+1 over shell j
        double ratio;
        bool checked;  // participates in the pass decision
    };
    std::vector<RatioPoint> ratios;
    double decay_threshold_s = 32.0;
    bool pass = false;

    std::string to_text() const;
    void write_csv(const std::string& path) const;
};

ShellDecayReport check_timevalue_integrability(const MarketParams& params, int p,
                                               int s_max_exponent = 7);

/// Constructive constants for the scaled-sigmoid difference decay bound:
/// given direction y = (y1, y2) with y1 != 0 and thresholds theta1, theta2,
///   envelope  = |y2| + max(|theta1|, |theta2|)      (bounds |y2*x2 + theta|)
///   x_cut     = 2 * envelope / |y1|
///   beta_cut  = 1 / envelope                        (equals 2 / (|y1| * x_cut))
///   amplitude = |theta1 - theta2|
/// For beta > beta_cut and |x1| > x_cut, x2 in [0, 1]:
///   |sigma(beta*(<y,x> + theta1)) - sigma(beta*(<y,x> + theta2))|
///       <= beta_cut * amplitude * exp(-0.5 * beta_cut * |y1 * x1|).
struct SigmoidBoundConstants {
    double y1 = 1.0;
    double y2 = 0.5;
    double theta1 = 0.0;
    double theta2 = 1.0;

    double envelope() const;
    double x_cut() const;
    double beta_cut() const;
    double amplitude() const;

    void validate() const;
};

BoundReport check_sigmoid_difference_bound(const SigmoidBoundConstants& consts,
                                           const std::vector<double>& beta_grid,
                                           const std::vector<double>& x1_grid,
                                           const std::vector<double>& x2_grid);

/// Default grids for the sigmoid-difference check: betas and |x1| values
/// covering just-above-threshold through deep-tail points, both signs of x1.
struct SigmoidBoundGrids {
    std::vector<double> beta;
    std::vector<double> x1;
    std::vector<double> x2;
};
SigmoidBoundGrids default_sigmoid_bound_grids(const SigmoidBoundConstants& consts);

/// Price-space absolute errors of two trained nets far in the money. The
/// price model's error grows with s (a bounded net chasing an unbounded
/// target); the timevalue model's reconstructed price stays close because
/// the time value itself decays.
struct TailProbeResult {
    std::vector<double> s_grid;
    std::vector<double> tau_grid;
    // row-major [s][tau]
    std::vector<double> price_model_error;
    std::vector<double> timevalue_model_error;
    double price_net_output_bound = 0.0;  // sum |w_out| * sup |h|

    std::string to_text() const;
    void write_csv(const std::string& path) const;
};

TailProbeResult tail_generalization_probe(const MlpParams& price_net, const MlpParams& tv_net,
                                          Activation act, const MarketParams& params,
                                          const std::vector<double>& s_grid,
                                          const std::vector<double>& tau_grid);

/// Small approximation sweep: fit nets of width k to the time-value
/// surface on truncations [0, s_max] x [0, 1] and report the L2 error per
/// (k, s_max), median over seeds. Monotonicity in k is checked within a 5%
/// band. An illustration of approximation capacity, not a proof.
struct UatSweepResult {
    struct Cell {
        int k;
        double s_max;
        double l2_error;  // median over seeds
    };
    std::vector<Cell> cells;
    bool monotone_in_k = false;

    std::string to_text() const;
    void write_csv(const std::string& path) const;
};

UatSweepResult empirical_uat_sweep(const std::vector<int>& k_list,
                                   const std::vector<double>& s_max_list,
                                   const MarketParams& params, int n_seeds = 5,
                                   std::uint64_t base_seed = 1, unsigned jobs = 1);

}  // namespace optnet
