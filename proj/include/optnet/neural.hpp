#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "optnet/sample.hpp"

namespace optnet {

/// Hidden-layer activation. The first eleven form the study catalogue;
/// `linear` is kept for diagnostics and tests (a width-1 linear net is an
/// exactly solvable least-squares problem).
enum class Activation {
    logistic,
    tanh,
    relu,
    elu,
    selu,
    softplus,
    softsign,
    softmax,
    hard_sigmoid,
    exponential,
    swish,
    linear,
};

/// The eleven activations used by studies (excludes linear).
std::span<const Activation> activation_catalogue();

std::string_view activation_name(Activation act);
Activation activation_from_name(std::string_view name);

/// True when the activation's range is bounded, so the net output is
/// bounded by sum |w_out| * sup |h|.
bool activation_is_bounded(Activation act);

/// Pre-activation points where the derivative jumps; gradient checks must
/// stay away from these.
std::vector<double> activation_kinks(Activation act);

/// Parameters of a single-hidden-layer net with linear output:
///   output(s, tau) = sum_i w_out[i] * h(w_s[i]*s + w_tau[i]*tau - threshold[i])
/// For softmax, h is applied jointly across the k pre-activations.
struct MlpParams {
    std::vector<double> w_s;
    std::vector<double> w_tau;
    std::vector<double> threshold;
    std::vector<double> w_out;

    int units() const { return static_cast<int>(w_s.size()); }

    static MlpParams zeros(int k);
};

enum class InitScheme { glorot_uniform };

/// Fan-balanced uniform initialization, deterministic in the seed. Hidden
/// weights and thresholds are drawn with limit sqrt(6/(2+k)), output
/// weights with limit sqrt(6/(k+1)); draw order is w_s, w_tau, threshold,
/// w_out.
MlpParams init_params(int k, std::uint64_t seed, InitScheme scheme = InitScheme::glorot_uniform);

/// Hidden layer evaluation: fills pre-activations z and activations h
/// (both of size k).
void hidden_layer(const MlpParams& params, Activation act, double s, double tau,
                  std::span<double> z, std::span<double> h);

/// Net output at (s, tau).
double forward(const MlpParams& params, Activation act, double s, double tau);

/// Mean squared error; throws on empty or mismatched inputs.
double mse(std::span<const double> predictions, std::span<const double> targets);

/// Analytic gradient of the batch MSE with respect to every parameter,
/// same shape as MlpParams. Kinked activations take subgradient 0 at the
/// kink.
MlpParams gradient(const MlpParams& params, Activation act, std::span<const Sample> batch,
                   Target target);

/// MSE of the net over a whole dataset against the selected target.
double dataset_mse(const MlpParams& params, Activation act, std::span<const Sample> samples,
                   Target target);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam optimizer state: bias-corrected first/second moment accumulators
/// with the same shape as the parameters.
struct AdamState {
    AdamConfig config;
    long step = 0;
    MlpParams m;
    MlpParams v;

    AdamState() = default;
    AdamState(int k, const AdamConfig& cfg)
        : config(cfg), m(MlpParams::zeros(k)), v(MlpParams::zeros(k)) {}
};

/// One Adam update of `params` in place from `grad`.
void adam_step(AdamState& state, MlpParams& params, const MlpParams& grad);

/// One training epoch: deterministic shuffle by `shuffle_seed`, partition
/// into batches (last one may be short), one adam_step per batch. Returns
/// the full-dataset MSE after the epoch.
double train_epoch(MlpParams& params, AdamState& state, Activation act,
                   std::span<const Sample> dataset, int batch_size, std::uint64_t shuffle_seed,
                   Target target);

/// Flat `name,index,value` CSV snapshot of the parameters.
void write_params_csv(const std::string& path, const MlpParams& params);

}  // namespace optnet
