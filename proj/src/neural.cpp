#include "optnet/neural.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "optnet/rng.hpp"

namespace optnet {
namespace {

constexpr double kSeluScale = 1.0507009873554804934193349852946;
constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

double logistic_fn(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// scalar forward map; softmax is handled at the layer level
double activate(Activation act, double z) {
    switch (act) {
        case Activation::logistic: return logistic_fn(z);
        case Activation::tanh: return std::tanh(z);
        case Activation::relu: return z > 0.0 ? z : 0.0;
        case Activation::elu: return z > 0.0 ? z : std::expm1(z);
        case Activation::selu:
            return z > 0.0 ? kSeluScale * z : kSeluScale * kSeluAlpha * std::expm1(z);
        case Activation::softplus:
            if (z > 30.0) return z;
            if (z < -30.0) return std::exp(z);
            return std::log1p(std::exp(z));
        case Activation::softsign: return z / (1.0 + std::fabs(z));
        case Activation::hard_sigmoid: return std::clamp(0.2 * z + 0.5, 0.0, 1.0);
        case Activation::exponential: return std::exp(z);
        case Activation::swish: return z * logistic_fn(z);
        case Activation::linear: return z;
        case Activation::softmax: break;
    }
    throw std::logic_error("activate: softmax is layer-wise");
}

double activate_deriv(Activation act, double z) {
    switch (act) {
        case Activation::logistic: {
            const double h = logistic_fn(z);
            return h * (1.0 - h);
        }
        case Activation::tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::elu: return z > 0.0 ? 1.0 : std::exp(z);
        case Activation::selu: return z > 0.0 ? kSeluScale : kSeluScale * kSeluAlpha * std::exp(z);
        case Activation::softplus: return logistic_fn(z);
        case Activation::softsign: {
            const double d = 1.0 + std::fabs(z);
            return 1.0 / (d * d);
        }
        case Activation::hard_sigmoid: return (z > -2.5 && z < 2.5) ? 0.2 : 0.0;
        case Activation::exponential: return std::exp(z);
        case Activation::swish: {
            const double h = logistic_fn(z);
            return h * (1.0 + z * (1.0 - h));
        }
        case Activation::linear: return 1.0;
        case Activation::softmax: break;
    }
    throw std::logic_error("activate_deriv: softmax is layer-wise");
}

struct NameEntry {
    Activation act;
    std::string_view name;
};

constexpr std::array<NameEntry, 12> kNames{{
    {Activation::logistic, "sigmoid"},
    {Activation::tanh, "tanh"},
    {Activation::relu, "relu"},
    {Activation::elu, "elu"},
    {Activation::selu, "selu"},
    {Activation::softplus, "softplus"},
    {Activation::softsign, "softsign"},
    {Activation::softmax, "softmax"},
    {Activation::hard_sigmoid, "hard_sigmoid"},
    {Activation::exponential, "exponential"},
    {Activation::swish, "swish"},
    {Activation::linear, "linear"},
}};

constexpr std::array<Activation, 11> kCatalogue{
    Activation::logistic,   Activation::tanh,        Activation::relu,
    Activation::elu,        Activation::selu,        Activation::softplus,
    Activation::softsign,   Activation::softmax,     Activation::hard_sigmoid,
    Activation::exponential, Activation::swish,
};

void check_batch(std::span<const Sample> batch) {
    if (batch.empty()) throw std::invalid_argument("gradient: batch must be nonempty");
}

}  // namespace

std::span<const Activation> activation_catalogue() { return kCatalogue; }

std::string_view activation_name(Activation act) {
    for (const auto& e : kNames)
        if (e.act == act) return e.name;
    throw std::logic_error("activation_name: bad activation");
}

Activation activation_from_name(std::string_view name) {
    for (const auto& e : kNames)
        if (e.name == name) return e.act;
    if (name == "logistic") return Activation::logistic;
    throw std::invalid_argument("unknown activation: " + std::string(name));
}

bool activation_is_bounded(Activation act) {
    switch (act) {
        case Activation::logistic:
        case Activation::tanh:
        case Activation::softsign:
        case Activation::softmax:
        case Activation::hard_sigmoid: return true;
        default: return false;
    }
}

std::vector<double> activation_kinks(Activation act) {
    switch (act) {
        case Activation::relu:
        case Activation::selu: return {0.0};
        case Activation::hard_sigmoid: return {-2.5, 2.5};
        default: return {};
    }
}

MlpParams MlpParams::zeros(int k) {
    MlpParams p;
    p.w_s.assign(static_cast<std::size_t>(k), 0.0);
    p.w_tau.assign(static_cast<std::size_t>(k), 0.0);
    p.threshold.assign(static_cast<std::size_t>(k), 0.0);
    p.w_out.assign(static_cast<std::size_t>(k), 0.0);
    return p;
}

MlpParams init_params(int k, std::uint64_t seed, InitScheme scheme) {
    if (k < 1) throw std::invalid_argument("init_params: k must be >= 1");
    (void)scheme;  // single scheme today
    const double hidden_limit = std::sqrt(6.0 / (2.0 + k));
    const double out_limit = std::sqrt(6.0 / (k + 1.0));

    Rng rng(seed);
    MlpParams p = MlpParams::zeros(k);
    auto fill = [&rng](std::vector<double>& v, double limit) {
        for (double& x : v) x = -limit + 2.0 * limit * rng.uniform01();
    };
    fill(p.w_s, hidden_limit);
    fill(p.w_tau, hidden_limit);
    fill(p.threshold, hidden_limit);
    fill(p.w_out, out_limit);
    return p;
}

void hidden_layer(const MlpParams& params, Activation act, double s, double tau,
                  std::span<double> z, std::span<double> h) {
    const std::size_t k = params.w_s.size();
    for (std::size_t i = 0; i < k; ++i)
        z[i] = params.w_s[i] * s + params.w_tau[i] * tau - params.threshold[i];
    if (act == Activation::softmax) {
        double zmax = z[0];
        for (std::size_t i = 1; i < k; ++i) zmax = std::max(zmax, z[i]);
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            h[i] = std::exp(z[i] - zmax);
            sum += h[i];
        }
        for (std::size_t i = 0; i < k; ++i) h[i] /= sum;
        return;
    }
    for (std::size_t i = 0; i < k; ++i) h[i] = activate(act, z[i]);
}

double forward(const MlpParams& params, Activation act, double s, double tau) {
    const std::size_t k = params.w_s.size();
    std::vector<double> z(k), h(k);
    hidden_layer(params, act, s, tau, z, h);
    double out = 0.0;
    for (std::size_t i = 0; i < k; ++i) out += params.w_out[i] * h[i];
    return out;
}

double mse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size())
        throw std::invalid_argument("mse: length mismatch");
    if (predictions.empty()) throw std::invalid_argument("mse: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - targets[i];
        sum += d * d;
    }
    return sum / static_cast<double>(predictions.size());
}

MlpParams gradient(const MlpParams& params, Activation act, std::span<const Sample> batch,
                   Target target) {
    check_batch(batch);
    const std::size_t k = params.w_s.size();
    MlpParams grad = MlpParams::zeros(static_cast<int>(k));
    std::vector<double> z(k), h(k);

    const double scale = 2.0 / static_cast<double>(batch.size());
    for (const Sample& sample : batch) {
        hidden_layer(params, act, sample.moneyness, sample.tau, z, h);
        double pred = 0.0;
        for (std::size_t i = 0; i < k; ++i) pred += params.w_out[i] * h[i];
        const double residual = scale * (pred - target_of(sample, target));

        for (std::size_t i = 0; i < k; ++i) {
            grad.w_out[i] += residual * h[i];
            double dz;
            if (act == Activation::softmax) {
                dz = residual * h[i] * (params.w_out[i] - pred);
            } else {
                dz = residual * params.w_out[i] * activate_deriv(act, z[i]);
            }
            grad.w_s[i] += dz * sample.moneyness;
            grad.w_tau[i] += dz * sample.tau;
            grad.threshold[i] -= dz;
        }
    }
    return grad;
}

double dataset_mse(const MlpParams& params, Activation act, std::span<const Sample> samples,
                   Target target) {
    if (samples.empty()) throw std::invalid_argument("dataset_mse: empty dataset");
    const std::size_t k = params.w_s.size();
    std::vector<double> z(k), h(k);
    double sum = 0.0;
    for (const Sample& sample : samples) {
        hidden_layer(params, act, sample.moneyness, sample.tau, z, h);
        double pred = 0.0;
        for (std::size_t i = 0; i < k; ++i) pred += params.w_out[i] * h[i];
        const double d = pred - target_of(sample, target);
        sum += d * d;
    }
    return sum / static_cast<double>(samples.size());
}

void adam_step(AdamState& state, MlpParams& params, const MlpParams& grad) {
    if (params.units() != grad.units() || params.units() != state.m.units())
        throw std::invalid_argument("adam_step: shape mismatch");
    state.step += 1;
    const AdamConfig& c = state.config;
    const double m_corr = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double v_corr = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));

    auto update = [&](std::vector<double>& p, std::vector<double>& m, std::vector<double>& v,
                      const std::vector<double>& g) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
            const double m_hat = m[i] / m_corr;
            const double v_hat = v[i] / v_corr;
            p[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
        }
    };
    update(params.w_s, state.m.w_s, state.v.w_s, grad.w_s);
    update(params.w_tau, state.m.w_tau, state.v.w_tau, grad.w_tau);
    update(params.threshold, state.m.threshold, state.v.threshold, grad.threshold);
    update(params.w_out, state.m.w_out, state.v.w_out, grad.w_out);
}

double train_epoch(MlpParams& params, AdamState& state, Activation act,
                   std::span<const Sample> dataset, int batch_size, std::uint64_t shuffle_seed,
                   Target target) {
    if (dataset.empty()) throw std::invalid_argument("train_epoch: empty dataset");
    if (batch_size < 1) throw std::invalid_argument("train_epoch: batch_size must be >= 1");

    std::vector<std::uint32_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0u);
    Rng rng(shuffle_seed);
    rng.shuffle(order);

    std::vector<Sample> batch;
    batch.reserve(static_cast<std::size_t>(batch_size));
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
        batch.clear();
        for (std::size_t i = start; i < stop; ++i) batch.push_back(dataset[order[i]]);
        const MlpParams grad = gradient(params, act, batch, target);
        adam_step(state, params, grad);
    }
    return dataset_mse(params, act, dataset, target);
}

void write_params_csv(const std::string& path, const MlpParams& params) {
    std::FILE* file = std::fopen(path.c_str(), "wb");
    if (!file) throw std::runtime_error("write_params_csv: cannot open " + path);
    std::fputs("name,index,value\n", file);
    auto dump = [file](const char* name, const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i)
            std::fprintf(file, "%s,%zu,%.17g\n", name, i, v[i]);
    };
    dump("w_s", params.w_s);
    dump("w_tau", params.w_tau);
    dump("threshold", params.threshold);
    dump("w_out", params.w_out);
    if (std::fclose(file) != 0) throw std::runtime_error("write_params_csv: write failed: " + path);
}

}  // namespace optnet
