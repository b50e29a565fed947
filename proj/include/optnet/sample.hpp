#pragma once

#include <stdexcept>
#include <string_view>

namespace optnet {

/// One training example: strike-normalized inputs and both learning targets.
/// `price` is C/K, `timevalue` is V/K; price = timevalue + intrinsic by
/// construction.
struct Sample {
    double moneyness = 0.0;
    double tau = 0.0;
    double price = 0.0;
    double timevalue = 0.0;
};

/// Which target a model learns.
enum class Target { price, timevalue };

inline double target_of(const Sample& s, Target t) {
    return t == Target::price ? s.price : s.timevalue;
}

inline std::string_view target_name(Target t) {
    return t == Target::price ? "price" : "timevalue";
}

/// Dataset roles used in experiments and reports.
enum class Role { train, validation, tail_05, tail_20, expiry, test };

inline std::string_view role_name(Role r) {
    switch (r) {
        case Role::train: return "train";
        case Role::validation: return "validation";
        case Role::tail_05: return "tail_0.5";
        case Role::tail_20: return "tail_2.0";
        case Role::expiry: return "expiry";
        case Role::test: return "test";
    }
    throw std::logic_error("role_name: bad role");
}

}  // namespace optnet
