#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace optnet {

/// splitmix64 step; used to derive independent sub-stream seeds from a base
/// seed. The constants are the reference ones from Vigna's splitmix64.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a stream seed from (base, tags...). Same inputs give the same
/// seed on every platform; different tag tuples give statistically
/// independent streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    std::uint64_t s = base;
    splitmix64(s);
    s ^= tag * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
    return splitmix64(s);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag1, std::uint64_t tag2) {
    return derive_seed(derive_seed(base, tag1), tag2);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag1, std::uint64_t tag2,
                                 std::uint64_t tag3) {
    return derive_seed(derive_seed(base, tag1, tag2), tag3);
}

/// Quantile of the standard normal distribution (Wichura's PPND16
/// algorithm, AS 241). Absolute error below 1e-15 over (0, 1).
double normal_quantile(double p);

/// Deterministic random stream. mt19937_64 output is pinned by the C++
/// standard, uniform doubles are built from raw bits, and normal variates
/// go through the inverse CDF, so streams are bit-identical across
/// platforms and compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (lo, hi); the endpoints are never returned.
    double uniform(double lo, double hi) {
        double u;
        do {
            u = uniform01();
        } while (u == 0.0);
        return lo + (hi - lo) * u;
    }

    /// Standard normal via inverse CDF (no rejection, stream-stable).
    double normal() {
        double u;
        do {
            u = uniform01();
        } while (u == 0.0);
        return normal_quantile(u);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Fisher-Yates with a pinned sampling rule (modulo reduction), so the
    /// permutation is identical everywhere. Bias for n < 2^32 is negligible
    /// and irrelevant here; reproducibility is the contract.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(engine_() % i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace optnet
