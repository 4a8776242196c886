#pragma once

#include <cstdint>

#include "localinv/common.hpp"

namespace localinv {

/// Counter-based deterministic generator (splitmix64). Streams are derived
/// by hashing (seed, stream tags), so any sampling task can be partitioned
/// into chunks whose draws do not depend on execution order or thread count.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [-1, 1).
    double symmetric() { return 2.0 * uniform() - 1.0; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Coordinates uniform in [-1, 1).
    Vec cube(Eigen::Index dim) {
        Vec v(dim);
        for (Eigen::Index i = 0; i < dim; ++i) v[i] = symmetric();
        return v;
    }

    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

private:
    std::uint64_t state_;
};

/// Hash-combine two 64-bit values; used to derive per-chunk / per-task
/// sub-seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    Rng r(a ^ (b * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
    r.next();
    return r.next();
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

}  // namespace localinv
