#pragma once

#include <cstdint>

#include "renormlab/rational.hpp"

namespace renormlab {

// splitmix64: small, fast, and identical on every platform, which keeps
// probe reports byte-reproducible across builds.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // rejection-free modulo is fine here: n is tiny relative to 2^64
        return next() % n;
    }

    long range(long lo, long hi) {  // inclusive bounds
        return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool coin() { return (next() & 1u) != 0; }

    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // random p/q with |p| <= num_bound, 1 <= q <= den_bound
    Rat rat(long num_bound, long den_bound) {
        long p = range(-num_bound, num_bound);
        long q = range(1, den_bound);
        return make_rat(p, q);
    }

    // derive an independent stream (for per-sample determinism under --jobs)
    Rng fork(std::uint64_t salt) const {
        Rng child(state_ ^ (0xa0761d6478bd642fULL * (salt + 1)));
        child.next();
        return child;
    }

private:
    std::uint64_t state_;
};

}  // namespace renormlab
