#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "renormlab/errors.hpp"

namespace renormlab {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Rat make_rat(long long p, long long q) {
    if (q == 0) throw ParseError("rational with zero denominator");
    return Rat(BigInt(p), BigInt(q));
}

// Parses "p/q" or "p" (integers of arbitrary size, optional sign).
Rat parse_rat(const std::string& text);

// Serializes as "p/q" ("p" when q == 1).
std::string rat_to_string(const Rat& value);

double rat_to_double(const Rat& value);

// floor(log2(value)) for value > 0.
long floor_log2(const Rat& value);

// Exact value num / (2^e2 * 3^e3), kept unnormalized so sums and
// comparisons avoid gcd work. Used by the stabilized geometric tails of the
// recursive norms, where denominators are powers of 2 and 3 times a small
// fixed factor that callers scale away up front.
struct TailVal {
    BigInt num;
    int e2 = 0;
    int e3 = 0;

    TailVal() : num(0) {}
    explicit TailVal(BigInt n, int a = 0, int b = 0) : num(std::move(n)), e2(a), e3(b) {}
    static TailVal from_rat(const Rat& r);

    bool is_zero() const { return num.is_zero(); }
    Rat to_rat() const;
};

TailVal tv_add(const TailVal& a, const TailVal& b);
TailVal tv_sub(const TailVal& a, const TailVal& b);
TailVal tv_mul(const TailVal& a, const TailVal& b);
// value * 2^-k / value * 3^-k
TailVal tv_div_pow2(const TailVal& a, int k);
TailVal tv_div_pow3(const TailVal& a, int k);
int tv_cmp(const TailVal& a, const TailVal& b);

}  // namespace renormlab
