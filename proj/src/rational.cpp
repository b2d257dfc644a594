#include "renormlab/rational.hpp"

#include <algorithm>
#include <cmath>

namespace renormlab {

Rat parse_rat(const std::string& text) {
    auto bad = [&] { throw ParseError("malformed rational '" + text + "'"); };
    std::string s = text;
    s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; }),
            s.end());
    if (s.empty()) bad();
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rat(BigInt(s));
        BigInt p(s.substr(0, slash));
        BigInt q(s.substr(slash + 1));
        if (q == 0) bad();
        return Rat(p, q);
    } catch (const std::exception&) {
        bad();
    }
    return Rat();  // unreachable
}

std::string rat_to_string(const Rat& value) {
    const BigInt& p = numerator(value);
    const BigInt& q = denominator(value);
    if (q == 1) return p.str();
    return p.str() + "/" + q.str();
}

double rat_to_double(const Rat& value) { return value.convert_to<double>(); }

long floor_log2(const Rat& value) {
    if (value <= 0) throw ParamOutOfRangeError("floor_log2 needs a positive value");
    const BigInt& p = numerator(value);
    const BigInt& q = denominator(value);
    long est = static_cast<long>(msb(p)) - static_cast<long>(msb(q));
    // est is within 1 of the truth; fix up exactly.
    for (long k = est - 1; k <= est + 1; ++k) {
        // check 2^k <= value < 2^(k+1)
        BigInt lhs = p, rhs = q;
        if (k >= 0)
            rhs <<= k;
        else
            lhs <<= -k;
        if (lhs >= rhs) {
            BigInt lhs2 = p, rhs2 = q;
            long k1 = k + 1;
            if (k1 >= 0)
                rhs2 <<= k1;
            else
                lhs2 <<= -k1;
            if (lhs2 < rhs2) return k;
        }
    }
    throw Error("floor_log2 internal failure");
}

namespace {

const BigInt& pow3(int k) {
    static std::vector<BigInt> cache{BigInt(1)};
    while (static_cast<int>(cache.size()) <= k) cache.push_back(cache.back() * 3);
    return cache[static_cast<size_t>(k)];
}

}  // namespace

TailVal TailVal::from_rat(const Rat& r) {
    // Split the denominator as 2^a * 3^b * rest; fold `rest` into a division
    // that stays exact only when rest == 1, otherwise keep a scaled copy.
    BigInt p = numerator(r), q = denominator(r);
    int a = 0, b = 0;
    while (q % 2 == 0) { q /= 2; ++a; }
    while (q % 3 == 0) { q /= 3; ++b; }
    if (q != 1)
        throw ParamOutOfRangeError("TailVal requires a 2^a*3^b denominator; scale inputs first");
    return TailVal(std::move(p), a, b);
}

Rat TailVal::to_rat() const {
    BigInt den = BigInt(1) << e2;
    den *= pow3(e3);
    return Rat(num, den);
}

namespace {

// Rewrites both operands over the common denominator 2^max(e2) * 3^max(e3).
void align(const TailVal& a, const TailVal& b, BigInt& na, BigInt& nb, int& e2, int& e3) {
    e2 = std::max(a.e2, b.e2);
    e3 = std::max(a.e3, b.e3);
    na = a.num << (e2 - a.e2);
    if (e3 > a.e3) na *= pow3(e3 - a.e3);
    nb = b.num << (e2 - b.e2);
    if (e3 > b.e3) nb *= pow3(e3 - b.e3);
}

}  // namespace

TailVal tv_add(const TailVal& a, const TailVal& b) {
    BigInt na, nb;
    int e2, e3;
    align(a, b, na, nb, e2, e3);
    return TailVal(na + nb, e2, e3);
}

TailVal tv_sub(const TailVal& a, const TailVal& b) {
    BigInt na, nb;
    int e2, e3;
    align(a, b, na, nb, e2, e3);
    return TailVal(na - nb, e2, e3);
}

TailVal tv_mul(const TailVal& a, const TailVal& b) {
    return TailVal(a.num * b.num, a.e2 + b.e2, a.e3 + b.e3);
}

TailVal tv_div_pow2(const TailVal& a, int k) { return TailVal(a.num, a.e2 + k, a.e3); }

TailVal tv_div_pow3(const TailVal& a, int k) { return TailVal(a.num, a.e2, a.e3 + k); }

int tv_cmp(const TailVal& a, const TailVal& b) {
    BigInt na, nb;
    int e2, e3;
    align(a, b, na, nb, e2, e3);
    return na.compare(nb);
}

}  // namespace renormlab
