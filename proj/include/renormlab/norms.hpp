#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "renormlab/operators.hpp"
#include "renormlab/tree.hpp"
#include "renormlab/weights.hpp"

namespace renormlab {

// Exact rational or dyadic value with a certified absolute-error radius
// (0 = exact).
struct NormValue {
    Rat value;
    Rat error_radius;

    bool exact() const { return error_radius == 0; }
    double approx() const { return rat_to_double(value); }
};

// sqrt with certified error 2^-bits (bits <= 62)
NormValue rat_sqrt(const Rat& x, int bits = 60);

// --- elementary ----------------------------------------------------------

Rat sup_norm(const std::vector<Rat>& values);
Rat osc(const std::vector<Rat>& values);                // max - min, 0 on empty
Rat osc_norm_squared(const std::vector<Rat>& values);   // sup^2 + osc^2

// --- Day norm -------------------------------------------------------------

// decreasing rearrangement: sum of 2^-n x_(n)^2
Rat day_norm_squared_sorted(const std::vector<Rat>& values);
// recursive evaluation with exact stabilized tails; exponential in support,
// intended for <= 5 support points
Rat day_norm_squared_recursive(const std::vector<Rat>& values);

// --- ordinal-interval norm --------------------------------------------------

// Exact squared values of the recursive interval norm on a finite chain.
// Table entry (a, g) holds the squared value on positions [a, g].
class OrdinalNormTable {
public:
    explicit OrdinalNormTable(const std::vector<Rat>& chain_values);
    const Rat& squared(int from, int to) const;  // IndexOutOfRange on bad indices
    int length() const { return n_; }

private:
    int n_;
    std::vector<Rat> table_;  // (from, to) with from <= to
};

// convenience: squared norm of the full chain; 0 for the empty chain
Rat ordinal_norm_squared(const std::vector<Rat>& chain_values);

// --- isotone distance and antichain means ------------------------------------

// Chebyshev distance from sign*f restricted to [r,inf) to the non-negative
// decreasing cone; r = kRootSentinel means the whole tree.
Rat monotone_distance(const FiniteTree& t, const TreeFn& f, NodeId r, int sign);

// (1/l) * best total |f| over antichains of size <= l in [r,inf)
Rat antichain_mean(const FiniteTree& t, const TreeFn& f, NodeId r, int l);

// --- norm oracles -------------------------------------------------------------

class NormOracle {
public:
    virtual ~NormOracle() = default;
    virtual std::string name() const = 0;
    virtual NormValue eval(const FiniteTree& t, const TreeFn& f) const = 0;
    // exact squared value when the construction supports it
    virtual std::optional<Rat> squared_exact(const FiniteTree& t, const TreeFn& f) const {
        (void)t;
        (void)f;
        return std::nullopt;
    }
    double approx(const FiniteTree& t, const TreeFn& f) const { return eval(t, f).approx(); }
};

using OraclePtr = std::shared_ptr<const NormOracle>;

OraclePtr make_sup_oracle();
OraclePtr make_osc_oracle();
OraclePtr make_day_oracle();
// tree must be totally ordered (depth order)
OraclePtr make_ordinal_oracle();
// sup^2 + Day(R f (+) S f)^2; strictly convex whenever R(+)S is injective
OraclePtr make_injection_sc_oracle(const WeightFn& w);
OraclePtr make_composite_lur_oracle(const WeightFn& w);   // cap: tree size <= 8
OraclePtr make_composite_mlur_oracle(const WeightFn& w);  // cap: 2*size <= 8
OraclePtr make_kadec_oracle(const WeightFn& w);           // certified error
// dual-side norm on l1 mass vectors (input interpreted as xi)
OraclePtr make_dual_sc_oracle(const WeightFn& w);

OraclePtr make_oracle_by_name(const std::string& name, const WeightFn& w);

// --- generic convex combinator (uniformly bounded families) -------------------

struct ConvexPair {
    std::function<Rat(const TreeFn&)> phi_squared;
    std::function<Rat(const TreeFn&)> psi_squared;
};

// theta(f) = base^2(f) + sum_m 2^-m sup_i [phi_i^2 + 2^-m psi_i^2], exact
Rat combine_lur_squared(const std::function<Rat(const TreeFn&)>& base_squared,
                        const std::vector<ConvexPair>& pairs, const TreeFn& f);

// Exact sum over m >= 1 of 2^-m * sup_i(a_i + c^m b_i) with c = 1/2 or 2/3;
// empty input gives 0. b_i must be non-negative.
enum class TailRatio { Half, TwoThirds };
Rat stabilized_sup_series(const std::vector<std::pair<Rat, Rat>>& lines, TailRatio ratio);

}  // namespace renormlab
