#include "renormlab/norms.hpp"

#include <algorithm>
#include <map>

#include "renormlab/errors.hpp"

namespace renormlab {

NormValue rat_sqrt(const Rat& x, int bits) {
    if (x < 0) throw ParamOutOfRangeError("rat_sqrt of a negative value");
    if (x == 0) return NormValue{Rat(0), Rat(0)};
    // a = isqrt(floor(x * 4^bits)); a/2^bits <= sqrt(x) < (a+1)/2^bits
    BigInt scaled = (numerator(x) << (2 * bits)) / denominator(x);
    BigInt a = sqrt(scaled);
    Rat shift(BigInt(1), BigInt(1) << bits);
    return NormValue{Rat(a) * shift, shift};
}

// --- elementary ---------------------------------------------------------------

Rat sup_norm(const std::vector<Rat>& values) {
    Rat best = 0;
    for (const Rat& v : values) {
        Rat a = v < 0 ? Rat(-v) : v;
        if (a > best) best = a;
    }
    return best;
}

Rat osc(const std::vector<Rat>& values) {
    if (values.empty()) return 0;
    Rat lo = values[0], hi = values[0];
    for (const Rat& v : values) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
    return hi - lo;
}

Rat osc_norm_squared(const std::vector<Rat>& values) {
    Rat s = sup_norm(values), o = osc(values);
    return s * s + o * o;
}

// --- Day norm ------------------------------------------------------------------

Rat day_norm_squared_sorted(const std::vector<Rat>& values) {
    std::vector<Rat> mags;
    mags.reserve(values.size());
    for (const Rat& v : values)
        if (v != 0) mags.push_back(v < 0 ? Rat(-v) : v);
    std::sort(mags.begin(), mags.end(), std::greater<Rat>());
    Rat total = 0;
    BigInt den = 2;
    for (const Rat& m : mags) {
        total += m * m / Rat(den);
        den <<= 1;
    }
    return total;
}

namespace {

Rat day_recursive_memo(const std::vector<Rat>& mags, unsigned mask, std::vector<Rat>& memo,
                       std::vector<char>& have) {
    if (mask == 0) return 0;
    if (have[mask]) return memo[mask];
    std::vector<std::pair<Rat, Rat>> lines;
    for (size_t i = 0; i < mags.size(); ++i) {
        if (!(mask & (1u << i))) continue;
        Rat a = mags[i] * mags[i] / 2;
        Rat b = day_recursive_memo(mags, mask & ~(1u << i), memo, have);
        lines.emplace_back(a, b);
    }
    Rat v = stabilized_sup_series(lines, TailRatio::TwoThirds);
    memo[mask] = v;
    have[mask] = 1;
    return v;
}

}  // namespace

Rat day_norm_squared_recursive(const std::vector<Rat>& values) {
    std::vector<Rat> mags;
    for (const Rat& v : values)
        if (v != 0) mags.push_back(v < 0 ? Rat(-v) : v);
    if (mags.size() > 12)
        throw SizeBudgetExceededError("recursive Day norm is exponential in support size");
    std::vector<Rat> memo(size_t(1) << mags.size());
    std::vector<char> have(size_t(1) << mags.size(), 0);
    return day_recursive_memo(mags, (1u << mags.size()) - 1, memo, have);
}

// --- stabilized series -----------------------------------------------------------

Rat stabilized_sup_series(const std::vector<std::pair<Rat, Rat>>& lines, TailRatio ratio) {
    if (lines.empty()) return 0;
    for (const auto& [a, b] : lines) {
        (void)a;
        if (b < 0) throw ParamOutOfRangeError("series needs non-negative b coefficients");
    }
    size_t w = 0;
    for (size_t i = 1; i < lines.size(); ++i)
        if (lines[i].first > lines[w].first ||
            (lines[i].first == lines[w].first && lines[i].second > lines[w].second))
            w = i;
    const Rat& aw = lines[w].first;
    const Rat& bw = lines[w].second;

    Rat c = ratio == TailRatio::Half ? make_rat(1, 2) : make_rat(2, 3);
    int settle = 1;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (i == w) continue;
        const Rat& ai = lines[i].first;
        const Rat& bi = lines[i].second;
        if (bi <= bw) continue;
        // smallest m with c^m (bi - bw) <= aw - ai
        Rat gap = aw - ai;  // > 0 here, since ties in a force bi <= bw
        Rat lhs = (bi - bw) * c;
        int m = 1;
        while (lhs > gap) {
            lhs *= c;
            ++m;
            if (m > 4096) throw Error("series stabilization runaway");
        }
        settle = std::max(settle, m);
    }

    Rat total = 0;
    Rat pc = c;  // c^m
    Rat half(BigInt(1), BigInt(2));
    Rat ph = half;  // 2^-m
    for (int m = 1; m < settle; ++m) {
        Rat best;
        bool first = true;
        for (const auto& [a, b] : lines) {
            Rat v = a + pc * b;
            if (first || v > best) {
                best = v;
                first = false;
            }
        }
        total += ph * best;
        pc *= c;
        ph *= half;
    }
    // tail from m = settle with the frozen winner:
    // sum 2^-m a = a * 2^-(settle-1);
    // sum (c/2)^m b: Half -> 4^-m, sum = 4^-(settle-1)/3; TwoThirds -> 3^-m,
    // sum = 3^-(settle-1)/2
    Rat tail_a = aw * Rat(BigInt(1), BigInt(1) << (settle - 1));
    Rat cb = ratio == TailRatio::Half ? make_rat(1, 4) : make_rat(1, 3);
    Rat pow_cb = 1;
    for (int i = 0; i < settle - 1; ++i) pow_cb *= cb;
    Rat tail_b = bw * pow_cb * (ratio == TailRatio::Half ? make_rat(1, 3) : make_rat(1, 2));
    return total + tail_a + tail_b;
}

// --- ordinal-interval norm ---------------------------------------------------------

namespace {

// Line a + y*b with integer a and TailVal b, for the exact envelope sum
// sum_m 2^-m sup(a + 2^-m b).
struct OrdLine {
    BigInt a;
    TailVal b;
};

// smallest m >= 1 with 2^-m <= da/db, i.e. db <= da * 2^m
int crossover_m(const BigInt& da, const TailVal& db) {
    TailVal target = TailVal(da);
    int lo = 1;
    // quick doubling to bracket, then linear refine (ranges stay small)
    while (tv_cmp(db, TailVal(da, -lo, 0)) > 0) {  // da * 2^lo < db
        lo *= 2;
        if (lo > (1 << 20)) throw Error("ordinal norm crossover runaway");
    }
    int m = 1;
    while (tv_cmp(db, TailVal(da, -m, 0)) > 0) ++m;
    (void)target;
    return m;
}

// sum over m in [m1, m2] of (2^-m a + 4^-m b); m2 < 0 means infinity
TailVal segment_sum(const BigInt& a, const TailVal& b, int m1, int m2) {
    // sum 2^-m over [m1,m2] = 2^-(m1-1) - 2^-m2 ; infinite: 2^-(m1-1)
    TailVal sa = TailVal(a, m1 - 1, 0);
    if (m2 >= 0) sa = tv_sub(sa, TailVal(a, m2, 0));
    // sum 4^-m over [m1,m2] = (4^-(m1-1) - 4^-m2)/3 ; infinite: 4^-(m1-1)/3
    TailVal sb = tv_div_pow2(b, 2 * (m1 - 1));
    if (m2 >= 0) sb = tv_sub(sb, tv_div_pow2(b, 2 * m2));
    sb = tv_div_pow3(sb, 1);
    return tv_add(sa, sb);
}

// exact sum over m >= 1 of 2^-m max_i(a_i + 2^-m b_i)
TailVal ordinal_m_series(std::vector<OrdLine> lines) {
    // Pareto prune: drop lines dominated in both coordinates
    std::sort(lines.begin(), lines.end(), [](const OrdLine& x, const OrdLine& y) {
        int c = x.a.compare(y.a);
        if (c != 0) return c > 0;
        return tv_cmp(x.b, y.b) > 0;
    });
    std::vector<OrdLine> pareto;
    for (auto& l : lines) {
        if (!pareto.empty()) {
            int cb = tv_cmp(l.b, pareto.back().b);
            if (cb <= 0) continue;  // smaller-or-equal a (by sort) and b
        }
        pareto.push_back(std::move(l));
    }
    // pareto: a strictly decreasing, b strictly increasing.
    // Upper envelope over y in (0, 1/2], scanned from the large-b end.
    // crossover between consecutive kept lines must increase as we move to
    // larger a; pop otherwise.
    struct Seg {
        size_t line;
        int first_m;  // first m where this line is the winner
    };
    // walk from the biggest-b line (winner for the largest y) toward bigger a
    std::vector<size_t> order(pareto.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = pareto.size() - 1 - i;

    // Envelope by incremental takeover: current winner at m, advance m to the
    // next takeover. Using the Pareto structure, the winner index moves
    // monotonically toward larger a as m grows.
    TailVal total;
    // find winner at m = 1 by direct evaluation
    auto value_at = [&](const OrdLine& l, int m) { return tv_add(TailVal(l.a), tv_div_pow2(l.b, m)); };
    size_t cur = 0;
    {
        TailVal best = value_at(pareto[0], 1);
        for (size_t i = 1; i < pareto.size(); ++i) {
            TailVal v = value_at(pareto[i], 1);
            int c = tv_cmp(v, best);
            if (c > 0 || (c == 0 && pareto[i].a > pareto[cur].a)) {
                best = v;
                cur = i;
            }
        }
    }
    int m_from = 1;
    while (true) {
        // next takeover: smallest crossover m (> m_from) among lines with
        // larger a than the current winner
        int next_m = -1;
        size_t next_line = cur;
        for (size_t i = 0; i < cur; ++i) {  // larger a = smaller index
            BigInt da = pareto[i].a - pareto[cur].a;
            TailVal db = tv_sub(pareto[cur].b, pareto[i].b);
            // line i overtakes when 2^-m db <= da
            int m = crossover_m(da, db);
            if (m <= m_from) m = m_from + 1;  // ties resolved toward bigger a already
            // check it actually wins at m (guards equal-value ties)
            TailVal vi = value_at(pareto[i], m);
            TailVal vc = value_at(pareto[cur], m);
            if (tv_cmp(vi, vc) < 0) continue;
            if (next_m < 0 || m < next_m || (m == next_m && i < next_line)) {
                next_m = m;
                next_line = i;
            }
        }
        if (next_m < 0) {
            total = tv_add(total, segment_sum(pareto[cur].a, pareto[cur].b, m_from, -1));
            break;
        }
        total = tv_add(total, segment_sum(pareto[cur].a, pareto[cur].b, m_from, next_m - 1));
        cur = next_line;
        m_from = next_m;
    }
    return total;
}

}  // namespace

OrdinalNormTable::OrdinalNormTable(const std::vector<Rat>& chain_values)
    : n_(static_cast<int>(chain_values.size())) {
    if (n_ == 0) return;
    BigInt scale = 1;
    for (const Rat& v : chain_values) scale = lcm(scale, denominator(v));
    std::vector<BigInt> g(static_cast<size_t>(n_));
    for (int i = 0; i < n_; ++i)
        g[static_cast<size_t>(i)] =
            numerator(chain_values[static_cast<size_t>(i)]) *
            (scale / denominator(chain_values[static_cast<size_t>(i)]));

    auto idx = [&](int a, int b) { return static_cast<size_t>(a) * n_ + b; };
    std::vector<TailVal> tv(static_cast<size_t>(n_) * n_);
    for (int a = 0; a < n_; ++a)
        tv[idx(a, a)] = TailVal(g[static_cast<size_t>(a)] * g[static_cast<size_t>(a)]);

    // incremental per-start extrema over [a, gamma]
    std::vector<BigInt> lo(g.begin(), g.end()), hi(g.begin(), g.end());

    for (int len = 2; len <= n_; ++len) {
        for (int a = 0; a + len - 1 < n_; ++a) {
            int gamma = a + len - 1;
            const BigInt& gg = g[static_cast<size_t>(gamma)];
            if (gg < lo[static_cast<size_t>(a)]) lo[static_cast<size_t>(a)] = gg;
            if (gg > hi[static_cast<size_t>(a)]) hi[static_cast<size_t>(a)] = gg;
            BigInt maxabs = std::max(BigInt(abs(lo[static_cast<size_t>(a)])),
                                     BigInt(abs(hi[static_cast<size_t>(a)])));
            BigInt o = hi[static_cast<size_t>(a)] - lo[static_cast<size_t>(a)];
            BigInt head = 4 * maxabs * maxabs + g[static_cast<size_t>(a)] * g[static_cast<size_t>(a)] + o * o;

            std::vector<OrdLine> lines;
            lines.reserve(static_cast<size_t>(gamma - a));
            for (int beta = a; beta < gamma; ++beta) {
                BigInt jump = g[static_cast<size_t>(beta + 1)] - g[static_cast<size_t>(beta)];
                OrdLine l;
                l.a = jump * jump;
                l.b = tv_add(tv[idx(a, beta)], tv[idx(beta + 1, gamma)]);
                lines.push_back(std::move(l));
            }
            TailVal sum = tv_add(TailVal(head), ordinal_m_series(std::move(lines)));
            tv[idx(a, gamma)] = tv_div_pow2(sum, 4);  // the 1/16 factor
        }
    }

    table_.resize(static_cast<size_t>(n_) * n_);
    Rat scale_sq(scale * scale);
    for (int a = 0; a < n_; ++a)
        for (int b = a; b < n_; ++b) table_[idx(a, b)] = tv[idx(a, b)].to_rat() / scale_sq;
}

const Rat& OrdinalNormTable::squared(int from, int to) const {
    if (from < 0 || to >= n_ || from > to)
        throw IndexOutOfRangeError("ordinal norm interval out of range");
    return table_[static_cast<size_t>(from) * n_ + to];
}

Rat ordinal_norm_squared(const std::vector<Rat>& chain_values) {
    if (chain_values.empty()) return 0;
    OrdinalNormTable t(chain_values);
    return t.squared(0, t.length() - 1);
}

// --- isotone distance ---------------------------------------------------------

Rat monotone_distance(const FiniteTree& t, const TreeFn& f, NodeId r, int sign) {
    if (sign != 1 && sign != -1) throw ParamOutOfRangeError("sign must be +1 or -1");
    std::vector<NodeId> scope;
    if (r == kRootSentinel) {
        scope.resize(static_cast<size_t>(t.size()));
        for (NodeId v = 0; v < t.size(); ++v) scope[static_cast<size_t>(v)] = v;
    } else {
        scope = t.up_set(r);
    }
    std::set<NodeId> in_scope(scope.begin(), scope.end());
    // eps* = max over scope chains u <= v of (f(v)-f(u))/2, over nodes of
    // -f(u), and 0
    Rat eps = 0;
    std::map<NodeId, Rat> chain_min;  // min f over scope ancestors including self
    for (NodeId v : scope) {  // up_set order visits parents before children
        Rat fv = sign * f.values[static_cast<size_t>(v)];
        NodeId par = t.parent[static_cast<size_t>(v)];
        Rat m = fv;
        if (par != kRootSentinel && in_scope.count(par)) {
            const Rat& pm = chain_min.at(par);
            if (pm < m) m = pm;
        }
        chain_min[v] = m;
        Rat cand = (fv - m) / 2;
        if (cand > eps) eps = cand;
        if (-fv > eps) eps = -fv;
    }
    return eps;
}

Rat antichain_mean(const FiniteTree& t, const TreeFn& f, NodeId r, int l) {
    if (l < 1) throw ParamOutOfRangeError("antichain mean needs l >= 1");
    const size_t budget = static_cast<size_t>(l);
    // best[j] = max total |f| over antichains of size <= j within a subtree
    std::function<std::vector<Rat>(NodeId)> solve = [&](NodeId v) {
        std::vector<Rat> best(budget + 1, Rat(0));
        for (NodeId c : t.children[static_cast<size_t>(v)]) {
            std::vector<Rat> sub = solve(c);
            std::vector<Rat> merged(budget + 1, Rat(0));
            for (size_t j = 0; j <= budget; ++j)
                for (size_t k = 0; k + j <= budget; ++k) {
                    Rat cand = best[j] + sub[k];
                    if (cand > merged[j + k]) merged[j + k] = cand;
                }
            best = std::move(merged);
        }
        const Rat& fv = f.values[static_cast<size_t>(v)];
        Rat a = fv < 0 ? Rat(-fv) : fv;
        for (size_t j = 1; j <= budget; ++j)
            if (a > best[j]) best[j] = a;
        for (size_t j = 1; j <= budget; ++j)
            if (best[j - 1] > best[j]) best[j] = best[j - 1];
        return best;
    };
    std::vector<Rat> top(budget + 1, Rat(0));
    std::vector<NodeId> starts =
        r == kRootSentinel ? t.minimal_nodes() : std::vector<NodeId>{r};
    for (NodeId s : starts) {
        std::vector<Rat> sub = solve(s);
        std::vector<Rat> merged(budget + 1, Rat(0));
        for (size_t j = 0; j <= budget; ++j)
            for (size_t k = 0; k + j <= budget; ++k) {
                Rat cand = top[j] + sub[k];
                if (cand > merged[j + k]) merged[j + k] = cand;
            }
        top = std::move(merged);
    }
    return top[budget] / Rat(l);
}

// --- oracles ---------------------------------------------------------------------

namespace {

struct SupOracle final : NormOracle {
    std::string name() const override { return "sup"; }
    NormValue eval(const FiniteTree&, const TreeFn& f) const override {
        return NormValue{f.sup_abs(), 0};
    }
    std::optional<Rat> squared_exact(const FiniteTree&, const TreeFn& f) const override {
        Rat s = f.sup_abs();
        return s * s;
    }
};

struct OscOracle final : NormOracle {
    std::string name() const override { return "osc"; }
    NormValue eval(const FiniteTree& t, const TreeFn& f) const override {
        return rat_sqrt(*squared_exact(t, f));
    }
    std::optional<Rat> squared_exact(const FiniteTree&, const TreeFn& f) const override {
        return osc_norm_squared(f.values);
    }
};

struct DayOracle final : NormOracle {
    std::string name() const override { return "day"; }
    NormValue eval(const FiniteTree& t, const TreeFn& f) const override {
        return rat_sqrt(*squared_exact(t, f));
    }
    std::optional<Rat> squared_exact(const FiniteTree&, const TreeFn& f) const override {
        return day_norm_squared_sorted(f.values);
    }
};

std::vector<NodeId> chain_order(const FiniteTree& t) {
    std::vector<NodeId> order(static_cast<size_t>(t.size()));
    for (NodeId v = 0; v < t.size(); ++v) order[static_cast<size_t>(v)] = v;
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        return t.depth[static_cast<size_t>(a)] < t.depth[static_cast<size_t>(b)];
    });
    for (size_t i = 0; i + 1 < order.size(); ++i)
        if (!t.leq(order[i], order[i + 1]))
            throw ShapeViolationError("ordinal norm needs a totally ordered tree");
    return order;
}

struct OrdinalOracle final : NormOracle {
    std::string name() const override { return "ordinal"; }
    NormValue eval(const FiniteTree& t, const TreeFn& f) const override {
        return rat_sqrt(*squared_exact(t, f));
    }
    std::optional<Rat> squared_exact(const FiniteTree& t, const TreeFn& f) const override {
        std::vector<Rat> chain;
        for (NodeId v : chain_order(t)) chain.push_back(f.values[static_cast<size_t>(v)]);
        return ordinal_norm_squared(chain);
    }
};

struct InjectionScOracle final : NormOracle {
    WeightFn w;
    explicit InjectionScOracle(WeightFn wf) : w(std::move(wf)) {}
    std::string name() const override { return "injection_sc"; }
    NormValue eval(const FiniteTree& t, const TreeFn& f) const override {
        return rat_sqrt(*squared_exact(t, f));
    }
    std::optional<Rat> squared_exact(const FiniteTree& t, const TreeFn& f) const override {
        NodeFamily r = op_r(t, w, f), s = op_s(t, w, f);
        std::vector<Rat> stacked;
        for (const auto& [k, v] : r.values) {
            (void)k;
            stacked.push_back(v);
        }
        for (const auto& [k, v] : s.values) {
            (void)k;
            stacked.push_back(v);
        }
        Rat sup = f.sup_abs();
        return sup * sup + day_norm_squared_sorted(stacked);
    }
};

std::vector<Rat> down_chain_values(const FiniteTree& t, const TreeFn& f, NodeId v) {
    std::vector<Rat> out;
    for (NodeId u : t.down_set(v)) out.push_back(f.values[static_cast<size_t>(u)]);
    return out;
}

struct CompositeLurOracle final : NormOracle {
    WeightFn w;
    explicit CompositeLurOracle(WeightFn wf) : w(std::move(wf)) {}
    std::string name() const override { return "composite_lur"; }
    NormValue eval(const FiniteTree& t, const TreeFn& f) const override {
        return rat_sqrt(*squared_exact(t, f));
    }
    std::optional<Rat> squared_exact(const FiniteTree& t, const TreeFn& f) const override {
        int n = t.size();
        if (n > 8)
            throw SizeBudgetExceededError("composite norm is exponential in tree size (cap 8)");
        NodeFamily sv = op_s(t, w, f);
        std::vector<Rat> s_at(static_cast<size_t>(n), Rat(0));
        for (const auto& [k, v] : sv.values) s_at[static_cast<size_t>(k)] = v;
        std::vector<Rat> ord_sq(static_cast<size_t>(n));
        for (NodeId v = 0; v < n; ++v)
            ord_sq[static_cast<size_t>(v)] = ordinal_norm_squared(down_chain_values(t, f, v));

        Rat sup = f.sup_abs();
        Rat total = 0;
        unsigned full = (1u << n) - 1;
        for (int m = 1; m <= n; ++m) {
            std::vector<std::pair<Rat, Rat>> lines;
            for (unsigned mask = 1; mask <= full; ++mask) {
                if (__builtin_popcount(mask) != m) continue;
                Rat a = 0, chains = 0;
                std::vector<char> covered(static_cast<size_t>(n), 0);
                for (int i = 0; i < n; ++i)
                    if (mask & (1u << i)) {
                        a += s_at[static_cast<size_t>(i)] * s_at[static_cast<size_t>(i)];
                        chains += ord_sq[static_cast<size_t>(i)];
                        for (NodeId u : t.down_set(i)) covered[static_cast<size_t>(u)] = 1;
                    }
                Rat off = 0;
                for (NodeId v = 0; v < n; ++v)
                    if (!covered[static_cast<size_t>(v)]) {
                        const Rat& x = f.values[static_cast<size_t>(v)];
                        Rat ax = x < 0 ? Rat(-x) : x;
                        if (ax > off) off = ax;
                    }
                lines.emplace_back(a, off * off + chains);
            }
            Rat norm_m = sup * sup + stabilized_sup_series(lines, TailRatio::Half);
            total += norm_m / Rat(BigInt(1) << m);
        }
        return total;
    }
};

struct CompositeMlurOracle final : NormOracle {
    WeightFn w;
    explicit CompositeMlurOracle(WeightFn wf) : w(std::move(wf)) {}
    std::string name() const override { return "composite_mlur"; }
    NormValue eval(const FiniteTree& t, const TreeFn& f) const override {
        return rat_sqrt(*squared_exact(t, f));
    }
    std::optional<Rat> squared_exact(const FiniteTree& t, const TreeFn& f) const override {
        int n = t.size();
        int ni = 2 * n;  // indices: (node, R) then (node, S)
        if (ni > 8)
            throw SizeBudgetExceededError("composite norm is exponential in index count (cap 8)");
        auto data = node_point_data(t, w);
        NodeFamily rv = op_r(t, w, f), sv = op_s(t, w, f);
        std::vector<Rat> tvals(static_cast<size_t>(ni), Rat(0));
        for (const auto& [k, v] : rv.values) tvals[static_cast<size_t>(k)] = v;
        for (const auto& [k, v] : sv.values) tvals[static_cast<size_t>(n + k)] = v;

        // a(t): minimal weight-equal ancestor; b(t): the unique bad node above
        // a(t) at the same level, when present
        std::vector<NodeId> a_of(static_cast<size_t>(n)), b_of(static_cast<size_t>(n), kRootSentinel);
        for (NodeId v = 0; v < n; ++v) {
            const Rat& rho_v = w.at_node(t, v);
            NodeId a = v;
            for (NodeId u : t.down_set(v))
                if (w.at_node(t, u) == rho_v) { a = u; break; }
            a_of[static_cast<size_t>(v)] = a;
            std::vector<NodeId> bads;
            for (NodeId u : t.up_set(a))
                if (!data[static_cast<size_t>(u)].good && w.at_node(t, u) == rho_v)
                    bads.push_back(u);
            if (bads.size() > 1)
                throw PremiseViolatedError(
                    "multiple equal-weight bad continuations; strict-convexity condition fails",
                    t.path[static_cast<size_t>(bads[1])]);
            if (!bads.empty()) b_of[static_cast<size_t>(v)] = bads[0];
        }

        // inner chain norm on U_t: values along (0,t], then along (a(t),b(t)]
        std::vector<Rat> u_sq(static_cast<size_t>(n));
        std::vector<std::vector<char>> u_mask(static_cast<size_t>(n),
                                              std::vector<char>(static_cast<size_t>(n), 0));
        for (NodeId v = 0; v < n; ++v) {
            std::vector<Rat> chain = down_chain_values(t, f, v);
            for (NodeId u : t.down_set(v)) u_mask[static_cast<size_t>(v)][static_cast<size_t>(u)] = 1;
            if (b_of[static_cast<size_t>(v)] != kRootSentinel) {
                NodeId a = a_of[static_cast<size_t>(v)];
                for (NodeId u : t.down_set(b_of[static_cast<size_t>(v)])) {
                    if (t.leq(u, a)) continue;  // strictly above a(t)
                    chain.push_back(f.values[static_cast<size_t>(u)]);
                    u_mask[static_cast<size_t>(v)][static_cast<size_t>(u)] = 1;
                }
            }
            u_sq[static_cast<size_t>(v)] = ordinal_norm_squared(chain);
        }
        // oscillation norms on V_t = [t, inf)
        std::vector<Rat> v_sq(static_cast<size_t>(n));
        for (NodeId v = 0; v < n; ++v) {
            std::vector<Rat> vals;
            for (NodeId u : t.up_set(v)) vals.push_back(f.values[static_cast<size_t>(u)]);
            v_sq[static_cast<size_t>(v)] = osc_norm_squared(vals);
        }

        Rat sup = f.sup_abs();
        Rat total = sup * sup;
        unsigned full = (1u << ni) - 1;
        for (int m = 1; m <= ni; ++m) {
            // weight 2^(-m - 2^m); beyond m = 8 this underflows anyway
            Rat weight(BigInt(1), BigInt(1) << std::min(m + (1 << m), 1000));
            for (unsigned pi = 0; pi < (1u << m); ++pi) {
                std::vector<std::pair<Rat, Rat>> lines;
                for (unsigned mask = 1; mask <= full; ++mask) {
                    if (__builtin_popcount(mask) != m) continue;
                    Rat a = 0;
                    std::vector<char> covered(static_cast<size_t>(n), 0);
                    Rat chains = 0, oscs = 0;
                    int pos = 0;
                    for (int i = 0; i < ni; ++i) {
                        if (!(mask & (1u << i))) continue;
                        NodeId node = i % n;
                        a += tvals[static_cast<size_t>(i)] * tvals[static_cast<size_t>(i)];
                        chains += u_sq[static_cast<size_t>(node)];
                        for (NodeId u = 0; u < n; ++u)
                            if (u_mask[static_cast<size_t>(node)][static_cast<size_t>(u)])
                                covered[static_cast<size_t>(u)] = 1;
                        if (pi & (1u << pos)) {
                            oscs += v_sq[static_cast<size_t>(node)];
                            for (NodeId u : t.up_set(node)) covered[static_cast<size_t>(u)] = 1;
                        }
                        ++pos;
                    }
                    Rat off = 0;
                    for (NodeId u = 0; u < n; ++u)
                        if (!covered[static_cast<size_t>(u)]) {
                            const Rat& x = f.values[static_cast<size_t>(u)];
                            Rat ax = x < 0 ? Rat(-x) : x;
                            if (ax > off) off = ax;
                        }
                    lines.emplace_back(a, off * off + chains + oscs);
                }
                total += weight * stabilized_sup_series(lines, TailRatio::Half);
            }
        }
        return total;
    }
};

struct DualScOracle final : NormOracle {
    WeightFn w;
    explicit DualScOracle(WeightFn wf) : w(std::move(wf)) {}
    std::string name() const override { return "dual_sc"; }
    NormValue eval(const FiniteTree& t, const TreeFn& f) const override {
        return rat_sqrt(*squared_exact(t, f));
    }
    std::optional<Rat> squared_exact(const FiniteTree& t, const TreeFn& xi) const override {
        require_valid_weight(*t.source, w);
        Rat l1 = 0;
        for (const Rat& v : xi.values) l1 += v < 0 ? Rat(-v) : v;
        Rat day_units = day_norm_squared_sorted(xi.values);
        // jump nodes grouped by weight level
        std::map<Rat, std::vector<NodeId>> levels;
        for (NodeId v = 0; v < t.size(); ++v) {
            NodeId par = t.parent[static_cast<size_t>(v)];
            Rat below = par == kRootSentinel ? Rat(0) : w.at_node(t, par);
            if (w.at_node(t, v) > below) levels[w.at_node(t, v)].push_back(v);
        }
        Rat total = l1 * l1 + day_units;
        int k = 0;
        for (const auto& [q, nodes] : levels) {
            (void)q;
            std::vector<Rat> wedges;
            for (NodeId s : nodes) {
                Rat mass = 0;
                for (NodeId u : t.up_set(s)) {
                    const Rat& v = xi.values[static_cast<size_t>(u)];
                    mass += v < 0 ? Rat(-v) : v;
                }
                wedges.push_back(mass);
            }
            ++k;
            total += day_norm_squared_sorted(wedges) / Rat(BigInt(1) << k);
        }
        return total;
    }
};

}  // namespace

OraclePtr make_sup_oracle() { return std::make_shared<SupOracle>(); }
OraclePtr make_osc_oracle() { return std::make_shared<OscOracle>(); }
OraclePtr make_day_oracle() { return std::make_shared<DayOracle>(); }
OraclePtr make_ordinal_oracle() { return std::make_shared<OrdinalOracle>(); }
OraclePtr make_injection_sc_oracle(const WeightFn& w) {
    return std::make_shared<InjectionScOracle>(w);
}
OraclePtr make_composite_lur_oracle(const WeightFn& w) {
    return std::make_shared<CompositeLurOracle>(w);
}
OraclePtr make_composite_mlur_oracle(const WeightFn& w) {
    return std::make_shared<CompositeMlurOracle>(w);
}
OraclePtr make_dual_sc_oracle(const WeightFn& w) { return std::make_shared<DualScOracle>(w); }

Rat combine_lur_squared(const std::function<Rat(const TreeFn&)>& base_squared,
                        const std::vector<ConvexPair>& pairs, const TreeFn& f) {
    std::vector<std::pair<Rat, Rat>> lines;
    lines.reserve(pairs.size());
    for (const auto& p : pairs) lines.emplace_back(p.phi_squared(f), p.psi_squared(f));
    return base_squared(f) + stabilized_sup_series(lines, TailRatio::Half);
}

OraclePtr make_oracle_by_name(const std::string& name, const WeightFn& w) {
    if (name == "sup") return make_sup_oracle();
    if (name == "osc") return make_osc_oracle();
    if (name == "day") return make_day_oracle();
    if (name == "ordinal") return make_ordinal_oracle();
    if (name == "injection_sc") return make_injection_sc_oracle(w);
    if (name == "composite_lur") return make_composite_lur_oracle(w);
    if (name == "composite_mlur") return make_composite_mlur_oracle(w);
    if (name == "kadec") return make_kadec_oracle(w);
    if (name == "dual_sc") return make_dual_sc_oracle(w);
    throw ParamOutOfRangeError("unknown norm '" + name + "'");
}

}  // namespace renormlab
