#include "renormlab/operators.hpp"

#include <algorithm>
#include <numeric>
#include <thread>

#include "renormlab/errors.hpp"

namespace renormlab {

std::vector<NodePointData> node_point_data(const FiniteTree& t, const WeightFn& w) {
    const TreePresentation& p = *t.source;
    Classification cls = classify_points(p, w);
    std::vector<NodePointData> out(static_cast<size_t>(t.size()));
    for (NodeId v = 0; v < t.size(); ++v) {
        const PointClass& pc = cls[static_cast<size_t>(t.class_of[static_cast<size_t>(v)])];
        NodePointData& d = out[static_cast<size_t>(v)];
        d.good = pc.good;
        d.delta = pc.delta;
        d.ambient_equal_count = static_cast<int>(pc.equal_edges.size());
        const Rat& rv = w.at_node(t, v);
        for (NodeId c : t.children[static_cast<size_t>(v)])
            if (w.at_node(t, c) == rv) d.equal_children.push_back(c);
    }
    return out;
}

NodeFamily op_r(const FiniteTree& t, const WeightFn& w, const TreeFn& f) {
    require_valid_weight(*t.source, w);
    NodeFamily out;
    for (NodeId v = 0; v < t.size(); ++v) {
        const Rat& fv = f.values[static_cast<size_t>(v)];
        if (fv == 0) continue;
        NodeId par = t.parent[static_cast<size_t>(v)];
        Rat jump = w.at_node(t, v) - (par == kRootSentinel ? Rat(0) : w.at_node(t, par));
        if (jump == 0) continue;
        out.values[v] = jump * fv;
    }
    return out;
}

NodeFamily op_s(const FiniteTree& t, const WeightFn& w, const TreeFn& f) {
    require_valid_weight(*t.source, w);
    auto data = node_point_data(t, w);
    NodeFamily out;
    for (NodeId v = 0; v < t.size(); ++v) {
        const NodePointData& d = data[static_cast<size_t>(v)];
        if (!d.good) continue;
        Rat acc = f.values[static_cast<size_t>(v)];
        for (NodeId c : d.equal_children) acc -= f.values[static_cast<size_t>(c)];
        if (acc == 0) continue;
        out.values[v] = d.delta * acc / Rat(1 + d.ambient_equal_count);
    }
    return out;
}

SpecialPairData special_pairs(const FiniteTree& t, const WeightFn& w) {
    require_valid_weight(*t.source, w);
    SpecialPairData out;
    std::map<Rat, std::set<NodeId>> levels;
    for (NodeId v = 0; v < t.size(); ++v) levels[w.at_node(t, v)].insert(v);
    for (const auto& [value, level] : levels) {
        (void)value;
        DerivationIndex di = derivation_index(t, level);
        for (const auto& [node, idx] : di.index) out.index_within_level[node] = idx;
    }
    for (NodeId s = 0; s < t.size(); ++s) {
        out.pairs.emplace_back(s, s);
        const Rat& rs = w.at_node(t, s);
        int is = out.index_within_level.at(s);
        for (NodeId c : t.children[static_cast<size_t>(s)]) {
            if (w.at_node(t, c) != rs) continue;
            if (out.index_within_level.at(c) >= is) continue;
            for (NodeId u : t.up_set(c))
                if (w.at_node(t, u) == rs) out.pairs.emplace_back(s, u);
        }
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    out.pairs.erase(std::unique(out.pairs.begin(), out.pairs.end()), out.pairs.end());
    return out;
}

PairFamily op_t_special(const FiniteTree& t, const WeightFn& w, const TreeFn& f) {
    SpecialPairData sp = special_pairs(t, w);
    NodeFamily s = op_s(t, w, f);
    PairFamily out;
    for (const auto& pr : sp.pairs)
        if (const Rat* v = s.find(pr.second)) out.values[pr] = *v;
    return out;
}

NodeFamily op_t_dyadic(const FiniteTree& t, const WeightFn& w, const TreeFn& f) {
    require_valid_weight(*t.source, w);
    NodeFamily out;
    for (NodeId v = 0; v < t.size(); ++v) {
        const auto& ch = t.children[static_cast<size_t>(v)];
        const Rat& rv = w.at_node(t, v);
        Rat val;
        if (ch.empty()) {
            // ambient successors carry 0; the unequal gap is capped at 1
            val = f.values[static_cast<size_t>(v)];
        } else {
            if (ch.size() != 2)
                throw ShapeViolationError("node '" + t.path[static_cast<size_t>(v)] +
                                          "' does not have exactly two successors");
            bool eq0 = w.at_node(t, ch[0]) == rv;
            bool eq1 = w.at_node(t, ch[1]) == rv;
            if (eq0 == eq1)
                throw ShapeViolationError("node '" + t.path[static_cast<size_t>(v)] +
                                          "' lacks exactly one weight-equal successor");
            NodeId equal = eq0 ? ch[0] : ch[1];
            NodeId strict = eq0 ? ch[1] : ch[0];
            val = (w.at_node(t, strict) - rv) *
                  (f.values[static_cast<size_t>(v)] - f.values[static_cast<size_t>(equal)]);
        }
        if (val != 0) out.values[v] = val;
    }
    return out;
}

namespace {

TreeFn random_fn(const FiniteTree& t, Rng& rng) {
    TreeFn f = TreeFn::zeros(t);
    for (int attempt = 0; attempt < 64; ++attempt) {
        for (NodeId v = 0; v < t.size(); ++v)
            f.values[static_cast<size_t>(v)] = rng.coin() ? rng.rat(8, 8) : Rat(0);
        if (!f.is_zero()) return f;
    }
    f.values[0] = 1;
    return f;
}

}  // namespace

TalagrandReport check_talagrand(TalagrandKind kind, const FiniteTree& t, const WeightFn& w,
                                int samples, std::uint64_t seed, int jobs) {
    TalagrandReport rep;
    rep.samples = samples;
    std::optional<SpecialPairData> sp;
    if (kind == TalagrandKind::Special) sp = special_pairs(t, w);
    // classification and weight checks once, outside the workers
    auto point_data = node_point_data(t, w);
    (void)point_data;

    Rng base(seed);
    std::vector<TalagrandCase> cases(static_cast<size_t>(samples));
    auto run_one = [&](int i) {
        Rng rng = base.fork(static_cast<std::uint64_t>(i));
        TreeFn f = random_fn(t, rng);
        Rat sup = f.sup_abs();
        TalagrandCase c;
        c.f = f;
        if (kind == TalagrandKind::Special) {
            NodeFamily s = op_s(t, w, f);
            for (const auto& pr : sp->pairs) {
                Rat fs = f.values[static_cast<size_t>(pr.first)];
                if ((fs < 0 ? Rat(-fs) : fs) != sup) continue;
                const Rat* v = s.find(pr.second);
                if (v && *v != 0) {
                    c.witness_found = true;
                    c.witness = "(" + t.path[static_cast<size_t>(pr.first)] + ", " +
                                t.path[static_cast<size_t>(pr.second)] + ")";
                    break;
                }
            }
        } else {
            NodeFamily tf = op_t_dyadic(t, w, f);
            for (NodeId v = 0; v < t.size(); ++v) {
                Rat fv = f.values[static_cast<size_t>(v)];
                if ((fv < 0 ? Rat(-fv) : fv) != sup) continue;
                const Rat* val = tf.find(v);
                if (val && *val != 0) {
                    c.witness_found = true;
                    c.witness = t.path[static_cast<size_t>(v)];
                    break;
                }
            }
        }
        cases[static_cast<size_t>(i)] = std::move(c);
    };
    jobs = std::max(1, std::min(jobs, samples == 0 ? 1 : samples));
    if (jobs == 1) {
        for (int i = 0; i < samples; ++i) run_one(i);
    } else {
        std::vector<std::thread> pool;
        for (int wk = 0; wk < jobs; ++wk)
            pool.emplace_back([&, wk] {
                for (int i = wk; i < samples; i += jobs) run_one(i);
            });
        for (auto& th : pool) th.join();
    }
    for (auto& c : cases) {
        if (c.witness_found)
            ++rep.witnesses;
        else
            rep.counterexamples.push_back(std::move(c));
    }
    return rep;
}

RatMatrix rs_matrix(const FiniteTree& t, const WeightFn& w) {
    int n = t.size();
    RatMatrix m;
    m.rows = 2 * n;
    m.cols = n;
    m.a.assign(static_cast<size_t>(m.rows) * m.cols, Rat(0));
    for (NodeId u = 0; u < n; ++u) {
        TreeFn f = TreeFn::indicator_down_set(t, u);
        NodeFamily r = op_r(t, w, f);
        NodeFamily s = op_s(t, w, f);
        for (const auto& [node, v] : r.values) m.at(node, u) = v;
        for (const auto& [node, v] : s.values) m.at(n + node, u) = v;
    }
    return m;
}

int linear_rank(RatMatrix m) {
    // clear denominators columnwise, then run fraction-free elimination
    std::vector<BigInt> a(static_cast<size_t>(m.rows) * m.cols);
    for (int c = 0; c < m.cols; ++c) {
        BigInt l = 1;
        for (int r = 0; r < m.rows; ++r) {
            const BigInt& d = denominator(m.at(r, c));
            l = lcm(l, d);
        }
        for (int r = 0; r < m.rows; ++r) {
            const Rat& v = m.at(r, c);
            a[static_cast<size_t>(r) * m.cols + c] = numerator(v) * (l / denominator(v));
        }
    }
    auto at = [&](int r, int c) -> BigInt& { return a[static_cast<size_t>(r) * m.cols + c]; };

    int rank = 0;
    BigInt prev = 1;
    for (int col = 0; col < m.cols && rank < m.rows; ++col) {
        int pivot = -1;
        for (int r = rank; r < m.rows; ++r)
            if (at(r, col) != 0) { pivot = r; break; }
        if (pivot < 0) continue;
        for (int c = 0; c < m.cols; ++c) std::swap(at(pivot, c), at(rank, c));
        for (int r = rank + 1; r < m.rows; ++r) {
            for (int c = col + 1; c < m.cols; ++c)
                at(r, c) = (at(r, c) * at(rank, col) - at(r, col) * at(rank, c)) / prev;
            at(r, col) = 0;
        }
        prev = at(rank, col);
        ++rank;
    }
    return rank;
}

Rat smooth_cutoff(const Rat& x) {
    Rat ax = x < 0 ? Rat(-x) : x;
    if (ax * 2 <= 1) return 0;
    if (ax >= 1) return 1;
    Rat u = ax * 2 - 1;  // in (0,1)
    return u * u * u * (Rat(10) - Rat(15) * u + Rat(6) * u * u);
}

namespace {

Rat bump_value(const FiniteTree& t, const TreeFn& f, NodeId s, int n) {
    const Rat& fs = f.values[static_cast<size_t>(s)];
    if (fs == 0) return 0;
    for (NodeId c : t.children[static_cast<size_t>(s)])
        if (f.values[static_cast<size_t>(c)] == fs) return 0;
    Rat pow2n = Rat(BigInt(1) << n);
    Rat v = smooth_cutoff(pow2n * fs) / pow2n;
    if (v == 0) return 0;
    for (NodeId c : t.children[static_cast<size_t>(s)]) {
        const Rat& ft = f.values[static_cast<size_t>(c)];
        if (ft == 0) continue;  // cutoff factor is 1 at 0
        v *= 1 - smooth_cutoff(ft / (pow2n * (ft - fs)));
        if (v == 0) break;
    }
    return v;
}

}  // namespace

BumpResult bump_map(const FiniteTree& t, const TreeFn& f, int n_max) {
    if (n_max < 0) throw ParamOutOfRangeError("bump map needs n_max >= 0");
    BumpResult out;
    Rat sup = f.sup_abs();
    for (NodeId s = 0; s < t.size(); ++s)
        for (int n = 0; n <= n_max; ++n) {
            Rat v = bump_value(t, f, s, n);
            if (v == 0) continue;
            out.family.values[{s, n}] = v;
            if (!out.witness) {
                Rat fs = f.values[static_cast<size_t>(s)];
                if ((fs < 0 ? Rat(-fs) : fs) == sup) out.witness = {s, n};
            }
        }
    if (f.is_zero()) {
        out.pair_in_u_set = true;  // the zero pair is admitted explicitly
        return out;
    }
    // membership test for (Sf, Tf/4): both sup norms must fall strictly
    // below the sup of |f(s)| + |(Tf)(s,n)|/8
    Rat combo = sup;
    Rat t_norm = 0;
    for (const auto& [key, v] : out.family.values) {
        Rat av = v < 0 ? Rat(-v) : v;
        Rat scaled = av / 4;
        if (scaled > t_norm) t_norm = scaled;
        Rat fs = f.values[static_cast<size_t>(key.first)];
        Rat cand = (fs < 0 ? Rat(-fs) : fs) + scaled / 2;
        if (cand > combo) combo = cand;
    }
    out.pair_in_u_set = sup < combo && t_norm < combo;
    return out;
}

TreeFn reconstruct_rf(const FiniteTree& t, const TreeFn& f,
                      const std::vector<std::pair<NodeId, int>>& index_set) {
    std::vector<char> keep(static_cast<size_t>(t.size()), 0);
    for (const auto& [node, n] : index_set) {
        (void)n;
        for (NodeId v : t.down_set(node)) keep[static_cast<size_t>(v)] = 1;
    }
    TreeFn out = TreeFn::zeros(t);
    for (NodeId v = 0; v < t.size(); ++v)
        if (keep[static_cast<size_t>(v)]) out.values[static_cast<size_t>(v)] = f.values[static_cast<size_t>(v)];
    return out;
}

std::vector<std::pair<NodeId, int>> reconstruction_index_set(const FiniteTree& t, const TreeFn& f,
                                                             const Rat& eps, int n_max) {
    if (eps <= 0) throw ParamOutOfRangeError("reconstruction needs eps > 0");
    std::vector<NodeId> level;
    for (NodeId v = 0; v < t.size(); ++v) {
        const Rat& fv = f.values[static_cast<size_t>(v)];
        if ((fv < 0 ? Rat(-fv) : fv) >= eps) level.push_back(v);
    }
    std::vector<std::pair<NodeId, int>> out;
    if (level.empty()) return out;

    std::optional<Rat> delta;
    for (NodeId m : t.max_of(level)) {
        bool found = false;
        for (int n = 0; n <= n_max; ++n) {
            Rat v = bump_value(t, f, m, n);
            if (v == Rat(BigInt(1), BigInt(1) << n)) {
                Rat d = v;
                if (!delta || d < *delta) delta = d;
                found = true;
                break;
            }
        }
        if (!found)
            throw ParamOutOfRangeError("n_max too small to certify node '" +
                                       t.path[static_cast<size_t>(m)] + "'");
    }
    for (NodeId s = 0; s < t.size(); ++s)
        for (int n = 0; n <= n_max; ++n)
            if (bump_value(t, f, s, n) >= *delta) out.emplace_back(s, n);
    return out;
}

}  // namespace renormlab
