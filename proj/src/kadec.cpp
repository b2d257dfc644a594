#include "renormlab/kadec.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "renormlab/errors.hpp"
#include "renormlab/operators.hpp"

namespace renormlab {

namespace {

using Mask = std::uint32_t;

struct Line {
    double a = 0, x = 0, y = 0;  // a + 2^-m x + 2^-l y
};

// sum over 1<=m,l<=T of 2^-m-l max_t(a_t + 2^-m x_t + 2^-l y_t).
// The inner l-loop freezes once the leader is decided; the frozen tail up to
// T is closed-form, so the only inexactness is double rounding.
double double_sum(const std::vector<Line>& lines, int T) {
    if (lines.empty()) return 0;
    double total = 0;
    double pm = 1.0;
    for (int m = 1; m <= T; ++m) {
        pm *= 0.5;
        // leader by (a + 2^-m x, then y)
        size_t w = 0;
        double aw = lines[0].a + pm * lines[0].x;
        for (size_t i = 1; i < lines.size(); ++i) {
            double ai = lines[i].a + pm * lines[i].x;
            if (ai > aw || (ai == aw && lines[i].y > lines[w].y)) {
                aw = ai;
                w = i;
            }
        }
        int settle = 1;
        for (size_t i = 0; i < lines.size(); ++i) {
            if (i == w) continue;
            double ai = lines[i].a + pm * lines[i].x;
            double dy = lines[i].y - lines[w].y;
            if (dy <= 0) continue;
            double gap = aw - ai;
            int l;
            if (gap <= 0) {
                l = T + 1;
            } else {
                l = std::max(1, static_cast<int>(std::ceil(std::log2(dy / gap))));
                // the frozen leader must genuinely dominate from l on
                while (l <= T && std::ldexp(dy, -l) > gap) ++l;
            }
            settle = std::max(settle, std::min(l, T + 1));
        }
        double inner = 0;
        double pl = 1.0;
        int l = 1;
        for (; l < settle && l <= T; ++l) {
            pl *= 0.5;
            double best = -1e300;
            for (const Line& ln : lines) {
                double v = ln.a + pm * ln.x + pl * ln.y;
                if (v > best) best = v;
            }
            inner += pl * best;
        }
        if (l <= T) {
            // frozen leader from l..T: sum 2^-l aw + 4^-l yw
            double p1 = std::ldexp(1.0, -(l - 1));
            double pT = std::ldexp(1.0, -T);
            double q1 = std::ldexp(1.0, -2 * (l - 1));
            double qT = std::ldexp(1.0, -2 * T);
            inner += aw * (p1 - pT) + lines[w].y * (q1 - qT) / 3.0;
        }
        total += pm * inner;
    }
    return total;
}

struct NodeInfo {
    std::vector<int> up;        // up-set, preorder
    std::vector<int> down;      // (0, t], root end first
    double jump = 0;            // rho(t) - rho(parent)
    std::vector<int> equal_children;
    int ambient_equal = 0;
    double delta = 1;
};

struct Engine {
    Engine(const FiniteTree& t, const TreeFn& fn) : tree(t), f(fn) {}
    const FiniteTree& tree;
    const TreeFn& f;
    int n = 0;
    int T = 40;
    std::vector<NodeInfo> info;
    std::vector<Mask> incomp;  // per node: nodes incomparable with it
    Mask supp = 0;

    std::vector<Mask> sigs;               // closure, sorted by popcount
    std::map<Mask, int> sig_index;
    std::vector<std::vector<double>> gval;  // [sig][node]

    // constants per (sig, s): s = 0..n-1 real, index n = root sentinel
    std::vector<std::vector<double>> const_head;  // Delta+ + Delta- + antichain series
    std::vector<std::vector<double>> xi_const;    // [sig][(s)*(n)+t] chain norm on (s,t]
    std::vector<std::vector<int>> xi_mask;        // target sig per (any s, t): sig & incomp[t]

    // state tables
    std::vector<std::vector<double>> phi, phi_next;    // [sig][s-index]
    std::vector<std::vector<double>> xi, xi_next;      // [sig][(s)*(n)+t]

    int s_count() const { return n + 1; }  // slot n = sentinel
    bool s_le(int s, int t) const { return s == n || tree.leq(s, t); }

    double mask_val(Mask m, int v) const {
        return (m >> v) & 1 ? rat_to_double(f.values[static_cast<size_t>(v)]) : 0.0;
    }
};

double antichain_series(const Engine& e, Mask sig, int s) {
    // sum over l = 1..T of 2^-l best(<=l) / l on the masked values over [s, inf)
    int budget = e.T;
    std::function<std::vector<double>(int)> solve = [&](int v) {
        std::vector<double> best(static_cast<size_t>(budget + 1), 0.0);
        for (int c : e.tree.children[static_cast<size_t>(v)]) {
            auto sub = solve(c);
            std::vector<double> merged(static_cast<size_t>(budget + 1), 0.0);
            for (int j = 0; j <= budget; ++j)
                for (int k = 0; j + k <= budget; ++k)
                    merged[static_cast<size_t>(j + k)] =
                        std::max(merged[static_cast<size_t>(j + k)],
                                 best[static_cast<size_t>(j)] + sub[static_cast<size_t>(k)]);
            best = std::move(merged);
        }
        double a = std::fabs(e.mask_val(sig, v));
        for (int j = 1; j <= budget; ++j) best[static_cast<size_t>(j)] = std::max(best[static_cast<size_t>(j)], a);
        for (int j = 1; j <= budget; ++j)
            best[static_cast<size_t>(j)] = std::max(best[static_cast<size_t>(j)], best[static_cast<size_t>(j - 1)]);
        return best;
    };
    std::vector<double> best(static_cast<size_t>(budget + 1), 0.0);
    if (s == e.n) {
        for (int r : e.tree.minimal_nodes()) {
            auto sub = solve(r);
            std::vector<double> merged(static_cast<size_t>(budget + 1), 0.0);
            for (int j = 0; j <= budget; ++j)
                for (int k = 0; j + k <= budget; ++k)
                    merged[static_cast<size_t>(j + k)] =
                        std::max(merged[static_cast<size_t>(j + k)],
                                 best[static_cast<size_t>(j)] + sub[static_cast<size_t>(k)]);
            best = std::move(merged);
        }
    } else {
        best = solve(s);
    }
    double total = 0;
    for (int l = 1; l <= budget; ++l)
        total += std::ldexp(1.0, -l) * best[static_cast<size_t>(l)] / l;
    return total;
}

double isotone_gap(const Engine& e, Mask sig, int s, int sign) {
    // Chebyshev distance from sign*g on [s,inf) to the non-negative
    // decreasing cone (chain pinch / non-negativity closed form)
    const auto& scope = s == e.n ? std::vector<int>() : e.info[static_cast<size_t>(s)].up;
    std::vector<int> nodes;
    if (s == e.n)
        for (int v = 0; v < e.n; ++v) nodes.push_back(v);
    else
        nodes = scope;
    std::map<int, double> chain_min;
    double eps = 0;
    for (int v : nodes) {  // parents precede children in both orders used
        double fv = sign * e.mask_val(sig, v);
        int par = e.tree.parent[static_cast<size_t>(v)];
        double m = fv;
        auto it = par == kRootSentinel ? chain_min.end() : chain_min.find(par);
        if (it != chain_min.end()) m = std::min(m, it->second);
        chain_min[v] = m;
        eps = std::max(eps, (fv - m) / 2);
        eps = std::max(eps, -fv);
    }
    return eps;
}

}  // namespace

KadecEvaluation kadec_evaluate(const FiniteTree& tree, const WeightFn& w, const TreeFn& f,
                               const KadecOptions& opt) {
    if (tree.size() > opt.max_nodes)
        throw SizeBudgetExceededError("kadec norm limited to " + std::to_string(opt.max_nodes) +
                                      " nodes");
    require_valid_weight(*tree.source, w);

    Engine e(tree, f);
    e.n = tree.size();
    e.T = opt.truncation;
    const int n = e.n;

    auto pdata = node_point_data(tree, w);
    e.info.resize(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) {
        NodeInfo& ni = e.info[static_cast<size_t>(v)];
        ni.up = tree.up_set(v);
        ni.down = tree.down_set(v);
        int par = tree.parent[static_cast<size_t>(v)];
        Rat below = par == kRootSentinel ? Rat(0) : w.at_node(tree, par);
        ni.jump = rat_to_double(w.at_node(tree, v) - below);
        ni.equal_children = pdata[static_cast<size_t>(v)].equal_children;
        ni.ambient_equal = pdata[static_cast<size_t>(v)].ambient_equal_count;
        ni.delta = rat_to_double(pdata[static_cast<size_t>(v)].delta);
    }
    e.incomp.assign(static_cast<size_t>(n), 0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (!tree.comparable(a, b)) e.incomp[static_cast<size_t>(a)] |= Mask(1) << b;
    for (int v = 0; v < n; ++v)
        if (f.values[static_cast<size_t>(v)] != 0) e.supp |= Mask(1) << v;

    // closure of the incomparability masks over the support
    {
        std::vector<Mask> todo{e.supp};
        e.sig_index[e.supp] = 0;
        while (!todo.empty()) {
            Mask m = todo.back();
            todo.pop_back();
            for (int t = 0; t < n; ++t) {
                Mask next = m & e.incomp[static_cast<size_t>(t)];
                if (!e.sig_index.count(next)) {
                    if (static_cast<int>(e.sig_index.size()) >= opt.mask_budget)
                        throw SizeBudgetExceededError("mask closure exceeds budget");
                    e.sig_index[next] = 0;
                    todo.push_back(next);
                }
            }
        }
        for (const auto& [m, idx] : e.sig_index) {
            (void)idx;
            e.sigs.push_back(m);
        }
        std::sort(e.sigs.begin(), e.sigs.end(), [](Mask a, Mask b) {
            int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
            if (pa != pb) return pa < pb;
            return a < b;
        });
        for (size_t i = 0; i < e.sigs.size(); ++i) e.sig_index[e.sigs[i]] = static_cast<int>(i);
    }
    int ns = static_cast<int>(e.sigs.size());
    int sc = e.s_count();

    e.gval.assign(static_cast<size_t>(ns), std::vector<double>(static_cast<size_t>(n), 0.0));
    for (int si = 0; si < ns; ++si)
        for (int v = 0; v < n; ++v) e.gval[static_cast<size_t>(si)][static_cast<size_t>(v)] = e.mask_val(e.sigs[static_cast<size_t>(si)], v);

    // constants: head terms and chain-link ordinal parts
    e.const_head.assign(static_cast<size_t>(ns), std::vector<double>(static_cast<size_t>(sc), 0.0));
    e.xi_const.assign(static_cast<size_t>(ns), std::vector<double>(static_cast<size_t>(sc) * n, 0.0));
    e.xi_mask.assign(static_cast<size_t>(ns), std::vector<int>(static_cast<size_t>(n), 0));
    for (int si = 0; si < ns; ++si) {
        Mask sig = e.sigs[static_cast<size_t>(si)];
        for (int t = 0; t < n; ++t)
            e.xi_mask[static_cast<size_t>(si)][static_cast<size_t>(t)] =
                e.sig_index.at(sig & e.incomp[static_cast<size_t>(t)]);
        for (int s = 0; s < sc; ++s) {
            if (sig == 0) break;
            e.const_head[static_cast<size_t>(si)][static_cast<size_t>(s)] =
                isotone_gap(e, sig, s, +1) + isotone_gap(e, sig, s, -1) +
                antichain_series(e, sig, s);
            for (int t = 0; t < n; ++t) {
                if (!e.s_le(s, t)) continue;
                // exact ordinal chain norm of the masked values on (s, t]
                std::vector<Rat> chain;
                for (int u : e.info[static_cast<size_t>(t)].down) {
                    if (s != n && (u == s || tree.leq(u, s))) continue;
                    chain.push_back((sig >> u) & 1 ? f.values[static_cast<size_t>(u)] : Rat(0));
                }
                if (!chain.empty())
                    e.xi_const[static_cast<size_t>(si)][static_cast<size_t>(s) * n + t] =
                        std::sqrt(rat_to_double(ordinal_norm_squared(chain)));
            }
        }
    }

    auto zeros2 = [&] {
        return std::vector<std::vector<double>>(static_cast<size_t>(ns),
                                                std::vector<double>(static_cast<size_t>(sc), 0.0));
    };
    auto zeros3 = [&] {
        return std::vector<std::vector<double>>(
            static_cast<size_t>(ns), std::vector<double>(static_cast<size_t>(sc) * n, 0.0));
    };
    e.phi = zeros2();
    e.phi_next = zeros2();
    e.xi = zeros3();
    e.xi_next = zeros3();

    double sup = rat_to_double(f.sup_abs());
    double target = std::ldexp(1.0, static_cast<int>(opt.residual_target_exp)) * std::max(1.0, sup);

    KadecEvaluation out;
    out.closure_size = ns;
    int bad_ratio_streak = 0;

    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        double residual = 0;
        for (int si = 0; si < ns; ++si) {
            Mask sig = e.sigs[static_cast<size_t>(si)];
            const auto& g = e.gval[static_cast<size_t>(si)];
            if (sig == 0) continue;  // all tables stay 0
            for (int s = 0; s < sc; ++s) {
                // collect sup ranges once
                std::vector<int> range;  // t with s <= t
                if (s == n) {
                    range.resize(static_cast<size_t>(n));
                    for (int t = 0; t < n; ++t) range[static_cast<size_t>(t)] = t;
                } else {
                    range = e.info[static_cast<size_t>(s)].up;
                }
                double gs = s == n ? 0.0 : g[static_cast<size_t>(s)];

                std::vector<Line> peak, zigzag, balance, jump;
                peak.reserve(range.size());
                zigzag.reserve(range.size());
                balance.reserve(range.size());
                jump.reserve(range.size());
                for (int t : range) {
                    double xi_st = e.xi[static_cast<size_t>(si)][static_cast<size_t>(s) * n + t];
                    double phi_t = e.phi[static_cast<size_t>(si)][static_cast<size_t>(t)];
                    double gt = g[static_cast<size_t>(t)];
                    peak.push_back({std::fabs(gt), xi_st, phi_t});
                    // zigzag constant: max over u >= t (and the vanishing end)
                    double mx = 0, mn = 0;
                    for (int u : e.info[static_cast<size_t>(t)].up) {
                        mx = std::max(mx, g[static_cast<size_t>(u)]);
                        mn = std::min(mn, g[static_cast<size_t>(u)]);
                    }
                    double base = gs - gt;
                    zigzag.push_back(
                        {std::max(std::fabs(base + mx), std::fabs(base + mn)), xi_st, phi_t});
                    const NodeInfo& ni = e.info[static_cast<size_t>(t)];
                    double acc = gt;
                    double xs = 0, ys = 0;
                    for (int u : ni.equal_children) {
                        acc -= g[static_cast<size_t>(u)];
                        xs += e.xi[static_cast<size_t>(si)][static_cast<size_t>(s) * n + u];
                        ys += e.phi[static_cast<size_t>(si)][static_cast<size_t>(u)];
                    }
                    double scale = 1.0 / (1 + ni.ambient_equal);
                    balance.push_back(
                        {ni.delta * std::fabs(acc) * scale, xs * scale, ys * scale});
                    if (t != s)
                        jump.push_back({ni.jump * std::fabs(gt), xi_st, phi_t});
                }
                double v_peak = double_sum(peak, e.T) / 2;
                double v_zig = double_sum(zigzag, e.T) / 4;
                double v_bal = double_sum(balance, e.T) / 2;
                double v_jump = double_sum(jump, e.T) / 2;
                double head = e.const_head[static_cast<size_t>(si)][static_cast<size_t>(s)];
                double phi_new = (head + v_peak + v_zig + v_bal + v_jump) / 7;
                e.phi_next[static_cast<size_t>(si)][static_cast<size_t>(s)] = phi_new;
                residual = std::max(
                    residual,
                    std::fabs(phi_new - e.phi[static_cast<size_t>(si)][static_cast<size_t>(s)]));
            }
        }
        // chain-link update from the previous aggregate
        for (int si = 0; si < ns; ++si) {
            if (e.sigs[static_cast<size_t>(si)] == 0) continue;
            for (int s = 0; s < sc; ++s)
                for (int t = 0; t < n; ++t) {
                    if (!e.s_le(s, t)) continue;
                    int tgt = e.xi_mask[static_cast<size_t>(si)][static_cast<size_t>(t)];
                    double v = (e.xi_const[static_cast<size_t>(si)][static_cast<size_t>(s) * n + t] +
                                e.phi[static_cast<size_t>(tgt)][static_cast<size_t>(s)]) /
                               2;
                    e.xi_next[static_cast<size_t>(si)][static_cast<size_t>(s) * n + t] = v;
                    residual = std::max(
                        residual,
                        std::fabs(v - e.xi[static_cast<size_t>(si)][static_cast<size_t>(s) * n + t]));
                }
        }
        std::swap(e.phi, e.phi_next);
        std::swap(e.xi, e.xi_next);
        if (!out.residual_history.empty() && residual >= out.residual_history.back() &&
            residual > target) {
            if (++bad_ratio_streak >= 5)
                throw NonContractionError("kadec iteration failed to contract");
        } else {
            bad_ratio_streak = 0;
        }
        out.residual_history.push_back(residual);
        ++out.sweeps;
        if (residual < target) break;
    }

    double residual = out.residual_history.empty() ? 0.0 : out.residual_history.back();
    int root_sig = e.sig_index.at(e.supp);
    out.value = e.phi[static_cast<size_t>(root_sig)][static_cast<size_t>(n)];
    out.main_at.assign(e.phi[static_cast<size_t>(root_sig)].begin(),
                       e.phi[static_cast<size_t>(root_sig)].end());

    // certified radius: fixed-point gap (contraction 1/2 makes it <= the
    // residual), truncation of the tails, double rounding
    Rat sup_r = f.sup_abs();
    Rat trunc = sup_r / Rat(BigInt(1) << 38);
    Rat round_allow = (sup_r < 1 ? Rat(1) : sup_r) / Rat(BigInt(1) << 40);
    // residual as an exact dyadic upper bound
    Rat res_r(0);
    if (residual > 0) {
        double scaled = std::ldexp(residual, 52);
        res_r = Rat(BigInt(static_cast<long long>(std::ceil(scaled))), BigInt(1) << 52);
    }
    out.error_radius = trunc + res_r + round_allow;
    return out;
}

namespace {

struct KadecOracle final : NormOracle {
    WeightFn w;
    explicit KadecOracle(WeightFn wf) : w(std::move(wf)) {}
    std::string name() const override { return "kadec"; }
    NormValue eval(const FiniteTree& t, const TreeFn& f) const override {
        KadecEvaluation ev = kadec_evaluate(t, w, f);
        double scaled = std::ldexp(ev.value, 52);
        Rat v(BigInt(static_cast<long long>(std::llround(scaled))), BigInt(1) << 52);
        return NormValue{v, ev.error_radius};
    }
};

}  // namespace

OraclePtr make_kadec_oracle(const WeightFn& w) { return std::make_shared<KadecOracle>(w); }

}  // namespace renormlab
