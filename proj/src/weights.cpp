#include "renormlab/weights.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

#include "renormlab/errors.hpp"

namespace renormlab {

// --- WeightFn -------------------------------------------------------------

WeightFn WeightFn::constant(const TreePresentation& p, const Rat& v) {
    WeightFn w;
    for (const auto& c : p.classes()) w.rho[c.id] = v;
    return w;
}

WeightFn WeightFn::from_presentation(const TreePresentation& p) {
    WeightFn w;
    for (const auto& c : p.classes()) {
        if (!c.rho)
            throw InvalidWeightError("class '" + c.id + "' carries no rho value");
        w.rho[c.id] = *c.rho;
    }
    return w;
}

const Rat& WeightFn::at(const std::string& cls) const {
    auto it = rho.find(cls);
    if (it == rho.end()) throw InvalidWeightError("weight missing for class '" + cls + "'");
    return it->second;
}

const Rat& WeightFn::at_class(const TreePresentation& p, int cls) const {
    return at(p.cls(cls).id);
}

const Rat& WeightFn::at_node(const FiniteTree& t, NodeId v) const {
    t.check_node(v);
    return at(t.class_id(v));
}

WeightFn parse_weight_text(const std::string& text) {
    WeightFn w;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string cls, val;
        if (!(ls >> cls)) continue;
        if (cls == "normalized") {
            w.normalized = true;
            continue;
        }
        if (!(ls >> val))
            throw ParseError("weight file line " + std::to_string(lineno) + ": missing value");
        if (!w.rho.emplace(cls, parse_rat(val)).second)
            throw ParseError("weight file line " + std::to_string(lineno) + ": duplicate class");
    }
    return w;
}

std::string weight_to_text(const WeightFn& w) {
    std::ostringstream out;
    if (w.normalized) out << "normalized\n";
    for (const auto& [cls, v] : w.rho) out << cls << " " << rat_to_string(v) << "\n";
    return out.str();
}

// --- validation -----------------------------------------------------------

WeightReport validate_weight(const TreePresentation& p, const WeightFn& w) {
    WeightReport rep;
    for (const auto& c : p.classes())
        if (!w.rho.count(c.id))
            rep.violations.push_back({WeightViolation::MissingClass, c.id});
    if (!rep.violations.empty()) return rep;

    for (const auto& c : p.classes()) {
        const Rat& rc = w.at(c.id);
        if (w.normalized && (rc <= 0 || rc >= 1))
            rep.violations.push_back(
                {WeightViolation::OutOfRange, c.id + " = " + rat_to_string(rc)});
        for (const auto& e : c.children) {
            const auto& child = p.cls(e.target);
            const Rat& rt = w.at(child.id);
            if (rt < rc)
                rep.violations.push_back({WeightViolation::DecreasingEdge,
                                          c.id + " -> " + child.id});
            else if (rt != rc && p.reachable_from(e.target).count(p.index_of(c.id)))
                // the edge lies on a cycle, so any increase recurs forever
                rep.violations.push_back({WeightViolation::NonConstantCycle,
                                          c.id + " -> " + child.id});
        }
    }
    rep.ok = rep.violations.empty();
    return rep;
}

void require_valid_weight(const TreePresentation& p, const WeightFn& w) {
    WeightReport rep = validate_weight(p, w);
    if (!rep.ok) {
        std::string msg = "invalid weight:";
        for (const auto& v : rep.violations) msg += " [" + v.detail + "]";
        throw InvalidWeightError(msg);
    }
}

// --- classification ---------------------------------------------------------

Classification classify_points(const TreePresentation& p, const WeightFn& w) {
    require_valid_weight(p, w);
    Classification out(static_cast<size_t>(p.size()));
    for (int ci = 0; ci < p.size(); ++ci) {
        const auto& c = p.cls(ci);
        PointClass& pc = out[static_cast<size_t>(ci)];
        const Rat& rc = w.at(c.id);
        std::optional<Rat> gap;
        for (const auto& e : c.children) {
            const Rat& rt = w.at_class(p, e.target);
            if (rt == rc) {
                if (e.mult == Mult::Omega)
                    pc.good = false;  // infinitely many equal-weight successors
                else
                    pc.equal_edges.push_back(e.target);
            } else {
                Rat g = rt - rc;
                if (!gap || g < *gap) gap = g;
            }
        }
        pc.delta = (gap && *gap < 1) ? *gap : Rat(1);
    }
    std::set<int> fans = fan_points(p, w);
    for (int ci : fans) out[static_cast<size_t>(ci)].fan = true;
    return out;
}

// --- ever-branching cores ---------------------------------------------------

std::set<int> ever_branching_core_classes(const TreePresentation& p,
                                          const std::set<int>& classes) {
    std::set<int> e = classes;
    bool changed = true;
    while (changed && !e.empty()) {
        changed = false;
        // branching members: an omega edge into e, or >= 2 edges into e
        std::set<int> branching;
        for (int c : e) {
            int count = 0;
            bool omega = false;
            for (const auto& edge : p.cls(c).children) {
                if (!e.count(edge.target)) continue;
                ++count;
                if (edge.mult == Mult::Omega) omega = true;
            }
            if (omega || count >= 2) branching.insert(c);
        }
        // keep members that reach a branching member inside e
        std::set<int> keep = branching;
        bool grew = true;
        while (grew) {
            grew = false;
            for (int c : e) {
                if (keep.count(c)) continue;
                for (const auto& edge : p.cls(c).children)
                    if (e.count(edge.target) && keep.count(edge.target)) {
                        keep.insert(c);
                        grew = true;
                        break;
                    }
            }
        }
        if (keep.size() < e.size()) {
            e = keep;
            changed = true;
        }
    }
    return e;
}

DerivationIndex derivation_index(const FiniteTree& t, const std::set<NodeId>& u) {
    DerivationIndex out;
    std::set<NodeId> w = u;
    int round = 0;
    while (!w.empty()) {
        out.survivors.push_back(w);
        std::set<NodeId> removed;
        for (NodeId v : w) {
            std::vector<NodeId> above;
            for (NodeId x : w)
                if (t.leq(v, x)) above.push_back(x);
            bool total = true;
            for (size_t i = 0; i < above.size() && total; ++i)
                for (size_t j = i + 1; j < above.size(); ++j)
                    if (!t.comparable(above[i], above[j])) { total = false; break; }
            if (total) removed.insert(v);
        }
        if (removed.empty())
            throw Error("derivation stalled: input contains an ever-branching subset");
        for (NodeId v : removed) {
            out.index[v] = round;
            w.erase(v);
        }
        ++round;
    }
    return out;
}

std::set<int> fan_points(const TreePresentation& p, const WeightFn& w) {
    std::map<Rat, std::set<int>> levels;
    for (int ci = 0; ci < p.size(); ++ci) levels[w.at_class(p, ci)].insert(ci);
    std::set<int> out;
    for (const auto& [value, classes] : levels) {
        (void)value;
        std::set<int> core = ever_branching_core_classes(p, classes);
        out.insert(core.begin(), core.end());
    }
    return out;
}

// --- special decompositions ---------------------------------------------------

Decomposition special_decomposition(const FiniteTree& t) {
    int maxd = 0;
    for (int v = 0; v < t.size(); ++v) maxd = std::max(maxd, t.depth[static_cast<size_t>(v)]);
    std::vector<std::vector<NodeId>> levels(static_cast<size_t>(maxd + 1));
    for (NodeId v = 0; v < t.size(); ++v)
        levels[static_cast<size_t>(t.depth[static_cast<size_t>(v)])].push_back(v);
    return levels;
}

ClassDecomposition special_decomposition(const TreePresentation& p) {
    if (!p.acyclic()) {
        int c = *p.cyclic_classes().begin();
        return DecompositionFailure{"class '" + p.cls(c).id +
                                    "' recurs along a branch; no strictly increasing "
                                    "rational weight exists"};
    }
    std::vector<std::set<int>> levels;
    std::set<std::pair<int, int>> seen;  // (depth, class)
    std::deque<std::pair<int, int>> queue;
    for (int r : p.roots()) {
        queue.emplace_back(0, r);
        seen.emplace(0, r);
    }
    while (!queue.empty()) {
        auto [d, c] = queue.front();
        queue.pop_front();
        if (static_cast<size_t>(d) >= levels.size()) levels.resize(static_cast<size_t>(d) + 1);
        levels[static_cast<size_t>(d)].insert(c);
        for (const auto& e : p.cls(c).children)
            if (seen.emplace(d + 1, e.target).second) queue.emplace_back(d + 1, e.target);
    }
    return levels;
}

// --- derived weights ----------------------------------------------------------

WeightFn derive_weight_upgrade(const TreePresentation& p, const WeightFn& mu,
                               const std::set<int>& bad_classes) {
    require_valid_weight(p, mu);
    for (int b : bad_classes)
        if (p.cyclic_classes().count(b))
            throw PremiseViolatedError("a bad class recurs along a branch, so no strictly "
                                       "increasing restriction to the bad set exists",
                                       p.cls(b).id);

    const Rat kNone = Rat(-1) - Rat(1);  // sentinel below any mu in use
    // shift everything so the sentinel is safely smaller than all values
    Rat lowest = 0;
    for (const auto& [cls, v] : mu.rho) {
        (void)cls;
        if (v < lowest) lowest = v;
    }
    const Rat none = lowest + kNone;

    int n = p.size();
    auto edge_value = [&](int src, const Rat& s_src) {
        Rat v = s_src;
        if (bad_classes.count(src) && mu.at_class(p, src) > v) v = mu.at_class(p, src);
        return v;
    };

    // per-path supremum of mu over bad strict predecessors: fixpoint for the
    // maximal and minimal values over paths; they must agree classwise
    std::vector<Rat> smax(static_cast<size_t>(n), none), smin(static_cast<size_t>(n), none);
    std::vector<char> started(static_cast<size_t>(n), 0);
    for (int r : p.roots()) started[static_cast<size_t>(r)] = 1;
    for (int iter = 0; iter <= n + 1; ++iter) {
        bool changed = false;
        for (int c = 0; c < n; ++c) {
            if (!started[static_cast<size_t>(c)]) continue;
            for (const auto& e : p.cls(c).children) {
                Rat v = edge_value(c, smax[static_cast<size_t>(c)]);
                auto ti = static_cast<size_t>(e.target);
                if (!started[ti]) {
                    started[ti] = 1;
                    smax[ti] = v;
                    smin[ti] = edge_value(c, smin[static_cast<size_t>(c)]);
                    changed = true;
                    continue;
                }
                if (v > smax[ti]) {
                    smax[ti] = v;
                    changed = true;
                }
                Rat lo = edge_value(c, smin[static_cast<size_t>(c)]);
                if (lo < smin[ti]) {
                    smin[ti] = lo;
                    changed = true;
                }
            }
        }
        if (!changed) break;
        if (iter == n + 1)
            throw PremiseViolatedError("bad-predecessor supremum fails to stabilize", "cycle");
    }
    for (int c = 0; c < n; ++c)
        if (smax[static_cast<size_t>(c)] != smin[static_cast<size_t>(c)])
            throw PremiseViolatedError(
                "bad-predecessor supremum is path dependent; no classwise upgrade exists",
                p.cls(c).id);

    // gap condition: each bad class must dominate the supremum of earlier bad values
    for (int b : bad_classes) {
        const Rat& s = smax[static_cast<size_t>(b)];
        Rat floor = s == none ? Rat(0) : s;
        if (!(mu.at_class(p, b) > floor))
            throw PremiseViolatedError("bad class does not strictly dominate its bad "
                                       "predecessors (value " +
                                           rat_to_string(mu.at_class(p, b)) +
                                           " vs supremum " + rat_to_string(floor) + ")",
                                       p.cls(b).id);
    }

    WeightFn out;
    for (int c = 0; c < n; ++c) {
        Rat s = smax[static_cast<size_t>(c)] == none ? Rat(0) : smax[static_cast<size_t>(c)];
        out.rho[p.cls(c).id] = mu.at_class(p, c) + s;
    }
    return out;
}

WeightFn derive_weight_sigma_frag(const TreePresentation& p,
                                  const std::vector<std::set<int>>& pieces) {
    std::set<int> covered;
    for (const auto& piece : pieces) covered.insert(piece.begin(), piece.end());
    for (int c = 0; c < p.size(); ++c)
        if (!covered.count(c))
            throw PremiseViolatedError("decomposition does not cover every class", p.cls(c).id);

    for (size_t m = 0; m < pieces.size(); ++m)
        for (int c : pieces[m])
            for (const auto& e : p.cls(c).children) {
                if (e.mult != Mult::Omega) continue;
                const auto& reach = p.reachable_from(e.target);
                for (int d : pieces[m])
                    if (reach.count(d))
                        throw PremiseViolatedError(
                            "piece " + std::to_string(m + 1) +
                                " is not reverse-discrete: an omega edge of '" + p.cls(c).id +
                                "' keeps it in sight",
                            p.cls(d).id);
            }

    WeightFn out;
    for (int c = 0; c < p.size(); ++c) {
        const auto& reach = p.reachable_from(c);
        Rat v = 0;
        for (size_t m = 0; m < pieces.size(); ++m) {
            bool meets = false;
            for (int d : pieces[m])
                if (reach.count(d)) { meets = true; break; }
            if (!meets) v += Rat(BigInt(1), BigInt(1) << (m + 1));
        }
        out.rho[p.cls(c).id] = v;
    }
    return out;
}

WeightFn derive_weight_lambda(const TreePresentation& p) {
    WeightFn out;
    for (const auto& c : p.classes()) {
        if (!c.rho)
            throw ShapeViolationError("class '" + c.id + "' has no injection weight slot");
        out.rho[c.id] = *c.rho;
    }
    require_valid_weight(p, out);
    return out;
}

// --- theorem conditions ---------------------------------------------------------

namespace {

// Number of copies (0, 1, or "many" = 2) of class `target` sitting above one
// copy of `from` along equal-weight paths, in the full unfolding.
int equal_weight_copies(const TreePresentation& p, const WeightFn& w, int from, int target) {
    const Rat& level = w.at_class(p, from);
    if (w.at_class(p, target) != level) return 0;
    // count paths from -> target through equal-weight classes; omega edges
    // and cycles saturate at "many"
    std::map<int, int> memo;  // class -> path count (saturated at 2)
    std::vector<char> visiting(static_cast<size_t>(p.size()), 0);
    std::function<int(int)> walk = [&](int c) -> int {
        if (c == target) return 1;
        auto it = memo.find(c);
        if (it != memo.end()) return it->second;
        if (visiting[static_cast<size_t>(c)]) return 2;  // equal-weight cycle
        visiting[static_cast<size_t>(c)] = 1;
        int total = 0;
        for (const auto& e : p.cls(c).children) {
            if (w.at_class(p, e.target) != level) continue;
            int sub = walk(e.target);
            if (sub == 0) continue;
            int mult = e.mult == Mult::Omega ? 2 : 1;
            total = std::min(2, total + sub * mult);
        }
        visiting[static_cast<size_t>(c)] = 0;
        memo[c] = total;
        return total;
    };
    int base = walk(from);
    // target on an equal-weight cycle duplicates itself above every copy
    if (base >= 1 && p.cyclic_classes().count(target)) {
        for (const auto& e : p.cls(target).children)
            if (w.at_class(p, e.target) == level && p.reachable_from(e.target).count(target))
                return 2;
    }
    return base;
}

}  // namespace

ConditionReport check_conditions(const TreePresentation& p, const WeightFn& w, Theorem which) {
    require_valid_weight(p, w);
    ConditionReport rep;
    rep.theorem = which;

    Classification cls = classify_points(p, w);
    std::vector<int> bad;
    for (int c = 0; c < p.size(); ++c)
        if (!cls[static_cast<size_t>(c)].good) bad.push_back(c);
    std::set<int> fans = fan_points(p, w);

    switch (which) {
        case Theorem::KadecCond:
            for (int b : bad) rep.witnesses.push_back("bad class '" + p.cls(b).id + "'");
            rep.pass = bad.empty();
            return rep;
        case Theorem::LurCond:
        case Theorem::SmoothCond:
            for (int b : bad) rep.witnesses.push_back("bad class '" + p.cls(b).id + "'");
            for (int f : fans)
                rep.witnesses.push_back("class '" + p.cls(f).id +
                                        "' lies in an ever-branching core of its level set");
            rep.pass = bad.empty() && fans.empty();
            return rep;
        case Theorem::MlurCond: {
            for (int f : fans)
                rep.witnesses.push_back("class '" + p.cls(f).id +
                                        "' lies in an ever-branching core of its level set");
            for (int s = 0; s < p.size(); ++s) {
                int copies = 0;
                std::vector<std::string> hits;
                for (int b : bad) {
                    if (!p.reachable_from(s).count(b)) continue;
                    int k = equal_weight_copies(p, w, s, b);
                    if (k > 0) {
                        copies += k;
                        hits.push_back(p.cls(b).id);
                    }
                }
                if (copies >= 2) {
                    std::string msg = "class '" + p.cls(s).id +
                                      "' sees multiple equal-weight bad continuations:";
                    for (const auto& h : hits) msg += " '" + h + "'";
                    rep.witnesses.push_back(msg);
                }
            }
            rep.pass = rep.witnesses.empty();
            return rep;
        }
        case Theorem::DualScCond: {
            for (int c : p.cyclic_classes())
                rep.witnesses.push_back("class '" + p.cls(c).id +
                                        "' recurs, giving a weight-constant increasing branch");
            rep.pass = rep.witnesses.empty();
            return rep;
        }
    }
    throw Error("unreachable");
}

}  // namespace renormlab
