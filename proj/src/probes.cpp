#include "renormlab/probes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "renormlab/errors.hpp"
#include "renormlab/operators.hpp"

namespace renormlab {

namespace {

Rat rat_from_double(double x) {
    double scaled = std::ldexp(x, 40);
    return Rat(BigInt(static_cast<long long>(std::llround(scaled))), BigInt(1) << 40);
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

}  // namespace

// --- mu estimation -----------------------------------------------------------------

MuEstimate estimate_mu(const NormOracle& oracle, const FiniteTree& t, const TreeFn& base,
                       NodeId beyond, int budget, std::uint64_t seed) {
    std::vector<NodeId> free;
    for (NodeId v : t.up_set(beyond))
        if (v != beyond) free.push_back(v);

    int evals = 0;
    auto evaluate = [&](const std::vector<double>& coords) {
        TreeFn g = base;
        for (size_t i = 0; i < free.size(); ++i)
            g.values[static_cast<size_t>(free[i])] += rat_from_double(coords[i]);
        ++evals;
        return oracle.approx(t, g);
    };

    MuEstimate out;
    Rng rng(seed);
    std::vector<double> best_coords(free.size(), 0.0);
    double best = evaluate(best_coords);
    out.trace.push_back(best);

    // golden-section line search on one coordinate
    auto line_search = [&](std::vector<double>& coords, size_t i) {
        double lo = coords[i] - 2.0, hi = coords[i] + 2.0;
        const double inv_phi = 0.6180339887498949;
        double a = hi - (hi - lo) * inv_phi, b = lo + (hi - lo) * inv_phi;
        coords[i] = a;
        double fa = evaluate(coords);
        coords[i] = b;
        double fb = evaluate(coords);
        for (int it = 0; it < 40 && hi - lo > 1e-10; ++it) {
            if (fa < fb) {
                hi = b;
                b = a;
                fb = fa;
                a = hi - (hi - lo) * inv_phi;
                coords[i] = a;
                fa = evaluate(coords);
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + (hi - lo) * inv_phi;
                coords[i] = b;
                fb = evaluate(coords);
            }
            if (evals >= budget) break;
        }
        coords[i] = fa < fb ? a : b;
        return std::min(fa, fb);
    };

    for (int start = 0; start < 3 && evals < budget; ++start) {
        std::vector<double> coords(free.size(), 0.0);
        if (start > 0)
            for (double& c : coords) c = (rng.unit() - 0.5) * 2.0;
        double cur = evaluate(coords);
        for (int sweep = 0; sweep < 24 && evals < budget; ++sweep) {
            double before = cur;
            for (size_t i = 0; i < free.size() && evals < budget; ++i) {
                double v = line_search(coords, i);
                if (v < cur) cur = v;
            }
            if (cur < best) {
                best = cur;
                best_coords = coords;
            }
            out.trace.push_back(best);
            if (before - cur < 1e-10) break;
        }
    }
    out.budget_exhausted = evals >= budget;
    out.value = best;
    out.certificate = base;
    for (size_t i = 0; i < free.size(); ++i)
        out.certificate.values[static_cast<size_t>(free[i])] += rat_from_double(best_coords[i]);
    return out;
}

MuEstimate estimate_mu_at(const NormOracle& oracle, const FiniteTree& t, NodeId node, int budget,
                          std::uint64_t seed) {
    return estimate_mu(oracle, t, TreeFn::indicator_down_set(t, node), node, budget, seed);
}

MuEstimate estimate_mu_extension(const NormOracle& oracle, const FiniteTree& t, const TreeFn& f,
                                 NodeId node, NodeId up_to, int budget, std::uint64_t seed) {
    if (!t.leq(node, up_to))
        throw ParamOutOfRangeError("extension endpoint must lie above the base point");
    for (NodeId v = 0; v < t.size(); ++v)
        if (f.values[static_cast<size_t>(v)] != 0 && !t.leq(v, node))
            throw ParamOutOfRangeError("base function must be supported on the down-set");
    TreeFn base = f;
    const Rat& plateau = f.values[static_cast<size_t>(node)];
    for (NodeId v : t.down_set(up_to))
        if (!t.leq(v, node)) base.values[static_cast<size_t>(v)] = plateau;
    return estimate_mu(oracle, t, base, up_to, budget, seed);
}

// --- structured convexity ------------------------------------------------------------

std::optional<Rat> flatness_margin(const NormOracle& oracle, const FiniteTree& t, const TreeFn& x,
                                   const TreeFn& y) {
    auto sx = oracle.squared_exact(t, x);
    auto sy = oracle.squared_exact(t, y);
    if (!sx || !sy) return std::nullopt;
    TreeFn sum = x;
    for (int v = 0; v < t.size(); ++v) sum.values[static_cast<size_t>(v)] += y.values[static_cast<size_t>(v)];
    auto ss = oracle.squared_exact(t, sum);
    if (!ss) return std::nullopt;
    return 2 * *sx + 2 * *sy - *ss;
}

std::optional<DyadicEmbedding> embed_dyadic(const FiniteTree& t, const std::set<int>& core_classes,
                                            NodeId start, int levels) {
    if (!core_classes.count(t.class_of[static_cast<size_t>(start)])) return std::nullopt;
    DyadicEmbedding emb;
    emb.levels = levels;
    emb.slot.assign((size_t(1) << levels) - 1, kRootSentinel);
    emb.slot[0] = start;
    // two incomparable core descendants of each filled slot
    std::function<bool(size_t, int)> fill = [&](size_t k, int depth) {
        if (depth + 1 >= levels) return true;
        NodeId u = emb.slot[k];
        // find two incomparable strict descendants in core classes
        std::vector<NodeId> cands;
        for (NodeId v : t.up_set(u))
            if (v != u && core_classes.count(t.class_of[static_cast<size_t>(v)])) cands.push_back(v);
        for (size_t i = 0; i < cands.size(); ++i)
            for (size_t j = i + 1; j < cands.size(); ++j) {
                if (t.comparable(cands[i], cands[j])) continue;
                emb.slot[2 * k + 1] = cands[i];
                emb.slot[2 * k + 2] = cands[j];
                if (fill(2 * k + 1, depth + 1) && fill(2 * k + 2, depth + 1)) return true;
            }
        return false;
    };
    if (!fill(0, 0)) return std::nullopt;
    return emb;
}

TreeFn fan_function(const FiniteTree& t, const DyadicEmbedding& emb, int slot_index) {
    TreeFn f = TreeFn::zeros(t);
    // weight 2^-(n+1) on (u_sigma, u_sigma i] for sigma of length n below the slot
    std::function<void(size_t, int)> add = [&](size_t k, int rel_depth) {
        size_t l = 2 * k + 1, r = 2 * k + 2;
        if (r >= emb.slot.size() || emb.slot[l] == kRootSentinel) return;
        Rat wgt(BigInt(1), BigInt(1) << (rel_depth + 1));
        for (size_t child : {l, r}) {
            for (NodeId v : t.down_set(emb.slot[child])) {
                if (t.leq(v, emb.slot[k])) continue;  // strictly above u_sigma
                f.values[static_cast<size_t>(v)] += wgt;
            }
            add(child, rel_depth + 1);
        }
    };
    add(static_cast<size_t>(slot_index), 0);
    return f;
}

namespace {

TreeFn random_fn(const FiniteTree& t, Rng& rng, long den = 8) {
    TreeFn f = TreeFn::zeros(t);
    for (int attempt = 0; attempt < 64; ++attempt) {
        for (NodeId v = 0; v < t.size(); ++v)
            f.values[static_cast<size_t>(v)] = rng.coin() ? rng.rat(8, den) : Rat(0);
        if (!f.is_zero()) return f;
    }
    f.values[0] = 1;
    return f;
}

TreeFn indicator_plus_fan(const FiniteTree& t, const DyadicEmbedding& emb, int slot) {
    TreeFn f = fan_function(t, emb, slot);
    for (NodeId v : t.down_set(emb.slot[static_cast<size_t>(slot)]))
        f.values[static_cast<size_t>(v)] += 1;
    return f;
}

}  // namespace

ProbeReport probe_strict_convexity(const NormOracle& oracle, const FiniteTree& tree,
                                   const WeightFn& w, int budget, std::uint64_t seed) {
    ProbeReport rep;
    rep.probe = "strict_convexity";
    Rng rng(seed);

    // random pair sweep: exact flatness margins where the oracle is exact
    Rat min_margin = -1;
    bool any_exact = false;
    for (int i = 0; i < budget; ++i) {
        ++rep.samples;
        TreeFn x = random_fn(tree, rng), y = random_fn(tree, rng);
        if (x.values == y.values) continue;
        auto margin = flatness_margin(oracle, tree, x, y);
        if (!margin) {
            rep.notes.push_back("oracle is not exact; random sweep skipped");
            break;
        }
        any_exact = true;
        if (*margin <= 0) {
            ProbeFinding f;
            f.description = "midpoint flatness on a random pair";
            f.witness = "sample " + std::to_string(i);
            f.seed = seed;
            rep.findings.push_back(f);
        }
        if (min_margin < 0 || *margin < min_margin) min_margin = *margin;
    }
    if (any_exact) rep.stats["min_random_margin"] = rat_to_string(min_margin);

    // structured pair: two equal-weight bad continuations over one node
    Classification cls = classify_points(*tree.source, w);
    std::vector<NodeId> bads;
    for (NodeId v = 0; v < tree.size(); ++v)
        if (!cls[static_cast<size_t>(tree.class_of[static_cast<size_t>(v)])].good) bads.push_back(v);
    for (size_t i = 0; i < bads.size(); ++i)
        for (size_t j = i + 1; j < bads.size(); ++j) {
            if (tree.comparable(bads[i], bads[j])) continue;
            if (w.at_node(tree, bads[i]) != w.at_node(tree, bads[j])) continue;
            TreeFn x = TreeFn::indicator_down_set(tree, bads[i]);
            TreeFn y = TreeFn::indicator_down_set(tree, bads[j]);
            auto margin = flatness_margin(oracle, tree, x, y);
            if (margin && *margin == 0) {
                ProbeFinding f;
                f.description = "equal-weight bad continuations give a flat midpoint";
                f.witness = tree.path[static_cast<size_t>(bads[i])] + " vs " + tree.path[static_cast<size_t>(bads[j])];
                rep.findings.push_back(f);
            }
            if (margin)
                rep.stats["bad_pair_margin"] = rat_to_string(*margin);
            i = bads.size();  // one structured pair is enough
            break;
        }

    // fan triple on an ever-branching core
    std::set<int> all_classes;
    for (int c = 0; c < tree.source->size(); ++c) all_classes.insert(c);
    for (const auto& [value, level] : [&] {
             std::map<Rat, std::set<int>> m;
             for (int c = 0; c < tree.source->size(); ++c) m[w.at_class(*tree.source, c)].insert(c);
             return m;
         }()) {
        (void)value;
        std::set<int> core = ever_branching_core_classes(*tree.source, level);
        if (core.empty()) continue;
        for (NodeId start = 0; start < tree.size(); ++start) {
            if (!core.count(tree.class_of[static_cast<size_t>(start)])) continue;
            auto emb = embed_dyadic(tree, core, start, 4);
            if (!emb) continue;
            TreeFn xu = indicator_plus_fan(tree, *emb, 0);
            TreeFn x0 = indicator_plus_fan(tree, *emb, 1);
            TreeFn x1 = indicator_plus_fan(tree, *emb, 2);
            // the midpoint identity must hold exactly at the function level
            bool identity = true;
            for (int v = 0; v < tree.size(); ++v)
                if (2 * xu.values[static_cast<size_t>(v)] !=
                    x0.values[static_cast<size_t>(v)] + x1.values[static_cast<size_t>(v)]) {
                    identity = false;
                    break;
                }
            if (!identity) {
                ProbeFinding f;
                f.description = "fan triple identity failed (implementation bug)";
                f.witness = tree.path[static_cast<size_t>(start)];
                f.assertion_failure = true;
                rep.findings.push_back(f);
                break;
            }
            rep.stats["fan_identity"] = "exact";
            auto margin = flatness_margin(oracle, tree, x0, x1);
            if (margin) {
                rep.stats["fan_margin"] = rat_to_string(*margin);
                if (*margin == 0) {
                    ProbeFinding f;
                    f.description = "fan triple exhibits exact midpoint flatness";
                    f.witness = "core truncation at " + tree.path[static_cast<size_t>(start)];
                    rep.findings.push_back(f);
                }
            }
            break;
        }
        break;
    }
    rep.notes.push_back("margins are 2|x|^2+2|y|^2-|x+y|^2; zero at x != y certifies a flat "
                        "equal-norm midpoint");
    return rep;
}

ProbeReport probe_mlur(const NormOracle& oracle, const FiniteTree& tree, int budget,
                       std::uint64_t seed) {
    ProbeReport rep;
    rep.probe = "mlur";
    Rng rng(seed);
    int admissible = 0, informational = 0;
    Rat min_slack = -1;
    while (admissible < budget) {
        ++rep.samples;
        if (rep.samples > budget * 64) break;  // refuse to spin forever
        Rat a = rng.rat(4, 4), b = rng.rat(4, 4);
        Rat eps = Rat(1 + rng.range(1, 8), 16);
        TreeFn g = TreeFn::zeros(tree);
        for (int v = 0; v < tree.size(); ++v) {
            Rat center = rng.coin() ? a : b;
            Rat wobble = Rat(rng.range(-3, 3), 4) * eps;
            g.values[static_cast<size_t>(v)] = center + wobble;
        }
        TreeFn h = TreeFn::zeros(tree);
        for (int v = 0; v < tree.size(); ++v)
            if (rng.coin()) h.values[static_cast<size_t>(v)] = rng.rat(2, 8) * eps;
        TreeFn gp = g, gm = g;
        for (int v = 0; v < tree.size(); ++v) {
            gp.values[static_cast<size_t>(v)] += h.values[static_cast<size_t>(v)];
            gm.values[static_cast<size_t>(v)] -= h.values[static_cast<size_t>(v)];
        }
        Rat lhs = osc_norm_squared(gp.values) + osc_norm_squared(gm.values) -
                  2 * osc_norm_squared(g.values);
        if (lhs >= eps * eps) continue;  // not admissible
        ++admissible;
        Rat slack = 4 * eps - h.sup_abs();
        if (min_slack < 0 || slack < min_slack) min_slack = slack;
        if (!(h.sup_abs() < 4 * eps)) {
            ProbeFinding f;
            f.description = "quantitative midpoint bound failed on an admissible sample";
            f.witness = "sample " + std::to_string(rep.samples - 1);
            f.seed = seed;
            f.assertion_failure = true;
            rep.findings.push_back(f);
        }
    }
    // informational: far-from-two-valued centers may break the conclusion
    for (int i = 0; i < budget / 10 + 1; ++i) {
        TreeFn g = random_fn(tree, rng, 4);
        TreeFn h = random_fn(tree, rng, 4);
        Rat eps(1, 8);
        TreeFn gp = g, gm = g;
        for (int v = 0; v < tree.size(); ++v) {
            gp.values[static_cast<size_t>(v)] += h.values[static_cast<size_t>(v)];
            gm.values[static_cast<size_t>(v)] -= h.values[static_cast<size_t>(v)];
        }
        Rat lhs = osc_norm_squared(gp.values) + osc_norm_squared(gm.values) -
                  2 * osc_norm_squared(g.values);
        if (lhs < eps * eps && !(h.sup_abs() < 4 * eps)) ++informational;
    }
    rep.stats["admissible"] = std::to_string(admissible);
    rep.stats["min_slack"] = min_slack < 0 ? "n/a" : rat_to_string(min_slack);
    rep.stats["informational_failures_off_hypothesis"] = std::to_string(informational);
    if (oracle.name() != "osc")
        rep.notes.push_back("bound asserted in the oscillation norm; oracle '" + oracle.name() +
                            "' reported informationally");
    return rep;
}

ProbeReport probe_kadec(const TreePresentation& p, const WeightFn& w, const NormOracle& oracle,
                        const std::vector<int>& copies_schedule, int depth) {
    ProbeReport rep;
    rep.probe = "kadec";
    require_valid_weight(p, w);
    Classification cls = classify_points(p, w);
    bool has_omega = false;
    for (const auto& c : p.classes())
        for (const auto& e : c.children) has_omega |= e.mult == Mult::Omega;
    if (!has_omega) throw ParamOutOfRangeError("probe needs at least one omega edge");

    for (int k : copies_schedule) {
        auto tree = unfold(std::make_shared<TreePresentation>(p), UnfoldOptions{depth, k, 0});
        // pick the first node whose class is bad, else the first omega parent
        NodeId target = kRootSentinel;
        for (NodeId v = 0; v < tree.size() && target == kRootSentinel; ++v)
            if (!cls[static_cast<size_t>(tree.class_of[static_cast<size_t>(v)])].good) target = v;
        bool target_bad = target != kRootSentinel;
        if (!target_bad) {
            for (NodeId v = 0; v < tree.size() && target == kRootSentinel; ++v)
                if (tree.children[static_cast<size_t>(v)].size() >= 2) target = v;
        }
        if (target == kRootSentinel) continue;
        const Rat& level = w.at_node(tree, target);
        std::vector<NodeId> seq;
        for (NodeId c : tree.children[static_cast<size_t>(target)])
            if (!target_bad || w.at_node(tree, c) == level) seq.push_back(c);
        if (seq.size() < 1) continue;
        TreeFn f = TreeFn::indicator_down_set(tree, target);
        double base = oracle.approx(tree, f);
        double worst = 0, sup_dist = 0;
        double mu_hat = 1e300;  // the approaching indicators all extend f
        for (NodeId u : seq) {
            TreeFn fn = TreeFn::indicator_down_set(tree, u);
            double nv = oracle.approx(tree, fn);
            worst = std::max(worst, std::fabs(nv - base));
            mu_hat = std::min(mu_hat, nv);
            TreeFn diff = fn;
            for (int v = 0; v < tree.size(); ++v) diff.values[static_cast<size_t>(v)] -= f.values[static_cast<size_t>(v)];
            sup_dist = std::max(sup_dist, rat_to_double(diff.sup_abs()));
        }
        rep.stats["k" + std::to_string(k) + "_margin"] = fmt(worst);
        rep.stats["k" + std::to_string(k) + "_sup_dist"] = fmt(sup_dist);
        rep.stats["k" + std::to_string(k) + "_mu_hat"] = fmt(mu_hat);
        if (seq.size() < 2) {
            rep.notes.push_back("k=" + std::to_string(k) + ": single successor, inconclusive");
            continue;
        }
        if (target_bad && worst < 1e-9 && sup_dist >= 1.0 - 1e-12) {
            ProbeFinding fd;
            fd.description = "Kadec obstruction: norms of the approaching indicators match the "
                             "limit while sup distance stays 1";
            fd.witness = "target " + tree.path[static_cast<size_t>(target)] + ", copies " + std::to_string(k);
            rep.findings.push_back(fd);
        }
    }
    rep.notes.push_back(std::string("target class is ") +
                        (rep.findings.empty() ? "good or separated" : "bad"));
    return rep;
}

ProbeReport probe_smoothness(const NormOracle& oracle, const FiniteTree& tree, const TreeFn& f,
                             int directions, int orders, std::uint64_t seed) {
    ProbeReport rep;
    rep.probe = "smoothness";
    if (f.is_zero()) throw ParamOutOfRangeError("smoothness probe needs f != 0");
    Rng rng(seed);
    double base = oracle.approx(tree, f);
    double worst_kink = 0;
    double worst_rate = 0;
    for (int d = 0; d < directions; ++d) {
        TreeFn h = random_fn(tree, rng);
        Rat hs = h.sup_abs();
        for (int v = 0; v < tree.size(); ++v) h.values[static_cast<size_t>(v)] /= hs;
        double prev_slope_gap = 0;
        std::vector<double> gaps;
        for (int k = 2; k < 2 + orders; ++k) {
            double epsd = std::ldexp(1.0, -k);
            Rat eps(BigInt(1), BigInt(1) << k);
            TreeFn fp = f, fm = f;
            for (int v = 0; v < tree.size(); ++v) {
                fp.values[static_cast<size_t>(v)] += eps * h.values[static_cast<size_t>(v)];
                fm.values[static_cast<size_t>(v)] -= eps * h.values[static_cast<size_t>(v)];
            }
            double dplus = (oracle.approx(tree, fp) - base) / epsd;
            double dminus = (base - oracle.approx(tree, fm)) / epsd;
            prev_slope_gap = std::fabs(dplus - dminus);
            gaps.push_back(prev_slope_gap);
        }
        worst_kink = std::max(worst_kink, gaps.back());
        if (gaps.size() >= 2)
            worst_rate = std::max(worst_rate, std::fabs(gaps.back() - gaps[gaps.size() - 2]));
        if (gaps.back() > 1e-6) {
            ProbeFinding fd;
            fd.description = "one-sided slopes disagree (kink evidence)";
            fd.witness = "direction " + std::to_string(d) + ", gap " + fmt(gaps.back());
            fd.seed = seed;
            rep.findings.push_back(fd);
        }
        ++rep.samples;
    }
    rep.stats["worst_slope_gap"] = fmt(worst_kink);
    rep.stats["gap_drift_at_finest"] = fmt(worst_rate);
    rep.notes.push_back("finite-difference surrogate only; verdicts are evidence, not proof");
    return rep;
}

ProbeReport probe_reverse_convergence(const TreePresentation& p,
                                      const std::vector<int>& copies_schedule, int depth) {
    ProbeReport rep;
    rep.probe = "reverse_convergence";
    bool has_omega = false;
    for (const auto& c : p.classes())
        for (const auto& e : c.children) has_omega |= e.mult == Mult::Omega;
    if (!has_omega) throw ParamOutOfRangeError("probe needs at least one omega edge");

    int prev_agree = -1;
    bool monotone = true;
    for (int k : copies_schedule) {
        auto tree = unfold(std::make_shared<TreePresentation>(p), UnfoldOptions{depth, k, 0});
        NodeId parent = kRootSentinel;
        for (NodeId v = 0; v < tree.size() && parent == kRootSentinel; ++v)
            if (tree.children[static_cast<size_t>(v)].size() >= 2) parent = v;
        if (parent == kRootSentinel) continue;
        const auto& kids = tree.children[static_cast<size_t>(parent)];
        TreeFn f = TreeFn::indicator_down_set(tree, parent);
        // pointwise agreement on the fixed window: nodes outside the sibling set
        int agree = 0;
        for (size_t i = 0; i < kids.size(); ++i) {
            TreeFn fn = TreeFn::indicator_down_set(tree, kids[i]);
            bool matches = true;
            for (NodeId v = 0; v < tree.size(); ++v) {
                if (std::find(kids.begin() + static_cast<long>(i), kids.end(), v) != kids.end())
                    continue;  // the moving tail
                if (fn.values[static_cast<size_t>(v)] != f.values[static_cast<size_t>(v)]) {
                    matches = false;
                    break;
                }
            }
            agree += matches ? 1 : 0;
            TreeFn diff = fn;
            for (int v = 0; v < tree.size(); ++v) diff.values[static_cast<size_t>(v)] -= f.values[static_cast<size_t>(v)];
            if (diff.sup_abs() != 1) {
                ProbeFinding fd;
                fd.description = "sup distance of an approaching indicator is not 1";
                fd.witness = tree.path[static_cast<size_t>(kids[i])];
                fd.assertion_failure = true;
                rep.findings.push_back(fd);
            }
        }
        // reverse-neighbourhood cross-check with F = first successor
        std::vector<NodeId> nb = tree.reverse_nbhd(parent, {kids[0]});
        bool nb_ok = std::find(nb.begin(), nb.end(), kids[0]) == nb.end();
        for (size_t i = 1; i < kids.size() && nb_ok; ++i)
            nb_ok = std::find(nb.begin(), nb.end(), kids[i]) != nb.end();
        if (!nb_ok) {
            ProbeFinding fd;
            fd.description = "reverse neighbourhood does not isolate the removed successor";
            fd.witness = tree.path[static_cast<size_t>(parent)];
            fd.assertion_failure = true;
            rep.findings.push_back(fd);
        }
        rep.stats["k" + std::to_string(k) + "_pointwise_agree"] = std::to_string(agree);
        if (prev_agree >= 0 && agree < prev_agree) monotone = false;
        prev_agree = agree;
        ++rep.samples;
    }
    rep.stats["agreement_monotone_in_k"] = monotone ? "true" : "false";
    return rep;
}

ProbeReport probe_pair_badness(const TreePresentation& augmented, const WeightFn& phi) {
    ProbeReport rep;
    rep.probe = "pair_badness";
    require_valid_weight(augmented, phi);
    std::optional<Rat> best;
    std::string best_node;
    int exact = 0;
    for (const auto& c : augmented.classes()) {
        int i1 = augmented.index_of(c.id + ":1");
        int i2 = augmented.index_of(c.id + ":2");
        if (i1 < 0 || i2 < 0) continue;
        Rat gap1 = phi.at(c.id + ":1") - phi.at(c.id);
        Rat gap2 = phi.at(c.id + ":2") - phi.at(c.id);
        Rat m = gap1 > gap2 ? gap1 : gap2;
        if (m == 0) ++exact;
        if (!best || m < *best) {
            best = m;
            best_node = c.id;
        }
        ++rep.samples;
    }
    if (best) {
        rep.stats["best_gap"] = rat_to_string(*best);
        rep.stats["best_node"] = best_node;
        rep.stats["exact_equal_pairs"] = std::to_string(exact);
    }
    rep.notes.push_back("truncation-limited: ambient badness of inserted pairs needs the "
                        "full successor split, only near-witnesses are reported");
    return rep;
}

}  // namespace renormlab
