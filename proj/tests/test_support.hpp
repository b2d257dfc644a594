#pragma once

// Shared fixtures: small presentations and random-instance helpers.

#include <memory>
#include <set>
#include <vector>

#include "renormlab/rng.hpp"
#include "renormlab/tree.hpp"
#include "renormlab/weights.hpp"

namespace renormlab::testing {

inline std::shared_ptr<const TreePresentation> share(TreePresentation p) {
    return std::make_shared<const TreePresentation>(std::move(p));
}

inline FiniteTree unfold_simple(const TreePresentation& p, int depth = 3, int copies = 2) {
    return unfold(std::make_shared<TreePresentation>(p), UnfoldOptions{depth, copies, 0});
}

// single class with two one-edges to itself: the recurring dyadic presentation
inline TreePresentation dyadic_selfloop() { return generate_kary(2, 0, true); }

// random forest-shaped acyclic presentation (each class one parent), n >= 1;
// some edges become omega with probability ~ omega_pct/100
inline TreePresentation random_tree_presentation(Rng& rng, int n, int omega_pct,
                                                 int max_children = 3) {
    TreePresentation::Builder b;
    std::vector<int> child_count(static_cast<size_t>(n), 0);
    for (int i = 0; i < n; ++i) b.add_class("n" + std::to_string(i));
    for (int i = 1; i < n; ++i) {
        int parent;
        do {
            parent = static_cast<int>(rng.below(static_cast<std::uint64_t>(i)));
        } while (child_count[static_cast<size_t>(parent)] >= max_children);
        ++child_count[static_cast<size_t>(parent)];
        bool omega = static_cast<int>(rng.below(100)) < omega_pct;
        b.add_edge("n" + std::to_string(parent), "n" + std::to_string(i),
                   omega ? Mult::Omega : Mult::One);
    }
    b.add_root("n0");
    return b.build();
}

// increasing weight on a random presentation: child rho = parent rho plus a
// non-negative increment, with equal_pct% zero increments
inline WeightFn random_increasing_weight(Rng& rng, const TreePresentation& p, int equal_pct) {
    WeightFn w;
    std::vector<Rat> val(static_cast<size_t>(p.size()), Rat(0));
    val[0] = Rat(1 + rng.range(0, 3), 16);
    // classes are topologically ordered by construction in random_tree_presentation
    for (int i = 0; i < p.size(); ++i)
        for (const auto& e : p.cls(i).children) {
            Rat inc = static_cast<int>(rng.below(100)) < equal_pct
                          ? Rat(0)
                          : Rat(1 + rng.range(0, 4), 64);
            val[static_cast<size_t>(e.target)] = val[static_cast<size_t>(i)] + inc;
        }
    for (int i = 0; i < p.size(); ++i) w.rho[p.cls(i).id] = val[static_cast<size_t>(i)];
    return w;
}

inline TreeFn random_tree_fn(Rng& rng, const FiniteTree& t, long num = 8, long den = 8) {
    TreeFn f = TreeFn::zeros(t);
    for (int attempt = 0; attempt < 64; ++attempt) {
        for (NodeId v = 0; v < t.size(); ++v)
            f.values[static_cast<size_t>(v)] = rng.coin() ? rng.rat(num, den) : Rat(0);
        if (!f.is_zero()) return f;
    }
    f.values[0] = 1;
    return f;
}

}  // namespace renormlab::testing
