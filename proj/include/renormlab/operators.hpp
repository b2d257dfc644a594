#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "renormlab/rng.hpp"
#include "renormlab/tree.hpp"
#include "renormlab/weights.hpp"

namespace renormlab {

// Finitely supported rational family over an index set.
template <typename Key>
struct IndexedFamily {
    std::map<Key, Rat> values;

    Rat sup_abs() const {
        Rat best = 0;
        for (const auto& [k, v] : values) {
            (void)k;
            Rat a = v < 0 ? Rat(-v) : v;
            if (a > best) best = a;
        }
        return best;
    }
    Rat l1() const {
        Rat s = 0;
        for (const auto& [k, v] : values) {
            (void)k;
            s += v < 0 ? Rat(-v) : v;
        }
        return s;
    }
    const Rat* find(const Key& k) const {
        auto it = values.find(k);
        return it == values.end() ? nullptr : &it->second;
    }
};

using NodeFamily = IndexedFamily<NodeId>;
using PairFamily = IndexedFamily<std::pair<NodeId, NodeId>>;
using LevelFamily = IndexedFamily<std::pair<NodeId, int>>;

// Node-level good-point data pulled from the classwise classification:
// materialized equal-weight successors, the capped gap, and badness.
struct NodePointData {
    bool good = true;
    std::vector<NodeId> equal_children;
    int ambient_equal_count = 0;  // F_t size in the full tree, cut or not
    Rat delta = 1;
};

std::vector<NodePointData> node_point_data(const FiniteTree& t, const WeightFn& w);

// (Rf)(t) = (rho(t) - rho(t^-)) f(t); the root sentinel carries weight 0.
NodeFamily op_r(const FiniteTree& t, const WeightFn& w, const TreeFn& f);

// (Sf)(t) = delta_t (1+#F_t)^-1 [f(t) - sum over F_t] at good points, else 0.
NodeFamily op_s(const FiniteTree& t, const WeightFn& w, const TreeFn& f);

// Pairs (s,u) with s = u, or with equal weight and a successor of s towards u
// whose derivation index drops; carries (Sf)(u) there.
struct SpecialPairData {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    std::map<NodeId, int> index_within_level;  // derivation index per node
};
SpecialPairData special_pairs(const FiniteTree& t, const WeightFn& w);
PairFamily op_t_special(const FiniteTree& t, const WeightFn& w, const TreeFn& f);

// Dyadic-shape operator: every internal node has exactly two successors,
// exactly one weight-equal. Truncated leaves use the ambient convention
// (equal successor carries 0, gap capped at 1).
NodeFamily op_t_dyadic(const FiniteTree& t, const WeightFn& w, const TreeFn& f);

struct TalagrandCase {
    TreeFn f;
    bool witness_found = false;
    std::string witness;  // description of (max point, index)
};
struct TalagrandReport {
    int samples = 0;
    int witnesses = 0;
    std::vector<TalagrandCase> counterexamples;
};

enum class TalagrandKind { Special, Dyadic };
// sample i draws from an rng forked at i, so results are independent of the
// worker count; jobs bounds the thread pool
TalagrandReport check_talagrand(TalagrandKind kind, const FiniteTree& t, const WeightFn& w,
                                int samples, std::uint64_t seed, int jobs = 1);

// dense rational matrix, rows x cols
struct RatMatrix {
    int rows = 0, cols = 0;
    std::vector<Rat> a;
    Rat& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    const Rat& at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
};

// columns = images of the down-set indicators under R and S, stacked
RatMatrix rs_matrix(const FiniteTree& t, const WeightFn& w);
int linear_rank(RatMatrix m);  // exact fraction-free elimination

// Smooth cutoff: 0 below 1/2, 1 above 1, quintic smoothstep between.
Rat smooth_cutoff(const Rat& x);

struct BumpResult {
    LevelFamily family;                      // (node, n) -> value
    std::optional<std::pair<NodeId, int>> witness;  // max point with nonzero value
    bool pair_in_u_set = false;  // (Sf, Tf/4) passes the open-set membership test
};

BumpResult bump_map(const FiniteTree& t, const TreeFn& f, int n_max);

TreeFn reconstruct_rf(const FiniteTree& t, const TreeFn& f,
                      const std::vector<std::pair<NodeId, int>>& index_set);

// The proof-recipe threshold selection: F = {(s,m) : (Tf)(s,m) >= delta} for
// the delta built from maximal eps-level points.
std::vector<std::pair<NodeId, int>> reconstruction_index_set(const FiniteTree& t, const TreeFn& f,
                                                             const Rat& eps, int n_max);

}  // namespace renormlab
