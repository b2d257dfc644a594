#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "renormlab/tree.hpp"

namespace renormlab {

// Increasing rational weight, one value per presentation class (all unfolded
// copies of a class share it). The root sentinel implicitly carries 0.
struct WeightFn {
    std::map<std::string, Rat> rho;
    bool normalized = false;  // asserts values lie in (0,1)

    static WeightFn constant(const TreePresentation& p, const Rat& v);
    static WeightFn from_presentation(const TreePresentation& p);  // uses rho slots

    const Rat& at(const std::string& cls) const;
    const Rat& at_class(const TreePresentation& p, int cls) const;
    const Rat& at_node(const FiniteTree& t, NodeId v) const;
};

WeightFn parse_weight_text(const std::string& text);
std::string weight_to_text(const WeightFn& w);

struct WeightViolation {
    enum Kind { DecreasingEdge, NonConstantCycle, MissingClass, OutOfRange } kind;
    std::string detail;
};

struct WeightReport {
    bool ok = false;
    std::vector<WeightViolation> violations;
};

// Confirms edge monotonicity, constancy along cycles, coverage of every
// class, and (for normalized weights) values in (0,1).
WeightReport validate_weight(const TreePresentation& p, const WeightFn& w);
void require_valid_weight(const TreePresentation& p, const WeightFn& w);

// Good/bad data per class. A class is bad exactly when it has an omega edge
// to an equal-weight class; equal-weight one-edges form the finite excluded
// set and the gap is the least weight increase over the rest, capped at 1
// (empty rest counts as gap 1).
struct PointClass {
    bool good = true;
    std::vector<int> equal_edges;  // targets of equal-weight one-edges (F_t)
    Rat delta = 1;
    bool fan = false;
};

using Classification = std::vector<PointClass>;  // indexed by class

Classification classify_points(const TreePresentation& p, const WeightFn& w);

// Greatest subset of U in which every member reaches a branching member
// (an omega edge or two or more edges into the subset). Nonempty iff the
// unfolding contains an ever-branching subset made of U-classes.
std::set<int> ever_branching_core_classes(const TreePresentation& p, const std::set<int>& classes);

// Finite-tree derivation: round-by-round removal of nodes whose remaining
// up-set is totally ordered. Index = removal round.
struct DerivationIndex {
    std::map<NodeId, int> index;
    std::vector<std::set<NodeId>> survivors;  // U = survivors[0] > survivors[1] > ...
};

DerivationIndex derivation_index(const FiniteTree& t, const std::set<NodeId>& u);

// Classes lying in the ever-branching core of their own weight level set.
std::set<int> fan_points(const TreePresentation& p, const WeightFn& w);

struct DecompositionFailure {
    std::string witness;  // description of the recurring class
};

// Finite trees: depth levels. Presentations: per-depth class sets of the
// unfolding when some strictly increasing rational weight exists (acyclic),
// otherwise Failure.
using Decomposition = std::variant<std::vector<std::vector<NodeId>>, DecompositionFailure>;
Decomposition special_decomposition(const FiniteTree& t);

using ClassDecomposition =
    std::variant<std::vector<std::set<int>>, DecompositionFailure>;
ClassDecomposition special_decomposition(const TreePresentation& p);

// rho(t) = mu(t) + sup of mu over bad strict predecessors; requires mu
// strictly increasing on the bad set and a class graph on which the
// predecessor supremum is well defined per class.
WeightFn derive_weight_upgrade(const TreePresentation& p, const WeightFn& mu,
                               const std::set<int>& bad_classes);

// rho(t) = sum of 2^-m over pieces m whose classes are unreachable from t.
// Pieces (1-indexed) must cover all classes and be reverse-discrete: no
// member class may keep an omega edge towards the piece.
WeightFn derive_weight_sigma_frag(const TreePresentation& p,
                                  const std::vector<std::set<int>>& pieces);

// exact dyadic injection weight on a lambda-style explicit tree
WeightFn derive_weight_lambda(const TreePresentation& p);

enum class Theorem { LurCond, MlurCond, KadecCond, DualScCond, SmoothCond };

struct ConditionReport {
    Theorem theorem;
    bool pass = false;
    std::vector<std::string> witnesses;
};

ConditionReport check_conditions(const TreePresentation& p, const WeightFn& w, Theorem which);

}  // namespace renormlab
