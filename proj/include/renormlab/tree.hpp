#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "renormlab/rational.hpp"

namespace renormlab {

enum class Mult { One, Omega };

struct ClassEdge {
    int target = -1;  // index into TreePresentation::classes()
    Mult mult = Mult::One;
};

struct ClassRecord {
    std::string id;
    std::optional<Rat> rho;  // optional weight slot carried by the file format
    bool boundary = false;   // generated truncation frontier (ambient tree continues)
    std::vector<ClassEdge> children;
};

// Finite, possibly cyclic description whose unfolding is a tree: classes with
// one/omega-multiplicity child edges plus a list of root classes. Immutable
// after construction.
class TreePresentation {
public:
    struct Builder {
        Builder& add_class(const std::string& id, std::optional<Rat> rho = std::nullopt,
                           bool boundary = false);
        Builder& add_edge(const std::string& parent, const std::string& child, Mult mult);
        Builder& add_root(const std::string& id);
        TreePresentation build() const;

        struct RawEdge { std::string parent, child; Mult mult; };
        std::vector<ClassRecord> classes;
        std::map<std::string, int> index;
        std::vector<RawEdge> edges;
        std::vector<std::string> roots;
    };

    const std::vector<ClassRecord>& classes() const { return classes_; }
    const ClassRecord& cls(int i) const { return classes_[static_cast<size_t>(i)]; }
    const std::vector<int>& roots() const { return roots_; }
    int size() const { return static_cast<int>(classes_.size()); }

    int index_of(const std::string& id) const;        // -1 when absent
    int require_class(const std::string& id) const;   // throws UnknownNode

    // Classes lying on a directed cycle of the class graph (self-loops count).
    const std::set<int>& cyclic_classes() const { return cyclic_; }
    bool acyclic() const { return cyclic_.empty(); }

    // forward reachability (inclusive of the class itself)
    const std::set<int>& reachable_from(int cls) const;

private:
    friend struct Builder;
    std::vector<ClassRecord> classes_;
    std::map<std::string, int> index_;
    std::vector<int> roots_;
    std::set<int> cyclic_;
    std::vector<std::set<int>> reach_;  // computed at build time
};

using NodeId = int;
constexpr NodeId kRootSentinel = -1;

// Depth- and copy-bounded unfolding of a presentation. Parallel arrays
// indexed by NodeId; immutable after construction.
struct FiniteTree {
    std::shared_ptr<const TreePresentation> source;
    std::vector<NodeId> parent;  // kRootSentinel at minimal nodes
    std::vector<int> class_of;
    std::vector<int> copy_index;
    std::vector<char> truncated;  // subtree cut by the depth bound
    std::vector<std::string> path;  // stable human-readable id
    std::vector<std::vector<NodeId>> children;
    std::vector<int> depth;

    int size() const { return static_cast<int>(parent.size()); }
    void check_node(NodeId t) const;
    const std::string& class_id(NodeId t) const {
        return source->cls(class_of[static_cast<size_t>(t)]).id;
    }
    NodeId node_by_path(const std::string& p) const;  // throws UnknownNode

    bool leq(NodeId s, NodeId t) const;  // s \preceq t
    bool comparable(NodeId s, NodeId t) const { return leq(s, t) || leq(t, s); }
    std::vector<NodeId> incomparable_set(NodeId t) const;

    std::vector<NodeId> down_set(NodeId t) const;  // (0, t] from the root end
    std::vector<NodeId> up_set(NodeId t) const;    // [t, infinity), preorder
    std::vector<NodeId> minimal_nodes() const;
    // [t,inf) minus the up-sets of a finite set of immediate successors
    std::vector<NodeId> reverse_nbhd(NodeId t, const std::vector<NodeId>& removed) const;

    bool is_antichain(const std::vector<NodeId>& s) const;
    std::vector<NodeId> min_of(const std::vector<NodeId>& s) const;
    std::vector<NodeId> max_of(const std::vector<NodeId>& s) const;
};

// Rational-valued, finitely supported function on a FiniteTree (dense storage;
// nodes not materialized in the unfolding implicitly carry 0).
struct TreeFn {
    std::vector<Rat> values;

    static TreeFn zeros(const FiniteTree& t) { return TreeFn{std::vector<Rat>(t.parent.size())}; }
    static TreeFn indicator_down_set(const FiniteTree& t, NodeId u);

    int size() const { return static_cast<int>(values.size()); }
    Rat sup_abs() const;
    bool is_zero() const;
};

struct UnfoldOptions {
    int depth = 1;       // visits allowed per cyclic class along a branch
    int copies = 1;      // siblings materialized per omega edge
    long node_budget = 0;  // 0 = use global default / env override
};

long default_node_budget();  // honors RENORMLAB_NODE_BUDGET

FiniteTree unfold(std::shared_ptr<const TreePresentation> p, const UnfoldOptions& opt);
inline FiniteTree unfold(const TreePresentation& p, const UnfoldOptions& opt) {
    return unfold(std::make_shared<TreePresentation>(p), opt);
}

// --- file format ------------------------------------------------------------

TreePresentation parse_tree_text(const std::string& text);
std::string tree_to_text(const TreePresentation& p);

// --- generators ---------------------------------------------------------

TreePresentation generate_chain(int n);
// recurring=false: layered full k-ary tree of height h (acyclic);
// recurring=true: single self-loop class with k one-edges (ignores h).
TreePresentation generate_kary(int k, int h, bool recurring);
// spine class with a one-edge to itself and an omega edge to a leaf class
TreePresentation generate_comb();
// finite injections (0..h-1) -> {0..N-1}, one class per node, rho = the
// canonical strictly increasing dyadic weight sum(2^-t(i)).
TreePresentation generate_lambda(int height, int label_bound);
// inserts (t,1) and (t,2) between each node of an (acyclic, explicit) tree
// and the even/odd split of its successors
TreePresentation augment_pairs(const TreePresentation& lambda_tree);
// replaces each successor list by a binary spine carrying the parent's rho,
// so every internal node has exactly two successors, exactly one rho-equal
TreePresentation augment_dyadic(const TreePresentation& lambda_tree);

}  // namespace renormlab
