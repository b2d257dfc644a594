#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "renormlab/kadec.hpp"
#include "renormlab/norms.hpp"
#include "renormlab/rng.hpp"
#include "renormlab/tree.hpp"
#include "renormlab/weights.hpp"

namespace renormlab {

struct ProbeFinding {
    std::string description;
    std::string witness;        // replayable: sample index + inputs digest
    std::uint64_t seed = 0;
    bool assertion_failure = false;  // true breaks the run's exit status
};

struct ProbeReport {
    std::string probe;
    int samples = 0;
    std::vector<ProbeFinding> findings;
    std::map<std::string, std::string> stats;
    std::vector<std::string> notes;

    int assertion_failures() const {
        int k = 0;
        for (const auto& f : findings) k += f.assertion_failure ? 1 : 0;
        return k;
    }
};

// --- mu estimation ---------------------------------------------------------

struct MuEstimate {
    double value = 0;
    TreeFn certificate;             // the minimizing extension found
    std::vector<double> trace;      // best value after each sweep
    bool budget_exhausted = false;
};

//

// upper bound for inf over extensions g supported above `beyond` of
// ||base + g||; coordinate descent with golden sections and multi-start
MuEstimate estimate_mu(const NormOracle& oracle, const FiniteTree& t, const TreeFn& base,
                       NodeId beyond, int budget, std::uint64_t seed);

// mu(t): base = indicator of (0,t], free coordinates above t
MuEstimate estimate_mu_at(const NormOracle& oracle, const FiniteTree& t, NodeId node, int budget,
                          std::uint64_t seed);

// general form: base = f + f(t) on (t, u], free coordinates above u;
// f must be supported on (0, t]
MuEstimate estimate_mu_extension(const NormOracle& oracle, const FiniteTree& t, const TreeFn& f,
                                 NodeId node, NodeId up_to, int budget, std::uint64_t seed);

// --- structured convexity probes ------------------------------------------------

// Exact flatness margin 2||x||^2 + 2||y||^2 - ||x+y||^2 for exact oracles;
// zero margin at x != y witnesses a midpoint-flat equal-norm pair.
std::optional<Rat> flatness_margin(const NormOracle& oracle, const FiniteTree& t, const TreeFn& x,
                                   const TreeFn& y);

// Dyadic system embedded in an ever-branching core truncation: slot k holds
// the node for the binary word of rank k (heap order, root = slot 0).
struct DyadicEmbedding {
    int levels = 0;  // embedded words strictly shorter than `levels`... root only = 1
    std::vector<NodeId> slot;
};

std::optional<DyadicEmbedding> embed_dyadic(const FiniteTree& t, const std::set<int>& core_classes,
                                            NodeId start, int levels);

// fan function of the embedding below `slot_index`, truncated to the embedding
TreeFn fan_function(const FiniteTree& t, const DyadicEmbedding& emb, int slot_index);

ProbeReport probe_strict_convexity(const NormOracle& oracle, const FiniteTree& tree,
                                   const WeightFn& w, int budget, std::uint64_t seed);

ProbeReport probe_mlur(const NormOracle& oracle, const FiniteTree& tree, int budget,
                       std::uint64_t seed);

ProbeReport probe_kadec(const TreePresentation& p, const WeightFn& w, const NormOracle& oracle,
                        const std::vector<int>& copies_schedule, int depth);

ProbeReport probe_smoothness(const NormOracle& oracle, const FiniteTree& tree, const TreeFn& f,
                             int directions, int orders, std::uint64_t seed);

ProbeReport probe_reverse_convergence(const TreePresentation& p,
                                      const std::vector<int>& copies_schedule, int depth);

// near-witness search for doubly-bad inserted pairs under a supplied weight
ProbeReport probe_pair_badness(const TreePresentation& augmented, const WeightFn& phi);

}  // namespace renormlab
