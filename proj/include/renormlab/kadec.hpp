#pragma once

#include <vector>

#include "renormlab/norms.hpp"
#include "renormlab/tree.hpp"
#include "renormlab/weights.hpp"

namespace renormlab {

struct KadecOptions {
    int truncation = 40;       // (m,l) double sums and the antichain series cut here
    int max_sweeps = 400;
    int max_nodes = 20;
    int mask_budget = 4096;    // closure of incomparability masks
    double residual_target_exp = -40;  // stop when residual < 2^exp * max(1, sup|f|)
};

struct KadecEvaluation {
    double value = 0;              // the norm: main functional at the root sentinel
    Rat error_radius;              // certified absolute error
    std::vector<double> residual_history;
    int sweeps = 0;
    int closure_size = 0;          // distinct masked functions iterated jointly
    std::vector<double> main_at;   // main table of the input function per node
};

// Joint fixed-point evaluation of the six mutually recursive seminorm tables
// behind the Kadec-style norm: the aggregate table (the norm), the peak,
// zigzag, successor-balance and weight-jump tables over (function, node), and
// the chain-link table over (function, node, node). Contraction factor 1/2
// per plain sweep; certified error = truncation + residual + rounding.
KadecEvaluation kadec_evaluate(const FiniteTree& t, const WeightFn& w, const TreeFn& f,
                               const KadecOptions& opt = {});

OraclePtr make_kadec_oracle(const WeightFn& w);

}  // namespace renormlab
