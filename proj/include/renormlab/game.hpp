#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "renormlab/rng.hpp"

namespace renormlab {

// One play of the point-open game on the injection tree: positions are pairs
// (finite injection t, window p) describing the basic neighbourhood of t in
// which labels below p are frozen.
struct GameMove {
    std::vector<int> injection;  // labels in domain order
    int window = 0;
};

struct GameRound {
    GameMove beta;   // challenger's move
    int reply_label = 0;   // label reserved this round
    GameMove alpha;  // responder's move (same injection, widened window)
};

struct GameTrace {
    std::vector<GameRound> rounds;
    bool invariant_ok = true;
    std::string failure;  // first violated check, when any
};

enum class BetaStrategy { Random, GreedyLabel, Adversarial };

BetaStrategy beta_strategy_by_name(const std::string& name);

// Plays `rounds` rounds; the responder reserves the n-th label missing from
// the current range and widens the window past it. After every round the
// trace checks that the reserved labels are pairwise distinct and avoid every
// played range. Throws IllegalMove if the challenger breaks containment
// (only possible with a buggy strategy).
GameTrace choquet_game(int rounds, BetaStrategy beta, std::uint64_t seed);

}  // namespace renormlab
