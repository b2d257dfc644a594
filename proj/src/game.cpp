#include "renormlab/game.hpp"

#include <algorithm>
#include <set>

#include "renormlab/errors.hpp"

namespace renormlab {

BetaStrategy beta_strategy_by_name(const std::string& name) {
    if (name == "random") return BetaStrategy::Random;
    if (name == "greedy") return BetaStrategy::GreedyLabel;
    if (name == "adversarial") return BetaStrategy::Adversarial;
    throw ParamOutOfRangeError("unknown beta strategy '" + name + "'");
}

namespace {

// n-th (0-based) natural number outside the range set
int nth_missing(const std::set<int>& range, int n) {
    int seen = 0;
    for (int label = 0;; ++label) {
        if (range.count(label)) continue;
        if (seen == n) return label;
        ++seen;
    }
}

// challenger extension: appends labels to the injection, all >= window
// (smaller labels are frozen by the neighbourhood constraint)
void extend(std::vector<int>& inj, std::set<int>& range, int window, BetaStrategy strat,
            Rng& rng) {
    int extra = static_cast<int>(rng.below(3));
    switch (strat) {
        case BetaStrategy::Random:
            for (int i = 0; i <= extra; ++i) {
                // random start inside a band that scales with the play, then
                // the next free label upward
                int label =
                    window + static_cast<int>(rng.below(16 + 2 * inj.size()));
                while (range.count(label)) ++label;
                inj.push_back(label);
                range.insert(label);
            }
            break;
        case BetaStrategy::GreedyLabel:
        case BetaStrategy::Adversarial:
            // pack the smallest labels the window still allows
            for (int i = 0; i <= extra + (strat == BetaStrategy::Adversarial ? 2 : 0); ++i) {
                int label = window;
                while (range.count(label)) ++label;
                inj.push_back(label);
                range.insert(label);
            }
            break;
    }
}

}  // namespace

GameTrace choquet_game(int rounds, BetaStrategy beta, std::uint64_t seed) {
    if (rounds < 0) throw ParamOutOfRangeError("rounds must be non-negative");
    Rng rng(seed);
    GameTrace trace;

    // the played injections form a chain, so the union of all played ranges
    // is always the current one
    std::vector<int> injection;
    std::set<int> range;
    int window = 0;  // labels below it are frozen
    std::set<int> reserved;

    for (int n = 0; n < rounds; ++n) {
        GameRound round;
        size_t frozen_len = injection.size();
        int prev_window = window;
        extend(injection, range, window, beta, rng);
        round.beta.injection = injection;
        round.beta.window = window + static_cast<int>(rng.below(3));
        // containment: the frozen prefix and every label below the previous
        // window must be untouched (extensions only append labels >= window,
        // so this only guards against strategy bugs)
        for (size_t i = 0; i < frozen_len; ++i)
            if (injection[i] != round.beta.injection[i])
                throw IllegalMoveError("challenger rewrote the played injection");
        for (size_t i = frozen_len; i < injection.size(); ++i)
            if (injection[i] < prev_window)
                throw IllegalMoveError("challenger used a frozen label");
        if (round.beta.window < prev_window)
            throw IllegalMoveError("challenger narrowed the window");

        // responder: reserve the n-th missing label, widen the window past it
        round.reply_label = nth_missing(range, n);
        round.alpha.injection = injection;
        round.alpha.window = std::max(round.beta.window, round.reply_label + 1);
        window = round.alpha.window;

        // invariant: reserved labels pairwise distinct and outside every
        // played range (the ranges are nested, so the current one covers all)
        if (!reserved.insert(round.reply_label).second) {
            trace.invariant_ok = false;
            trace.failure = "reserved label repeated at round " + std::to_string(n);
        }
        for (int r : reserved)
            if (range.count(r)) {
                trace.invariant_ok = false;
                trace.failure = "reserved label " + std::to_string(r) +
                                " appears in a played range at round " + std::to_string(n);
                break;
            }
        trace.rounds.push_back(std::move(round));
        if (!trace.invariant_ok) break;
    }
    return trace;
}

}  // namespace renormlab
