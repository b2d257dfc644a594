#include <doctest.h>

#include <set>

#include "renormlab/errors.hpp"
#include "renormlab/game.hpp"

using namespace renormlab;

TEST_CASE("responder invariant holds against every strategy") {
    for (auto strat : {BetaStrategy::Random, BetaStrategy::GreedyLabel, BetaStrategy::Adversarial})
        for (std::uint64_t seed : {1ULL, 7ULL, 99ULL}) {
            GameTrace tr = choquet_game(50, strat, seed);
            CHECK(tr.invariant_ok);
            CHECK(tr.rounds.size() == 50);
        }
}

TEST_CASE("zero rounds is a vacuous win") {
    GameTrace tr = choquet_game(0, BetaStrategy::Random, 5);
    CHECK(tr.invariant_ok);
    CHECK(tr.rounds.empty());
    CHECK_THROWS_AS(choquet_game(-1, BetaStrategy::Random, 5), ParamOutOfRangeError);
}

TEST_CASE("reserved labels stay outside every played range") {
    GameTrace tr = choquet_game(40, BetaStrategy::Adversarial, 1234);
    std::set<int> reserved;
    for (const auto& r : tr.rounds) {
        CHECK(reserved.insert(r.reply_label).second);  // pairwise distinct
        CHECK(r.alpha.window > r.reply_label);
    }
    for (const auto& r : tr.rounds)
        for (int label : r.beta.injection) CHECK_FALSE(reserved.count(label));
}

TEST_CASE("windows and injections grow monotonically") {
    GameTrace tr = choquet_game(30, BetaStrategy::GreedyLabel, 42);
    for (size_t i = 1; i < tr.rounds.size(); ++i) {
        const auto& prev = tr.rounds[i - 1].alpha;
        const auto& cur = tr.rounds[i].beta;
        CHECK(cur.injection.size() >= prev.injection.size());
        for (size_t j = 0; j < prev.injection.size(); ++j)
            CHECK(cur.injection[j] == prev.injection[j]);
        CHECK(cur.window >= prev.window);
    }
}

TEST_CASE("replays are deterministic") {
    GameTrace a = choquet_game(25, BetaStrategy::Random, 777);
    GameTrace b = choquet_game(25, BetaStrategy::Random, 777);
    REQUIRE(a.rounds.size() == b.rounds.size());
    for (size_t i = 0; i < a.rounds.size(); ++i) {
        CHECK(a.rounds[i].beta.injection == b.rounds[i].beta.injection);
        CHECK(a.rounds[i].reply_label == b.rounds[i].reply_label);
    }
    GameTrace c = choquet_game(25, BetaStrategy::Random, 778);
    bool same = a.rounds.size() == c.rounds.size();
    if (same)
        for (size_t i = 0; i < a.rounds.size(); ++i)
            same = same && a.rounds[i].beta.injection == c.rounds[i].beta.injection;
    CHECK_FALSE(same);
}
