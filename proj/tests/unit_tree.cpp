#include <doctest.h>

#include <algorithm>
#include <set>

#include "renormlab/errors.hpp"
#include "renormlab/tree.hpp"
#include "test_support.hpp"

using namespace renormlab;
using namespace renormlab::testing;

TEST_CASE("presentation validation") {
    TreePresentation::Builder b;
    b.add_class("a");
    b.add_edge("a", "missing", Mult::One);
    b.add_root("a");
    CHECK_THROWS_AS(b.build(), DanglingClassError);

    CHECK_THROWS_AS(parse_tree_text("class a\nedge a a two\nroot a\n"), BadMultiplicityError);
    CHECK_THROWS_AS(parse_tree_text("class a\nclass b\nroot a\n"), DanglingClassError);

    // smallest presentation: one class, no children
    TreePresentation one = parse_tree_text("class a\nroot a\n");
    CHECK(one.size() == 1);
    CHECK(unfold_simple(one).size() == 1);

    // two one-edges to leaf classes: a 3-node finite tree
    TreePresentation three = parse_tree_text(
        "class a\nclass b\nclass c\nedge a b one\nedge a c one\nroot a\n");
    CHECK(unfold_simple(three).size() == 3);
}

TEST_CASE("self-loop presentation unfolds to the full dyadic tree") {
    // two one-edges of a class to itself, unfolded to depth 3: 1+2+4 nodes
    FiniteTree t = unfold_simple(dyadic_selfloop(), 3, 1);
    CHECK(t.size() == 7);
    int leaves = 0;
    for (NodeId v = 0; v < t.size(); ++v)
        if (t.children[static_cast<size_t>(v)].empty()) {
            ++leaves;
            CHECK(t.truncated[static_cast<size_t>(v)]);
        }
    CHECK(leaves == 4);

    // same shape as the layered dyadic tree of height 3
    FiniteTree layered = unfold_simple(generate_kary(2, 3, false), 1, 1);
    REQUIRE(layered.size() == t.size());
    std::multiset<int> d1(t.depth.begin(), t.depth.end());
    std::multiset<int> d2(layered.depth.begin(), layered.depth.end());
    CHECK(d1 == d2);
    for (NodeId v = 0; v < layered.size(); ++v)
        CHECK(layered.children[static_cast<size_t>(v)].size() ==
              t.children[static_cast<size_t>(v)].size());
}

TEST_CASE("omega edges expand to sibling copies") {
    TreePresentation star = parse_tree_text("class r\nclass l\nedge r l omega\nroot r\n");
    FiniteTree t = unfold_simple(star, 1, 5);
    CHECK(t.size() == 6);
    CHECK(t.children[0].size() == 5);
    std::set<int> copies;
    for (NodeId c : t.children[0]) copies.insert(t.copy_index[static_cast<size_t>(c)]);
    CHECK(copies == std::set<int>{0, 1, 2, 3, 4});
    CHECK_FALSE(t.truncated[0]);  // only depth cuts count as truncation
}

TEST_CASE("comb unfolding matches the worked expansion") {
    FiniteTree t = unfold_simple(generate_comb(), 3, 2);
    // 3 spine nodes, 2 teeth each
    CHECK(t.size() == 9);
    int spine = 0, truncated_spine = 0;
    for (NodeId v = 0; v < t.size(); ++v) {
        if (t.class_id(v) == "spine") {
            ++spine;
            if (t.truncated[static_cast<size_t>(v)]) ++truncated_spine;
            int teeth = 0;
            for (NodeId c : t.children[static_cast<size_t>(v)])
                teeth += t.class_id(c) == "tooth" ? 1 : 0;
            CHECK(teeth == 2);
        }
    }
    CHECK(spine == 3);
    CHECK(truncated_spine == 1);  // only the deepest spine node lost its continuation
}

TEST_CASE("node budget guards the unfolding") {
    UnfoldOptions opt{8, 8, 50};
    CHECK_THROWS_AS(unfold(share(dyadic_selfloop()), opt), SizeBudgetExceededError);
}

TEST_CASE("poset queries") {
    FiniteTree chain = unfold_simple(generate_chain(3));
    NodeId a = 0, b = 1, c = 2;
    CHECK(chain.down_set(c) == std::vector<NodeId>{a, b, c});
    CHECK(chain.leq(a, c));
    CHECK_FALSE(chain.leq(c, a));
    CHECK_THROWS_AS(chain.down_set(17), UnknownNodeError);

    TreePresentation star = parse_tree_text("class r\nclass l\nedge r l omega\nroot r\n");
    FiniteTree s = unfold_simple(star, 1, 2);
    NodeId x = s.children[0][0], y = s.children[0][1];
    CHECK(s.is_antichain({x, y}));
    CHECK_FALSE(s.is_antichain({0, x}));

    FiniteTree dy = unfold_simple(dyadic_selfloop(), 3, 1);
    std::vector<NodeId> all;
    for (NodeId v = 0; v < dy.size(); ++v) all.push_back(v);
    auto maxs = dy.max_of(all);
    CHECK(maxs.size() == 4);
    CHECK(dy.is_antichain(maxs));
    auto mins = dy.min_of(all);
    CHECK(mins == std::vector<NodeId>{0});

    // reverse neighbourhood drops exactly the chosen successor cones
    auto nb = dy.reverse_nbhd(0, {dy.children[0][0]});
    CHECK(nb.size() == 4);  // root + the other child's subtree
    for (NodeId v : nb) CHECK_FALSE(dy.leq(dy.children[0][0], v));

    // incomparability complements the two cones
    for (NodeId v = 0; v < dy.size(); ++v) {
        auto inc = dy.incomparable_set(v);
        CHECK(inc.size() ==
              static_cast<size_t>(dy.size()) - dy.down_set(v).size() - dy.up_set(v).size() + 1);
        for (NodeId u : inc) CHECK_FALSE(dy.comparable(u, v));
    }
}

TEST_CASE("poset invariants on random trees") {
    Rng rng(7);
    for (int round = 0; round < 20; ++round) {
        TreePresentation p = random_tree_presentation(rng, 1 + static_cast<int>(rng.below(9)),
                                                      30);
        FiniteTree t = unfold_simple(p, 2, 2);
        for (NodeId v = 0; v < t.size(); ++v) {
            auto down = t.down_set(v);
            for (size_t i = 0; i + 1 < down.size(); ++i) CHECK(t.leq(down[i], down[i + 1]));
        }
        std::vector<NodeId> sample;
        for (NodeId v = 0; v < t.size(); ++v)
            if (rng.coin()) sample.push_back(v);
        CHECK(t.is_antichain(t.min_of(sample)));
        CHECK(t.is_antichain(t.max_of(sample)));
    }
}

TEST_CASE("unfolding monotonicity: deeper unfoldings extend shallower ones") {
    Rng rng(11);
    for (int round = 0; round < 10; ++round) {
        TreePresentation p = random_tree_presentation(rng, 5, 40);
        FiniteTree small = unfold_simple(p, 2, 2);
        FiniteTree big = unfold_simple(p, 3, 4);
        std::set<std::string> big_paths(big.path.begin(), big.path.end());
        for (NodeId v = 0; v < small.size(); ++v) {
            CHECK(big_paths.count(small.path[static_cast<size_t>(v)]));
            NodeId bv = big.node_by_path(small.path[static_cast<size_t>(v)]);
            NodeId sp = small.parent[static_cast<size_t>(v)];
            if (sp == kRootSentinel)
                CHECK(big.parent[static_cast<size_t>(bv)] == kRootSentinel);
            else
                CHECK(big.path[static_cast<size_t>(big.parent[static_cast<size_t>(bv)])] ==
                      small.path[static_cast<size_t>(sp)]);
        }
    }
    // recurring dyadic: depth 3 inside depth 4
    FiniteTree small = unfold_simple(dyadic_selfloop(), 3, 1);
    FiniteTree big = unfold_simple(dyadic_selfloop(), 4, 1);
    std::set<std::string> bp(big.path.begin(), big.path.end());
    for (const auto& pth : small.path) CHECK(bp.count(pth));
}

TEST_CASE("injection tree generation") {
    TreePresentation lam = generate_lambda(2, 3);
    // root, three domain-1 injections, each with two extensions
    CHECK(lam.size() == 1 + 3 + 6);
    FiniteTree t = unfold_simple(lam, 1, 1);
    NodeId root = t.node_by_path("root");
    CHECK(t.children[static_cast<size_t>(root)].size() == 3);
    NodeId n1 = t.node_by_path("root/1");
    std::set<std::string> kids;
    for (NodeId c : t.children[static_cast<size_t>(n1)]) kids.insert(t.class_id(c));
    CHECK(kids == std::set<std::string>{"1.0", "1.2"});

    // lambda weight: {0 -> 1, 1 -> 0} has value 1/2 + 1 = 3/2
    WeightFn w = derive_weight_lambda(lam);
    CHECK(w.at("1.0") == make_rat(3, 2));
    // strictly increasing along the order
    for (NodeId v = 0; v < t.size(); ++v)
        for (NodeId c : t.children[static_cast<size_t>(v)])
            CHECK(w.at_node(t, v) < w.at_node(t, c));
}

TEST_CASE("pair augmentation splits successors by label parity") {
    TreePresentation lam = generate_lambda(2, 3);
    TreePresentation aug = augment_pairs(lam);
    FiniteTree t = unfold_simple(aug, 1, 1);
    NodeId root = t.node_by_path("root");
    REQUIRE(t.children[static_cast<size_t>(root)].size() == 2);
    NodeId p1 = t.node_by_path("root/root:1");
    NodeId p2 = t.node_by_path("root/root:2");
    std::set<std::string> even, odd;
    for (NodeId c : t.children[static_cast<size_t>(p1)]) even.insert(t.class_id(c));
    for (NodeId c : t.children[static_cast<size_t>(p2)]) odd.insert(t.class_id(c));
    CHECK(even == std::set<std::string>{"0", "2"});
    CHECK(odd == std::set<std::string>{"1"});
}

TEST_CASE("dyadic augmentation has one weight-equal successor everywhere") {
    for (auto [h, labels] : {std::pair{2, 3}, std::pair{1, 4}}) {
        TreePresentation aug = augment_dyadic(generate_lambda(h, labels));
        WeightFn w = derive_weight_lambda(aug);
        FiniteTree t = unfold_simple(aug, 1, 1);
        for (NodeId v = 0; v < t.size(); ++v) {
            const auto& ch = t.children[static_cast<size_t>(v)];
            if (ch.empty()) {
                CHECK(t.truncated[static_cast<size_t>(v)]);  // ambient tree continues
                continue;
            }
            REQUIRE(ch.size() == 2);
            int equal = 0;
            for (NodeId c : ch) equal += w.at_node(t, c) == w.at_node(t, v) ? 1 : 0;
            CHECK(equal == 1);
        }
    }
}

TEST_CASE("tree file round trip") {
    TreePresentation p = augment_dyadic(generate_lambda(2, 3));
    TreePresentation q = parse_tree_text(tree_to_text(p));
    REQUIRE(q.size() == p.size());
    for (int i = 0; i < p.size(); ++i) {
        CHECK(q.cls(i).id == p.cls(i).id);
        CHECK(q.cls(i).boundary == p.cls(i).boundary);
        REQUIRE(q.cls(i).rho.has_value() == p.cls(i).rho.has_value());
        if (p.cls(i).rho) CHECK(*q.cls(i).rho == *p.cls(i).rho);
        REQUIRE(q.cls(i).children.size() == p.cls(i).children.size());
        for (size_t e = 0; e < p.cls(i).children.size(); ++e) {
            CHECK(q.cls(i).children[e].target == p.cls(i).children[e].target);
            CHECK((q.cls(i).children[e].mult == Mult::Omega) ==
                  (p.cls(i).children[e].mult == Mult::Omega));
        }
    }
}
