#include <doctest.h>

#include "renormlab/errors.hpp"
#include "renormlab/operators.hpp"
#include "test_support.hpp"

using namespace renormlab;
using namespace renormlab::testing;

TEST_CASE("jump operator on a chain telescopes") {
    TreePresentation p = generate_chain(2);
    WeightFn w;
    w.rho["c0"] = make_rat(1, 4);
    w.rho["c1"] = make_rat(1, 2);
    FiniteTree t = unfold_simple(p);
    TreeFn f = TreeFn::indicator_down_set(t, 1);
    NodeFamily r = op_r(t, w, f);
    CHECK(*r.find(0) == make_rat(1, 4));
    CHECK(*r.find(1) == make_rat(1, 4));
    CHECK(r.l1() == make_rat(1, 2));  // adds up the jumps to rho(b)

    NodeFamily zero = op_r(t, w, TreeFn::zeros(t));
    CHECK(zero.values.empty());

    // constant weight: only minimal elements jump
    TreePresentation dy = generate_kary(2, 3, false);
    WeightFn cw = WeightFn::constant(dy, make_rat(1, 2));
    FiniteTree dt = unfold_simple(dy, 1, 1);
    for (NodeId u = 0; u < dt.size(); ++u) {
        NodeFamily ru = op_r(dt, cw, TreeFn::indicator_down_set(dt, u));
        CHECK(ru.values.size() == 1);
        CHECK(ru.find(0) != nullptr);
    }
}

TEST_CASE("balance operator values") {
    // leaf with the capped gap: value is f itself
    TreePresentation leafp = generate_chain(1);
    WeightFn lw = WeightFn::constant(leafp, make_rat(1, 2));
    FiniteTree lt = unfold_simple(leafp);
    TreeFn one = TreeFn::zeros(lt);
    one.values[0] = 1;
    NodeFamily s = op_s(lt, lw, one);
    CHECK(*s.find(0) == 1);

    // good point with one equal child and gap 1/2 elsewhere
    TreePresentation p = parse_tree_text(
        "class t\nclass u1\nclass u2\nedge t u1 one\nedge t u2 one\nroot t\n");
    WeightFn w;
    w.rho["t"] = make_rat(1, 4);
    w.rho["u1"] = make_rat(1, 4);
    w.rho["u2"] = make_rat(3, 4);
    FiniteTree t = unfold_simple(p);
    TreeFn f = TreeFn::indicator_down_set(t, 0);
    NodeFamily sf = op_s(t, w, f);
    CHECK(*sf.find(0) == make_rat(1, 4));  // (1/2)/2 * (1 - 0)

    // the kernel pattern vanishes
    TreeFn g = TreeFn::zeros(t);
    g.values[0] = make_rat(2, 3);
    for (NodeId c : t.children[0])
        if (w.at_node(t, c) == w.at_node(t, 0)) g.values[static_cast<size_t>(c)] = make_rat(2, 3);
    NodeFamily sg = op_s(t, w, g);
    CHECK(sg.find(0) == nullptr);
}

TEST_CASE("l1 bounds hold exactly on random weighted trees") {
    Rng rng(101);
    for (int round = 0; round < 25; ++round) {
        TreePresentation p = random_tree_presentation(rng, 2 + static_cast<int>(rng.below(8)), 30);
        WeightFn w = random_increasing_weight(rng, p, 40);
        FiniteTree t = unfold_simple(p, 2, 3);
        auto data = node_point_data(t, w);
        for (NodeId u = 0; u < t.size(); ++u) {
            TreeFn f = TreeFn::indicator_down_set(t, u);
            CHECK(op_r(t, w, f).l1() <= w.at_node(t, u));
            CHECK(op_s(t, w, f).l1() <= data[static_cast<size_t>(u)].delta + w.at_node(t, u));
        }
    }
}

TEST_CASE("special pairs carry the balance values") {
    TreePresentation aug = augment_dyadic(generate_lambda(2, 3));
    WeightFn w = derive_weight_lambda(aug);
    FiniteTree t = unfold_simple(aug, 1, 1);

    Rng rng(3);
    TreeFn f = random_tree_fn(rng, t);
    PairFamily tf = op_t_special(t, w, f);
    NodeFamily sf = op_s(t, w, f);
    for (const auto& [key, value] : tf.values) CHECK(*sf.find(key.second) == value);
    // the diagonal is always special
    for (NodeId v = 0; v < t.size(); ++v)
        if (const Rat* sv = sf.find(v)) CHECK(*tf.find({v, v}) == *sv);

    // zero input, zero family
    CHECK(op_t_special(t, w, TreeFn::zeros(t)).values.empty());

    // the pair family never exceeds the input sup
    for (int round = 0; round < 20; ++round) {
        TreeFn g = random_tree_fn(rng, t);
        CHECK(op_t_special(t, w, g).sup_abs() <= g.sup_abs());
    }
}

TEST_CASE("special-pair witnesses on admissible trees") {
    TreePresentation aug = augment_dyadic(generate_lambda(2, 3));
    WeightFn w = derive_weight_lambda(aug);
    REQUIRE(check_conditions(aug, w, Theorem::SmoothCond).pass);
    FiniteTree t = unfold_simple(aug, 1, 1);
    TalagrandReport rep = check_talagrand(TalagrandKind::Special, t, w, 100, 12345);
    CHECK(rep.witnesses == 100);
    CHECK(rep.counterexamples.empty());
}

TEST_CASE("dyadic operator on a three-node cell") {
    TreePresentation p = parse_tree_text(
        "class t\nclass a\nclass b\nedge t a one\nedge t b one\nroot t\n");
    WeightFn w;
    w.rho["t"] = make_rat(1, 2);
    w.rho["a"] = make_rat(1, 2);  // the weight-equal successor
    w.rho["b"] = make_rat(3, 4);
    FiniteTree t = unfold_simple(p);
    NodeId na = t.node_by_path("t/a"), nb = t.node_by_path("t/b");

    // maximal value at a leaf: nonzero by the ambient convention
    TreeFn f = TreeFn::zeros(t);
    f.values[static_cast<size_t>(na)] = 1;
    NodeFamily tf = op_t_dyadic(t, w, f);
    CHECK(*tf.find(na) == 1);
    // at the root the equal-successor difference scales by the gap
    TreeFn g = TreeFn::zeros(t);
    g.values[0] = 1;
    NodeFamily tg = op_t_dyadic(t, w, g);
    CHECK(*tg.find(0) == make_rat(1, 4));  // (3/4-1/2)*(1-0)
    CHECK(tg.find(nb) == nullptr);

    CHECK(op_t_dyadic(t, w, TreeFn::zeros(t)).values.empty());

    // wrong shape is rejected
    TreePresentation bad = parse_tree_text(
        "class t\nclass a\nclass b\nclass c\n"
        "edge t a one\nedge t b one\nedge t c one\nroot t\n");
    WeightFn bw = WeightFn::constant(bad, make_rat(1, 2));
    FiniteTree bt = unfold_simple(bad);
    CHECK_THROWS_AS(op_t_dyadic(bt, bw, TreeFn::zeros(bt)), ShapeViolationError);
}

TEST_CASE("dyadic operator telescopes along an equal-weight spine") {
    TreePresentation aug = augment_dyadic(generate_lambda(1, 4));
    WeightFn w = derive_weight_lambda(aug);
    FiniteTree t = unfold_simple(aug, 1, 1);
    // the root spine root:s0, root:s1, ... carries the root weight
    TreeFn f = TreeFn::zeros(t);
    std::vector<NodeId> spine;
    for (NodeId v = 0; v < t.size(); ++v)
        if (t.class_id(v).find("root:s") == 0) spine.push_back(v);
    REQUIRE(spine.size() >= 2);
    for (NodeId v : spine) f.values[static_cast<size_t>(v)] = make_rat(2, 3);
    NodeFamily tf = op_t_dyadic(t, w, f);
    // interior spine nodes vanish; the cut end keeps its value against the
    // ambient zero continuation
    for (NodeId v : spine) {
        if (t.children[static_cast<size_t>(v)].empty())
            CHECK(*tf.find(v) == make_rat(2, 3));
        else
            CHECK(tf.find(v) == nullptr);
    }
    CHECK(tf.find(0) != nullptr);  // the spine top sees the drop from 0 to 2/3
}

TEST_CASE("dyadic witnesses over random functions") {
    TreePresentation aug = augment_dyadic(generate_lambda(2, 3));
    WeightFn w = derive_weight_lambda(aug);
    FiniteTree t = unfold_simple(aug, 1, 1);
    TalagrandReport rep = check_talagrand(TalagrandKind::Dyadic, t, w, 100, 777, 2);
    CHECK(rep.witnesses == 100);
}

TEST_CASE("stacked operator matrix has full rank on admissible trees") {
    Rng rng(55);
    int done = 0;
    for (int round = 0; round < 60 && done < 10; ++round) {
        TreePresentation p = random_tree_presentation(rng, 2 + static_cast<int>(rng.below(6)), 25);
        WeightFn w = random_increasing_weight(rng, p, 30);
        if (!check_conditions(p, w, Theorem::MlurCond).pass) continue;
        FiniteTree t = unfold_simple(p, 2, 2);
        RatMatrix m = rs_matrix(t, w);
        CHECK(linear_rank(m) == t.size());
        ++done;
    }
    CHECK(done == 10);
}

TEST_CASE("twin bad continuations put the difference pattern in the kernel") {
    TreePresentation twin = parse_tree_text(
        "class s\nclass b1\nclass b2\nclass l1\nclass l2\n"
        "edge s b1 one\nedge s b2 one\nedge b1 l1 omega\nedge b2 l2 omega\nroot s\n");
    WeightFn w = WeightFn::constant(twin, make_rat(1, 2));
    REQUIRE_FALSE(check_conditions(twin, w, Theorem::MlurCond).pass);
    FiniteTree t = unfold_simple(twin, 1, 4);
    NodeId b1 = t.node_by_path("s/b1"), b2 = t.node_by_path("s/b2");
    TreeFn f = TreeFn::indicator_down_set(t, b1);
    for (NodeId v : t.down_set(b2)) f.values[static_cast<size_t>(v)] -= 1;
    CHECK_FALSE(f.is_zero());
    CHECK(op_r(t, w, f).values.empty());
    CHECK(op_s(t, w, f).values.empty());
    CHECK(linear_rank(rs_matrix(t, w)) < t.size());
}

TEST_CASE("identity-like matrix has full rank") {
    RatMatrix m;
    m.rows = 4;
    m.cols = 3;
    m.a.assign(12, Rat(0));
    m.at(0, 0) = make_rat(1, 3);
    m.at(1, 1) = make_rat(-2, 7);
    m.at(3, 2) = 5;
    CHECK(linear_rank(m) == 3);
    m.at(1, 1) = 0;
    CHECK(linear_rank(m) == 2);
}

TEST_CASE("bump family basics") {
    TreePresentation p = generate_chain(2);
    FiniteTree t = unfold_simple(p);

    // indicator of a leaf down-set: level 0 fires at the leaf
    TreeFn f = TreeFn::indicator_down_set(t, 1);
    BumpResult b = bump_map(t, f, 8);
    CHECK(*b.family.find({1, 0}) == 1);
    // equal successor value kills the root coordinate entirely
    for (int n = 0; n <= 8; ++n) CHECK(b.family.find({0, n}) == nullptr);
    REQUIRE(b.witness.has_value());
    CHECK(b.witness->first == 1);
    CHECK(b.pair_in_u_set);

    BumpResult z = bump_map(t, TreeFn::zeros(t), 4);
    CHECK(z.family.values.empty());
    CHECK(z.pair_in_u_set);  // the zero pair is admitted

    // levels decay: |value| <= 2^-n, and a witness exists for random inputs
    Rng rng(9);
    TreePresentation q = random_tree_presentation(rng, 6, 20);
    FiniteTree qt = unfold_simple(q, 2, 2);
    for (int round = 0; round < 50; ++round) {
        TreeFn g = random_tree_fn(rng, qt);
        BumpResult bb = bump_map(qt, g, 40);
        for (const auto& [key, value] : bb.family.values) {
            Rat bound(BigInt(1), BigInt(1) << key.second);
            CHECK((value < 0 ? Rat(-value) : value) <= bound);
        }
        CHECK(bb.witness.has_value());
        CHECK(bb.pair_in_u_set);
    }
}

TEST_CASE("reconstruction from bump thresholds") {
    TreePresentation p = generate_kary(2, 3, false);
    FiniteTree t = unfold_simple(p, 1, 1);

    // full cover reproduces f, the empty set gives 0
    Rng rng(13);
    TreeFn f = random_tree_fn(rng, t);
    std::vector<std::pair<NodeId, int>> cover;
    for (NodeId v = 0; v < t.size(); ++v) cover.emplace_back(v, 0);
    CHECK(reconstruct_rf(t, f, cover).values == f.values);
    CHECK(reconstruct_rf(t, f, {}).is_zero());

    for (int round = 0; round < 50; ++round) {
        TreeFn g = random_tree_fn(rng, t);
        Rat eps = make_rat(1, 4);
        auto idx = reconstruction_index_set(t, g, eps, 64);
        TreeFn rf = reconstruct_rf(t, g, idx);
        Rat err = 0;
        for (NodeId v = 0; v < t.size(); ++v) {
            Rat d = g.values[static_cast<size_t>(v)] - rf.values[static_cast<size_t>(v)];
            if (d < 0) d = -d;
            if (d > err) err = d;
        }
        CHECK(err < eps);
    }
}
