"""Smoke tests for the python bindings: the main operations round-trip."""

import _renormlab as rl


def test_generate_and_unfold():
    text = rl.generate("lambda", height=2, labels=3)
    tree = rl.parse_tree(text, depth=1, copies=1)
    assert tree.size == 1 + 3 + 6
    assert "root" in tree.paths
    assert any(t for t in tree.truncated())  # injection trees are always cut


def test_classify_and_conditions():
    text = "class t\nclass u\nedge t u omega\nroot t\n"
    tree = rl.parse_tree(text, depth=1, copies=3)
    rho = {"t": "1/2", "u": "1/2"}
    cls = rl.classify(tree, rho)
    assert cls["t"]["good"] is False
    cond = rl.check_conditions(tree, rho, "T6_1")
    assert cond["pass"] is False and cond["witnesses"]


def test_norms_exact_values():
    assert rl.day_norm_squared(["2", "1"]) == "9/4"
    assert rl.day_norm_squared(["2", "1"], mode="recursive") == "9/4"
    assert rl.ordinal_norm_squared(["1", "1"]) == "17/48"

    chain = rl.parse_tree(rl.generate("chain", n=2))
    f = rl.tree_fn_from_indicator(chain, "c0/c1")
    out = rl.norm("sup", chain, f)
    assert out["value"] == "1" and out["error_radius"] == "0"


def test_operators_and_rank():
    text = rl.generate("lambda", height=2, labels=3)
    aug = rl.augment_dyadic_text(text)
    tree = rl.parse_tree(aug, depth=1, copies=1)
    assert rl.check_conditions(tree, {}, "T8_1")["pass"] is True
    f = rl.tree_fn_from_indicator(tree, "root")
    family = rl.apply_operator("T_dyadic", tree, f)
    assert family  # the root sees the drop to its weight-equal successor
    assert rl.rs_rank(tree) == tree.size


def test_kadec_certificate():
    text = "class a\nclass b\nedge a b one\nroot a\n"
    tree = rl.parse_tree(text)
    out = rl.kadec_norm(tree, {"a/b": "1"}, {"a": "1/4", "b": "1/2"})
    assert 0.25 - out["error_radius"] <= out["value"] <= 1 + out["error_radius"]
    assert out["error_radius"] <= 1e-9


def test_sub_solvers():
    text = "class r\nclass a\nclass b\nedge r a one\nedge r b one\nroot r\n"
    tree = rl.parse_tree(text)
    vals = {"r/a": "3", "r/b": "2"}
    assert rl.antichain_mean(tree, vals, l=2) == "5/2"
    assert rl.monotone_distance(tree, {"r/a": "1"}, sign=1) == "1/2"


def test_bump_and_game():
    tree = rl.parse_tree(rl.generate("kary", k=2, height=3))
    out = rl.bump_witness(tree, {"l0": "1", "l0/l1~0": "1/2"})
    assert out["witness_found"] and out["pair_in_open_set"]

    game = rl.choquet_game(rounds=50, beta="adversarial", seed=7)
    assert game["invariant_ok"] and game["rounds"] == 50
    assert len(set(game["reserved"])) == 50


def test_probe_findings():
    tree = rl.parse_tree(rl.generate("kary", k=2, recurring=True), depth=5, copies=1)
    out = rl.run_probe("strict_convexity", tree, {"n": "1/2"}, norm="sup", budget=20, seed=3)
    assert out["assertion_failures"] == 0
    assert any("fan triple" in f for f in out["findings"])
