#include <doctest.h>

#include <cmath>

#include "renormlab/errors.hpp"
#include "renormlab/kadec.hpp"
#include "test_support.hpp"

using namespace renormlab;
using namespace renormlab::testing;

namespace {

// Independent scalar fixed point for the one-node tree: the six tables reduce
// to two unknowns, the aggregate at the node and at the root sentinel. All
// sums are written out termwise with the same truncation T.
std::pair<double, double> scalar_oracle(double c, double rho, int T) {
    double A = 0;  // truncated antichain series: sum 2^-l * c / l
    for (int l = 1; l <= T; ++l) A += std::ldexp(1.0, -l) * c / l;
    double dsum = 0;  // sum over m,l <= T of 2^-m-l
    for (int m = 1; m <= T; ++m)
        for (int l = 1; l <= T; ++l) dsum += std::ldexp(1.0, -(m + l));

    double phi_a = 0, phi_0 = 0;
    for (int it = 0; it < 200; ++it) {
        // at the node: links vanish (the only chain is empty, the masked
        // function is zero)
        double peak_a = 0, zig_a = 0, bal_a = 0;
        for (int m = 1; m <= T; ++m)
            for (int l = 1; l <= T; ++l) {
                double wml = std::ldexp(1.0, -(m + l));
                peak_a += wml * (c + std::ldexp(phi_a, -l));
                zig_a += wml * (c + std::ldexp(phi_a, -l));  // best pick t=u=a
                bal_a += wml * c;                            // leaf gap capped at 1
            }
        double new_phi_a = (0 + c + A + peak_a / 2 + zig_a / 4 + bal_a / 2 + 0) / 7;

        // at the sentinel: the chain (0,a] has the singleton interval norm c,
        // so the link table holds (c + 0)/2
        double xi = (c + 0) / 2;
        double peak_0 = 0, zig_0 = 0, bal_0 = 0, jump_0 = 0;
        for (int m = 1; m <= T; ++m)
            for (int l = 1; l <= T; ++l) {
                double wml = std::ldexp(1.0, -(m + l));
                peak_0 += wml * (c + std::ldexp(xi, -m) + std::ldexp(phi_a, -l));
                zig_0 += wml * (c + std::ldexp(xi, -m) + std::ldexp(phi_a, -l));
                bal_0 += wml * c;
                jump_0 += wml * (rho * c + std::ldexp(xi, -m) + std::ldexp(phi_a, -l));
            }
        double new_phi_0 = (0 + c + A + peak_0 / 2 + zig_0 / 4 + bal_0 / 2 + jump_0 / 2) / 7;
        if (std::fabs(new_phi_a - phi_a) < 1e-15 && std::fabs(new_phi_0 - phi_0) < 1e-15) {
            phi_a = new_phi_a;
            phi_0 = new_phi_0;
            break;
        }
        phi_a = new_phi_a;
        phi_0 = new_phi_0;
    }
    (void)dsum;
    return {phi_a, phi_0};
}

}  // namespace

TEST_CASE("single node matches the independent scalar fixed point") {
    TreePresentation p = generate_chain(1);
    WeightFn w;
    w.rho["c0"] = make_rat(3, 8);
    FiniteTree t = unfold_simple(p);
    TreeFn f = TreeFn::zeros(t);
    f.values[0] = 1;
    KadecEvaluation ev = kadec_evaluate(t, w, f);
    auto [phi_a, phi_0] = scalar_oracle(1.0, 0.375, 40);
    CHECK(std::fabs(ev.value - phi_0) < 1e-9);
    REQUIRE(ev.main_at.size() == 2);
    CHECK(std::fabs(ev.main_at[0] - phi_a) < 1e-9);
    CHECK(ev.value >= 0.25 - 1e-9);
    CHECK(ev.value <= 1.0 + 1e-9);
    CHECK(rat_to_double(ev.error_radius) <= 1e-9);
}

TEST_CASE("zero input evaluates to zero") {
    TreePresentation p = generate_kary(2, 2, false);
    WeightFn w = WeightFn::constant(p, make_rat(1, 2));
    FiniteTree t = unfold_simple(p, 1, 1);
    KadecEvaluation ev = kadec_evaluate(t, w, TreeFn::zeros(t));
    CHECK(ev.value == 0);
}

TEST_CASE("homogeneity within the certified radii") {
    Rng rng(17);
    TreePresentation p = random_tree_presentation(rng, 5, 30);
    WeightFn w = random_increasing_weight(rng, p, 30);
    FiniteTree t = unfold_simple(p, 2, 2);
    for (int round = 0; round < 5; ++round) {
        TreeFn f = random_tree_fn(rng, t, 4, 4);
        TreeFn g = f;
        for (auto& v : g.values) v *= 3;
        KadecEvaluation ef = kadec_evaluate(t, w, f);
        KadecEvaluation eg = kadec_evaluate(t, w, g);
        double tol = 3 * rat_to_double(ef.error_radius) + rat_to_double(eg.error_radius) + 1e-12;
        CHECK(std::fabs(eg.value - 3 * ef.value) <= tol);
    }
}

TEST_CASE("frame bounds, contraction and monotonicity in the base point") {
    Rng rng(29);
    int done = 0;
    while (done < 8) {
        TreePresentation p = random_tree_presentation(rng, 2 + static_cast<int>(rng.below(5)), 25);
        WeightFn w = random_increasing_weight(rng, p, 40);
        FiniteTree t = unfold_simple(p, 2, 2);
        if (t.size() > 12) continue;
        TreeFn f = random_tree_fn(rng, t, 4, 4);
        KadecEvaluation ev = kadec_evaluate(t, w, f);
        double sup = rat_to_double(f.sup_abs());
        double err = rat_to_double(ev.error_radius);
        CHECK(ev.value >= sup / 4 - err);
        CHECK(ev.value <= sup + err);
        CHECK(err <= 1e-9);
        // residuals contract after warm-up, and the certificate dominates the
        // post-stop change
        for (size_t i = 1; i < ev.residual_history.size(); ++i)
            if (ev.residual_history[i - 1] > 1e-13)
                CHECK(ev.residual_history[i] < ev.residual_history[i - 1] + 1e-15);
        CHECK(rat_to_double(ev.error_radius) >= ev.residual_history.back());
        ++done;
    }
}

TEST_CASE("node budget is enforced") {
    TreePresentation p = generate_kary(3, 4, false);  // 40 nodes
    WeightFn w = WeightFn::constant(p, make_rat(1, 2));
    FiniteTree t = unfold_simple(p, 1, 1);
    TreeFn f = TreeFn::zeros(t);
    f.values[0] = 1;
    CHECK_THROWS_AS(kadec_evaluate(t, w, f), SizeBudgetExceededError);
}
