// Python bindings for the main operations: generation, unfolding,
// classification, norms, operators, probes and the game.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "renormlab/errors.hpp"
#include "renormlab/game.hpp"
#include "renormlab/kadec.hpp"
#include "renormlab/norms.hpp"
#include "renormlab/operators.hpp"
#include "renormlab/probes.hpp"
#include "renormlab/tree.hpp"
#include "renormlab/weights.hpp"

namespace py = pybind11;
using namespace renormlab;

namespace {

struct PyTree {
    std::shared_ptr<const TreePresentation> presentation;
    FiniteTree tree;
};

PyTree make_tree(const std::string& text, int depth, int copies) {
    auto p = std::make_shared<const TreePresentation>(parse_tree_text(text));
    return PyTree{p, unfold(p, UnfoldOptions{depth, copies, 0})};
}

WeightFn weights_from(const PyTree& t, const std::map<std::string, std::string>& rho) {
    if (rho.empty()) return WeightFn::from_presentation(*t.presentation);
    WeightFn w;
    for (const auto& [cls, val] : rho) w.rho[cls] = parse_rat(val);
    return w;
}

TreeFn fn_from(const PyTree& t, const std::map<std::string, std::string>& values) {
    TreeFn f = TreeFn::zeros(t.tree);
    for (const auto& [path, val] : values)
        f.values[static_cast<size_t>(t.tree.node_by_path(path))] = parse_rat(val);
    return f;
}

std::map<std::string, std::string> fn_to_map(const PyTree& t, const TreeFn& f) {
    std::map<std::string, std::string> out;
    for (NodeId v = 0; v < t.tree.size(); ++v)
        if (f.values[static_cast<size_t>(v)] != 0)
            out[t.tree.path[static_cast<size_t>(v)]] = rat_to_string(f.values[static_cast<size_t>(v)]);
    return out;
}

}  // namespace

PYBIND11_MODULE(_renormlab, m) {
    m.doc() = "desk-scale norms, operators and probes on trees";
#ifdef RENORMLAB_VERSION
    m.attr("__version__") = RENORMLAB_VERSION;
#else
    m.attr("__version__") = "dev";
#endif

    py::register_exception<Error>(m, "RenormlabError");

    py::class_<PyTree>(m, "Tree")
        .def_property_readonly("size", [](const PyTree& t) { return t.tree.size(); })
        .def_property_readonly("paths", [](const PyTree& t) { return t.tree.path; })
        .def_property_readonly("parents", [](const PyTree& t) { return t.tree.parent; })
        .def("classes",
             [](const PyTree& t) {
                 std::vector<std::string> out;
                 for (NodeId v = 0; v < t.tree.size(); ++v) out.push_back(t.tree.class_id(v));
                 return out;
             })
        .def("truncated", [](const PyTree& t) {
            std::vector<bool> out;
            for (char c : t.tree.truncated) out.push_back(c != 0);
            return out;
        });

    m.def("parse_tree", &make_tree, py::arg("text"), py::arg("depth") = 3, py::arg("copies") = 2,
          "parse a tree presentation file and unfold it");
    m.def(
        "generate",
        [](const std::string& kind, int n, int k, int height, int labels, bool recurring) {
            TreePresentation p = [&] {
                if (kind == "chain") return generate_chain(n);
                if (kind == "kary") return generate_kary(k, height, recurring);
                if (kind == "comb") return generate_comb();
                if (kind == "lambda") return generate_lambda(height, labels);
                throw ParamOutOfRangeError("unknown kind '" + kind + "'");
            }();
            return tree_to_text(p);
        },
        py::arg("kind"), py::arg("n") = 3, py::arg("k") = 2, py::arg("height") = 2,
        py::arg("labels") = 3, py::arg("recurring") = false,
        "emit a presentation file for one of the built-in families");
    m.def("augment_pairs_text", [](const std::string& text) {
        return tree_to_text(augment_pairs(parse_tree_text(text)));
    });
    m.def("augment_dyadic_text", [](const std::string& text) {
        return tree_to_text(augment_dyadic(parse_tree_text(text)));
    });

    m.def(
        "classify",
        [](const PyTree& t, const std::map<std::string, std::string>& rho) {
            WeightFn w = weights_from(t, rho);
            Classification cls = classify_points(*t.presentation, w);
            std::map<std::string, py::dict> out;
            for (int c = 0; c < t.presentation->size(); ++c) {
                py::dict e;
                e["good"] = cls[static_cast<size_t>(c)].good;
                e["delta"] = rat_to_string(cls[static_cast<size_t>(c)].delta);
                e["fan"] = cls[static_cast<size_t>(c)].fan;
                out[t.presentation->cls(c).id] = e;
            }
            return out;
        },
        py::arg("tree"), py::arg("rho") = std::map<std::string, std::string>{});

    m.def(
        "check_conditions",
        [](const PyTree& t, const std::map<std::string, std::string>& rho,
           const std::string& theorem) {
            Theorem th = theorem == "T4_1"   ? Theorem::LurCond
                         : theorem == "T5_1" ? Theorem::MlurCond
                         : theorem == "T6_1" ? Theorem::KadecCond
                         : theorem == "T7_1" ? Theorem::DualScCond
                         : theorem == "T8_1" ? Theorem::SmoothCond
                                             : throw ParamOutOfRangeError("unknown theorem tag");
            ConditionReport r = check_conditions(*t.presentation, weights_from(t, rho), th);
            py::dict out;
            out["pass"] = r.pass;
            out["witnesses"] = r.witnesses;
            return out;
        },
        py::arg("tree"), py::arg("rho"), py::arg("theorem"));

    m.def(
        "norm",
        [](const std::string& name, const PyTree& t,
           const std::map<std::string, std::string>& values,
           const std::map<std::string, std::string>& rho) {
            bool weightless = name == "sup" || name == "osc" || name == "day" ||
                              name == "ordinal";
            OraclePtr oracle =
                make_oracle_by_name(name, weightless ? WeightFn{} : weights_from(t, rho));
            TreeFn f = fn_from(t, values);
            NormValue v = oracle->eval(t.tree, f);
            py::dict out;
            out["value"] = rat_to_string(v.value);
            out["error_radius"] = rat_to_string(v.error_radius);
            out["approx"] = v.approx();
            auto sq = oracle->squared_exact(t.tree, f);
            if (sq) out["squared_exact"] = rat_to_string(*sq);
            return out;
        },
        py::arg("name"), py::arg("tree"), py::arg("values"),
        py::arg("rho") = std::map<std::string, std::string>{});

    m.def(
        "apply_operator",
        [](const std::string& name, const PyTree& t,
           const std::map<std::string, std::string>& values,
           const std::map<std::string, std::string>& rho) {
            WeightFn w = weights_from(t, rho);
            TreeFn f = fn_from(t, values);
            std::map<std::string, std::string> out;
            auto node_path = [&](NodeId v) { return t.tree.path[static_cast<size_t>(v)]; };
            if (name == "R") {
                for (const auto& [k, v] : op_r(t.tree, w, f).values)
                    out[node_path(k)] = rat_to_string(v);
            } else if (name == "S") {
                for (const auto& [k, v] : op_s(t.tree, w, f).values)
                    out[node_path(k)] = rat_to_string(v);
            } else if (name == "T_dyadic") {
                for (const auto& [k, v] : op_t_dyadic(t.tree, w, f).values)
                    out[node_path(k)] = rat_to_string(v);
            } else if (name == "T_special") {
                for (const auto& [k, v] : op_t_special(t.tree, w, f).values)
                    out[node_path(k.first) + "|" + node_path(k.second)] = rat_to_string(v);
            } else {
                throw ParamOutOfRangeError("unknown operator '" + name + "'");
            }
            return out;
        },
        py::arg("name"), py::arg("tree"), py::arg("values"),
        py::arg("rho") = std::map<std::string, std::string>{});

    m.def(
        "rs_rank",
        [](const PyTree& t, const std::map<std::string, std::string>& rho) {
            return linear_rank(rs_matrix(t.tree, weights_from(t, rho)));
        },
        py::arg("tree"), py::arg("rho") = std::map<std::string, std::string>{});

    m.def(
        "kadec_norm",
        [](const PyTree& t, const std::map<std::string, std::string>& values,
           const std::map<std::string, std::string>& rho) {
            KadecEvaluation ev = kadec_evaluate(t.tree, weights_from(t, rho), fn_from(t, values));
            py::dict out;
            out["value"] = ev.value;
            out["error_radius"] = rat_to_double(ev.error_radius);
            out["sweeps"] = ev.sweeps;
            out["closure_size"] = ev.closure_size;
            return out;
        },
        py::arg("tree"), py::arg("values"), py::arg("rho") = std::map<std::string, std::string>{});

    m.def(
        "day_norm_squared",
        [](const std::vector<std::string>& values, const std::string& mode) {
            std::vector<Rat> v;
            for (const auto& s : values) v.push_back(parse_rat(s));
            Rat sq =
                mode == "recursive" ? day_norm_squared_recursive(v) : day_norm_squared_sorted(v);
            return rat_to_string(sq);
        },
        py::arg("values"), py::arg("mode") = "sorted");

    m.def("ordinal_norm_squared", [](const std::vector<std::string>& chain) {
        std::vector<Rat> v;
        for (const auto& s : chain) v.push_back(parse_rat(s));
        return rat_to_string(ordinal_norm_squared(v));
    });

    m.def(
        "monotone_distance",
        [](const PyTree& t, const std::map<std::string, std::string>& values,
           const std::string& root_path, int sign) {
            NodeId r = root_path.empty() ? kRootSentinel : t.tree.node_by_path(root_path);
            return rat_to_string(monotone_distance(t.tree, fn_from(t, values), r, sign));
        },
        py::arg("tree"), py::arg("values"), py::arg("root") = "", py::arg("sign") = 1);

    m.def(
        "antichain_mean",
        [](const PyTree& t, const std::map<std::string, std::string>& values,
           const std::string& root_path, int l) {
            NodeId r = root_path.empty() ? kRootSentinel : t.tree.node_by_path(root_path);
            return rat_to_string(antichain_mean(t.tree, fn_from(t, values), r, l));
        },
        py::arg("tree"), py::arg("values"), py::arg("root") = "", py::arg("l") = 1);

    m.def(
        "bump_witness",
        [](const PyTree& t, const std::map<std::string, std::string>& values, int n_max) {
            BumpResult b = bump_map(t.tree, fn_from(t, values), n_max);
            py::dict out;
            out["witness_found"] = b.witness.has_value();
            out["pair_in_open_set"] = b.pair_in_u_set;
            out["support"] = static_cast<int>(b.family.values.size());
            return out;
        },
        py::arg("tree"), py::arg("values"), py::arg("n_max") = 40);

    m.def(
        "choquet_game",
        [](int rounds, const std::string& beta, std::uint64_t seed) {
            GameTrace tr = choquet_game(rounds, beta_strategy_by_name(beta), seed);
            py::dict out;
            out["rounds"] = static_cast<int>(tr.rounds.size());
            out["invariant_ok"] = tr.invariant_ok;
            std::vector<int> reserved;
            for (const auto& r : tr.rounds) reserved.push_back(r.reply_label);
            out["reserved"] = reserved;
            return out;
        },
        py::arg("rounds") = 50, py::arg("beta") = "random", py::arg("seed") = 0);

    m.def(
        "run_probe",
        [](const std::string& name, const PyTree& t,
           const std::map<std::string, std::string>& rho, const std::string& norm_name, int budget,
           std::uint64_t seed) {
            bool weightless = norm_name == "sup" || norm_name == "osc" || norm_name == "day" ||
                              norm_name == "ordinal";
            OraclePtr oracle =
                make_oracle_by_name(norm_name, weightless ? WeightFn{} : weights_from(t, rho));
            ProbeReport rep;
            if (name == "strict_convexity")
                rep = probe_strict_convexity(*oracle, t.tree, weights_from(t, rho), budget, seed);
            else if (name == "mlur")
                rep = probe_mlur(*oracle, t.tree, budget, seed);
            else
                throw ParamOutOfRangeError("probe '" + name + "' is not exposed to python");
            py::dict out;
            out["samples"] = rep.samples;
            out["assertion_failures"] = rep.assertion_failures();
            std::vector<std::string> findings;
            for (const auto& f : rep.findings) findings.push_back(f.description);
            out["findings"] = findings;
            return out;
        },
        py::arg("name"), py::arg("tree"), py::arg("rho") = std::map<std::string, std::string>{},
        py::arg("norm") = "sup", py::arg("budget") = 100, py::arg("seed") = 0);

    m.def("tree_fn_from_indicator", [](const PyTree& t, const std::string& path) {
        return fn_to_map(t, TreeFn::indicator_down_set(t.tree, t.tree.node_by_path(path)));
    });
}
