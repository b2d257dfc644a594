// Batch entry point: generation, classification, norm evaluation, operators,
// probes and the game, all reading and writing files so runs are reproducible.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "renormlab/errors.hpp"
#include "renormlab/game.hpp"
#include "renormlab/kadec.hpp"
#include "renormlab/norms.hpp"
#include "renormlab/operators.hpp"
#include "renormlab/probes.hpp"
#include "renormlab/report.hpp"
#include "renormlab/tree.hpp"
#include "renormlab/weights.hpp"

using json = nlohmann::ordered_json;
using namespace renormlab;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
}

struct CommonInputs {
    std::string tree_file, weight_file, fn_file;
    int depth = 3, copies = 2;
    long node_budget = 0;
    std::uint64_t fn_seed = 0;
    bool fn_random = false;
};

void add_tree_options(CLI::App* cmd, CommonInputs& in, bool need_fn) {
    cmd->add_option("--tree", in.tree_file, "tree presentation file")->required();
    cmd->add_option("--weights", in.weight_file, "weight file (default: rho slots in the tree)");
    cmd->add_option("--depth", in.depth, "cyclic-class unfolding depth");
    cmd->add_option("--copies", in.copies, "siblings per omega edge");
    cmd->add_option("--node-budget", in.node_budget, "node cap override");
    if (need_fn) {
        cmd->add_option("--fn", in.fn_file, "tree function file: lines '<node-path> <p/q>'");
        cmd->add_option("--fn-random", in.fn_seed, "random function seed")
            ->trigger_on_parse()
            ->each([&in](const std::string&) { in.fn_random = true; });
    }
}

std::shared_ptr<const TreePresentation> load_tree(const CommonInputs& in) {
    return std::make_shared<TreePresentation>(parse_tree_text(slurp(in.tree_file)));
}

WeightFn load_weights(const CommonInputs& in, const TreePresentation& p) {
    if (!in.weight_file.empty()) return parse_weight_text(slurp(in.weight_file));
    return WeightFn::from_presentation(p);
}

bool norm_needs_weights(const std::string& name) {
    return name == "injection_sc" || name == "composite_lur" || name == "composite_mlur" ||
           name == "kadec" || name == "dual_sc";
}

// unknown names fail before any weight file is read
OraclePtr cli_oracle(const std::string& name, const CommonInputs& in, const TreePresentation& p) {
    if (!norm_needs_weights(name)) return make_oracle_by_name(name, WeightFn{});
    return make_oracle_by_name(name, load_weights(in, p));
}

TreeFn load_fn(const CommonInputs& in, const FiniteTree& t) {
    if (in.fn_random) {
        Rng rng(in.fn_seed);
        TreeFn f = TreeFn::zeros(t);
        for (NodeId v = 0; v < t.size(); ++v)
            if (rng.coin()) f.values[static_cast<size_t>(v)] = rng.rat(8, 8);
        return f;
    }
    if (in.fn_file.empty()) throw ParamOutOfRangeError("this subcommand needs --fn or --fn-random");
    TreeFn f = TreeFn::zeros(t);
    std::istringstream text(slurp(in.fn_file));
    std::string line;
    while (std::getline(text, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string path, val;
        if (!(ls >> path)) continue;
        if (!(ls >> val)) throw ParseError("fn file: missing value for '" + path + "'");
        f.values[static_cast<size_t>(t.node_by_path(path))] = parse_rat(val);
    }
    return f;
}

json config_echo(const CommonInputs& in) {
    json c;
    c["tree"] = in.tree_file;
    if (!in.weight_file.empty()) c["weights"] = in.weight_file;
    c["depth"] = in.depth;
    c["copies"] = in.copies;
    if (!in.fn_file.empty()) c["fn"] = in.fn_file;
    if (in.fn_random) c["fn_seed"] = in.fn_seed;
    return c;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"desk-scale norms, operators and probes on trees"};
    app.require_subcommand(1);

    // generate ------------------------------------------------------------
    auto* gen = app.add_subcommand("generate", "emit a tree presentation file");
    std::string kind, gen_out, gen_input, gen_report;
    int gen_n = 3, gen_k = 2, gen_h = 2, gen_labels = 3;
    bool recurring = false;
    gen->add_option("--kind", kind, "chain|kary|comb|lambda|augment_pairs|augment_dyadic")
        ->required();
    gen->add_option("--n", gen_n, "chain length");
    gen->add_option("--k", gen_k, "branching factor");
    gen->add_option("--height", gen_h, "height");
    gen->add_option("--labels", gen_labels, "label bound for the injection tree");
    gen->add_flag("--recurring", recurring, "self-loop presentation instead of layers");
    gen->add_option("--input", gen_input, "input tree for the augmentations");
    gen->add_option("--out", gen_out, "output tree file")->required();
    gen->add_option("--report", gen_report, "optional report file");

    // classify ------------------------------------------------------------
    auto* cls = app.add_subcommand("classify", "good/bad/fan classification of a weighted tree");
    CommonInputs cls_in;
    std::string cls_out, cls_theorem, cls_export;
    add_tree_options(cls, cls_in, false);
    cls->add_option("--out", cls_out, "report file")->required();
    cls->add_option("--check", cls_theorem, "also check conditions: T4_1|T5_1|T6_1|T7_1|T8_1");
    cls->add_option("--export-unfolding", cls_export,
                    "write the unfolded tree (classes, copy indices, truncation flags)");

    // norm ------------------------------------------------------------------
    auto* nrm = app.add_subcommand("norm", "evaluate a norm on a tree function");
    CommonInputs nrm_in;
    std::string nrm_name, nrm_out;
    add_tree_options(nrm, nrm_in, true);
    nrm->add_option("--name", nrm_name, "sup|osc|day|ordinal|injection_sc|composite_lur|"
                                        "composite_mlur|kadec|dual_sc")
        ->required();
    nrm->add_option("--out", nrm_out, "report file")->required();

    // operator ----------------------------------------------------------------
    auto* opc = app.add_subcommand("operator", "apply one of the explicit operators");
    CommonInputs op_in;
    std::string op_name, op_out, op_matrix, op_eps = "1/4";
    int op_nmax = 40;
    add_tree_options(opc, op_in, true);
    opc->add_option("--name", op_name, "R|S|T_special|T_dyadic|bump|reconstruct|rs_rank")
        ->required();
    opc->add_option("--out", op_out, "report file")->required();
    opc->add_option("--matrix-out", op_matrix, "sparse triplet export of the stacked matrix");
    opc->add_option("--n-max", op_nmax, "level cap for the bump map");
    opc->add_option("--eps", op_eps, "reconstruction accuracy target (p/q)");

    // probe ----------------------------------------------------------------------
    auto* prb = app.add_subcommand("probe", "randomized and structured property probes");
    CommonInputs prb_in;
    std::string prb_name, prb_norm = "sup", prb_out, prb_schedule = "2,4,8";
    std::string prb_node;
    int prb_budget = 200, prb_jobs = 1, prb_directions = 8, prb_orders = 10;
    std::uint64_t prb_seed = 0;
    bool prb_seed_set = false;
    add_tree_options(prb, prb_in, true);
    prb->add_option("--name", prb_name,
                    "strict_convexity|mlur|kadec|smoothness|reverse_convergence|"
                    "talagrand_special|talagrand_dyadic|mu|pair_badness")
        ->required();
    prb->add_option("--norm", prb_norm, "norm oracle for norm-based probes");
    prb->add_option("--budget", prb_budget, "sample or evaluation budget");
    prb->add_option("--seed", prb_seed, "rng seed (required for randomized probes)")
        ->trigger_on_parse()
        ->each([&prb_seed_set](const std::string&) { prb_seed_set = true; });
    prb->add_option("--jobs", prb_jobs, "worker bound for sampled probes");
    prb->add_option("--schedule", prb_schedule, "comma list of copy counts");
    prb->add_option("--node", prb_node, "node path for the mu probe");
    prb->add_option("--directions", prb_directions, "directions for the smoothness probe");
    prb->add_option("--orders", prb_orders, "step refinements for the smoothness probe");
    prb->add_option("--out", prb_out, "report file")->required();

    // game --------------------------------------------------------------------------
    auto* gm = app.add_subcommand("game", "point-open game on the injection tree");
    int gm_rounds = 50;
    std::string gm_beta = "random", gm_out;
    std::uint64_t gm_seed = 0;
    gm->add_option("--rounds", gm_rounds, "rounds to play");
    gm->add_option("--beta", gm_beta, "random|greedy|adversarial");
    gm->add_option("--seed", gm_seed, "rng seed")->required();
    gm->add_option("--out", gm_out, "report file")->required();

    // report-diff ---------------------------------------------------------------------
    auto* dif = app.add_subcommand("report-diff", "semantic diff of two reports");
    std::string dif_a, dif_b, dif_out;
    dif->add_option("first", dif_a, "first report")->required();
    dif->add_option("second", dif_b, "second report")->required();
    dif->add_option("--out", dif_out, "write the diff here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        TreePresentation p = [&] {
            if (kind == "chain") return generate_chain(gen_n);
            if (kind == "kary") return generate_kary(gen_k, gen_h, recurring);
            if (kind == "comb") return generate_comb();
            if (kind == "lambda") return generate_lambda(gen_h, gen_labels);
            if (kind == "augment_pairs" || kind == "augment_dyadic") {
                if (gen_input.empty())
                    throw ParamOutOfRangeError("augmentations need --input");
                TreePresentation base = parse_tree_text(slurp(gen_input));
                return kind == "augment_pairs" ? augment_pairs(base) : augment_dyadic(base);
            }
            throw ParamOutOfRangeError("unknown kind '" + kind + "'");
        }();
        spill(gen_out, tree_to_text(p));
        if (!gen_report.empty()) {
            json cfg{{"kind", kind}, {"out", gen_out}};
            json res{{"classes", p.size()}, {"cyclic", !p.acyclic()}};
            write_report(make_report("generate", cfg, res), gen_report);
        }
        return 0;
    }

    if (cls->parsed()) {
        auto p = load_tree(cls_in);
        if (!cls_export.empty()) {
            auto tree = unfold(p, UnfoldOptions{cls_in.depth, cls_in.copies, cls_in.node_budget});
            write_report(finite_tree_json(tree), cls_export);
        }
        WeightFn w = load_weights(cls_in, *p);
        json res;
        WeightReport vr = validate_weight(*p, w);
        res["weight_valid"] = vr.ok;
        json viol = json::array();
        for (const auto& v : vr.violations) viol.push_back(v.detail);
        res["weight_violations"] = viol;
        if (vr.ok) {
            res["classes"] = classification_json(*p, classify_points(*p, w));
            json fans = json::array();
            for (int c : fan_points(*p, w)) fans.push_back(p->cls(c).id);
            res["fan_classes"] = fans;
            if (!cls_theorem.empty()) {
                Theorem th = cls_theorem == "T4_1"   ? Theorem::LurCond
                             : cls_theorem == "T5_1" ? Theorem::MlurCond
                             : cls_theorem == "T6_1" ? Theorem::KadecCond
                             : cls_theorem == "T7_1" ? Theorem::DualScCond
                             : cls_theorem == "T8_1"
                                 ? Theorem::SmoothCond
                                 : throw ParamOutOfRangeError("unknown theorem tag");
                ConditionReport cr = check_conditions(*p, w, th);
                res["condition"] = {{"theorem", cls_theorem},
                                    {"pass", cr.pass},
                                    {"witnesses", cr.witnesses}};
            }
        }
        write_report(make_report("classify", config_echo(cls_in), res), cls_out);
        return vr.ok ? 0 : 1;
    }

    if (nrm->parsed()) {
        auto p = load_tree(nrm_in);
        OraclePtr oracle = cli_oracle(nrm_name, nrm_in, *p);
        auto tree = unfold(p, UnfoldOptions{nrm_in.depth, nrm_in.copies, nrm_in.node_budget});
        TreeFn f = load_fn(nrm_in, tree);
        NormValue v = oracle->eval(tree, f);
        json res;
        res["norm"] = nrm_name;
        res["nodes"] = tree.size();
        res["input_digest"] = [&] {
            std::uint64_t h = 1469598103934665603ULL;
            for (const Rat& x : f.values)
                for (char c : rat_to_string(x)) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
            return h;
        }();
        res["value"] = norm_value_json(v);
        auto sq = oracle->squared_exact(tree, f);
        if (sq) res["squared_exact"] = rat_to_string(*sq);
        json cfg = config_echo(nrm_in);
        cfg["norm"] = nrm_name;
        write_report(make_report("norm", cfg, res), nrm_out);
        return 0;
    }

    if (opc->parsed()) {
        auto p = load_tree(op_in);
        WeightFn w = load_weights(op_in, *p);
        auto tree = unfold(p, UnfoldOptions{op_in.depth, op_in.copies, op_in.node_budget});
        json res;
        res["operator"] = op_name;
        auto family_json = [&](const NodeFamily& fam) {
            json out = json::object();
            for (const auto& [k, v] : fam.values) out[tree.path[static_cast<size_t>(k)]] = rat_to_string(v);
            return out;
        };
        if (op_name == "rs_rank") {
            RatMatrix m = rs_matrix(tree, w);
            if (!op_matrix.empty()) {
                std::ostringstream os;
                for (int r = 0; r < m.rows; ++r)
                    for (int c = 0; c < m.cols; ++c)
                        if (m.at(r, c) != 0)
                            os << r << " " << c << " " << rat_to_string(m.at(r, c)) << "\n";
                spill(op_matrix, os.str());
            }
            int rank = linear_rank(m);
            res["rank"] = rank;
            res["dimension"] = tree.size();
            res["injective_on_model"] = rank == tree.size();
        } else {
            TreeFn f = load_fn(op_in, tree);
            if (op_name == "R") {
                res["family"] = family_json(op_r(tree, w, f));
            } else if (op_name == "S") {
                res["family"] = family_json(op_s(tree, w, f));
            } else if (op_name == "T_dyadic") {
                res["family"] = family_json(op_t_dyadic(tree, w, f));
            } else if (op_name == "T_special") {
                PairFamily fam = op_t_special(tree, w, f);
                json out = json::object();
                for (const auto& [k, v] : fam.values)
                    out[tree.path[static_cast<size_t>(k.first)] + "|" + tree.path[static_cast<size_t>(k.second)]] =
                        rat_to_string(v);
                res["family"] = out;
            } else if (op_name == "bump") {
                BumpResult b = bump_map(tree, f, op_nmax);
                json out = json::object();
                for (const auto& [k, v] : b.family.values)
                    out[tree.path[static_cast<size_t>(k.first)] + "@" + std::to_string(k.second)] =
                        rat_to_string(v);
                res["family"] = out;
                res["witness_found"] = b.witness.has_value();
                res["pair_in_open_set"] = b.pair_in_u_set;
            } else if (op_name == "reconstruct") {
                Rat eps = parse_rat(op_eps);
                auto idx = reconstruction_index_set(tree, f, eps, op_nmax);
                TreeFn rf = reconstruct_rf(tree, f, idx);
                Rat err = 0;
                for (int v = 0; v < tree.size(); ++v) {
                    Rat d = f.values[static_cast<size_t>(v)] - rf.values[static_cast<size_t>(v)];
                    if (d < 0) d = -d;
                    if (d > err) err = d;
                }
                res["index_set_size"] = idx.size();
                res["achieved_error"] = rat_to_string(err);
                res["within_eps"] = err < eps;
            } else {
                throw ParamOutOfRangeError("unknown operator '" + op_name + "'");
            }
        }
        json cfg = config_echo(op_in);
        cfg["operator"] = op_name;
        write_report(make_report("operator", cfg, res), op_out);
        return 0;
    }

    if (prb->parsed()) {
        bool randomized = prb_name == "strict_convexity" || prb_name == "mlur" ||
                          prb_name == "smoothness" || prb_name == "talagrand_special" ||
                          prb_name == "talagrand_dyadic" || prb_name == "mu";
        if (randomized && !prb_seed_set)
            throw ParamOutOfRangeError("randomized probes need --seed");
        auto p = load_tree(prb_in);
        std::vector<int> schedule;
        {
            std::istringstream ss(prb_schedule);
            std::string tok;
            while (std::getline(ss, tok, ',')) schedule.push_back(std::stoi(tok));
        }
        auto tree = unfold(p, UnfoldOptions{prb_in.depth, prb_in.copies, prb_in.node_budget});
        OraclePtr oracle = cli_oracle(prb_norm, prb_in, *p);
        ProbeReport rep;
        if (prb_name == "strict_convexity") {
            rep = probe_strict_convexity(*oracle, tree, load_weights(prb_in, *p), prb_budget,
                                         prb_seed);
        } else if (prb_name == "mlur") {
            rep = probe_mlur(*oracle, tree, prb_budget, prb_seed);
        } else if (prb_name == "kadec") {
            rep = probe_kadec(*p, load_weights(prb_in, *p), *oracle, schedule, prb_in.depth);
        } else if (prb_name == "smoothness") {
            TreeFn f = load_fn(prb_in, tree);
            rep = probe_smoothness(*oracle, tree, f, prb_directions, prb_orders, prb_seed);
        } else if (prb_name == "reverse_convergence") {
            rep = probe_reverse_convergence(*p, schedule, prb_in.depth);
        } else if (prb_name == "talagrand_special" || prb_name == "talagrand_dyadic") {
            TalagrandReport tr = check_talagrand(prb_name == "talagrand_special"
                                                     ? TalagrandKind::Special
                                                     : TalagrandKind::Dyadic,
                                                 tree, load_weights(prb_in, *p), prb_budget,
                                                 prb_seed, prb_jobs);
            rep.probe = prb_name;
            rep.samples = tr.samples;
            rep.stats["witnesses"] = std::to_string(tr.witnesses);
            for (const auto& c : tr.counterexamples) {
                ProbeFinding f;
                f.description = "no maximal-point witness";
                f.witness = "counterexample function recorded";
                f.seed = prb_seed;
                rep.findings.push_back(f);
            }
        } else if (prb_name == "mu") {
            NodeId node = prb_node.empty() ? 0 : tree.node_by_path(prb_node);
            MuEstimate mu = estimate_mu_at(*oracle, tree, node, prb_budget, prb_seed);
            rep.probe = "mu";
            rep.samples = 1;
            rep.stats["value"] = std::to_string(mu.value);
            rep.stats["budget_exhausted"] = mu.budget_exhausted ? "true" : "false";
            rep.stats["sweeps"] = std::to_string(mu.trace.size());
            rep.notes.push_back("truncation-limited: the tail is the materialized coordinate set");
        } else if (prb_name == "pair_badness") {
            rep = probe_pair_badness(*p, load_weights(prb_in, *p));
        } else {
            throw ParamOutOfRangeError("unknown probe '" + prb_name + "'");
        }
        json cfg = config_echo(prb_in);
        cfg["probe"] = prb_name;
        cfg["norm"] = prb_norm;
        cfg["budget"] = prb_budget;
        cfg["seed"] = prb_seed;
        cfg["jobs"] = prb_jobs;
        write_report(make_report("probe", cfg, probe_report_json(rep)), prb_out);
        return rep.assertion_failures() > 0 ? 1 : 0;
    }

    if (gm->parsed()) {
        GameTrace tr = choquet_game(gm_rounds, beta_strategy_by_name(gm_beta), gm_seed);
        json rounds = json::array();
        for (const auto& r : tr.rounds) {
            json e;
            e["beta_injection"] = r.beta.injection;
            e["beta_window"] = r.beta.window;
            e["reserved"] = r.reply_label;
            e["alpha_window"] = r.alpha.window;
            rounds.push_back(e);
        }
        json res;
        res["rounds_played"] = tr.rounds.size();
        res["invariant_ok"] = tr.invariant_ok;
        if (!tr.invariant_ok) res["failure"] = tr.failure;
        res["trace"] = rounds;
        json cfg{{"rounds", gm_rounds}, {"beta", gm_beta}, {"seed", gm_seed}};
        write_report(make_report("game", cfg, res), gm_out);
        return tr.invariant_ok ? 0 : 1;
    }

    if (dif->parsed()) {
        DiffResult d = report_diff(dif_a, dif_b);
        std::ostringstream os;
        if (d.identical && d.entries.empty()) os << "identical\n";
        for (const auto& e : d.entries) os << e << "\n";
        if (dif_out.empty())
            std::cout << os.str();
        else
            spill(dif_out, os.str());
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const SizeBudgetExceededError& e) {
        std::cerr << "budget: " << e.what() << "\n";
        return 3;
    } catch (const ParamOutOfRangeError& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
