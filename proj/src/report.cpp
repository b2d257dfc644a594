#include "renormlab/report.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "renormlab/errors.hpp"

namespace renormlab {

using json = nlohmann::ordered_json;

json norm_value_json(const NormValue& v) {
    json j;
    j["value"] = rat_to_string(v.value);
    j["error_radius"] = rat_to_string(v.error_radius);
    j["approx"] = v.approx();
    return j;
}

json probe_report_json(const ProbeReport& r) {
    json j;
    j["probe"] = r.probe;
    j["samples"] = r.samples;
    j["assertion_failures"] = r.assertion_failures();
    json fs = json::array();
    for (const auto& f : r.findings) {
        json e;
        e["description"] = f.description;
        e["witness"] = f.witness;
        e["seed"] = f.seed;
        e["assertion"] = f.assertion_failure;
        fs.push_back(e);
    }
    j["findings"] = fs;
    j["stats"] = json::object();
    for (const auto& [k, v] : r.stats) j["stats"][k] = v;
    j["notes"] = r.notes;
    return j;
}

json finite_tree_json(const FiniteTree& t) {
    json nodes = json::array();
    for (NodeId v = 0; v < t.size(); ++v) {
        json n;
        n["id"] = v;
        n["path"] = t.path[static_cast<size_t>(v)];
        n["class"] = t.class_id(v);
        n["copy_index"] = t.copy_index[static_cast<size_t>(v)];
        n["parent"] = t.parent[static_cast<size_t>(v)];
        n["truncated"] = static_cast<bool>(t.truncated[static_cast<size_t>(v)]);
        nodes.push_back(n);
    }
    json j;
    j["nodes"] = nodes;
    return j;
}

json classification_json(const TreePresentation& p, const Classification& c) {
    json j = json::object();
    for (int i = 0; i < p.size(); ++i) {
        const PointClass& pc = c[static_cast<size_t>(i)];
        json e;
        e["status"] = pc.good ? "good" : "bad";
        json eq = json::array();
        for (int t : pc.equal_edges) eq.push_back(p.cls(t).id);
        e["equal_successors"] = eq;
        e["delta"] = rat_to_string(pc.delta);
        e["fan"] = pc.fan;
        j[p.cls(i).id] = e;
    }
    return j;
}

json make_report(const std::string& subcommand, const json& config, const json& results) {
    json j;
    j["schema"] = kReportSchema;
    j["tool"] = {{"name", "renormlab"}, {"version", kToolVersion}};
    j["subcommand"] = subcommand;
    j["config"] = config;
    j["results"] = results;
    return j;
}

void write_report(const json& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write report to '" + path + "'");
    out << report.dump(2) << "\n";
}

namespace {

bool is_norm_value(const json& j) {
    return j.is_object() && j.contains("value") && j.contains("error_radius");
}

bool rat_like(const std::string& s) {
    if (s.empty()) return false;
    size_t i = s[0] == '-' ? 1 : 0;
    bool digits = false, slash = false;
    for (; i < s.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(s[i]))) {
            digits = true;
        } else if (s[i] == '/' && !slash && digits) {
            slash = true;
            digits = false;
        } else {
            return false;
        }
    }
    return digits;
}

void diff_walk(const json& a, const json& b, const std::string& path, DiffResult& out) {
    if (path.find("timestamp") != std::string::npos) return;
    if (is_norm_value(a) && is_norm_value(b)) {
        Rat va = parse_rat(a["value"].get<std::string>());
        Rat vb = parse_rat(b["value"].get<std::string>());
        if (va == vb) return;
        Rat ra = parse_rat(a["error_radius"].get<std::string>());
        Rat rb = parse_rat(b["error_radius"].get<std::string>());
        Rat gap = va > vb ? va - vb : vb - va;
        out.identical = false;
        out.entries.push_back(path + ": " + rat_to_string(va) + " vs " + rat_to_string(vb) +
                              (gap <= (ra > rb ? ra : rb) ? " (within-certified-error)" : ""));
        return;
    }
    if (a.type() != b.type()) {
        out.identical = false;
        out.entries.push_back(path + ": type differs");
        return;
    }
    if (a.is_object()) {
        for (auto it = a.begin(); it != a.end(); ++it) {
            if (it.key() == "timestamp" || it.key() == "generated_at") continue;
            if (!b.contains(it.key())) {
                out.identical = false;
                out.entries.push_back(path + "/" + it.key() + ": only in first");
                continue;
            }
            diff_walk(it.value(), b[it.key()], path + "/" + it.key(), out);
        }
        for (auto it = b.begin(); it != b.end(); ++it)
            if (!a.contains(it.key()) && it.key() != "timestamp" && it.key() != "generated_at") {
                out.identical = false;
                out.entries.push_back(path + "/" + it.key() + ": only in second");
            }
        return;
    }
    if (a.is_array()) {
        size_t n = std::min(a.size(), b.size());
        for (size_t i = 0; i < n; ++i)
            diff_walk(a[i], b[i], path + "[" + std::to_string(i) + "]", out);
        if (a.size() != b.size()) {
            out.identical = false;
            out.entries.push_back(path + ": array length differs");
        }
        return;
    }
    if (a.is_string() && b.is_string() && rat_like(a.get<std::string>()) &&
        rat_like(b.get<std::string>())) {
        if (parse_rat(a.get<std::string>()) != parse_rat(b.get<std::string>())) {
            out.identical = false;
            out.entries.push_back(path + ": " + a.get<std::string>() + " vs " +
                                  b.get<std::string>());
        }
        return;
    }
    if (a != b) {
        out.identical = false;
        out.entries.push_back(path + ": " + a.dump() + " vs " + b.dump());
    }
}

json load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read report '" + path + "'");
    json j;
    in >> j;
    return j;
}

}  // namespace

DiffResult report_diff(const std::string& path_a, const std::string& path_b) {
    json a = load(path_a), b = load(path_b);
    if (!a.contains("schema") || !b.contains("schema") || a["schema"] != b["schema"])
        throw SchemaMismatchError("reports carry different schema tags");
    DiffResult out;
    diff_walk(a["results"], b["results"], "results", out);
    // seeds and configs may legitimately differ; flag them informationally
    if (a["config"] != b["config"]) out.entries.push_back("config: differs (informational)");
    return out;
}

}  // namespace renormlab
