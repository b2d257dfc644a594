#include "renormlab/tree.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <functional>
#include <sstream>

#include "renormlab/errors.hpp"

namespace renormlab {

// --- Builder -----------------------------------------------------------

TreePresentation::Builder& TreePresentation::Builder::add_class(const std::string& id,
                                                                std::optional<Rat> rho,
                                                                bool boundary) {
    if (index.count(id)) throw ParseError("duplicate class id '" + id + "'");
    index[id] = static_cast<int>(classes.size());
    ClassRecord rec;
    rec.id = id;
    rec.rho = std::move(rho);
    rec.boundary = boundary;
    classes.push_back(std::move(rec));
    return *this;
}

TreePresentation::Builder& TreePresentation::Builder::add_edge(const std::string& parent,
                                                               const std::string& child,
                                                               Mult mult) {
    edges.push_back(RawEdge{parent, child, mult});
    return *this;
}

TreePresentation::Builder& TreePresentation::Builder::add_root(const std::string& id) {
    roots.push_back(id);
    return *this;
}

TreePresentation TreePresentation::Builder::build() const {
    TreePresentation p;
    p.classes_ = classes;
    p.index_ = index;
    auto lookup = [&](const std::string& id) {
        auto it = index.find(id);
        if (it == index.end()) throw DanglingClassError("reference to undeclared class '" + id + "'");
        return it->second;
    };
    for (const auto& e : edges)
        p.classes_[static_cast<size_t>(lookup(e.parent))].children.push_back(
            ClassEdge{lookup(e.child), e.mult});
    std::set<int> seen_roots;
    for (const auto& r : roots) {
        int idx = lookup(r);
        if (!seen_roots.insert(idx).second) throw ParseError("duplicate root '" + r + "'");
        p.roots_.push_back(idx);
    }
    if (p.roots_.empty() && !classes.empty())
        throw ParseError("presentation declares classes but no roots");

    // reachability from roots must cover every class
    std::vector<char> reached(classes.size(), 0);
    std::deque<int> queue(p.roots_.begin(), p.roots_.end());
    for (int r : p.roots_) reached[static_cast<size_t>(r)] = 1;
    while (!queue.empty()) {
        int c = queue.front();
        queue.pop_front();
        for (const auto& e : p.classes_[static_cast<size_t>(c)].children)
            if (!reached[static_cast<size_t>(e.target)]) {
                reached[static_cast<size_t>(e.target)] = 1;
                queue.push_back(e.target);
            }
    }
    for (size_t i = 0; i < classes.size(); ++i)
        if (!reached[i])
            throw DanglingClassError("class '" + classes[i].id + "' unreachable from roots");

    // cycle detection: iterative DFS with colors
    std::vector<int> color(classes.size(), 0);  // 0 white, 1 on stack, 2 done
    std::vector<char> on_cycle(classes.size(), 0);
    // A class is cyclic iff it can reach itself through >= 1 edge.
    for (size_t s = 0; s < classes.size(); ++s) {
        // BFS from each out-neighbour of s back to s
        std::deque<int> q;
        std::vector<char> vis(classes.size(), 0);
        for (const auto& e : p.classes_[s].children) {
            if (!vis[static_cast<size_t>(e.target)]) {
                vis[static_cast<size_t>(e.target)] = 1;
                q.push_back(e.target);
            }
        }
        while (!q.empty()) {
            int c = q.front();
            q.pop_front();
            if (c == static_cast<int>(s)) {
                on_cycle[s] = 1;
                break;
            }
            for (const auto& e : p.classes_[static_cast<size_t>(c)].children)
                if (!vis[static_cast<size_t>(e.target)]) {
                    vis[static_cast<size_t>(e.target)] = 1;
                    q.push_back(e.target);
                }
        }
    }
    (void)color;
    for (size_t i = 0; i < classes.size(); ++i)
        if (on_cycle[i]) p.cyclic_.insert(static_cast<int>(i));

    p.reach_.assign(classes.size(), {});
    return p;
}

int TreePresentation::index_of(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? -1 : it->second;
}

int TreePresentation::require_class(const std::string& id) const {
    int i = index_of(id);
    if (i < 0) throw UnknownNodeError("unknown class '" + id + "'");
    return i;
}

const std::set<int>& TreePresentation::reachable_from(int cls) const {
    auto& cache = const_cast<std::vector<std::set<int>>&>(reach_);
    auto& slot = cache[static_cast<size_t>(cls)];
    if (slot.empty()) {
        std::deque<int> q{cls};
        slot.insert(cls);
        while (!q.empty()) {
            int c = q.front();
            q.pop_front();
            for (const auto& e : classes_[static_cast<size_t>(c)].children)
                if (slot.insert(e.target).second) q.push_back(e.target);
        }
    }
    return slot;
}

// --- FiniteTree ---------------------------------------------------------

void FiniteTree::check_node(NodeId t) const {
    if (t < 0 || t >= size()) throw UnknownNodeError("node id out of range");
}

NodeId FiniteTree::node_by_path(const std::string& p) const {
    for (NodeId t = 0; t < size(); ++t)
        if (path[static_cast<size_t>(t)] == p) return t;
    throw UnknownNodeError("no node with path '" + p + "'");
}

bool FiniteTree::leq(NodeId s, NodeId t) const {
    check_node(s);
    check_node(t);
    while (t != kRootSentinel && depth[static_cast<size_t>(t)] > depth[static_cast<size_t>(s)])
        t = parent[static_cast<size_t>(t)];
    return t == s;
}

std::vector<NodeId> FiniteTree::down_set(NodeId t) const {
    check_node(t);
    std::vector<NodeId> out;
    for (NodeId v = t; v != kRootSentinel; v = parent[static_cast<size_t>(v)]) out.push_back(v);
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<NodeId> FiniteTree::up_set(NodeId t) const {
    check_node(t);
    std::vector<NodeId> out, stack{t};
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        out.push_back(v);
        const auto& ch = children[static_cast<size_t>(v)];
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
    return out;
}

std::vector<NodeId> FiniteTree::incomparable_set(NodeId t) const {
    check_node(t);
    std::vector<NodeId> out;
    for (NodeId v = 0; v < size(); ++v)
        if (!comparable(v, t)) out.push_back(v);
    return out;
}

std::vector<NodeId> FiniteTree::minimal_nodes() const {
    std::vector<NodeId> out;
    for (NodeId t = 0; t < size(); ++t)
        if (parent[static_cast<size_t>(t)] == kRootSentinel) out.push_back(t);
    return out;
}

std::vector<NodeId> FiniteTree::reverse_nbhd(NodeId t, const std::vector<NodeId>& removed) const {
    check_node(t);
    for (NodeId u : removed) {
        check_node(u);
        if (parent[static_cast<size_t>(u)] != t)
            throw ParamOutOfRangeError("reverse_nbhd removes immediate successors only");
    }
    std::set<NodeId> cut(removed.begin(), removed.end());
    std::vector<NodeId> out, stack{t};
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        out.push_back(v);
        for (NodeId c : children[static_cast<size_t>(v)])
            if (!cut.count(c)) stack.push_back(c);
    }
    return out;
}

bool FiniteTree::is_antichain(const std::vector<NodeId>& s) const {
    for (size_t i = 0; i < s.size(); ++i)
        for (size_t j = i + 1; j < s.size(); ++j)
            if (comparable(s[i], s[j])) return false;
    return true;
}

std::vector<NodeId> FiniteTree::min_of(const std::vector<NodeId>& s) const {
    std::vector<NodeId> out;
    for (NodeId a : s) {
        bool minimal = true;
        for (NodeId b : s)
            if (b != a && leq(b, a)) { minimal = false; break; }
        if (minimal) out.push_back(a);
    }
    return out;
}

std::vector<NodeId> FiniteTree::max_of(const std::vector<NodeId>& s) const {
    std::vector<NodeId> out;
    for (NodeId a : s) {
        bool maximal = true;
        for (NodeId b : s)
            if (b != a && leq(a, b)) { maximal = false; break; }
        if (maximal) out.push_back(a);
    }
    return out;
}

TreeFn TreeFn::indicator_down_set(const FiniteTree& t, NodeId u) {
    TreeFn f = zeros(t);
    for (NodeId v : t.down_set(u)) f.values[static_cast<size_t>(v)] = 1;
    return f;
}

Rat TreeFn::sup_abs() const {
    Rat best = 0;
    for (const Rat& v : values) {
        Rat a = v < 0 ? Rat(-v) : v;
        if (a > best) best = a;
    }
    return best;
}

bool TreeFn::is_zero() const {
    for (const Rat& v : values)
        if (v != 0) return false;
    return true;
}

// --- unfold -------------------------------------------------------------

long default_node_budget() {
    if (const char* env = std::getenv("RENORMLAB_NODE_BUDGET")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v > 0) return v;
        throw ParamOutOfRangeError("RENORMLAB_NODE_BUDGET must be a positive integer");
    }
    return 10000;
}

FiniteTree unfold(std::shared_ptr<const TreePresentation> p, const UnfoldOptions& opt) {
    if (opt.depth < 1 || opt.copies < 1)
        throw ParamOutOfRangeError("unfold requires depth >= 1 and copies >= 1");
    long budget = opt.node_budget > 0 ? opt.node_budget : default_node_budget();

    FiniteTree t;
    t.source = p;

    struct Item {
        int cls;
        NodeId parent;
        int copy;
        std::string path;
    };
    // occurrence counts per class along the current ancestor chain are
    // recovered by walking parents; keep them with the work item instead.
    struct Work {
        Item item;
        std::map<int, int> occur;  // class -> occurrences including this node
    };

    auto path_component = [&](int parent_cls, size_t edge_idx, const ClassEdge& e) {
        const auto& pc = p->cls(parent_cls);
        int same_target = 0;
        for (const auto& o : pc.children)
            if (o.target == e.target) ++same_target;
        std::string comp = p->cls(e.target).id;
        if (same_target > 1) {
            int before = 0;
            for (size_t k = 0; k < edge_idx; ++k)
                if (pc.children[k].target == e.target) ++before;
            comp += "~" + std::to_string(before);
        }
        return comp;
    };

    std::deque<Work> queue;
    for (int r : p->roots()) {
        Work w;
        w.item = Item{r, kRootSentinel, 0, p->cls(r).id};
        w.occur[r] = 1;
        queue.push_back(std::move(w));
    }

    while (!queue.empty()) {
        Work w = std::move(queue.front());
        queue.pop_front();
        if (static_cast<long>(t.parent.size()) >= budget)
            throw SizeBudgetExceededError("unfold exceeds node budget of " +
                                          std::to_string(budget));
        NodeId me = static_cast<NodeId>(t.parent.size());
        t.parent.push_back(w.item.parent);
        t.class_of.push_back(w.item.cls);
        t.copy_index.push_back(w.item.copy);
        t.truncated.push_back(p->cls(w.item.cls).boundary ? 1 : 0);
        t.path.push_back(w.item.path);
        t.children.emplace_back();
        t.depth.push_back(w.item.parent == kRootSentinel
                              ? 0
                              : t.depth[static_cast<size_t>(w.item.parent)] + 1);
        if (w.item.parent != kRootSentinel)
            t.children[static_cast<size_t>(w.item.parent)].push_back(me);

        const auto& rec = p->cls(w.item.cls);
        for (size_t ei = 0; ei < rec.children.size(); ++ei) {
            const ClassEdge& e = rec.children[ei];
            int next_occur = w.occur.count(e.target) ? w.occur.at(e.target) + 1 : 1;
            if (p->cyclic_classes().count(e.target) && next_occur > opt.depth) {
                t.truncated[static_cast<size_t>(me)] = 1;
                continue;
            }
            int n_copies = e.mult == Mult::Omega ? opt.copies : 1;
            for (int c = 0; c < n_copies; ++c) {
                Work child;
                child.item.cls = e.target;
                child.item.parent = me;
                child.item.copy = c;
                child.item.path = w.item.path + "/" + path_component(w.item.cls, ei, e);
                if (e.mult == Mult::Omega) child.item.path += "." + std::to_string(c);
                child.occur = w.occur;
                child.occur[e.target] = next_occur;
                queue.push_back(std::move(child));
            }
        }
    }
    return t;
}

// --- file format --------------------------------------------------------

TreePresentation parse_tree_text(const std::string& text) {
    TreePresentation::Builder b;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        auto fail = [&](const std::string& why) {
            throw ParseError("tree file line " + std::to_string(lineno) + ": " + why);
        };
        if (word == "version") {
            std::string v;
            if (!(ls >> v) || v != "1") fail("unsupported version");
        } else if (word == "class") {
            std::string id;
            if (!(ls >> id)) fail("class needs an id");
            std::optional<Rat> rho;
            bool boundary = false;
            std::string tok;
            while (ls >> tok) {
                if (tok == "rho") {
                    std::string val;
                    if (!(ls >> val)) fail("rho needs a value");
                    rho = parse_rat(val);
                } else if (tok == "boundary") {
                    boundary = true;
                } else {
                    fail("unknown class attribute '" + tok + "'");
                }
            }
            b.add_class(id, rho, boundary);
        } else if (word == "edge") {
            std::string par, chi, mult;
            if (!(ls >> par >> chi >> mult)) fail("edge needs parent, child, multiplicity");
            if (mult == "one")
                b.add_edge(par, chi, Mult::One);
            else if (mult == "omega")
                b.add_edge(par, chi, Mult::Omega);
            else
                throw BadMultiplicityError("tree file line " + std::to_string(lineno) +
                                           ": multiplicity must be 'one' or 'omega', got '" +
                                           mult + "'");
        } else if (word == "root") {
            std::string id;
            if (!(ls >> id)) fail("root needs an id");
            b.add_root(id);
        } else {
            fail("unknown directive '" + word + "'");
        }
    }
    return b.build();
}

std::string tree_to_text(const TreePresentation& p) {
    std::ostringstream out;
    out << "version 1\n";
    for (const auto& c : p.classes()) {
        out << "class " << c.id;
        if (c.rho) out << " rho " << rat_to_string(*c.rho);
        if (c.boundary) out << " boundary";
        out << "\n";
    }
    for (const auto& c : p.classes())
        for (const auto& e : c.children)
            out << "edge " << c.id << " " << p.cls(e.target).id << " "
                << (e.mult == Mult::Omega ? "omega" : "one") << "\n";
    for (int r : p.roots()) out << "root " << p.cls(r).id << "\n";
    return out.str();
}

// --- generators ---------------------------------------------------------

TreePresentation generate_chain(int n) {
    if (n < 1) throw ParamOutOfRangeError("chain needs n >= 1");
    TreePresentation::Builder b;
    for (int i = 0; i < n; ++i) b.add_class("c" + std::to_string(i));
    for (int i = 0; i + 1 < n; ++i)
        b.add_edge("c" + std::to_string(i), "c" + std::to_string(i + 1), Mult::One);
    b.add_root("c0");
    return b.build();
}

TreePresentation generate_kary(int k, int h, bool recurring) {
    if (k < 1) throw ParamOutOfRangeError("kary needs k >= 1");
    TreePresentation::Builder b;
    if (recurring) {
        b.add_class("n");
        for (int i = 0; i < k; ++i) b.add_edge("n", "n", Mult::One);
        b.add_root("n");
        return b.build();
    }
    if (h < 1) throw ParamOutOfRangeError("kary needs h >= 1");
    for (int d = 0; d < h; ++d) b.add_class("l" + std::to_string(d));
    for (int d = 0; d + 1 < h; ++d)
        for (int i = 0; i < k; ++i)
            b.add_edge("l" + std::to_string(d), "l" + std::to_string(d + 1), Mult::One);
    b.add_root("l0");
    return b.build();
}

TreePresentation generate_comb() {
    TreePresentation::Builder b;
    b.add_class("spine");
    b.add_class("tooth");
    b.add_edge("spine", "spine", Mult::One);
    b.add_edge("spine", "tooth", Mult::Omega);
    b.add_root("spine");
    return b.build();
}

namespace {

// Display id for a finite injection given as the label sequence.
std::string lambda_id(const std::vector<int>& labels) {
    if (labels.empty()) return "root";
    std::string s;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (i) s += ".";
        s += std::to_string(labels[i]);
    }
    return s;
}

Rat lambda_value(const std::vector<int>& labels) {
    Rat v = 0;
    for (int l : labels) v += Rat(BigInt(1), BigInt(1) << l);
    return v;
}

std::vector<int> parse_lambda_id(const std::string& id) {
    if (id == "root") return {};
    std::vector<int> labels;
    std::string cur;
    for (char c : id) {
        if (c == '.') {
            labels.push_back(std::stoi(cur));
            cur.clear();
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            cur += c;
        } else {
            throw ShapeViolationError("node id '" + id + "' is not an injection path");
        }
    }
    if (cur.empty()) throw ShapeViolationError("node id '" + id + "' is not an injection path");
    labels.push_back(std::stoi(cur));
    return labels;
}

}  // namespace

TreePresentation generate_lambda(int height, int label_bound) {
    if (height < 0 || label_bound < 1)
        throw ParamOutOfRangeError("lambda needs height >= 0 and label bound >= 1");
    long budget = default_node_budget();
    TreePresentation::Builder b;
    struct Node {
        std::vector<int> labels;
    };
    long count = 0;
    std::deque<Node> queue{Node{{}}};
    std::vector<std::pair<std::string, std::string>> edges;
    while (!queue.empty()) {
        Node n = std::move(queue.front());
        queue.pop_front();
        if (++count > budget)
            throw SizeBudgetExceededError("lambda tree exceeds node budget");
        // every materialized node misses ambient successors (labels are
        // unbounded in the full injection tree), so all carry the flag
        b.add_class(lambda_id(n.labels), lambda_value(n.labels), true);
        if (static_cast<int>(n.labels.size()) >= height) continue;
        std::set<int> used(n.labels.begin(), n.labels.end());
        for (int l = 0; l < label_bound; ++l) {
            if (used.count(l)) continue;
            Node child = n;
            child.labels.push_back(l);
            edges.emplace_back(lambda_id(n.labels), lambda_id(child.labels));
            queue.push_back(std::move(child));
        }
    }
    for (auto& e : edges) b.add_edge(e.first, e.second, Mult::One);
    b.add_root("root");
    return b.build();
}

namespace {

void require_explicit_tree(const TreePresentation& p) {
    if (!p.acyclic())
        throw ShapeViolationError("augmentation needs an acyclic explicit tree");
    std::vector<int> indeg(static_cast<size_t>(p.size()), 0);
    for (const auto& c : p.classes())
        for (const auto& e : c.children) {
            if (e.mult != Mult::One)
                throw ShapeViolationError("augmentation needs one-multiplicity edges only");
            ++indeg[static_cast<size_t>(e.target)];
        }
    for (int i = 0; i < p.size(); ++i)
        if (indeg[static_cast<size_t>(i)] > 1)
            throw ShapeViolationError("augmentation needs a tree-shaped presentation");
}

}  // namespace

TreePresentation augment_pairs(const TreePresentation& lambda_tree) {
    require_explicit_tree(lambda_tree);
    TreePresentation::Builder b;
    for (const auto& c : lambda_tree.classes()) {
        b.add_class(c.id, c.rho, false);
        // the split sets are infinite in the ambient tree
        b.add_class(c.id + ":1", c.rho, true);
        b.add_class(c.id + ":2", c.rho, true);
        b.add_edge(c.id, c.id + ":1", Mult::One);
        b.add_edge(c.id, c.id + ":2", Mult::One);
        for (const auto& e : c.children) {
            const auto& child = lambda_tree.cls(e.target);
            std::vector<int> labels = parse_lambda_id(child.id);
            int last = labels.back();
            b.add_edge(c.id + (last % 2 == 0 ? ":1" : ":2"), child.id, Mult::One);
        }
    }
    for (int r : lambda_tree.roots()) b.add_root(lambda_tree.cls(r).id);
    return b.build();
}

TreePresentation augment_dyadic(const TreePresentation& lambda_tree) {
    require_explicit_tree(lambda_tree);
    TreePresentation::Builder b;
    for (const auto& c : lambda_tree.classes()) {
        // original nodes keep their weight; completeness of each successor
        // pair is restored below, so they lose the boundary flag
        size_t k = c.children.size();
        b.add_class(c.id, c.rho, k == 0);
        for (size_t j = 0; j < k; ++j)
            b.add_class(c.id + ":s" + std::to_string(j), c.rho, j + 1 == k);
    }
    for (const auto& c : lambda_tree.classes()) {
        // order successors by ascending label so the spine enumeration is
        // deterministic
        std::vector<std::pair<int, std::string>> kids;
        for (const auto& e : c.children) {
            const auto& child = lambda_tree.cls(e.target);
            kids.emplace_back(parse_lambda_id(child.id).back(), child.id);
        }
        std::sort(kids.begin(), kids.end());
        size_t k = kids.size();
        if (k == 0) continue;
        b.add_edge(c.id, kids[0].second, Mult::One);
        b.add_edge(c.id, c.id + ":s0", Mult::One);
        for (size_t j = 0; j + 1 < k; ++j) {
            b.add_edge(c.id + ":s" + std::to_string(j), kids[j + 1].second, Mult::One);
            b.add_edge(c.id + ":s" + std::to_string(j), c.id + ":s" + std::to_string(j + 1),
                       Mult::One);
        }
    }
    for (int r : lambda_tree.roots()) b.add_root(lambda_tree.cls(r).id);
    return b.build();
}

}  // namespace renormlab
