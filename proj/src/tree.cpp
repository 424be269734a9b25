#include "nldt/tree.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <sstream>

namespace nldt {

using ordered_json = nlohmann::ordered_json;

std::unique_ptr<Node> Node::make_leaf(double delta) {
    auto n = std::make_unique<Node>();
    n->delta = delta;
    return n;
}

std::unique_ptr<Node> Node::make_internal(Test test, std::unique_ptr<Node> left,
                                          std::unique_ptr<Node> right) {
    auto n = std::make_unique<Node>();
    n->test = std::make_unique<Test>(std::move(test));
    n->left = std::move(left);
    n->right = std::move(right);
    return n;
}

std::unique_ptr<Node> Node::clone() const {
    auto n = std::make_unique<Node>();
    n->leaf_id = leaf_id;
    n->delta = delta;
    if (test) n->test = std::make_unique<Test>(*test);
    if (left) n->left = left->clone();
    if (right) n->right = right->clone();
    return n;
}

namespace {

bool tests_equal(const Test& a, const Test& b) {
    if (a.id() != b.id() || a.scope() != b.scope() || a.frozen() != b.frozen()) return false;
    if (a.body().index() != b.body().index()) return false;
    if (const auto* da = std::get_if<DeterministicFactTest>(&a.body())) {
        return da->atom == std::get<DeterministicFactTest>(b.body()).atom;
    }
    if (const auto* pa = std::get_if<ProbabilisticFactTest>(&a.body())) {
        const auto& pb = std::get<ProbabilisticFactTest>(b.body());
        return pa->atom == pb.atom && pa->prob == pb.prob;
    }
    if (const auto* na = std::get_if<NeuralFactTest>(&a.body())) {
        const auto& nb = std::get<NeuralFactTest>(b.body());
        return na->name == nb.name && na->inputs == nb.inputs && na->net == nb.net;
    }
    const auto& ra = std::get<NeuralRuleTest>(a.body());
    const auto& rb = std::get<NeuralRuleTest>(b.body());
    if (ra.name != rb.name || ra.tied != rb.tied ||
        ra.comparator.relation != rb.comparator.relation ||
        ra.comparator.modulus != rb.comparator.modulus ||
        ra.predicates.size() != rb.predicates.size()) {
        return false;
    }
    for (std::size_t i = 0; i < ra.predicates.size(); ++i) {
        const NeuralPredicate& x = ra.predicates[i];
        const NeuralPredicate& y = rb.predicates[i];
        if (x.name != y.name || x.instance_id != y.instance_id || x.input.key != y.input.key ||
            x.domain != y.domain || !(x.net == y.net)) {
            return false;
        }
    }
    return true;
}

}  // namespace

bool nodes_equal(const Node& a, const Node& b) {
    if (a.is_leaf() != b.is_leaf()) return false;
    if (a.is_leaf()) return a.leaf_id == b.leaf_id && a.delta == b.delta;
    if (!tests_equal(*a.test, *b.test)) return false;
    return nodes_equal(*a.left, *b.left) && nodes_equal(*a.right, *b.right);
}

void NLDT::assign_leaf_ids() {
    int next = 1;
    std::function<void(Node&)> walk = [&](Node& n) {
        if (n.is_leaf()) {
            n.leaf_id = next++;
            return;
        }
        walk(*n.left);
        walk(*n.right);
    };
    if (root) walk(*root);
}

int NLDT::leaf_count() const {
    std::function<int(const Node&)> walk = [&](const Node& n) -> int {
        if (n.is_leaf()) return 1;
        return walk(*n.left) + walk(*n.right);
    };
    return root ? walk(*root) : 0;
}

std::map<int, double> leaf_probs(const NLDT& tree, const Example& example) {
    require(tree.root != nullptr, "empty-tree", "tree has no root");
    std::map<int, double> probs;
    std::vector<SignedTest> path;
    std::function<void(const Node&)> walk = [&](const Node& n) {
        if (n.is_leaf()) {
            probs[n.leaf_id] = joint_prob(path, example);
            return;
        }
        path.push_back(SignedTest{n.test.get(), true});
        walk(*n.left);
        path.back().polarity = false;
        walk(*n.right);
        path.pop_back();
    };
    walk(*tree.root);
    return probs;
}

double classify(const NLDT& tree, const Example& example) {
    require(tree.root != nullptr, "empty-tree", "tree has no root");
    double p = 0.0;
    std::vector<SignedTest> path;
    std::function<void(const Node&)> walk = [&](const Node& n) {
        if (n.is_leaf()) {
            p += n.delta * joint_prob(path, example);
            return;
        }
        path.push_back(SignedTest{n.test.get(), true});
        walk(*n.left);
        path.back().polarity = false;
        walk(*n.right);
        path.pop_back();
    };
    walk(*tree.root);
    return p;
}

namespace {

std::string sanitize_atom(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_';
        out.push_back(ok ? c : '_');
    }
    if (out.empty() || (out[0] >= '0' && out[0] <= '9')) out.insert(out.begin(), 't');
    return out;
}

// Maps each distinct test in the tree to an atom name. Symbolic facts reuse
// their own atom so the same fact in two branches stays one variable.
struct TestAtomTable {
    std::vector<std::pair<const Test*, std::string>> entries;
    std::map<std::string, const Test*> by_name;

    const std::string& name_for(const Test* t) {
        for (auto& [test, name] : entries) {
            if (test == t) return name;
        }
        fail("unknown-atom", "test not registered");
    }

    void add(const Test* t) {
        std::string base;
        if (const auto* d = std::get_if<DeterministicFactTest>(&t->body())) {
            base = sanitize_atom(d->atom.name());
        } else if (const auto* p = std::get_if<ProbabilisticFactTest>(&t->body())) {
            base = sanitize_atom(p->atom.name());
        } else {
            base = sanitize_atom(t->full_id());
        }
        auto it = by_name.find(base);
        if (it != by_name.end()) {
            if (same_variable(*t, *it->second)) {
                entries.emplace_back(t, base);
                return;
            }
            int suffix = 2;
            while (by_name.count(base + "_" + std::to_string(suffix))) ++suffix;
            base += "_" + std::to_string(suffix);
        }
        by_name.emplace(base, t);
        entries.emplace_back(t, base);
    }

    // Two symbolic tests on the same atom are the same probabilistic variable
    // (prob facts also need equal probabilities).
    static bool same_variable(const Test& a, const Test& b) {
        const auto* da = std::get_if<DeterministicFactTest>(&a.body());
        const auto* db = std::get_if<DeterministicFactTest>(&b.body());
        if (da && db) return da->atom == db->atom;
        const auto* pa = std::get_if<ProbabilisticFactTest>(&a.body());
        const auto* pb = std::get_if<ProbabilisticFactTest>(&b.body());
        if (pa && pb) return pa->atom == pb->atom && pa->prob == pb->prob;
        return false;
    }
};

TestAtomTable build_atom_table(const NLDT& tree) {
    TestAtomTable table;
    std::function<void(const Node&)> walk = [&](const Node& n) {
        if (n.is_leaf()) return;
        table.add(n.test.get());
        walk(*n.left);
        walk(*n.right);
    };
    if (tree.root) walk(*tree.root);
    return table;
}

}  // namespace

std::vector<std::string> translate_test_atoms(const NLDT& tree) {
    TestAtomTable table = build_atom_table(tree);
    std::vector<std::string> names;
    std::vector<std::string> seen;
    for (auto& [test, name] : table.entries) {
        if (std::find(seen.begin(), seen.end(), name) == seen.end()) {
            names.push_back(name);
            seen.push_back(name);
        }
    }
    return names;
}

LogicProgram translate(const NLDT& tree, const Example& example) {
    require(tree.root != nullptr, "empty-tree", "tree has no root");
    TestAtomTable table = build_atom_table(tree);

    std::vector<ProbFact> facts;
    std::vector<Rule> rules;
    std::map<std::string, bool> fact_added;
    for (auto& [test, name] : table.entries) {
        if (fact_added.count(name)) continue;
        fact_added[name] = true;
        facts.emplace_back(Atom::intern(name), eval_test(*test, example));
    }

    Atom pos_atom = Atom::intern("pos");
    Atom neg_atom = Atom::intern("neg");
    std::vector<Literal> path;
    std::function<void(const Node&)> walk = [&](const Node& n) {
        if (n.is_leaf()) {
            std::string leaf_name = "leaf_" + std::to_string(n.leaf_id);
            std::string dec_name = "d_" + std::to_string(n.leaf_id);
            Atom leaf_atom = Atom::intern(leaf_name);
            Atom dec_atom = Atom::intern(dec_name);
            rules.emplace_back(leaf_atom, path);
            facts.emplace_back(dec_atom, n.delta);
            rules.emplace_back(pos_atom, std::vector<Literal>{pos(dec_atom), pos(leaf_atom)});
            rules.emplace_back(neg_atom, std::vector<Literal>{neg(dec_atom), pos(leaf_atom)});
            return;
        }
        Atom test_atom = Atom::intern(table.name_for(n.test.get()));
        path.push_back(pos(test_atom));
        walk(*n.left);
        path.back().negated = true;
        walk(*n.right);
        path.pop_back();
    };
    walk(*tree.root);
    return LogicProgram(std::move(rules), std::move(facts));
}

// --- JSON ------------------------------------------------------------------

namespace {

const char* head_name(Head h) { return h == Head::sigmoid ? "sigmoid" : "softmax"; }

Head parse_head(const std::string& s) {
    if (s == "sigmoid") return Head::sigmoid;
    if (s == "softmax") return Head::softmax;
    fail("parse-error", "unknown head '" + s + "'");
}

const char* relation_name(Relation r) {
    switch (r) {
        case Relation::lt: return "lt";
        case Relation::neq: return "neq";
        case Relation::eq: return "eq";
        case Relation::mod_succ: return "mod_succ";
        case Relation::succ: return "succ";
        case Relation::attr_eq: return "attr_eq";
        case Relation::attr_neq: return "attr_neq";
    }
    return "?";
}

Relation parse_relation(const std::string& s) {
    for (Relation r : {Relation::lt, Relation::neq, Relation::eq, Relation::mod_succ,
                       Relation::succ, Relation::attr_eq, Relation::attr_neq}) {
        if (s == relation_name(r)) return r;
    }
    fail("parse-error", "unknown relation '" + s + "'");
}

ordered_json net_to_json(const NeuralNet& net) {
    ordered_json j;
    j["layer_sizes"] = net.layer_sizes;
    j["head"] = head_name(net.head);
    j["params"] = net.params;
    return j;
}

NeuralNet net_from_json(const ordered_json& j) {
    NeuralNet net(j.at("layer_sizes").get<std::vector<int>>(),
                  parse_head(j.at("head").get<std::string>()));
    auto params = j.at("params").get<std::vector<double>>();
    require(params.size() == net.num_params(), "parse-error", "parameter vector length mismatch");
    net.params = std::move(params);
    return net;
}

ordered_json test_to_json(const Test& test) {
    ordered_json j;
    j["id"] = test.id();
    j["scope"] = test.scope();
    j["frozen"] = test.frozen();
    if (const auto* d = std::get_if<DeterministicFactTest>(&test.body())) {
        j["kind"] = "deterministic_fact";
        j["atom"] = d->atom.name();
    } else if (const auto* p = std::get_if<ProbabilisticFactTest>(&test.body())) {
        j["kind"] = "probabilistic_fact";
        j["atom"] = p->atom.name();
        j["prob"] = p->prob;
    } else if (const auto* nf = std::get_if<NeuralFactTest>(&test.body())) {
        j["kind"] = "neural_fact";
        j["name"] = nf->name;
        ordered_json inputs = ordered_json::array();
        for (const FeatureRef& r : nf->inputs) inputs.push_back(r.key);
        j["inputs"] = inputs;
        j["net"] = net_to_json(nf->net);
    } else {
        const auto& nr = std::get<NeuralRuleTest>(test.body());
        j["kind"] = "neural_rule";
        j["name"] = nr.name;
        j["tied"] = nr.tied;
        j["comparator"] = {{"relation", relation_name(nr.comparator.relation)},
                           {"modulus", nr.comparator.modulus}};
        ordered_json preds = ordered_json::array();
        for (const NeuralPredicate& p : nr.predicates) {
            ordered_json pj;
            pj["name"] = p.name;
            pj["instance_id"] = p.instance_id;
            pj["input"] = p.input.key;
            pj["domain"] = p.domain;
            pj["net"] = net_to_json(p.net);
            preds.push_back(pj);
        }
        j["predicates"] = preds;
    }
    return j;
}

Test test_from_json(const ordered_json& j) {
    std::string id = j.at("id").get<std::string>();
    std::string kind = j.at("kind").get<std::string>();
    Test::Body body{DeterministicFactTest{Atom::intern("x")}};
    if (kind == "deterministic_fact") {
        body = DeterministicFactTest{Atom::intern(j.at("atom").get<std::string>())};
    } else if (kind == "probabilistic_fact") {
        body = ProbabilisticFactTest{Atom::intern(j.at("atom").get<std::string>()),
                                     j.at("prob").get<double>()};
    } else if (kind == "neural_fact") {
        NeuralFactTest nf;
        nf.name = j.at("name").get<std::string>();
        for (const auto& key : j.at("inputs")) nf.inputs.push_back(FeatureRef{key.get<std::string>()});
        nf.net = net_from_json(j.at("net"));
        body = std::move(nf);
    } else if (kind == "neural_rule") {
        NeuralRuleTest nr;
        nr.name = j.at("name").get<std::string>();
        nr.tied = j.at("tied").get<bool>();
        nr.comparator.relation = parse_relation(j.at("comparator").at("relation").get<std::string>());
        nr.comparator.modulus = j.at("comparator").at("modulus").get<int>();
        for (const auto& pj : j.at("predicates")) {
            NeuralPredicate p;
            p.name = pj.at("name").get<std::string>();
            p.instance_id = pj.at("instance_id").get<std::string>();
            p.input.key = pj.at("input").get<std::string>();
            p.domain = pj.at("domain").get<std::vector<int>>();
            p.net = net_from_json(pj.at("net"));
            nr.predicates.push_back(std::move(p));
        }
        require(nr.predicates.size() == 2, "parse-error", "neural rule needs two predicates");
        body = std::move(nr);
    } else {
        fail("parse-error", "unknown test kind '" + kind + "'");
    }
    Test test(id, std::move(body));
    test.set_scope(j.at("scope").get<std::string>());
    test.set_frozen(j.at("frozen").get<bool>());
    return test;
}

ordered_json node_to_json(const Node& n) {
    ordered_json j;
    if (n.is_leaf()) {
        j["type"] = "leaf";
        j["id"] = n.leaf_id;
        j["delta"] = n.delta;
        return j;
    }
    j["type"] = "internal";
    j["test"] = test_to_json(*n.test);
    j["left"] = node_to_json(*n.left);
    j["right"] = node_to_json(*n.right);
    return j;
}

std::unique_ptr<Node> node_from_json(const ordered_json& j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "leaf") {
        auto n = Node::make_leaf(j.at("delta").get<double>());
        n->leaf_id = j.at("id").get<int>();
        return n;
    }
    require(type == "internal", "parse-error", "unknown node type '" + type + "'");
    return Node::make_internal(test_from_json(j.at("test")), node_from_json(j.at("left")),
                               node_from_json(j.at("right")));
}

}  // namespace

std::string tree_to_json(const NLDT& tree) {
    require(tree.root != nullptr, "empty-tree", "tree has no root");
    ordered_json j;
    j["format_version"] = 1;
    j["seed"] = tree.seed;
    j["config"] = tree.config;
    ordered_json meta = ordered_json::array();
    for (const TestInfo& info : tree.pool_metadata) {
        meta.push_back({{"id", info.id}, {"kind", info.kind}});
    }
    j["pool_metadata"] = meta;
    j["root"] = node_to_json(*tree.root);
    return j.dump(2) + "\n";
}

NLDT tree_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail("parse-error", e.what());
    }
    try {
        require(j.at("format_version").get<int>() == 1, "parse-error",
                "unsupported format_version");
        NLDT tree;
        tree.seed = j.at("seed").get<std::uint64_t>();
        tree.config = j.at("config").get<std::map<std::string, std::string>>();
        for (const auto& m : j.at("pool_metadata")) {
            tree.pool_metadata.push_back(
                TestInfo{m.at("id").get<std::string>(), m.at("kind").get<std::string>()});
        }
        tree.root = node_from_json(j.at("root"));
        return tree;
    } catch (const nlohmann::json::exception& e) {
        fail("parse-error", e.what());
    }
}

std::string to_dot(const NLDT& tree) {
    require(tree.root != nullptr, "empty-tree", "tree has no root");
    std::ostringstream out;
    out << "digraph nldt {\n";
    int next = 0;
    std::function<int(const Node&)> walk = [&](const Node& n) -> int {
        int my_id = next++;
        if (n.is_leaf()) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.6g", n.delta);
            out << "  n" << my_id << " [shape=box, label=\"leaf " << n.leaf_id
                << "\\n\xCE\xB4=" << buf << "\"];\n";
            return my_id;
        }
        out << "  n" << my_id << " [label=\"" << n.test->id() << "\"];\n";
        int l = walk(*n.left);
        int r = walk(*n.right);
        out << "  n" << my_id << " -> n" << l << " [label=\"T\"];\n";
        out << "  n" << my_id << " -> n" << r << " [label=\"F\"];\n";
        return my_id;
    };
    walk(*tree.root);
    out << "}\n";
    return out.str();
}

std::vector<const Test*> collect_tests(const NLDT& tree) {
    std::vector<const Test*> tests;
    std::function<void(const Node&)> walk = [&](const Node& n) {
        if (n.is_leaf()) return;
        tests.push_back(n.test.get());
        walk(*n.left);
        walk(*n.right);
    };
    if (tree.root) walk(*tree.root);
    return tests;
}

}  // namespace nldt
