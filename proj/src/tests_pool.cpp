#include "nldt/tests_pool.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace nldt {

bool Comparator::holds(int a, int b) const {
    switch (relation) {
        case Relation::lt: return a < b;
        case Relation::neq: return a != b;
        case Relation::eq: return a == b;
        case Relation::mod_succ: return b == (a % modulus) + 1;
        case Relation::succ: return b == a + 1;
        case Relation::attr_eq: return a == b;
        case Relation::attr_neq: return a != b;
    }
    return false;
}

std::string Comparator::name() const {
    switch (relation) {
        case Relation::lt: return "lt";
        case Relation::neq: return "neq";
        case Relation::eq: return "eq";
        case Relation::mod_succ: return "mod_succ(" + std::to_string(modulus) + ")";
        case Relation::succ: return "succ";
        case Relation::attr_eq: return "attr_eq";
        case Relation::attr_neq: return "attr_neq";
    }
    return "?";
}

std::vector<double> Test::get_params() const {
    if (const auto* nf = std::get_if<NeuralFactTest>(&body_)) return nf->net.params;
    if (const auto* nr = std::get_if<NeuralRuleTest>(&body_)) {
        if (nr->tied) return nr->predicates.front().net.params;
        std::vector<double> out;
        for (const NeuralPredicate& p : nr->predicates) {
            out.insert(out.end(), p.net.params.begin(), p.net.params.end());
        }
        return out;
    }
    fail("not-trainable", "test '" + id_ + "' has no trainable parameters");
}

void Test::set_params(const std::vector<double>& params) {
    if (auto* nf = std::get_if<NeuralFactTest>(&body_)) {
        require(params.size() == nf->net.params.size(), "shape-error", "parameter length mismatch");
        nf->net.params = params;
        return;
    }
    if (auto* nr = std::get_if<NeuralRuleTest>(&body_)) {
        if (nr->tied) {
            for (NeuralPredicate& p : nr->predicates) {
                require(params.size() == p.net.params.size(), "shape-error",
                        "parameter length mismatch");
                p.net.params = params;
            }
            return;
        }
        std::size_t offset = 0;
        for (NeuralPredicate& p : nr->predicates) {
            require(offset + p.net.params.size() <= params.size(), "shape-error",
                    "parameter length mismatch");
            std::copy(params.begin() + offset, params.begin() + offset + p.net.params.size(),
                      p.net.params.begin());
            offset += p.net.params.size();
        }
        require(offset == params.size(), "shape-error", "parameter length mismatch");
        return;
    }
    fail("not-trainable", "test '" + id_ + "' has no trainable parameters");
}

namespace {

std::vector<double> concat_inputs(const std::vector<FeatureRef>& refs, const Example& example) {
    std::vector<double> input;
    for (const FeatureRef& ref : refs) {
        const std::vector<double>& f = example.feature(ref.key);
        input.insert(input.end(), f.begin(), f.end());
    }
    return input;
}

std::string rv_key(const NeuralPredicate& pred) { return pred.instance_id + "|" + pred.input.key; }

// Rule probability with some slots pinned to a fixed domain index.
double rule_prob(const NeuralRuleTest& rule, const Example& example,
                 const std::map<std::string, int>* fixed = nullptr) {
    const NeuralPredicate& p0 = rule.predicates[0];
    const NeuralPredicate& p1 = rule.predicates[1];
    std::vector<double> d0, d1;
    auto dist = [&](const NeuralPredicate& p) -> std::vector<double> {
        if (fixed) {
            auto it = fixed->find(rv_key(p));
            if (it != fixed->end()) {
                std::vector<double> one_hot(p.domain.size(), 0.0);
                one_hot[static_cast<std::size_t>(it->second)] = 1.0;
                return one_hot;
            }
        }
        return forward(p.net, example.feature(p.input.key));
    };
    d0 = dist(p0);
    d1 = dist(p1);
    double total = 0.0;
    for (std::size_t i = 0; i < d0.size(); ++i) {
        for (std::size_t j = 0; j < d1.size(); ++j) {
            if (rule.comparator.holds(p0.domain[i], p1.domain[j])) total += d0[i] * d1[j];
        }
    }
    return total;
}

}  // namespace

double eval_test(const Test& test, const Example& example) {
    return std::visit(
        [&](const auto& body) -> double {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, DeterministicFactTest>) {
                return example.has_fact(body.atom) ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, ProbabilisticFactTest>) {
                return body.prob;
            } else if constexpr (std::is_same_v<T, NeuralFactTest>) {
                return forward(body.net, concat_inputs(body.inputs, example))[0];
            } else {
                return rule_prob(body, example);
            }
        },
        test.body());
}

std::vector<double> eval_test_grad(const Test& test, const Example& example, double upstream) {
    if (const auto* nf = std::get_if<NeuralFactTest>(&test.body())) {
        Gradients g = backward(nf->net, concat_inputs(nf->inputs, example), {upstream});
        return g.params;
    }
    const auto* nr = std::get_if<NeuralRuleTest>(&test.body());
    require(nr != nullptr, "not-trainable", "test '" + test.id() + "' is not neural");

    const NeuralPredicate& p0 = nr->predicates[0];
    const NeuralPredicate& p1 = nr->predicates[1];
    std::vector<double> d0 = forward(p0.net, example.feature(p0.input.key));
    std::vector<double> d1 = forward(p1.net, example.feature(p1.input.key));

    // dP/d(d0[i]) = sum_j d1[j] [rel], and symmetrically for d1.
    std::vector<double> up0(d0.size(), 0.0), up1(d1.size(), 0.0);
    for (std::size_t i = 0; i < d0.size(); ++i) {
        for (std::size_t j = 0; j < d1.size(); ++j) {
            if (nr->comparator.holds(p0.domain[i], p1.domain[j])) {
                up0[i] += upstream * d1[j];
                up1[j] += upstream * d0[i];
            }
        }
    }
    Gradients g0 = backward(p0.net, example.feature(p0.input.key), up0);
    Gradients g1 = backward(p1.net, example.feature(p1.input.key), up1);
    if (nr->tied) {
        for (std::size_t i = 0; i < g0.params.size(); ++i) g0.params[i] += g1.params[i];
        return g0.params;
    }
    std::vector<double> out = std::move(g0.params);
    out.insert(out.end(), g1.params.begin(), g1.params.end());
    return out;
}

Test clone_test(const Test& test, const std::string& scope) {
    Test copy = test;
    if (!scope.empty()) {
        copy.set_scope(test.scope().empty() ? scope : test.scope() + "/" + scope);
        if (auto* nr = std::get_if<NeuralRuleTest>(&copy.body())) {
            for (NeuralPredicate& p : nr->predicates) p.instance_id += "@" + scope;
        }
    }
    return copy;
}

namespace {

std::vector<std::string> test_rv_keys(const Test& test) {
    std::vector<std::string> keys;
    if (const auto* nr = std::get_if<NeuralRuleTest>(&test.body())) {
        for (const NeuralPredicate& p : nr->predicates) keys.push_back(rv_key(p));
    }
    return keys;
}

double eval_test_fixed(const Test& test, const Example& example,
                       const std::map<std::string, int>& fixed) {
    if (const auto* nr = std::get_if<NeuralRuleTest>(&test.body())) {
        return rule_prob(*nr, example, &fixed);
    }
    return eval_test(test, example);
}

}  // namespace

bool shares_variables(const std::vector<SignedTest>& path, const Test& test) {
    std::vector<std::string> keys = test_rv_keys(test);
    if (keys.empty()) return false;
    for (const SignedTest& st : path) {
        for (const std::string& k : test_rv_keys(*st.test)) {
            if (std::find(keys.begin(), keys.end(), k) != keys.end()) return true;
        }
    }
    return false;
}

double joint_prob(const std::vector<SignedTest>& tests, const Example& example) {
    // Count distinct tests using each random variable.
    std::map<std::string, int> usage;
    for (const SignedTest& st : tests) {
        std::set<std::string> seen;
        for (const std::string& k : test_rv_keys(*st.test)) seen.insert(k);
        for (const std::string& k : seen) usage[k] += 1;
    }
    std::vector<std::string> shared;
    for (const auto& [key, count] : usage) {
        if (count >= 2) shared.push_back(key);
    }

    if (shared.empty()) {
        double p = 1.0;
        for (const SignedTest& st : tests) {
            double q = eval_test(*st.test, example);
            p *= st.polarity ? q : (1.0 - q);
        }
        return p;
    }

    // Distribution and domain size of each shared variable (read off the first
    // slot found; sharing presumes identical parameters).
    std::vector<std::vector<double>> dists;
    std::vector<int> sizes;
    for (const std::string& key : shared) {
        for (const SignedTest& st : tests) {
            const auto* nr = std::get_if<NeuralRuleTest>(&st.test->body());
            if (!nr) continue;
            const NeuralPredicate* found = nullptr;
            for (const NeuralPredicate& p : nr->predicates) {
                if (rv_key(p) == key) {
                    found = &p;
                    break;
                }
            }
            if (found) {
                dists.push_back(forward(found->net, example.feature(found->input.key)));
                sizes.push_back(static_cast<int>(found->domain.size()));
                break;
            }
        }
    }

    double n_assignments = 1.0;
    for (int s : sizes) n_assignments *= s;
    require(n_assignments <= 1e6, "joint-too-large",
            "too many shared-outcome assignments: " + std::to_string(n_assignments));

    std::vector<int> assignment(shared.size(), 0);
    std::map<std::string, int> fixed;
    double total = 0.0;
    for (;;) {
        double w = 1.0;
        for (std::size_t k = 0; k < shared.size(); ++k) {
            w *= dists[k][static_cast<std::size_t>(assignment[k])];
            fixed[shared[k]] = assignment[k];
        }
        if (w > 0.0) {
            double term = w;
            for (const SignedTest& st : tests) {
                double q = eval_test_fixed(*st.test, example, fixed);
                term *= st.polarity ? q : (1.0 - q);
            }
            total += term;
        }
        // Odometer increment.
        std::size_t k = 0;
        for (; k < shared.size(); ++k) {
            if (++assignment[k] < sizes[k]) break;
            assignment[k] = 0;
        }
        if (k == shared.size()) break;
    }
    return total;
}

double conditional_prob(const std::vector<SignedTest>& path, const Test& test,
                        const Example& example) {
    if (path.empty() || !shares_variables(path, test)) return eval_test(test, example);
    double denom = joint_prob(path, example);
    require(denom > 0.0, "zero-path-mass", "conditioning on a zero-probability path");
    std::vector<SignedTest> with = path;
    with.push_back(SignedTest{&test, true});
    return joint_prob(with, example) / denom;
}

// --- Pool construction ---------------------------------------------------------

namespace {

const char* rank_key(int card) { return card == 0 ? "rank_img_0" : "rank_img_1"; }
const char* suit_key(int card) { return card == 0 ? "suit_img_0" : "suit_img_1"; }

std::vector<int> iota_domain(int lo, int hi) {
    std::vector<int> d;
    for (int v = lo; v <= hi; ++v) d.push_back(v);
    return d;
}

NeuralPredicate make_predicate(const std::string& pred_name, const std::string& instance_id,
                               const std::string& input_key, int input_dim, std::vector<int> domain,
                               std::uint64_t seed) {
    NeuralPredicate p;
    p.name = pred_name;
    p.instance_id = instance_id;
    p.input = FeatureRef{input_key};
    p.domain = std::move(domain);
    p.net = NeuralNet({input_dim, 32, static_cast<int>(p.domain.size())}, Head::softmax);
    p.net.init_params(seed);
    return p;
}

enum class PredKind { rank, suit, rank_attr, suit_attr };

NeuralPredicate card_predicate(PredKind kind, int card, const std::string& test_id,
                               const std::string& instance_tag, std::uint64_t seed, int ranks) {
    switch (kind) {
        case PredKind::rank:
            return make_predicate("rank", test_id + "." + instance_tag, rank_key(card),
                                  glyph_pixel_count, iota_domain(1, ranks), seed);
        case PredKind::suit:
            return make_predicate("suit", test_id + "." + instance_tag, suit_key(card),
                                  suit_feature_size, iota_domain(1, num_suits), seed);
        case PredKind::rank_attr:
            return make_predicate("rank_attribute", test_id + "." + instance_tag, rank_key(card),
                                  glyph_pixel_count, iota_domain(0, 1), seed);
        case PredKind::suit_attr:
            return make_predicate("suit_attribute", test_id + "." + instance_tag, suit_key(card),
                                  suit_feature_size, iota_domain(0, 1), seed);
    }
    fail("unknown-concept", "bad predicate kind");
}

// Two-slot rule over card-0 and card-1 features. Tied slots share parameters.
Test make_card_rule(const std::string& id, PredKind kind, Comparator cmp, bool tied,
                    std::uint64_t seed, int ranks) {
    NeuralRuleTest rule;
    rule.name = id;
    rule.tied = tied;
    std::uint64_t s0 = derive_seed(seed, id + "#0");
    std::uint64_t s1 = tied ? s0 : derive_seed(seed, id + "#1");
    std::string tag0 = tied ? "pred" : "pred1";
    std::string tag1 = tied ? "pred" : "pred2";
    rule.predicates.push_back(card_predicate(kind, 0, id, tag0, s0, ranks));
    rule.predicates.push_back(card_predicate(kind, 1, id, tag1, s1, ranks));
    rule.comparator = cmp;
    return Test(id, std::move(rule));
}

// color_parity's cross-modal rule: rank attribute of card 0 vs suit attribute
// of card 1.
Test make_attr_match(std::uint64_t seed, int ranks) {
    NeuralRuleTest rule;
    rule.name = "attr_match";
    rule.tied = false;
    rule.predicates.push_back(
        card_predicate(PredKind::rank_attr, 0, "attr_match", "pred1",
                       derive_seed(seed, "attr_match#0"), ranks));
    rule.predicates.push_back(
        card_predicate(PredKind::suit_attr, 1, "attr_match", "pred2",
                       derive_seed(seed, "attr_match#1"), ranks));
    rule.comparator = Comparator{Relation::attr_neq, 0};
    return Test("attr_match", std::move(rule));
}

Test make_rel_fact(const std::string& id, bool over_ranks, std::uint64_t seed) {
    NeuralFactTest fact;
    fact.name = id;
    int dim = over_ranks ? glyph_pixel_count : suit_feature_size;
    fact.inputs = over_ranks
                      ? std::vector<FeatureRef>{FeatureRef{"rank_img_0"}, FeatureRef{"rank_img_1"}}
                      : std::vector<FeatureRef>{FeatureRef{"suit_img_0"}, FeatureRef{"suit_img_1"}};
    fact.net = NeuralNet({2 * dim, 16, 1}, Head::sigmoid);
    fact.net.init_params(derive_seed(seed, id));
    return Test(id, std::move(fact));
}

Test make_named_test(const std::string& name, std::uint64_t seed, int ranks) {
    if (name == "gt_rank")
        return make_card_rule("gt_rank", PredKind::rank, {Relation::lt, 0}, true, seed, ranks);
    if (name == "gt_suit")
        return make_card_rule("gt_suit", PredKind::suit, {Relation::lt, 0}, true, seed, ranks);
    if (name == "modulo_rank")
        return make_card_rule("modulo_rank", PredKind::rank, {Relation::mod_succ, ranks}, true,
                              seed, ranks);
    if (name == "modulo_suit")
        return make_card_rule("modulo_suit", PredKind::suit, {Relation::mod_succ, num_suits}, true,
                              seed, ranks);
    if (name == "increment_suit")
        return make_card_rule("increment_suit", PredKind::suit, {Relation::succ, 0}, true, seed,
                              ranks);
    if (name == "alternate_attr_rank")
        return make_card_rule("alternate_attr_rank", PredKind::rank_attr,
                              {Relation::attr_neq, 0}, true, seed, ranks);
    if (name == "attr_match") return make_attr_match(seed, ranks);
    if (name == "rel_rank") return make_rel_fact("rel_rank", true, seed);
    if (name == "rel_suit") return make_rel_fact("rel_suit", false, seed);
    fail("unknown-concept", "no pool test named '" + name + "'");
}

std::vector<std::string> opt_test_names(ConceptId c) {
    switch (c) {
        case ConceptId::suit_order: return {"gt_suit"};
        case ConceptId::rank_order: return {"gt_rank"};
        case ConceptId::increase_suits: return {"increment_suit", "modulo_suit"};
        case ConceptId::alternating_faces: return {"alternate_attr_rank"};
        case ConceptId::alternating_parity: return {"alternate_attr_rank"};
        case ConceptId::hidden_modulo_simple: return {"modulo_rank", "modulo_suit"};
        case ConceptId::hidden_order_simple: return {"gt_rank", "gt_suit"};
        case ConceptId::color_parity: return {"attr_match"};
    }
    fail("unknown-concept", "bad concept id");
}

std::vector<std::string> opt_union_names() {
    std::vector<std::string> names;
    for (ConceptId c : all_concepts) {
        for (const std::string& n : opt_test_names(c)) {
            if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
        }
    }
    return names;
}

}  // namespace

std::vector<Test> build_pool(const PoolSpec& spec, std::uint64_t seed, int ranks) {
    std::vector<std::string> names;
    switch (spec.kind) {
        case PoolKind::nf: names = {"rel_rank", "rel_suit"}; break;
        case PoolKind::opt: names = opt_test_names(spec.concept_id); break;
        case PoolKind::opt_union: names = opt_union_names(); break;
        case PoolKind::bad: {
            names = opt_union_names();
            names.push_back("rel_rank");
            names.push_back("rel_suit");
            for (const std::string& drop : opt_test_names(spec.concept_id)) {
                names.erase(std::remove(names.begin(), names.end(), drop), names.end());
            }
            break;
        }
    }
    std::vector<Test> pool;
    pool.reserve(names.size());
    for (const std::string& n : names) pool.push_back(make_named_test(n, seed, ranks));
    return pool;
}

std::vector<Test> make_tabular_tests(const std::vector<std::string>& feature_keys, TabularMode mode,
                                     std::uint64_t seed, int glyph_dim) {
    std::vector<Test> pool;
    pool.reserve(feature_keys.size());
    for (const std::string& key : feature_keys) {
        if (mode == TabularMode::symbolic) {
            pool.emplace_back(key, DeterministicFactTest{Atom::intern(key)});
        } else {
            NeuralFactTest fact;
            fact.name = "nf_" + key;
            fact.inputs = {FeatureRef{key + "_img"}};
            fact.net = NeuralNet({glyph_dim, 16, 1}, Head::sigmoid);
            fact.net.init_params(derive_seed(seed, fact.name));
            pool.emplace_back(fact.name, std::move(fact));
        }
    }
    return pool;
}

}  // namespace nldt
