#include <doctest.h>

#include <cmath>
#include <set>

#include "nldt/parallel.hpp"
#include "nldt/rng.hpp"
#include "nldt/tests_pool.hpp"

using namespace nldt;

namespace {

double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max(1.0, std::fabs(a) + std::fabs(b));
}

NeuralPredicate small_predicate(const std::string& name, const std::string& instance,
                                const std::string& key, int dim, int k, std::uint64_t seed) {
    NeuralPredicate p;
    p.name = name;
    p.instance_id = instance;
    p.input = FeatureRef{key};
    for (int v = 1; v <= k; ++v) p.domain.push_back(v);
    p.net = NeuralNet({dim, 6, k}, Head::softmax);
    p.net.init_params(seed);
    return p;
}

Test small_rule(const std::string& id, Comparator cmp, bool tied, std::uint64_t seed, int k = 4) {
    NeuralRuleTest rule;
    rule.name = id;
    rule.tied = tied;
    rule.comparator = cmp;
    rule.predicates.push_back(small_predicate("p", id + ".p" + (tied ? "" : "1"), "x0", 3, k, seed));
    rule.predicates.push_back(
        small_predicate("p", id + ".p" + (tied ? "" : "2"), "x1", 3, k, tied ? seed : seed + 1));
    if (tied) rule.predicates[1].net.params = rule.predicates[0].net.params;
    return Test(id, std::move(rule));
}

Example small_example(Rng& rng) {
    Example e;
    e.features["x0"] = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    e.features["x1"] = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    e.features["x2"] = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    return e;
}

// Straight-line recomputation of the rule probability from the predicate
// distributions.
double brute_force_rule(const Test& test, const Example& e) {
    const auto& rule = std::get<NeuralRuleTest>(test.body());
    std::vector<double> d0 = forward(rule.predicates[0].net, e.feature(rule.predicates[0].input.key));
    std::vector<double> d1 = forward(rule.predicates[1].net, e.feature(rule.predicates[1].input.key));
    double total = 0.0;
    for (std::size_t i = 0; i < d0.size(); ++i) {
        for (std::size_t j = 0; j < d1.size(); ++j) {
            if (rule.comparator.holds(rule.predicates[0].domain[i], rule.predicates[1].domain[j])) {
                total += d0[i] * d1[j];
            }
        }
    }
    return total;
}

}  // namespace

TEST_CASE("comparator semantics") {
    Comparator lt{Relation::lt, 0};
    CHECK(lt.holds(1, 2));
    CHECK_FALSE(lt.holds(2, 2));
    Comparator succ{Relation::succ, 0};
    CHECK(succ.holds(3, 4));
    CHECK_FALSE(succ.holds(4, 3));
    Comparator mod8{Relation::mod_succ, 8};
    CHECK(mod8.holds(8, 1));   // wraps
    CHECK(mod8.holds(7, 8));
    CHECK(mod8.holds(4, 5));
    CHECK_FALSE(mod8.holds(4, 6));
    Comparator mod4{Relation::mod_succ, 4};
    CHECK(mod4.holds(4, 1));
    CHECK_FALSE(mod4.holds(4, 2));
}

TEST_CASE("deterministic fact evaluation") {
    Test t("alarm", DeterministicFactTest{Atom::intern("alarm")});
    Example with_alarm;
    with_alarm.add_fact(Atom::intern("alarm"));
    Example without;
    CHECK(eval_test(t, with_alarm) == 1.0);
    CHECK(eval_test(t, without) == 0.0);
}

TEST_CASE("probabilistic fact evaluation is the annotation") {
    Test t("p1", ProbabilisticFactTest{Atom::intern("p1"), 0.37});
    CHECK(eval_test(t, Example{}) == 0.37);
}

TEST_CASE("uniform gt-rank rule evaluates to (1 - 1/K)/2") {
    // Zero-initialized predicate nets give uniform distributions; ties get
    // probability 1/K and the rest splits evenly between < and >.
    NeuralRuleTest rule;
    rule.name = "gt";
    rule.tied = true;
    rule.comparator = Comparator{Relation::lt, 0};
    rule.predicates.push_back(small_predicate("rank", "gt.p", "x0", 3, 8, 0));
    rule.predicates.push_back(small_predicate("rank", "gt.p", "x1", 3, 8, 0));
    for (auto& p : rule.predicates) std::fill(p.net.params.begin(), p.net.params.end(), 0.0);
    Test t("gt", std::move(rule));
    Rng rng(1);
    Example e = small_example(rng);
    CHECK(eval_test(t, e) == doctest::Approx((1.0 - 1.0 / 8.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("near-one-hot predicates make the rule deterministic") {
    Test t = small_rule("gt", Comparator{Relation::lt, 0}, false, 5, 4);
    auto& rule = std::get<NeuralRuleTest>(t.body());
    // Saturate the output biases: predicate 0 says value 1, predicate 1 says 2.
    for (int which = 0; which < 2; ++which) {
        NeuralNet& net = rule.predicates[static_cast<std::size_t>(which)].net;
        std::fill(net.params.begin(), net.params.end(), 0.0);
        std::size_t bias_base = net.params.size() - 4;
        net.params[bias_base + static_cast<std::size_t>(which)] = 1000.0;
    }
    Rng rng(2);
    Example e = small_example(rng);
    CHECK(eval_test(t, e) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rule evaluation equals the brute-force double loop and stays in [0,1]") {
    Rng rng(33);
    for (int trial = 0; trial < 30; ++trial) {
        Test t = small_rule("r", Comparator{Relation::neq, 0}, trial % 2 == 0, rng.next_u64());
        Example e = small_example(rng);
        double v = eval_test(t, e);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v == doctest::Approx(brute_force_rule(t, e)).epsilon(1e-15));
    }
}

TEST_CASE("eq and neq rules over the same nets sum to one") {
    Rng rng(44);
    for (int trial = 0; trial < 10; ++trial) {
        Test eq = small_rule("eq", Comparator{Relation::eq, 0}, false, rng.next_u64());
        Test ne = eq;
        std::get<NeuralRuleTest>(ne.body()).comparator = Comparator{Relation::neq, 0};
        Example e = small_example(rng);
        CHECK(eval_test(eq, e) + eval_test(ne, e) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("eval_test_grad with zero upstream is zero") {
    Test t = small_rule("r", Comparator{Relation::lt, 0}, true, 9);
    Rng rng(9);
    Example e = small_example(rng);
    for (double g : eval_test_grad(t, e, 0.0)) CHECK(g == 0.0);
}

TEST_CASE("eval_test_grad errors for symbolic tests") {
    Test t("alarm", DeterministicFactTest{Atom::intern("alarm")});
    CHECK_THROWS_WITH_AS(eval_test_grad(t, Example{}, 1.0), doctest::Contains("not-trainable"),
                         Error);
    Test p("pf", ProbabilisticFactTest{Atom::intern("pf"), 0.5});
    CHECK_THROWS_WITH_AS(eval_test_grad(p, Example{}, 1.0), doctest::Contains("not-trainable"),
                         Error);
}

TEST_CASE("rule gradients match finite differences (tied and untied)") {
    Rng rng(20240503);
    for (int trial = 0; trial < 20; ++trial) {
        bool tied = trial % 2 == 0;
        Test t = small_rule("r", Comparator{trial % 3 == 0 ? Relation::lt : Relation::neq, 0},
                            tied, rng.next_u64());
        Example e = small_example(rng);
        double upstream = rng.uniform(0.5, 2.0);
        std::vector<double> grad = eval_test_grad(t, e, upstream);
        std::vector<double> params = t.get_params();
        const double h = 1e-5;
        for (std::size_t p = 0; p < params.size(); ++p) {
            Test plus = t, minus = t;
            std::vector<double> pp = params, pm = params;
            pp[p] += h;
            pm[p] -= h;
            plus.set_params(pp);
            minus.set_params(pm);
            double fd = upstream * (eval_test(plus, e) - eval_test(minus, e)) / (2.0 * h);
            CHECK(rel_err(grad[p], fd) < 1e-4);
        }
    }
}

TEST_CASE("neural fact gradient equals backpropagation through the net") {
    NeuralFactTest fact;
    fact.name = "nf";
    fact.inputs = {FeatureRef{"x0"}, FeatureRef{"x1"}};
    fact.net = NeuralNet({6, 4, 1}, Head::sigmoid);
    fact.net.init_params(77);
    Test t("nf", std::move(fact));
    Rng rng(77);
    Example e = small_example(rng);
    std::vector<double> input = e.feature("x0");
    for (double v : e.feature("x1")) input.push_back(v);
    const auto& net = std::get<NeuralFactTest>(t.body()).net;
    Gradients g = backward(net, input, {1.7});
    CHECK(eval_test_grad(t, e, 1.7) == g.params);
}

TEST_CASE("clones own their parameters") {
    Test original = small_rule("r", Comparator{Relation::lt, 0}, true, 123);
    Test copy = clone_test(original, "nL");
    CHECK(copy.id() == original.id());
    CHECK(copy.full_id() == "r@nL");
    std::vector<double> params = copy.get_params();
    params[0] += 1.0;
    copy.set_params(params);
    CHECK(original.get_params()[0] != copy.get_params()[0]);

    Test det("alarm", DeterministicFactTest{Atom::intern("alarm")});
    Test det_copy = clone_test(det);
    CHECK(det_copy.id() == det.id());
}

TEST_CASE("parallel clone training does not cross-contaminate") {
    Test original = small_rule("r", Comparator{Relation::lt, 0}, false, 321);
    std::vector<double> original_params = original.get_params();
    std::vector<Test> clones;
    for (int i = 0; i < 100; ++i) clones.push_back(clone_test(original, "c" + std::to_string(i)));
    parallel_for(clones.size(), 8, [&](std::size_t i) {
        if (i % 2 == 0) return;  // half stay untrained
        std::vector<double> p = clones[i].get_params();
        for (double& v : p) v += static_cast<double>(i);
        clones[i].set_params(p);
    });
    CHECK(original.get_params() == original_params);
    for (std::size_t i = 0; i < clones.size(); ++i) {
        if (i % 2 == 0) {
            CHECK(clones[i].get_params() == original_params);
        } else {
            CHECK(clones[i].get_params() != original_params);
        }
    }
}

TEST_CASE("tied rules keep one parameter vector") {
    Test t = small_rule("r", Comparator{Relation::lt, 0}, true, 55);
    const auto& rule = std::get<NeuralRuleTest>(t.body());
    CHECK(rule.predicates[0].net.params == rule.predicates[1].net.params);
    std::vector<double> p = t.get_params();
    CHECK(p.size() == rule.predicates[0].net.params.size());
    p[3] += 0.5;
    Test u = t;
    u.set_params(p);
    const auto& urule = std::get<NeuralRuleTest>(u.body());
    CHECK(urule.predicates[0].net.params == urule.predicates[1].net.params);
}

TEST_CASE("pool construction") {
    SUBCASE("nf has exactly two neural facts") {
        std::vector<Test> pool = build_pool(PoolSpec{PoolKind::nf, ConceptId::suit_order}, 1);
        REQUIRE(pool.size() == 2);
        CHECK(pool[0].id() == "rel_rank");
        CHECK(pool[1].id() == "rel_suit");
        CHECK(std::holds_alternative<NeuralFactTest>(pool[0].body()));
    }
    SUBCASE("opt(alternating_faces) is the single alternate-attribute rule") {
        std::vector<Test> pool =
            build_pool(PoolSpec{PoolKind::opt, ConceptId::alternating_faces}, 1);
        REQUIRE(pool.size() == 1);
        CHECK(pool[0].id() == "alternate_attr_rank");
    }
    SUBCASE("bad pools exclude the optimal tests") {
        for (ConceptId c : all_concepts) {
            std::vector<Test> bad = build_pool(PoolSpec{PoolKind::bad, c}, 1);
            std::vector<Test> opt = build_pool(PoolSpec{PoolKind::opt, c}, 1);
            std::set<std::string> bad_ids, opt_ids;
            for (const Test& t : bad) bad_ids.insert(t.id());
            for (const Test& t : opt) opt_ids.insert(t.id());
            for (const std::string& id : opt_ids) CHECK(bad_ids.count(id) == 0);

            // |bad| = |opt_union ∪ nf| - |opt| since opt ⊆ opt_union.
            std::vector<Test> union_pool = build_pool(PoolSpec{PoolKind::opt_union, c}, 1);
            CHECK(bad.size() == union_pool.size() + 2 - opt.size());
        }
    }
    SUBCASE("opt_union deduplicates by name") {
        std::vector<Test> union_pool =
            build_pool(PoolSpec{PoolKind::opt_union, ConceptId::suit_order}, 1);
        std::set<std::string> ids;
        for (const Test& t : union_pool) ids.insert(t.id());
        CHECK(ids.size() == union_pool.size());
        // Union over the per-concept table: gt_rank, gt_suit, modulo_rank,
        // modulo_suit, attr_match, alternate_attr_rank, increment_suit.
        CHECK(union_pool.size() == 7);
    }
    SUBCASE("suit predicates carry the color channel input size") {
        std::vector<Test> pool = build_pool(PoolSpec{PoolKind::opt, ConceptId::suit_order}, 1);
        const auto& rule = std::get<NeuralRuleTest>(pool[0].body());
        CHECK(rule.predicates[0].net.input_size() == suit_feature_size);
        CHECK(rule.predicates[0].domain.size() == 4);
    }
}

TEST_CASE("joint probability handles shared predicate variables") {
    // tau1 = cmp(P, Q), tau2 = cmp(P, R): P is shared.
    Rng rng(8);
    NeuralPredicate shared = small_predicate("p", "shared", "x0", 3, 2, rng.next_u64());
    NeuralPredicate q = small_predicate("q", "q", "x1", 3, 2, rng.next_u64());
    NeuralPredicate r = small_predicate("r", "r", "x2", 3, 2, rng.next_u64());

    NeuralRuleTest rule1{"t1", {shared, q}, Comparator{Relation::eq, 0}, false};
    NeuralRuleTest rule2{"t2", {shared, r}, Comparator{Relation::eq, 0}, false};
    Test t1("t1", rule1), t2("t2", rule2);

    Example e = small_example(rng);
    std::vector<double> dp = forward(shared.net, e.feature("x0"));
    std::vector<double> dq = forward(q.net, e.feature("x1"));
    std::vector<double> dr = forward(r.net, e.feature("x2"));

    // Brute force over all (P, Q, R) outcomes.
    auto brute = [&](bool b1, bool b2) {
        double total = 0.0;
        for (int vp = 0; vp < 2; ++vp) {
            for (int vq = 0; vq < 2; ++vq) {
                for (int vr = 0; vr < 2; ++vr) {
                    bool h1 = vp == vq;
                    bool h2 = vp == vr;
                    if (h1 == b1 && h2 == b2) total += dp[vp] * dq[vq] * dr[vr];
                }
            }
        }
        return total;
    };

    CHECK(shares_variables({SignedTest{&t1, true}}, t2));
    for (bool b1 : {true, false}) {
        for (bool b2 : {true, false}) {
            double joint = joint_prob({SignedTest{&t1, b1}, SignedTest{&t2, b2}}, e);
            CHECK(joint == doctest::Approx(brute(b1, b2)).epsilon(1e-12));
        }
    }

    // Conditional = joint / marginal.
    double cond = conditional_prob({SignedTest{&t1, true}}, t2, e);
    double expected = brute(true, true) / (brute(true, true) + brute(true, false));
    CHECK(cond == doctest::Approx(expected).epsilon(1e-12));

    // Independent tests reduce to the product and the plain conditional.
    NeuralRuleTest rule3{"t3", {q, r}, Comparator{Relation::eq, 0}, false};
    Test t3("t3", rule3);
    CHECK_FALSE(shares_variables({SignedTest{&t1, true}}, t3));
    CHECK(conditional_prob({SignedTest{&t1, true}}, t3, e) ==
          doctest::Approx(eval_test(t3, e)).epsilon(1e-12));
    double prod = joint_prob({SignedTest{&t1, true}, SignedTest{&t3, false}}, e);
    CHECK(prod ==
          doctest::Approx(eval_test(t1, e) * (1.0 - eval_test(t3, e))).epsilon(1e-12));
}

TEST_CASE("missing features surface as structured errors") {
    Test t = small_rule("r", Comparator{Relation::lt, 0}, true, 3);
    Example e;  // no features
    CHECK_THROWS_WITH_AS(eval_test(t, e), doctest::Contains("missing-feature"), Error);
}

TEST_CASE("tabular test pools") {
    std::vector<std::string> keys{"f0", "f1"};
    std::vector<Test> sym = make_tabular_tests(keys, TabularMode::symbolic, 1);
    REQUIRE(sym.size() == 2);
    CHECK(std::holds_alternative<DeterministicFactTest>(sym[0].body()));
    std::vector<Test> sub = make_tabular_tests(keys, TabularMode::subsymbolic, 1);
    REQUIRE(sub.size() == 2);
    const auto& nf = std::get<NeuralFactTest>(sub[0].body());
    CHECK(nf.inputs[0].key == "f0_img");
}
