#include <doctest.h>

#include <cmath>

#include "nldt/logic.hpp"
#include "nldt/rng.hpp"

using namespace nldt;

namespace {

Atom A(const std::string& name) { return Atom::intern(name); }

// The burglary/earthquake/alarm tree as a logic program: five leaves, pos at
// leaves 1 and 3.
LogicProgram alarm_program(double p_burglary, double p_earthquake, double p_alarm) {
    Atom burglary = A("burglary"), earthquake = A("earthquake"), alarm = A("alarm");
    std::vector<Rule> rules;
    rules.emplace_back(A("leaf_1"), std::vector<Literal>{pos(burglary), pos(alarm)});
    rules.emplace_back(A("leaf_2"), std::vector<Literal>{pos(burglary), neg(alarm)});
    rules.emplace_back(A("leaf_3"),
                       std::vector<Literal>{neg(burglary), pos(earthquake), pos(alarm)});
    rules.emplace_back(A("leaf_4"),
                       std::vector<Literal>{neg(burglary), pos(earthquake), neg(alarm)});
    rules.emplace_back(A("leaf_5"), std::vector<Literal>{neg(burglary), neg(earthquake)});
    rules.emplace_back(A("pos"), std::vector<Literal>{pos(A("leaf_1"))});
    rules.emplace_back(A("pos"), std::vector<Literal>{pos(A("leaf_3"))});
    rules.emplace_back(A("neg"), std::vector<Literal>{pos(A("leaf_2"))});
    rules.emplace_back(A("neg"), std::vector<Literal>{pos(A("leaf_4"))});
    rules.emplace_back(A("neg"), std::vector<Literal>{pos(A("leaf_5"))});
    std::vector<ProbFact> facts{{burglary, p_burglary}, {earthquake, p_earthquake},
                                {alarm, p_alarm}};
    return LogicProgram(std::move(rules), std::move(facts));
}

// Random chain-of-leaves probabilistic decision tree, expressed directly as a
// program in translated form. Returns the program and the P(pos) computed by
// the independent sum-over-leaves route.
struct RandomTree {
    LogicProgram program;
    double p_pos;
};

RandomTree random_tree_program(Rng& rng, int n_tests) {
    std::vector<double> test_probs;
    std::vector<Atom> test_atoms;
    for (int i = 0; i < n_tests; ++i) {
        test_atoms.push_back(A("t" + std::to_string(i) + "_" + std::to_string(rng.next_u64() % 100000)));
        test_probs.push_back(rng.next_double());
    }
    // Right-leaning tree: test i true -> leaf i, false -> continue; final
    // false branch is leaf n_tests.
    std::vector<Rule> rules;
    std::vector<ProbFact> facts;
    double p_pos = 0.0;
    double prefix = 1.0;  // probability all previous tests were false
    for (int leaf = 0; leaf <= n_tests; ++leaf) {
        std::vector<Literal> body;
        for (int j = 0; j < leaf; ++j) body.push_back(neg(test_atoms[j]));
        if (leaf < n_tests) body.push_back(pos(test_atoms[leaf]));
        Atom leaf_atom = A("leaf_" + std::to_string(leaf + 1));
        Atom dec_atom = A("d_" + std::to_string(leaf + 1));
        double delta = rng.next_double();
        rules.emplace_back(leaf_atom, body);
        facts.emplace_back(dec_atom, delta);
        rules.emplace_back(A("pos"), std::vector<Literal>{pos(dec_atom), pos(leaf_atom)});
        rules.emplace_back(A("neg"), std::vector<Literal>{neg(dec_atom), pos(leaf_atom)});
        double leaf_prob = leaf < n_tests ? prefix * test_probs[leaf] : prefix;
        p_pos += leaf_prob * delta;
        if (leaf < n_tests) prefix *= 1.0 - test_probs[leaf];
    }
    for (int i = 0; i < n_tests; ++i) facts.emplace_back(test_atoms[i], test_probs[i]);
    return RandomTree{LogicProgram(std::move(rules), std::move(facts)), p_pos};
}

}  // namespace

TEST_CASE("atoms intern by identity") {
    CHECK(A("burglary") == A("burglary"));
    CHECK(A("burglary") != A("alarm"));
    CHECK(A("burglary").name() == "burglary");
}

TEST_CASE("conjunction rejects duplicate atoms") {
    Conjunction c;
    c.append(pos(A("a")));
    CHECK_THROWS_AS(c.append(neg(A("a"))), Error);
    CHECK_THROWS_AS(c.append(pos(A("a"))), Error);
    CHECK(c.size() == 1);
}

TEST_CASE("entails on the alarm tree") {
    // e1 = {burglary, alarm}: pos. e2 = {}: neg.
    CHECK(entails(alarm_program(1, 0, 1), A("pos")));
    CHECK_FALSE(entails(alarm_program(1, 0, 1), A("neg")));
    CHECK(entails(alarm_program(0, 0, 0), A("neg")));
    CHECK_FALSE(entails(alarm_program(0, 0, 0), A("pos")));
}

TEST_CASE("entails on the empty program") {
    LogicProgram empty;
    CHECK_FALSE(entails(empty, A("anything")));
}

TEST_CASE("entails requires deterministic facts") {
    LogicProgram p({}, {ProbFact(A("f"), 0.3)});
    CHECK_THROWS_WITH_AS(entails(p, A("f")), doctest::Contains("not-deterministic"), Error);
}

TEST_CASE("cyclic programs are rejected at construction") {
    std::vector<Rule> rules;
    rules.emplace_back(A("a"), std::vector<Literal>{pos(A("b"))});
    rules.emplace_back(A("b"), std::vector<Literal>{pos(A("a"))});
    CHECK_THROWS_WITH_AS(LogicProgram(std::move(rules), {}), doctest::Contains("cyclic-program"),
                         Error);
}

TEST_CASE("rule rejects self-recursion") {
    CHECK_THROWS_AS(Rule(A("a"), {pos(A("a"))}), Error);
}

TEST_CASE("prob facts cannot be rule heads") {
    std::vector<Rule> rules;
    rules.emplace_back(A("f"), std::vector<Literal>{pos(A("g"))});
    CHECK_THROWS_AS(LogicProgram(std::move(rules), {ProbFact(A("f"), 0.5)}), Error);
}

TEST_CASE("conjunction_prob") {
    std::unordered_map<Atom, double, AtomHash> probs{
        {A("burglary"), 0.7}, {A("earthquake"), 0.1}, {A("alarm"), 0.9}};

    SUBCASE("empty conjunction is the empty product") {
        CHECK(conjunction_prob(Conjunction{}, probs) == 1.0);
    }
    SUBCASE("negated burglary and earthquake and alarm = 0.027") {
        Conjunction kappa({neg(A("burglary")), pos(A("earthquake")), pos(A("alarm"))});
        CHECK(conjunction_prob(kappa, probs) == doctest::Approx(0.027).epsilon(1e-12));
    }
    SUBCASE("unknown atom errors") {
        Conjunction kappa({pos(A("nosuch"))});
        CHECK_THROWS_WITH_AS(conjunction_prob(kappa, probs), doctest::Contains("unknown-atom"),
                             Error);
    }
}

TEST_CASE("wmc single fact") {
    LogicProgram p({}, {ProbFact(A("f"), 0.3)});
    CHECK(wmc_query(p, A("f")) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("wmc of a translated single-leaf tree") {
    std::vector<Rule> rules;
    rules.emplace_back(A("leaf_1"), std::vector<Literal>{});
    rules.emplace_back(A("pos"), std::vector<Literal>{pos(A("d_1")), pos(A("leaf_1"))});
    rules.emplace_back(A("neg"), std::vector<Literal>{neg(A("d_1")), pos(A("leaf_1"))});
    LogicProgram p(std::move(rules), {ProbFact(A("d_1"), 0.9)});
    CHECK(wmc_query(p, A("pos")) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(wmc_query(p, A("neg")) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("wmc cap") {
    std::vector<ProbFact> facts;
    for (int i = 0; i < 21; ++i) facts.emplace_back(A("c" + std::to_string(i)), 0.5);
    LogicProgram p({}, std::move(facts));
    CHECK_THROWS_WITH_AS(wmc_query(p, A("c0")), doctest::Contains("wmc-too-large"), Error);
    CHECK(wmc_query(p, A("c0"), 21) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("wmc equals the sum-over-leaves route on random tree programs") {
    Rng rng(20240501);
    for (int trial = 0; trial < 25; ++trial) {
        RandomTree t = random_tree_program(rng, 1 + static_cast<int>(rng.next_below(6)));
        double wmc = wmc_query(t.program, A("pos"));
        CHECK(wmc == doctest::Approx(t.p_pos).epsilon(1e-12));
        // Exhaustive disjoint cases: pos + neg = 1.
        CHECK(wmc + wmc_query(t.program, A("neg")) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("wmc is monotone in leaf-decision probabilities") {
    Rng rng(7);
    RandomTree t = random_tree_program(rng, 4);
    double base = wmc_query(t.program, A("pos"));
    // Bump each d_i upward; pos depends positively on every leaf decision.
    for (std::size_t i = 0; i < t.program.prob_facts().size(); ++i) {
        const ProbFact& f = t.program.prob_facts()[i];
        if (f.atom.name().rfind("d_", 0) != 0) continue;
        std::vector<ProbFact> facts = t.program.prob_facts();
        facts[i] = ProbFact(f.atom, std::min(1.0, f.prob + 0.1));
        LogicProgram bumped(t.program.rules(), std::move(facts));
        CHECK(wmc_query(bumped, A("pos")) >= base - 1e-12);
    }
}

TEST_CASE("entails agrees with wmc restricted to 0/1 probabilities") {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        RandomTree t = random_tree_program(rng, 3);
        // Round every fact to 0/1.
        std::vector<ProbFact> facts;
        for (const ProbFact& f : t.program.prob_facts()) {
            facts.emplace_back(f.atom, rng.next_double() < 0.5 ? 0.0 : 1.0);
        }
        LogicProgram det(t.program.rules(), std::move(facts));
        for (const char* q : {"pos", "neg", "leaf_1"}) {
            double wmc = wmc_query(det, A(q));
            bool truth = entails(det, A(q));
            CHECK((wmc == 0.0 || wmc == 1.0));
            CHECK(wmc == (truth ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("program text format round-trips") {
    LogicProgram p = alarm_program(0.7, 0.1, 0.9);
    std::string text = print_program(p);
    LogicProgram reparsed = parse_program(text);
    CHECK(reparsed == p);
    CHECK(print_program(reparsed) == text);
}

TEST_CASE("parser accepts the documented clause forms") {
    LogicProgram p = parse_program("0.25 :: f.\nh :- a, \\+b.\ng.\n");
    CHECK(p.prob_facts().size() == 1);
    CHECK(p.prob_facts()[0].prob == 0.25);
    REQUIRE(p.rules().size() == 2);
    CHECK(p.rules()[0].body.size() == 2);
    CHECK(p.rules()[0].body[1].negated);
    CHECK(p.rules()[1].body.empty());
}

TEST_CASE("parser reports malformed input") {
    CHECK_THROWS_WITH_AS(parse_program("0.5 : f."), doctest::Contains("parse-error"), Error);
    CHECK_THROWS_WITH_AS(parse_program("h :- a"), doctest::Contains("parse-error"), Error);
    CHECK_THROWS_WITH_AS(parse_program("1.5 :: f."), doctest::Contains("parse-error"), Error);
}
