#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "nldt/concepts.hpp"
#include "nldt/example.hpp"
#include "nldt/neural.hpp"

namespace nldt {

// Names a subsymbolic feature of an Example ("rank_img_0", "suit_img_1", ...).
struct FeatureRef {
    std::string key;
    bool operator==(const FeatureRef& other) const { return key == other.key; }
};

// Categorical classifier over an ordered symbolic domain. Two predicate
// applications denote the same random variable iff instance_id and input key
// both match; tied rule slots share parameters but stay distinct variables.
struct NeuralPredicate {
    std::string name;
    std::string instance_id;
    NeuralNet net;  // softmax head, output size = domain size
    FeatureRef input;
    std::vector<int> domain;
};

enum class Relation { lt, neq, eq, mod_succ, succ, attr_eq, attr_neq };

struct Comparator {
    Relation relation = Relation::eq;
    int modulus = 0;  // mod_succ only

    // Successors cycle on 1-based domains: succ(m) = (m mod modulus) + 1.
    bool holds(int a, int b) const;
    std::string name() const;
};

struct DeterministicFactTest {
    Atom atom;
};

struct ProbabilisticFactTest {
    Atom atom;
    double prob = 0.5;
};

struct NeuralFactTest {
    std::string name;
    NeuralNet net;  // sigmoid head
    std::vector<FeatureRef> inputs;
};

struct NeuralRuleTest {
    std::string name;
    std::vector<NeuralPredicate> predicates;  // exactly two slots
    Comparator comparator;
    bool tied = false;  // slots share one parameter vector
};

// Internal-node condition. Value type: clones own their parameters.
class Test {
public:
    using Body =
        std::variant<DeterministicFactTest, ProbabilisticFactTest, NeuralFactTest, NeuralRuleTest>;

    Test(std::string id, Body body) : id_(std::move(id)), body_(std::move(body)) {}

    const std::string& id() const { return id_; }
    const std::string& scope() const { return scope_; }
    std::string full_id() const { return scope_.empty() ? id_ : id_ + "@" + scope_; }
    void set_scope(std::string scope) { scope_ = std::move(scope); }

    const Body& body() const { return body_; }
    Body& body() { return body_; }

    bool is_neural() const {
        return std::holds_alternative<NeuralFactTest>(body_) ||
               std::holds_alternative<NeuralRuleTest>(body_);
    }
    bool trainable() const { return is_neural() && !frozen_; }
    bool frozen() const { return frozen_; }
    void set_frozen(bool f) { frozen_ = f; }

    // Flat trainable parameter view. Tied rules expose one copy; set_params
    // mirrors it into every slot. Errors "not-trainable" for symbolic kinds.
    std::vector<double> get_params() const;
    void set_params(const std::vector<double>& params);

private:
    std::string id_;
    std::string scope_;
    Body body_;
    bool frozen_ = false;
};

// P(test | example) in [0,1].
double eval_test(const Test& test, const Example& example);

// Gradient of upstream * eval_test w.r.t. get_params(). "not-trainable" for
// symbolic tests.
std::vector<double> eval_test_grad(const Test& test, const Example& example, double upstream);

// Deep copy with independent parameters; base id preserved, scope appended.
Test clone_test(const Test& test, const std::string& scope = "");

// --- Joint probabilities over correlated tests -------------------------------
//
// Tests sharing a predicate random variable (same instance_id and input key)
// are dependent; the joint is computed by enumerating the shared outcomes.
// Independent sets fall back to a plain product.

struct SignedTest {
    const Test* test;
    bool polarity;  // true: test holds
};

double joint_prob(const std::vector<SignedTest>& tests, const Example& example);

// P(test | conjunction of path tests, example). Errors "zero-path-mass" when
// the path has probability 0.
double conditional_prob(const std::vector<SignedTest>& path, const Test& test,
                        const Example& example);

// True iff `test` shares a predicate random variable with any test in `path`
// (the conditional then differs from the marginal).
bool shares_variables(const std::vector<SignedTest>& path, const Test& test);

// --- Pools --------------------------------------------------------------------

enum class PoolKind { nf, opt, opt_union, bad };

struct PoolSpec {
    PoolKind kind = PoolKind::nf;
    ConceptId concept_id = ConceptId::suit_order;  // opt/bad only
};

// Candidate-test pools for the card experiments. `ranks` sets the rank domain
// size; networks are seeded deterministically per test name.
std::vector<Test> build_pool(const PoolSpec& spec, std::uint64_t seed, int ranks = 8);

// Per-feature tests for tabular data: deterministic atoms in symbolic mode,
// one neural fact over the feature's glyph in subsymbolic mode.
enum class TabularMode { symbolic, subsymbolic };
std::vector<Test> make_tabular_tests(const std::vector<std::string>& feature_keys, TabularMode mode,
                                     std::uint64_t seed, int glyph_dim = 64);

}  // namespace nldt
