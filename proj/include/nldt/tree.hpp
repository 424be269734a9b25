#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nldt/logic.hpp"
#include "nldt/tests_pool.hpp"

namespace nldt {

// Tree node. Leaves carry a dense 1-based id and the positive-class
// probability delta; internal nodes own their test, left = test holds.
struct Node {
    std::unique_ptr<Test> test;
    std::unique_ptr<Node> left;
    std::unique_ptr<Node> right;
    int leaf_id = 0;
    double delta = 0.0;

    bool is_leaf() const { return test == nullptr; }

    static std::unique_ptr<Node> make_leaf(double delta);
    static std::unique_ptr<Node> make_internal(Test test, std::unique_ptr<Node> left,
                                               std::unique_ptr<Node> right);
    std::unique_ptr<Node> clone() const;
};

bool nodes_equal(const Node& a, const Node& b);

struct TestInfo {
    std::string id;
    std::string kind;
};

struct NLDT {
    std::unique_ptr<Node> root;
    std::vector<TestInfo> pool_metadata;
    std::map<std::string, std::string> config;  // induction config snapshot
    std::uint64_t seed = 0;

    NLDT() = default;
    explicit NLDT(std::unique_ptr<Node> r) : root(std::move(r)) { assign_leaf_ids(); }

    // Renumbers leaves 1..n in left-to-right order.
    void assign_leaf_ids();
    int leaf_count() const;
};

// P(leaf_i | example) for every leaf; values sum to 1.
std::map<int, double> leaf_probs(const NLDT& tree, const Example& example);

// P(pos | example) = sum_i delta_i * P(leaf_i | example).
double classify(const NLDT& tree, const Example& example);

// Probabilistic-logic translation grounded in one example: every test becomes
// a probabilistic fact weighted by P(test | example), every leaf contributes
//   leaf_i :- <path literals>.   delta_i :: d_i.
//   pos :- d_i, leaf_i.          neg :- \+d_i, leaf_i.
// Tests are keyed by atom for symbolic facts (shared across branches) and by
// scoped id for neural tests.
LogicProgram translate(const NLDT& tree, const Example& example);

// Atom names used by translate for the given tree, in preorder.
std::vector<std::string> translate_test_atoms(const NLDT& tree);

std::string tree_to_json(const NLDT& tree);
NLDT tree_from_json(const std::string& text);

std::string to_dot(const NLDT& tree);

// All tests in preorder (root first).
std::vector<const Test*> collect_tests(const NLDT& tree);

}  // namespace nldt
