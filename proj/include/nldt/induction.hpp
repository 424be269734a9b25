#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nldt/example.hpp"
#include "nldt/tests_pool.hpp"
#include "nldt/tree.hpp"

namespace nldt {

struct InductionConfig {
    double epsilon = 0.01;        // min path probability to keep an example
    int max_depth = 4;
    int min_examples = 10;
    double min_gain = 1e-3;
    int epochs_per_test = 20;
    double learning_rate = 1e-3;
    double smoothing_alpha = 1.0;  // Laplace pseudo-count for stored leaf deltas
    std::uint64_t seed = 0;
    int batch_size = 0;  // 0 = full batch
    int jobs = 1;        // candidate-level parallelism

    std::map<std::string, std::string> to_kv() const;
    static InductionConfig from_kv(const std::map<std::string, std::string>& kv);
};

// An example's index into the dataset plus P(path | example).
struct WeightedExample {
    int index = 0;
    double path_prob = 1.0;
};

std::vector<WeightedExample> full_mass(const Dataset& data);

// Mass-weighted relative class frequency with Laplace pseudo-count alpha on
// each class:  (alpha + sum_pos pp) / (2 alpha + sum pp).
// Errors "empty-leaf" when the mass is zero and alpha == 0.
double estimate_probability(const Dataset& data, const std::vector<WeightedExample>& examples,
                            double alpha);

// P(test | path, example); equals eval_test unless the test shares predicate
// variables with the path.
double conditional_test_prob(const Dataset& data, const std::vector<SignedTest>& path,
                             const Test& test, const Example& example);

// Per-example training weights w_c = path_prob / (2 * P(c | path)), with the
// class prior taken from the node's unsmoothed delta.
struct ClassWeights {
    double pos_scale = 0.0;  // multiply path_prob by this for positive examples
    double neg_scale = 0.0;
};
ClassWeights class_weights(double delta_raw);

// Weighted cross-entropy of a candidate test at a node. When grad_out is
// non-null (neural tests only) it receives the exact gradient over
// test.get_params(). Errors "not-trainable" for symbolic tests.
double weighted_ce_loss(const Dataset& data, const std::vector<WeightedExample>& examples,
                        const std::vector<SignedTest>& path, double delta_raw, const Test& test,
                        std::vector<double>* grad_out = nullptr);

// Clones and trains every candidate. Neural tests get epochs_per_test Adam
// epochs against the weighted cross-entropy; probabilistic facts take the
// closed-form mass-weighted positive fraction; deterministic and frozen tests
// pass through. Pool entries are never mutated.
std::vector<Test> train_tests(const Dataset& data, const std::vector<WeightedExample>& examples,
                              const std::vector<SignedTest>& path, double delta_raw,
                              const std::vector<Test>& pool, const InductionConfig& config,
                              const std::string& node_scope);

// Soft-count information gain of a (trained) test.
double information_gain(const Dataset& data, const std::vector<WeightedExample>& examples,
                        const std::vector<SignedTest>& path, const Test& test);

// Index of the highest-gain test; ties break toward the lowest index.
std::size_t best_test(const std::vector<double>& gains);

// Binary entropy, log base 2, 0 log 0 = 0.
double entropy(double delta);

// Top-down induction. Returns the tree plus metadata (config snapshot, seed,
// pool summary).
NLDT neuid3(const Dataset& data, const std::vector<Test>& pool, const InductionConfig& config);

// Replaces the parameters of pool entries whose id matches one of the given
// trained tests; optionally freezes them.
void preload_pool(std::vector<Test>& pool, const std::vector<Test>& trained, bool freeze);

}  // namespace nldt
