#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "nldt/baselines.hpp"
#include "nldt/datagen.hpp"
#include "nldt/example.hpp"
#include "nldt/induction.hpp"

namespace nldt {

double accuracy(const std::vector<Label>& preds, const std::vector<Label>& labels);

// Accuracy of always predicting the training-set majority class on the test
// labels.
double default_accuracy(const std::vector<Label>& train_labels,
                        const std::vector<Label>& test_labels);

// (f1 of pos-as-positive, f1 of neg-as-positive); 0 when precision + recall
// is 0.
std::pair<double, double> f1_per_class(const std::vector<Label>& preds,
                                       const std::vector<Label>& labels);

struct EvalRow {
    double accuracy = 0.0;
    double default_accuracy = 0.0;
    double f1_pos = 0.0;
    double f1_neg = 0.0;
};

struct EvalReport {
    std::vector<EvalRow> runs;
    EvalRow mean;
    EvalRow stddev;  // sample standard deviation (n-1)
};

EvalReport aggregate(std::vector<EvalRow> runs);

// Predictions thresholded at 0.5.
std::vector<Label> threshold_preds(const std::vector<double>& probs);

EvalRow evaluate_tree(const NLDT& tree, const Dataset& test, const std::vector<Label>& train_labels);

// Stratified k-fold cross-validation: pipeline(train, test) -> EvalRow.
using Pipeline = std::function<EvalRow(const Dataset&, const Dataset&)>;
EvalReport kfold_cv(const Dataset& data, int k, std::uint64_t seed, const Pipeline& pipeline);

// --- Experiment harness -----------------------------------------------------------

struct ExperimentSpec {
    std::string experiment;  // uci_compare | eleusis_compare | pools | reuse
    ConceptId concept_id = ConceptId::suit_order;
    std::vector<ConceptId> concepts;  // eleusis_compare; empty = all
    PoolKind pool_kind = PoolKind::opt;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7};
    int folds = 10;
    EleusisSizes sizes;
    ConceptOptions concept_options;
    int card_pool = 20000;
    int tabular_rows = 600;
    int tabular_features = 8;
    InductionConfig induction;
    BaselineConfig baseline;
    std::string out_dir;  // empty = no files written
};

// One experiment result: named rows of mean +/- std values plus the full
// per-seed detail used for results.json.
struct ExperimentResult {
    std::string experiment;
    std::vector<std::string> row_names;
    std::map<std::string, EvalReport> reports;
    std::map<std::string, double> extra;  // e.g. pool F1 ratios
    std::string table;                    // aligned text rendering
    std::string json;                     // machine-readable rendering
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

// Writes results.json and results.txt under spec.out_dir.
void write_result_files(const ExperimentSpec& spec, const ExperimentResult& result);

}  // namespace nldt
