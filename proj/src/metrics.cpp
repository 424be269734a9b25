#include "nldt/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nldt/rng.hpp"

namespace nldt {

using ordered_json = nlohmann::ordered_json;

double accuracy(const std::vector<Label>& preds, const std::vector<Label>& labels) {
    require(!labels.empty() && preds.size() == labels.size(), "empty-input",
            "predictions and labels must be nonempty and aligned");
    double correct = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] == labels[i]) correct += 1.0;
    }
    return correct / static_cast<double>(labels.size());
}

double default_accuracy(const std::vector<Label>& train_labels,
                        const std::vector<Label>& test_labels) {
    require(!train_labels.empty() && !test_labels.empty(), "empty-input",
            "need nonempty label vectors");
    std::size_t pos = 0;
    for (Label l : train_labels) {
        if (l == Label::pos) ++pos;
    }
    Label majority = 2 * pos >= train_labels.size() ? Label::pos : Label::neg;
    double correct = 0.0;
    for (Label l : test_labels) {
        if (l == majority) correct += 1.0;
    }
    return correct / static_cast<double>(test_labels.size());
}

std::pair<double, double> f1_per_class(const std::vector<Label>& preds,
                                       const std::vector<Label>& labels) {
    require(!labels.empty() && preds.size() == labels.size(), "empty-input",
            "predictions and labels must be nonempty and aligned");
    auto f1_for = [&](Label target) {
        double tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            bool p = preds[i] == target;
            bool a = labels[i] == target;
            if (p && a) tp += 1;
            else if (p && !a) fp += 1;
            else if (!p && a) fn += 1;
        }
        double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        return precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    };
    return {f1_for(Label::pos), f1_for(Label::neg)};
}

EvalReport aggregate(std::vector<EvalRow> runs) {
    require(!runs.empty(), "empty-input", "nothing to aggregate");
    EvalReport report;
    report.runs = std::move(runs);
    auto stat = [&](auto field) {
        double sum = 0.0;
        for (const EvalRow& r : report.runs) sum += r.*field;
        double mean = sum / static_cast<double>(report.runs.size());
        double var = 0.0;
        for (const EvalRow& r : report.runs) var += (r.*field - mean) * (r.*field - mean);
        double sd = report.runs.size() > 1
                        ? std::sqrt(var / static_cast<double>(report.runs.size() - 1))
                        : 0.0;
        return std::pair<double, double>(mean, sd);
    };
    std::tie(report.mean.accuracy, report.stddev.accuracy) = stat(&EvalRow::accuracy);
    std::tie(report.mean.default_accuracy, report.stddev.default_accuracy) =
        stat(&EvalRow::default_accuracy);
    std::tie(report.mean.f1_pos, report.stddev.f1_pos) = stat(&EvalRow::f1_pos);
    std::tie(report.mean.f1_neg, report.stddev.f1_neg) = stat(&EvalRow::f1_neg);
    return report;
}

std::vector<Label> threshold_preds(const std::vector<double>& probs) {
    std::vector<Label> preds;
    preds.reserve(probs.size());
    for (double p : probs) preds.push_back(p >= 0.5 ? Label::pos : Label::neg);
    return preds;
}

namespace {

std::vector<Label> dataset_labels(const Dataset& data) {
    std::vector<Label> labels;
    labels.reserve(data.size());
    for (const Example& e : data) labels.push_back(e.label);
    return labels;
}

EvalRow make_row(const std::vector<Label>& preds, const std::vector<Label>& test_labels,
                 const std::vector<Label>& train_labels) {
    EvalRow row;
    row.accuracy = accuracy(preds, test_labels);
    row.default_accuracy = default_accuracy(train_labels, test_labels);
    std::tie(row.f1_pos, row.f1_neg) = f1_per_class(preds, test_labels);
    return row;
}

}  // namespace

EvalRow evaluate_tree(const NLDT& tree, const Dataset& test,
                      const std::vector<Label>& train_labels) {
    std::vector<double> probs;
    probs.reserve(test.size());
    for (const Example& e : test) probs.push_back(classify(tree, e));
    return make_row(threshold_preds(probs), dataset_labels(test), train_labels);
}

EvalReport kfold_cv(const Dataset& data, int k, std::uint64_t seed, const Pipeline& pipeline) {
    require(k >= 2, "bad-config", "k must be at least 2");
    require(static_cast<int>(data.size()) >= k, "too-small-dataset",
            "dataset smaller than fold count");
    std::vector<std::size_t> pos_idx, neg_idx;
    for (std::size_t i = 0; i < data.size(); ++i) {
        (data[i].label == Label::pos ? pos_idx : neg_idx).push_back(i);
    }
    Rng pos_rng(derive_seed(seed, "kfold/pos"));
    Rng neg_rng(derive_seed(seed, "kfold/neg"));
    pos_rng.shuffle(pos_idx);
    neg_rng.shuffle(neg_idx);

    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < pos_idx.size(); ++i) folds[i % folds.size()].push_back(pos_idx[i]);
    for (std::size_t i = 0; i < neg_idx.size(); ++i) folds[i % folds.size()].push_back(neg_idx[i]);

    std::vector<EvalRow> rows;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        Dataset train, test;
        for (std::size_t g = 0; g < folds.size(); ++g) {
            for (std::size_t i : folds[g]) (g == f ? test : train).push_back(data[i]);
        }
        rows.push_back(pipeline(train, test));
    }
    return aggregate(std::move(rows));
}

// --- Experiments --------------------------------------------------------------------

namespace {

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string mean_std(double mean, double sd) { return fmt3(mean) + "+-" + fmt3(sd); }

struct TableBuilder {
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }

    std::string render() const {
        std::vector<std::size_t> widths;
        for (const auto& row : rows) {
            if (widths.size() < row.size()) widths.resize(row.size(), 0);
            for (std::size_t c = 0; c < row.size(); ++c) {
                widths[c] = std::max(widths[c], row[c].size());
            }
        }
        std::ostringstream out;
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                out << row[c];
                if (c + 1 < row.size()) out << std::string(widths[c] - row[c].size() + 2, ' ');
            }
            out << "\n";
        }
        return out.str();
    }
};

ordered_json report_to_json(const EvalReport& report) {
    ordered_json j;
    auto field = [&](const char* name, double EvalRow::* member) {
        ordered_json f;
        f["mean"] = report.mean.*member;
        f["std"] = report.stddev.*member;
        ordered_json per = ordered_json::array();
        for (const EvalRow& r : report.runs) per.push_back(r.*member);
        f["per_run"] = per;
        j[name] = f;
    };
    field("accuracy", &EvalRow::accuracy);
    field("default_accuracy", &EvalRow::default_accuracy);
    field("f1_pos", &EvalRow::f1_pos);
    field("f1_neg", &EvalRow::f1_neg);
    return j;
}

void finalize_result(ExperimentResult& result) {
    TableBuilder table;
    table.add({"row", "accuracy", "default_acc", "f1_pos", "f1_neg"});
    for (const std::string& name : result.row_names) {
        const EvalReport& r = result.reports.at(name);
        table.add({name, mean_std(r.mean.accuracy, r.stddev.accuracy),
                   mean_std(r.mean.default_accuracy, r.stddev.default_accuracy),
                   mean_std(r.mean.f1_pos, r.stddev.f1_pos),
                   mean_std(r.mean.f1_neg, r.stddev.f1_neg)});
    }
    std::ostringstream text;
    text << "experiment: " << result.experiment << "\n" << table.render();
    if (!result.extra.empty()) {
        text << "\n";
        for (const auto& [key, value] : result.extra) text << key << " = " << fmt3(value) << "\n";
    }
    result.table = text.str();

    ordered_json j;
    j["experiment"] = result.experiment;
    ordered_json rows;
    for (const std::string& name : result.row_names) {
        rows[name] = report_to_json(result.reports.at(name));
    }
    j["rows"] = rows;
    ordered_json extra;
    for (const auto& [key, value] : result.extra) extra[key] = value;
    j["extra"] = extra;
    result.json = j.dump(2) + "\n";
}

const char* pool_kind_name(PoolKind kind) {
    switch (kind) {
        case PoolKind::nf: return "nf";
        case PoolKind::opt: return "opt";
        case PoolKind::opt_union: return "opt_union";
        case PoolKind::bad: return "bad";
    }
    return "?";
}

// Induce an NLDT on an Eleusis dataset with a given pool kind.
NLDT induce_eleusis(const EleusisData& data, PoolKind kind, ConceptId concept_id,
                    const InductionConfig& base_cfg, std::uint64_t run_seed,
                    const std::vector<Test>* preloaded = nullptr) {
    InductionConfig cfg = base_cfg;
    cfg.seed = derive_seed(run_seed, "induce");
    std::vector<Test> pool =
        build_pool(PoolSpec{kind, concept_id}, derive_seed(run_seed, "pool"), data.ranks);
    if (preloaded) preload_pool(pool, *preloaded, /*freeze=*/false);
    return neuid3(data.train, pool, cfg);
}

EvalRow eleusis_row(const NLDT& tree, const EleusisData& data) {
    return evaluate_tree(tree, data.test, dataset_labels(data.train));
}

ExperimentResult run_pools(const ExperimentSpec& spec) {
    ExperimentResult result;
    result.experiment = "pools";
    const std::array<PoolKind, 4> kinds = {PoolKind::bad, PoolKind::nf, PoolKind::opt_union,
                                           PoolKind::opt};
    std::map<std::string, std::vector<EvalRow>> rows;
    for (std::uint64_t seed : spec.seeds) {
        ConceptOptions opts = spec.concept_options;
        EleusisData data = make_eleusis_dataset(spec.concept_id, seed, spec.sizes, opts,
                                                spec.card_pool);
        for (PoolKind kind : kinds) {
            NLDT tree = induce_eleusis(data, kind, spec.concept_id, spec.induction,
                                       derive_seed(seed, pool_kind_name(kind)));
            rows[pool_kind_name(kind)].push_back(eleusis_row(tree, data));
        }
    }
    for (PoolKind kind : kinds) {
        result.row_names.push_back(pool_kind_name(kind));
        result.reports.emplace(pool_kind_name(kind), aggregate(rows[pool_kind_name(kind)]));
    }
    double opt_f1 = result.reports.at("opt").mean.f1_pos;
    for (PoolKind kind : kinds) {
        result.extra["ratio_f1_pos/" + std::string(pool_kind_name(kind))] =
            opt_f1 > 0.0 ? result.reports.at(pool_kind_name(kind)).mean.f1_pos / opt_f1 : 0.0;
    }
    finalize_result(result);
    return result;
}

ExperimentResult run_eleusis_compare(const ExperimentSpec& spec) {
    ExperimentResult result;
    result.experiment = "eleusis_compare";
    std::vector<ConceptId> concepts = spec.concepts;
    if (concepts.empty()) concepts.assign(all_concepts.begin(), all_concepts.end());
    for (ConceptId concept_id : concepts) {
        std::vector<EvalRow> nldt_rows, nn_rows;
        for (std::uint64_t seed : spec.seeds) {
            EleusisData data = make_eleusis_dataset(concept_id, seed, spec.sizes,
                                                    spec.concept_options, spec.card_pool);
            NLDT tree = induce_eleusis(data, PoolKind::nf, concept_id, spec.induction,
                                       derive_seed(seed, "nf"));
            nldt_rows.push_back(eleusis_row(tree, data));

            BaselineConfig bcfg = spec.baseline;
            bcfg.seed = derive_seed(seed, "card_nn");
            CardEncoderDecoder nn = train_card_nn(strip_symbolic(data.train), bcfg);
            std::vector<double> probs;
            for (const LabeledFeatures& row : strip_symbolic(data.test)) {
                probs.push_back(predict_card(nn, row));
            }
            nn_rows.push_back(make_row(threshold_preds(probs), dataset_labels(data.test),
                                       dataset_labels(data.train)));
        }
        std::string base = concept_name(concept_id);
        result.row_names.push_back(base + "/nldt_nf");
        result.reports.emplace(base + "/nldt_nf", aggregate(std::move(nldt_rows)));
        result.row_names.push_back(base + "/card_nn");
        result.reports.emplace(base + "/card_nn", aggregate(std::move(nn_rows)));
    }
    finalize_result(result);
    return result;
}

ExperimentResult run_reuse(const ExperimentSpec& spec) {
    ExperimentResult result;
    result.experiment = "reuse";
    std::map<std::string, std::vector<EvalRow>> cells;
    const std::array<const char*, 4> cell_names = {"rank_untrained/suit_untrained",
                                                   "rank_untrained/suit_trained",
                                                   "rank_trained/suit_untrained",
                                                   "rank_trained/suit_trained"};
    for (std::uint64_t seed : spec.seeds) {
        // Source trees provide the trained tests.
        EleusisData suit_data = make_eleusis_dataset(ConceptId::suit_order, seed, spec.sizes,
                                                     spec.concept_options, spec.card_pool);
        NLDT suit_tree = induce_eleusis(suit_data, PoolKind::opt, ConceptId::suit_order,
                                        spec.induction, derive_seed(seed, "suit_src"));
        EleusisData rank_data = make_eleusis_dataset(ConceptId::rank_order, seed, spec.sizes,
                                                     spec.concept_options, spec.card_pool);
        NLDT rank_tree = induce_eleusis(rank_data, PoolKind::opt, ConceptId::rank_order,
                                        spec.induction, derive_seed(seed, "rank_src"));

        std::vector<Test> trained_suit, trained_rank;
        for (const Test* t : collect_tests(suit_tree)) {
            if (t->id() == "gt_suit") {
                trained_suit.push_back(*t);
                break;
            }
        }
        for (const Test* t : collect_tests(rank_tree)) {
            if (t->id() == "gt_rank") {
                trained_rank.push_back(*t);
                break;
            }
        }

        ConceptOptions opts = spec.concept_options;
        opts.order_simple_conjunction = false;  // disjunction variant
        EleusisData data = make_eleusis_dataset(ConceptId::hidden_order_simple, seed, spec.sizes,
                                                opts, spec.card_pool);
        for (int rank_trained = 0; rank_trained < 2; ++rank_trained) {
            for (int suit_trained = 0; suit_trained < 2; ++suit_trained) {
                std::vector<Test> preloaded;
                if (rank_trained && !trained_rank.empty()) preloaded.push_back(trained_rank[0]);
                if (suit_trained && !trained_suit.empty()) preloaded.push_back(trained_suit[0]);
                NLDT tree = induce_eleusis(
                    data, PoolKind::opt, ConceptId::hidden_order_simple, spec.induction,
                    derive_seed(seed, "reuse/" + std::to_string(rank_trained * 2 + suit_trained)),
                    &preloaded);
                cells[cell_names[static_cast<std::size_t>(rank_trained * 2 + suit_trained)]]
                    .push_back(eleusis_row(tree, data));
            }
        }
    }
    for (const char* name : cell_names) {
        result.row_names.push_back(name);
        result.reports.emplace(name, aggregate(cells[name]));
    }
    finalize_result(result);
    return result;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& data, double train_frac,
                                             std::uint64_t seed) {
    std::vector<std::size_t> idx(data.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(derive_seed(seed, "holdout"));
    rng.shuffle(idx);
    std::size_t n_train = static_cast<std::size_t>(train_frac * static_cast<double>(data.size()));
    Dataset train, test;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        (i < n_train ? train : test).push_back(data[idx[i]]);
    }
    return {train, test};
}

ExperimentResult run_uci_compare(const ExperimentSpec& spec) {
    ExperimentResult result;
    result.experiment = "uci_compare";
    std::map<std::string, std::vector<EvalRow>> rows;
    for (std::uint64_t seed : spec.seeds) {
        BinaryDataset binary =
            make_synthetic_tabular(spec.tabular_rows, spec.tabular_features, seed);
        Dataset sym = to_examples(binary);
        auto [train_sym, test_sym] = split_train_test(sym, 0.75, seed);
        Dataset train_img = subsymbolize(train_sym, derive_seed(seed, "img"), false);
        Dataset test_img = subsymbolize(test_sym, derive_seed(seed, "img"), true);
        std::vector<Label> train_labels = dataset_labels(train_sym);
        std::vector<Label> test_labels = dataset_labels(test_sym);

        InductionConfig icfg = spec.induction;
        icfg.seed = derive_seed(seed, "nldt_sym");
        NLDT tree_sym =
            neuid3(train_sym,
                   make_tabular_tests(binary.feature_names, TabularMode::symbolic, icfg.seed),
                   icfg);
        rows["nldt_symbolic"].push_back(evaluate_tree(tree_sym, test_sym, train_labels));

        icfg.seed = derive_seed(seed, "nldt_img");
        NLDT tree_img =
            neuid3(train_img,
                   make_tabular_tests(binary.feature_names, TabularMode::subsymbolic, icfg.seed),
                   icfg);
        rows["nldt_glyph"].push_back(evaluate_tree(tree_img, test_img, train_labels));

        BaselineConfig bcfg = spec.baseline;
        bcfg.seed = derive_seed(seed, "mlp_sym");
        TabularMLP mlp_sym =
            train_mlp(strip_symbolic(train_sym), TabularMode::symbolic, binary.feature_names, bcfg);
        std::vector<double> probs;
        for (const LabeledFeatures& row : strip_symbolic(test_sym)) {
            probs.push_back(predict_mlp(mlp_sym, row));
        }
        rows["mlp_symbolic"].push_back(
            make_row(threshold_preds(probs), test_labels, train_labels));

        bcfg.seed = derive_seed(seed, "mlp_img");
        TabularMLP mlp_img = train_mlp(strip_symbolic(train_img), TabularMode::subsymbolic,
                                       binary.feature_names, bcfg);
        probs.clear();
        for (const LabeledFeatures& row : strip_symbolic(test_img)) {
            probs.push_back(predict_mlp(mlp_img, row));
        }
        rows["mlp_glyph"].push_back(make_row(threshold_preds(probs), test_labels, train_labels));
    }
    for (const char* name : {"nldt_symbolic", "nldt_glyph", "mlp_symbolic", "mlp_glyph"}) {
        result.row_names.push_back(name);
        result.reports.emplace(name, aggregate(rows[name]));
    }
    result.extra["drop/nldt"] = result.reports.at("nldt_symbolic").mean.accuracy -
                                result.reports.at("nldt_glyph").mean.accuracy;
    result.extra["drop/mlp"] = result.reports.at("mlp_symbolic").mean.accuracy -
                               result.reports.at("mlp_glyph").mean.accuracy;
    finalize_result(result);
    return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    require(!spec.seeds.empty(), "bad-config", "seeds must be nonempty");
    ExperimentResult result;
    if (spec.experiment == "pools") result = run_pools(spec);
    else if (spec.experiment == "eleusis_compare") result = run_eleusis_compare(spec);
    else if (spec.experiment == "reuse") result = run_reuse(spec);
    else if (spec.experiment == "uci_compare") result = run_uci_compare(spec);
    else fail("bad-config", "unknown experiment '" + spec.experiment + "'");
    if (!spec.out_dir.empty()) write_result_files(spec, result);
    return result;
}

void write_result_files(const ExperimentSpec& spec, const ExperimentResult& result) {
    std::filesystem::create_directories(spec.out_dir);
    std::ofstream json(spec.out_dir + "/results.json", std::ios::binary);
    require(static_cast<bool>(json), "unwritable-file", "cannot write results.json");
    json << result.json;
    std::ofstream text(spec.out_dir + "/results.txt", std::ios::binary);
    require(static_cast<bool>(text), "unwritable-file", "cannot write results.txt");
    text << result.table;
}

}  // namespace nldt
