#include <doctest.h>

#include <cmath>

#include "nldt/metrics.hpp"
#include "nldt/rng.hpp"

using namespace nldt;

namespace {

std::vector<Label> labels_of(const std::string& s) {
    std::vector<Label> out;
    for (char c : s) out.push_back(c == '+' ? Label::pos : Label::neg);
    return out;
}

}  // namespace

TEST_CASE("accuracy") {
    CHECK(accuracy(labels_of("++--"), labels_of("++--")) == 1.0);
    CHECK(accuracy(labels_of("++--"), labels_of("+-+-")) == 0.5);
    CHECK_THROWS_WITH_AS(accuracy({}, {}), doctest::Contains("empty-input"), Error);
}

TEST_CASE("default accuracy uses the train majority on test labels") {
    std::vector<Label> train = labels_of("+++++++---");  // 70% pos
    std::vector<Label> test = labels_of("++++++----");   // 60% pos
    CHECK(default_accuracy(train, test) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("random predictions score near one half") {
    Rng rng(20240510);
    std::vector<Label> labels, preds;
    for (int i = 0; i < 4000; ++i) {
        labels.push_back(rng.next_below(2) ? Label::pos : Label::neg);
        preds.push_back(rng.next_below(2) ? Label::pos : Label::neg);
    }
    double acc = accuracy(preds, labels);
    CHECK(acc > 0.5 - 4.0 * 0.5 / std::sqrt(4000.0));
    CHECK(acc < 0.5 + 4.0 * 0.5 / std::sqrt(4000.0));
}

TEST_CASE("f1 per class") {
    auto [p1, n1] = f1_per_class(labels_of("++--"), labels_of("++--"));
    CHECK(p1 == 1.0);
    CHECK(n1 == 1.0);

    // All predicted pos, half the labels pos.
    auto [p2, n2] = f1_per_class(labels_of("++++"), labels_of("++--"));
    CHECK(p2 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(n2 == 0.0);
}

TEST_CASE("f1 matches a confusion-matrix oracle on random vectors") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Label> labels, preds;
        for (int i = 0; i < 50; ++i) {
            labels.push_back(rng.next_below(2) ? Label::pos : Label::neg);
            preds.push_back(rng.next_below(2) ? Label::pos : Label::neg);
        }
        auto [f1p, f1n] = f1_per_class(preds, labels);
        // Oracle: explicit confusion counts.
        auto oracle = [&](Label target) {
            double tp = 0, fp = 0, fn = 0;
            for (std::size_t i = 0; i < preds.size(); ++i) {
                if (preds[i] == target && labels[i] == target) tp += 1;
                if (preds[i] == target && labels[i] != target) fp += 1;
                if (preds[i] != target && labels[i] == target) fn += 1;
            }
            if (2 * tp + fp + fn == 0) return 0.0;
            return 2 * tp / (2 * tp + fp + fn);  // equivalent harmonic-mean form
        };
        CHECK(f1p == doctest::Approx(oracle(Label::pos)).epsilon(1e-12));
        CHECK(f1n == doctest::Approx(oracle(Label::neg)).epsilon(1e-12));
    }
}

TEST_CASE("aggregate matches a two-pass oracle") {
    Rng rng(8);
    std::vector<EvalRow> rows;
    for (int i = 0; i < 9; ++i) {
        EvalRow r;
        r.accuracy = rng.next_double();
        r.default_accuracy = rng.next_double();
        r.f1_pos = rng.next_double();
        r.f1_neg = rng.next_double();
        rows.push_back(r);
    }
    EvalReport report = aggregate(rows);
    double mean = 0.0;
    for (const EvalRow& r : rows) mean += r.accuracy;
    mean /= static_cast<double>(rows.size());
    double var = 0.0;
    for (const EvalRow& r : rows) var += (r.accuracy - mean) * (r.accuracy - mean);
    double sd = std::sqrt(var / static_cast<double>(rows.size() - 1));
    CHECK(report.mean.accuracy == doctest::Approx(mean).epsilon(1e-12));
    CHECK(report.stddev.accuracy == doctest::Approx(sd).epsilon(1e-12));
}

TEST_CASE("stratified k-fold") {
    Dataset data;
    for (int i = 0; i < 20; ++i) {
        Example e;
        e.label = i < 8 ? Label::pos : Label::neg;  // 8 pos, 12 neg
        data.push_back(e);
    }
    SUBCASE("fold class counts stay within one of the ideal share") {
        int folds_seen = 0;
        kfold_cv(data, 4, 1, [&](const Dataset& train, const Dataset& test) {
            ++folds_seen;
            CHECK(train.size() + test.size() == 20);
            int pos = 0;
            for (const Example& e : test) {
                if (e.label == Label::pos) ++pos;
            }
            CHECK(std::abs(pos - 2) <= 1);
            EvalRow row;
            row.accuracy = 1.0;
            return row;
        });
        CHECK(folds_seen == 4);
    }
    SUBCASE("leave-one-out") {
        int singletons = 0;
        kfold_cv(data, 20, 1, [&](const Dataset&, const Dataset& test) {
            if (test.size() == 1) ++singletons;
            return EvalRow{};
        });
        CHECK(singletons == 20);
    }
    SUBCASE("deterministic given seed") {
        std::vector<std::size_t> sizes_a, sizes_b;
        kfold_cv(data, 3, 5, [&](const Dataset& train, const Dataset&) {
            sizes_a.push_back(train.size());
            return EvalRow{};
        });
        kfold_cv(data, 3, 5, [&](const Dataset& train, const Dataset&) {
            sizes_b.push_back(train.size());
            return EvalRow{};
        });
        CHECK(sizes_a == sizes_b);
    }
    SUBCASE("rejects undersized inputs") {
        Dataset tiny(3);
        CHECK_THROWS_WITH_AS(
            kfold_cv(tiny, 4, 1, [](const Dataset&, const Dataset&) { return EvalRow{}; }),
            doctest::Contains("too-small-dataset"), Error);
    }
}

TEST_CASE("uci_compare experiment produces the four model rows deterministically") {
    ExperimentSpec spec;
    spec.experiment = "uci_compare";
    spec.seeds = {1};
    spec.tabular_rows = 80;
    spec.induction.min_examples = 5;
    spec.induction.epochs_per_test = 3;
    spec.induction.batch_size = 16;
    spec.baseline.epochs = 3;
    ExperimentResult a = run_experiment(spec);
    REQUIRE(a.row_names.size() == 4);
    CHECK(a.reports.count("nldt_symbolic") == 1);
    CHECK(a.reports.count("mlp_glyph") == 1);
    CHECK(a.extra.count("drop/nldt") == 1);
    CHECK(a.reports.at("nldt_symbolic").mean.accuracy > 0.9);

    ExperimentResult b = run_experiment(spec);
    CHECK(a.json == b.json);
    CHECK(a.table == b.table);
}

TEST_CASE("pools experiment reports the opt ratio as exactly one") {
    ExperimentSpec spec;
    spec.experiment = "pools";
    spec.concept_id = ConceptId::suit_order;
    spec.seeds = {1};
    spec.sizes = {40, 10, 40};
    spec.card_pool = 200;
    spec.induction.min_examples = 10;
    spec.induction.epochs_per_test = 2;
    spec.induction.batch_size = 16;
    spec.induction.max_depth = 2;
    ExperimentResult result = run_experiment(spec);
    REQUIRE(result.row_names.size() == 4);
    CHECK(result.extra.at("ratio_f1_pos/opt") == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reuse experiment emits the 2x2 grid") {
    ExperimentSpec spec;
    spec.experiment = "reuse";
    spec.seeds = {1};
    spec.sizes = {40, 10, 40};
    spec.card_pool = 200;
    spec.induction.min_examples = 10;
    spec.induction.epochs_per_test = 2;
    spec.induction.batch_size = 16;
    spec.induction.max_depth = 2;
    ExperimentResult result = run_experiment(spec);
    REQUIRE(result.row_names.size() == 4);
    CHECK(result.reports.count("rank_trained/suit_trained") == 1);
    CHECK(result.reports.count("rank_untrained/suit_untrained") == 1);
}
