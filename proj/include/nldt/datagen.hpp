#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nldt/concepts.hpp"
#include "nldt/example.hpp"

namespace nldt {

// --- Tabular ingestion -------------------------------------------------------

enum class ColumnType { numeric, categorical, binary };

struct TabularColumn {
    std::string name;
    ColumnType type = ColumnType::categorical;
    std::vector<std::string> raw;      // one entry per row
    std::vector<double> numeric;       // parallel to raw when type == numeric
};

struct TabularDataset {
    std::vector<TabularColumn> columns;  // class column excluded
    std::string class_column;
    std::vector<std::string> class_raw;
    std::vector<Label> labels;  // filled by binarize_labels
    bool labels_binarized = false;
    int dropped_rows = 0;
    std::vector<std::string> warnings;

    std::size_t n_rows() const { return class_raw.size(); }
};

// Delimited text with a header row; rows with missing cells are dropped and
// counted. Columns whose values all parse as numbers become numeric; columns
// with exactly the value set {0,1} (or two categories) become binary.
TabularDataset ingest_csv(const std::string& path, const std::string& class_column);
TabularDataset ingest_csv_text(const std::string& text, const std::string& class_column);

// Most frequent class becomes pos (ties: lexicographically first).
void binarize_labels(TabularDataset& dataset);

// One-hot encoded binary-feature view of a tabular dataset.
struct BinaryDataset {
    std::vector<std::string> feature_names;
    std::vector<std::vector<int>> rows;  // 0/1 per feature
    std::vector<Label> labels;
    std::vector<std::string> warnings;
};

// Numeric columns: recursive entropy binning into d bins, then one-hot.
// Categorical: unique values randomly partitioned into d groups (seeded).
// Binary columns pass through unchanged.
BinaryDataset onehot_transform(const TabularDataset& dataset, int d, std::uint64_t seed);

// Symbolic examples: one atom per hot feature plus scalar features (length-1
// vectors) for baseline input.
Dataset to_examples(const BinaryDataset& dataset);

// Label: feature 0 selects between feature 1 and feature 2 (a depth-2 rule).
BinaryDataset make_synthetic_tabular(int n_rows, int n_features, std::uint64_t seed);

// --- Glyphs -------------------------------------------------------------------

struct GlyphImage {
    std::vector<double> pixels;  // 8x8, row-major, [0,1]
};

// Symbols: '0'..'9' digits and 'A'..'D' suit letters. sigma == 0 renders the
// clean template (no jitter); otherwise one pixel of random translation plus
// per-pixel Gaussian noise, clamped.
GlyphImage render_glyph(char symbol, std::uint64_t seed, double sigma = 0.15);

// Clean 0/1 template for a symbol.
const std::vector<double>& glyph_template(char symbol);

// Replaces every binary scalar feature `k` by a glyph feature `k_img` of the
// digit '1' or '0'. Train and test splits use disjoint seed ranges.
Dataset subsymbolize(const Dataset& data, std::uint64_t renderer_seed, bool test_split = false);

// --- Cards and Eleusis ---------------------------------------------------------

// Suits 1..4 = diamond, clubs, hearts, spades (that order defines <).
struct Card {
    int suit = 1;
    int rank = 1;
};

inline bool card_red(const Card& c) { return c.suit == 1 || c.suit == 3; }  // diamond, hearts

// Evenly distributed suits and ranks (per-category deviation at most 1).
std::vector<Card> gen_cards(int n, int ranks, std::uint64_t seed);

struct ConceptOptions {
    int ranks = 8;
    // hidden_order_simple defaults to the disjunction variant; the conjunction
    // variant is selectable for comparisons.
    bool order_simple_conjunction = false;
};

bool label_concept(ConceptId concept_id, const Card& c0, const Card& c1,
                   const ConceptOptions& options = {});

struct EleusisSizes {
    int train = 400;
    int val = 100;
    int test = 400;
};

struct EleusisData {
    Dataset train;
    Dataset val;
    Dataset test;
    ConceptId concept_id = ConceptId::suit_order;
    std::uint64_t seed = 0;
    int ranks = 8;
};

// Card pairs drawn from disjoint train/test card pools; four glyph features
// per example plus ground-truth atoms (oracle-only). Paper-scale sizes are
// {1000, 200, 1000}.
EleusisData make_eleusis_dataset(ConceptId concept_id, std::uint64_t seed,
                                 const EleusisSizes& sizes = {},
                                 const ConceptOptions& options = {}, int card_pool = 20000);

// --- Dataset archives -----------------------------------------------------------

struct DatasetArchive {
    std::map<std::string, std::string> meta;
    Dataset train;
    Dataset val;
    Dataset test;
};

// Directory with meta.json and {train,val,test}.jsonl; byte-reproducible for a
// fixed seed.
void write_dataset_dir(const std::string& dir, const DatasetArchive& archive);
DatasetArchive read_dataset_dir(const std::string& dir);

// --- Optional IDX (big-endian image archive) reader -----------------------------

// Reads magic-0x00000803 image files into row-major [0,1] vectors. Lets users
// substitute real digit corpora for the built-in glyphs.
std::vector<std::vector<double>> read_idx_images(const std::string& path);

}  // namespace nldt
