#include "nldt/datagen.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nldt/rng.hpp"

namespace nldt {

using ordered_json = nlohmann::ordered_json;

// --- CSV ingestion -----------------------------------------------------------

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, delim)) {
        // Trim surrounding whitespace.
        std::size_t a = cell.find_first_not_of(" \t\r");
        std::size_t b = cell.find_last_not_of(" \t\r");
        cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    }
    if (!line.empty() && line.back() == delim) cells.push_back("");
    return cells;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

bool missing_cell(const std::string& s) { return s.empty() || s == "?" || s == "NA"; }

}  // namespace

TabularDataset ingest_csv_text(const std::string& text, const std::string& class_column) {
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "empty-file", "no header row");
    std::vector<std::string> header = split_line(line, ',');
    int class_idx = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == class_column) class_idx = static_cast<int>(i);
    }
    require(class_idx >= 0, "missing-class-column",
            "no column named '" + class_column + "' in header");

    TabularDataset ds;
    ds.class_column = class_column;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (static_cast<int>(i) == class_idx) continue;
        TabularColumn col;
        col.name = header[i];
        ds.columns.push_back(std::move(col));
    }

    while (std::getline(in, line)) {
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<std::string> cells = split_line(line, ',');
        if (cells.size() != header.size() ||
            std::any_of(cells.begin(), cells.end(), missing_cell)) {
            ds.dropped_rows += 1;
            continue;
        }
        std::size_t ci = 0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (static_cast<int>(i) == class_idx) {
                ds.class_raw.push_back(cells[i]);
            } else {
                ds.columns[ci++].raw.push_back(cells[i]);
            }
        }
    }
    require(!ds.class_raw.empty(), "empty-file", "no data rows");

    // Type inference: numeric if every value parses; binary if the value set
    // has exactly two members.
    for (TabularColumn& col : ds.columns) {
        bool all_numeric = true;
        std::vector<double> numeric;
        numeric.reserve(col.raw.size());
        for (const std::string& v : col.raw) {
            double x;
            if (!parse_number(v, x)) {
                all_numeric = false;
                break;
            }
            numeric.push_back(x);
        }
        std::set<std::string> distinct(col.raw.begin(), col.raw.end());
        if (distinct.size() <= 2) {
            col.type = ColumnType::binary;
            if (all_numeric) col.numeric = std::move(numeric);
        } else if (all_numeric) {
            col.type = ColumnType::numeric;
            col.numeric = std::move(numeric);
        } else {
            col.type = ColumnType::categorical;
        }
    }
    if (ds.dropped_rows > 0) {
        ds.warnings.push_back("dropped " + std::to_string(ds.dropped_rows) +
                              " rows with missing values");
    }
    return ds;
}

TabularDataset ingest_csv(const std::string& path, const std::string& class_column) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), "unreadable-file", "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return ingest_csv_text(buf.str(), class_column);
}

void binarize_labels(TabularDataset& dataset) {
    require(!dataset.class_raw.empty(), "empty-file", "no rows to binarize");
    std::map<std::string, int> counts;
    for (const std::string& c : dataset.class_raw) counts[c] += 1;
    // Most frequent class; ties break toward the lexicographically first name
    // (std::map iterates in sorted order, so the first maximum wins).
    std::string pos_class;
    int best = -1;
    for (const auto& [name, count] : counts) {
        if (count > best) {
            best = count;
            pos_class = name;
        }
    }
    if (counts.size() == 1) dataset.warnings.push_back("single-class dataset; every label is pos");
    dataset.labels.clear();
    for (const std::string& c : dataset.class_raw) {
        dataset.labels.push_back(c == pos_class ? Label::pos : Label::neg);
    }
    dataset.labels_binarized = true;
}

// --- One-hot transform ---------------------------------------------------------

namespace {

double label_entropy(const std::vector<Label>& labels, const std::vector<int>& idx) {
    if (idx.empty()) return 0.0;
    double pos = 0.0;
    for (int i : idx) {
        if (labels[static_cast<std::size_t>(i)] == Label::pos) pos += 1.0;
    }
    double p = pos / static_cast<double>(idx.size());
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
    return h;
}

struct NumericBin {
    double lo = 0.0;  // inclusive; lowest bin unbounded below
    std::vector<int> rows;
};

// Splits `bin` at the midpoint between consecutive distinct values minimizing
// the size-weighted child entropy. Returns false if the bin has one distinct
// value.
bool best_split(const std::vector<double>& values, const std::vector<Label>& labels,
                const NumericBin& bin, double& cut, double& weighted_entropy) {
    std::vector<int> sorted = bin.rows;
    std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
        return values[static_cast<std::size_t>(a)] < values[static_cast<std::size_t>(b)];
    });
    bool found = false;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        double a = values[static_cast<std::size_t>(sorted[i - 1])];
        double b = values[static_cast<std::size_t>(sorted[i])];
        if (a == b) continue;
        double mid = a + (b - a) / 2.0;
        std::vector<int> left(sorted.begin(), sorted.begin() + static_cast<long>(i));
        std::vector<int> right(sorted.begin() + static_cast<long>(i), sorted.end());
        double we = (static_cast<double>(left.size()) * label_entropy(labels, left) +
                     static_cast<double>(right.size()) * label_entropy(labels, right)) /
                    static_cast<double>(sorted.size());
        if (!found || we < weighted_entropy) {
            found = true;
            weighted_entropy = we;
            cut = mid;
        }
    }
    return found;
}

std::vector<double> numeric_cuts(const std::vector<double>& values,
                                 const std::vector<Label>& labels, int d) {
    std::vector<NumericBin> bins(1);
    for (std::size_t i = 0; i < values.size(); ++i) bins[0].rows.push_back(static_cast<int>(i));
    std::vector<double> cuts;
    while (static_cast<int>(bins.size()) < d) {
        // Split the largest-entropy splittable bin.
        int chosen = -1;
        double chosen_h = -1.0;
        double chosen_cut = 0.0;
        for (std::size_t b = 0; b < bins.size(); ++b) {
            double cut, we;
            if (!best_split(values, labels, bins[b], cut, we)) continue;
            double h = label_entropy(labels, bins[b].rows);
            if (h > chosen_h) {
                chosen_h = h;
                chosen = static_cast<int>(b);
                chosen_cut = cut;
            }
        }
        if (chosen < 0) break;  // nothing splittable
        NumericBin lo, hi;
        lo.lo = bins[static_cast<std::size_t>(chosen)].lo;
        hi.lo = chosen_cut;
        for (int r : bins[static_cast<std::size_t>(chosen)].rows) {
            (values[static_cast<std::size_t>(r)] < chosen_cut ? lo : hi).rows.push_back(r);
        }
        bins[static_cast<std::size_t>(chosen)] = lo;
        bins.insert(bins.begin() + chosen + 1, hi);
        cuts.push_back(chosen_cut);
    }
    std::sort(cuts.begin(), cuts.end());
    return cuts;
}

std::string sanitize_name(const std::string& raw) {
    std::string out;
    for (char c : raw) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_';
        out.push_back(ok ? c : '_');
    }
    if (out.empty() || (out[0] >= '0' && out[0] <= '9')) out.insert(out.begin(), 'f');
    return out;
}

}  // namespace

BinaryDataset onehot_transform(const TabularDataset& dataset, int d, std::uint64_t seed) {
    require(dataset.labels_binarized, "labels-not-binarized",
            "call binarize_labels before onehot_transform");
    require(d >= 2 && d <= 4, "bad-config", "d must be in [2,4]");
    BinaryDataset out;
    out.labels = dataset.labels;
    std::size_t n = dataset.n_rows();
    out.rows.assign(n, {});

    for (const TabularColumn& col : dataset.columns) {
        std::string base = sanitize_name(col.name);
        if (col.type == ColumnType::binary) {
            // Two distinct raw values; the lexicographically larger one maps to 1
            // except for numeric {0,1} which passes through as-is.
            std::set<std::string> distinct(col.raw.begin(), col.raw.end());
            std::string one_value;
            if (distinct.size() == 1) {
                one_value = *distinct.begin();
                out.warnings.push_back("constant binary column '" + col.name + "'");
            } else {
                one_value = *std::next(distinct.begin());
                if (distinct.count("1")) one_value = "1";
            }
            out.feature_names.push_back(base);
            for (std::size_t r = 0; r < n; ++r) {
                out.rows[r].push_back(col.raw[r] == one_value ? 1 : 0);
            }
        } else if (col.type == ColumnType::numeric) {
            std::vector<double> cuts = numeric_cuts(col.numeric, dataset.labels, d);
            if (static_cast<int>(cuts.size()) + 1 < d) {
                out.warnings.push_back("column '" + col.name + "' yielded only " +
                                       std::to_string(cuts.size() + 1) + " bins");
            }
            for (int k = 0; k < d; ++k) {
                out.feature_names.push_back(base + "_bin" + std::to_string(k));
            }
            for (std::size_t r = 0; r < n; ++r) {
                int bin = 0;
                for (double cut : cuts) {
                    if (col.numeric[r] >= cut) bin += 1;
                }
                for (int k = 0; k < d; ++k) out.rows[r].push_back(k == bin ? 1 : 0);
            }
        } else {
            std::vector<std::string> uniques;
            {
                std::set<std::string> s(col.raw.begin(), col.raw.end());
                uniques.assign(s.begin(), s.end());
            }
            Rng rng(derive_seed(seed, "onehot/" + col.name));
            rng.shuffle(uniques);
            std::map<std::string, int> group;
            for (std::size_t i = 0; i < uniques.size(); ++i) {
                group[uniques[i]] = static_cast<int>(i % static_cast<std::size_t>(d));
            }
            for (int k = 0; k < d; ++k) {
                out.feature_names.push_back(base + "_grp" + std::to_string(k));
            }
            for (std::size_t r = 0; r < n; ++r) {
                int g = group[col.raw[r]];
                for (int k = 0; k < d; ++k) out.rows[r].push_back(k == g ? 1 : 0);
            }
        }
    }
    return out;
}

Dataset to_examples(const BinaryDataset& dataset) {
    Dataset out;
    out.reserve(dataset.rows.size());
    for (std::size_t r = 0; r < dataset.rows.size(); ++r) {
        Example e;
        e.label = dataset.labels[r];
        for (std::size_t f = 0; f < dataset.feature_names.size(); ++f) {
            const std::string& name = dataset.feature_names[f];
            int v = dataset.rows[r][f];
            if (v) e.add_fact(Atom::intern(name));
            e.features[name] = {static_cast<double>(v)};
        }
        out.push_back(std::move(e));
    }
    return out;
}

BinaryDataset make_synthetic_tabular(int n_rows, int n_features, std::uint64_t seed) {
    require(n_features >= 3, "bad-config", "need at least three features for the depth-2 rule");
    BinaryDataset ds;
    for (int f = 0; f < n_features; ++f) ds.feature_names.push_back("f" + std::to_string(f));
    Rng rng(derive_seed(seed, "synthetic_tabular"));
    for (int r = 0; r < n_rows; ++r) {
        std::vector<int> row(static_cast<std::size_t>(n_features));
        for (int f = 0; f < n_features; ++f) row[static_cast<std::size_t>(f)] =
            static_cast<int>(rng.next_below(2));
        bool label = row[0] ? row[1] : row[2];
        ds.rows.push_back(std::move(row));
        ds.labels.push_back(label ? Label::pos : Label::neg);
    }
    return ds;
}

// --- Glyphs -------------------------------------------------------------------

namespace {

// 8x8 stroke masks. Shapes are hand-tuned to stay separable under one pixel of
// translation and sigma = 0.15 noise.
const std::array<std::pair<char, std::array<const char*, 8>>, 14> glyph_rows = {{
    {'0', {"..####..", ".#....#.", ".#....#.", ".#....#.", ".#....#.", ".#....#.", ".#....#.",
           "..####.."}},
    {'1', {"...##...", "..###...", "...##...", "...##...", "...##...", "...##...", "...##...",
           "..####.."}},
    {'2', {"..####..", ".#....#.", "......#.", ".....#..", "....#...", "...#....", "..#.....",
           ".######."}},
    {'3', {"..####..", ".#....#.", "......#.", "...###..", "......#.", "......#.", ".#....#.",
           "..####.."}},
    {'4', {"....##..", "...#.#..", "..#..#..", ".#...#..", ".######.", ".....#..", ".....#..",
           ".....#.."}},
    {'5', {".######.", ".#......", ".#......", ".#####..", "......#.", "......#.", ".#....#.",
           "..####.."}},
    {'6', {"..####..", ".#......", ".#......", ".#####..", ".#....#.", ".#....#.", ".#....#.",
           "..####.."}},
    {'7', {".######.", "......#.", ".....#..", "....#...", "...#....", "...#....", "...#....",
           "...#...."}},
    {'8', {"..####..", ".#....#.", ".#....#.", "..####..", ".#....#.", ".#....#.", ".#....#.",
           "..####.."}},
    {'9', {"..####..", ".#....#.", ".#....#.", "..#####.", "......#.", "......#.", "......#.",
           "..####.."}},
    {'A', {"...##...", "..#..#..", ".#....#.", ".#....#.", ".######.", ".#....#.", ".#....#.",
           ".#....#."}},
    {'B', {".#####..", ".#....#.", ".#....#.", ".#####..", ".#....#.", ".#....#.", ".#....#.",
           ".#####.."}},
    {'C', {"..####..", ".#....#.", ".#......", ".#......", ".#......", ".#......", ".#....#.",
           "..####.."}},
    {'D', {".####...", ".#...#..", ".#....#.", ".#....#.", ".#....#.", ".#....#.", ".#...#..",
           ".####..."}},
}};

const std::map<char, std::vector<double>>& template_table() {
    static const std::map<char, std::vector<double>> table = [] {
        std::map<char, std::vector<double>> t;
        for (const auto& [symbol, rows] : glyph_rows) {
            std::vector<double> pixels(64, 0.0);
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 8; ++x) {
                    if (rows[static_cast<std::size_t>(y)][x] == '#') pixels[y * 8 + x] = 1.0;
                }
            }
            t[symbol] = std::move(pixels);
        }
        return t;
    }();
    return table;
}

}  // namespace

const std::vector<double>& glyph_template(char symbol) {
    const auto& table = template_table();
    auto it = table.find(symbol);
    require(it != table.end(), "unknown-symbol", std::string("no glyph for '") + symbol + "'");
    return it->second;
}

GlyphImage render_glyph(char symbol, std::uint64_t seed, double sigma) {
    const std::vector<double>& tmpl = glyph_template(symbol);
    GlyphImage img;
    if (sigma == 0.0) {
        img.pixels = tmpl;
        return img;
    }
    Rng rng(derive_seed(seed, std::string("glyph/") + symbol));
    int dx = static_cast<int>(rng.next_below(3)) - 1;
    int dy = static_cast<int>(rng.next_below(3)) - 1;
    img.pixels.assign(64, 0.0);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            int sx = x - dx;
            int sy = y - dy;
            double v = 0.0;
            if (sx >= 0 && sx < 8 && sy >= 0 && sy < 8) v = tmpl[static_cast<std::size_t>(sy * 8 + sx)];
            v += rng.gaussian(0.0, sigma);
            img.pixels[static_cast<std::size_t>(y * 8 + x)] = std::clamp(v, 0.0, 1.0);
        }
    }
    return img;
}

Dataset subsymbolize(const Dataset& data, std::uint64_t renderer_seed, bool test_split) {
    Dataset out;
    out.reserve(data.size());
    for (std::size_t r = 0; r < data.size(); ++r) {
        const Example& src = data[r];
        Example e;
        e.label = src.label;
        e.symbolic_facts = src.symbolic_facts;
        for (const auto& [key, value] : src.features) {
            require(value.size() == 1 && (value[0] == 0.0 || value[0] == 1.0), "non-binary-feature",
                    "feature '" + key + "' is not binary");
            std::uint64_t cell =
                derive_seed(renderer_seed, "cell/" + std::to_string(r) + "/" + key);
            std::uint64_t final_seed = (cell << 1) | (test_split ? 1ULL : 0ULL);
            e.features[key + "_img"] = render_glyph(value[0] == 1.0 ? '1' : '0', final_seed).pixels;
        }
        out.push_back(std::move(e));
    }
    return out;
}

// --- Cards ----------------------------------------------------------------------

std::vector<Card> gen_cards(int n, int ranks, std::uint64_t seed) {
    require(n > 0, "bad-config", "need a positive card count");
    require(ranks >= 2 && ranks <= 10, "bad-config", "ranks must be in [2,10]");
    std::vector<int> suits, rank_list;
    suits.reserve(static_cast<std::size_t>(n));
    rank_list.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) suits.push_back(1 + i % num_suits);
    for (int i = 0; i < n; ++i) rank_list.push_back(1 + i % ranks);
    Rng rng(derive_seed(seed, "cards"));
    rng.shuffle(suits);
    rng.shuffle(rank_list);
    std::vector<Card> cards(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        cards[static_cast<std::size_t>(i)] =
            Card{suits[static_cast<std::size_t>(i)], rank_list[static_cast<std::size_t>(i)]};
    }
    return cards;
}

namespace {

int parity(const Card& c) { return c.rank % 2; }
bool face(const Card& c, int ranks) { return c.rank > ranks / 2; }

}  // namespace

bool label_concept(ConceptId concept_id, const Card& c0, const Card& c1,
                   const ConceptOptions& options) {
    int ranks = options.ranks;
    switch (concept_id) {
        case ConceptId::suit_order: return c0.suit < c1.suit;
        case ConceptId::rank_order: return c0.rank < c1.rank;
        case ConceptId::hidden_order_simple: {
            bool r = c0.rank < c1.rank;
            bool s = c0.suit < c1.suit;
            return options.order_simple_conjunction ? (r && s) : (r || s);
        }
        case ConceptId::hidden_modulo_simple:
            return (c0.rank % ranks) + 1 == c1.rank || (c0.suit % num_suits) + 1 == c1.suit;
        case ConceptId::color_parity:
            return (parity(c0) == 1 && !card_red(c1)) || (parity(c0) == 0 && card_red(c1));
        case ConceptId::alternating_faces: return face(c0, ranks) != face(c1, ranks);
        case ConceptId::alternating_parity: return parity(c0) != parity(c1);
        case ConceptId::increase_suits: return (c0.suit % num_suits) + 1 == c1.suit;
    }
    fail("unknown-concept", "bad concept id");
}

namespace {

char rank_symbol(int rank) { return rank == 10 ? '0' : static_cast<char>('0' + rank); }
char suit_symbol(int suit) { return static_cast<char>('A' + suit - 1); }

Example card_pair_example(const Card& c0, const Card& c1, bool label, std::uint64_t seed,
                          std::size_t index, bool test_split) {
    Example e;
    e.label = label ? Label::pos : Label::neg;
    const Card* cards[2] = {&c0, &c1};
    for (int slot = 0; slot < 2; ++slot) {
        const Card& c = *cards[slot];
        std::string tag = std::to_string(index) + "/" + std::to_string(slot);
        std::uint64_t rank_seed = (derive_seed(seed, "rank_img/" + tag) << 1) | (test_split ? 1 : 0);
        std::uint64_t suit_seed = (derive_seed(seed, "suit_img/" + tag) << 1) | (test_split ? 1 : 0);
        e.features["rank_img_" + std::to_string(slot)] =
            render_glyph(rank_symbol(c.rank), rank_seed).pixels;
        std::vector<double> suit_vec = render_glyph(suit_symbol(c.suit), suit_seed).pixels;
        suit_vec.push_back(card_red(c) ? 1.0 : 0.0);
        e.features["suit_img_" + std::to_string(slot)] = std::move(suit_vec);
        e.add_fact(Atom::intern("rank" + std::to_string(slot) + "_" + std::to_string(c.rank)));
        e.add_fact(Atom::intern("suit" + std::to_string(slot) + "_" + std::to_string(c.suit)));
    }
    return e;
}

Dataset sample_pairs(const std::vector<Card>& pool, int n, ConceptId concept_id,
                     const ConceptOptions& options, std::uint64_t seed, const std::string& split,
                     bool test_split) {
    Dataset out;
    out.reserve(static_cast<std::size_t>(n));
    Rng rng(derive_seed(seed, "pairs/" + split));
    for (int i = 0; i < n; ++i) {
        const Card& c0 = pool[static_cast<std::size_t>(rng.next_below(pool.size()))];
        const Card& c1 = pool[static_cast<std::size_t>(rng.next_below(pool.size()))];
        bool label = label_concept(concept_id, c0, c1, options);
        out.push_back(card_pair_example(c0, c1, label, derive_seed(seed, "img/" + split),
                                        static_cast<std::size_t>(i), test_split));
    }
    return out;
}

}  // namespace

EleusisData make_eleusis_dataset(ConceptId concept_id, std::uint64_t seed, const EleusisSizes& sizes,
                                 const ConceptOptions& options, int card_pool) {
    std::vector<Card> train_cards = gen_cards(card_pool, options.ranks, derive_seed(seed, "train_cards"));
    std::vector<Card> test_cards = gen_cards(card_pool, options.ranks, derive_seed(seed, "test_cards"));

    // 10% of the training cards become the validation card set.
    Rng rng(derive_seed(seed, "val_split"));
    rng.shuffle(train_cards);
    std::size_t n_val = train_cards.size() / 10;
    std::vector<Card> val_cards(train_cards.begin(), train_cards.begin() + static_cast<long>(n_val));
    train_cards.erase(train_cards.begin(), train_cards.begin() + static_cast<long>(n_val));

    EleusisData data;
    data.concept_id = concept_id;
    data.seed = seed;
    data.ranks = options.ranks;
    data.train = sample_pairs(train_cards, sizes.train, concept_id, options, seed, "train", false);
    data.val = sample_pairs(val_cards, sizes.val, concept_id, options, seed, "val", false);
    data.test = sample_pairs(test_cards, sizes.test, concept_id, options, seed, "test", true);
    return data;
}

// --- Archives --------------------------------------------------------------------

namespace {

ordered_json example_to_json(const Example& e) {
    ordered_json j;
    ordered_json facts = ordered_json::array();
    for (const Atom& a : e.symbolic_facts) facts.push_back(a.name());
    j["facts"] = facts;
    ordered_json features;
    for (const auto& [key, value] : e.features) features[key] = value;
    j["features"] = features;
    j["label"] = label_name(e.label);
    return j;
}

Example example_from_json(const ordered_json& j) {
    Example e;
    for (const auto& f : j.at("facts")) e.add_fact(Atom::intern(f.get<std::string>()));
    for (const auto& [key, value] : j.at("features").items()) {
        e.features[key] = value.get<std::vector<double>>();
    }
    std::string label = j.at("label").get<std::string>();
    require(label == "pos" || label == "neg", "parse-error", "bad label '" + label + "'");
    e.label = label == "pos" ? Label::pos : Label::neg;
    return e;
}

void write_jsonl(const std::string& path, const Dataset& data) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), "unwritable-file", "cannot write '" + path + "'");
    for (const Example& e : data) out << example_to_json(e).dump() << "\n";
}

Dataset read_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), "unreadable-file", "cannot open '" + path + "'");
    Dataset data;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            data.push_back(example_from_json(ordered_json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            fail("parse-error", std::string("bad example line: ") + e.what());
        }
    }
    return data;
}

}  // namespace

void write_dataset_dir(const std::string& dir, const DatasetArchive& archive) {
    std::filesystem::create_directories(dir);
    ordered_json meta;
    for (const auto& [key, value] : archive.meta) meta[key] = value;
    std::ofstream out(dir + "/meta.json", std::ios::binary);
    require(static_cast<bool>(out), "unwritable-file", "cannot write '" + dir + "/meta.json'");
    out << meta.dump(2) << "\n";
    out.close();
    write_jsonl(dir + "/train.jsonl", archive.train);
    write_jsonl(dir + "/val.jsonl", archive.val);
    write_jsonl(dir + "/test.jsonl", archive.test);
}

DatasetArchive read_dataset_dir(const std::string& dir) {
    std::ifstream in(dir + "/meta.json", std::ios::binary);
    require(static_cast<bool>(in), "unreadable-file", "cannot open '" + dir + "/meta.json'");
    std::ostringstream buf;
    buf << in.rdbuf();
    DatasetArchive archive;
    try {
        ordered_json meta = ordered_json::parse(buf.str());
        for (const auto& [key, value] : meta.items()) {
            archive.meta[key] = value.get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        fail("parse-error", std::string("bad meta.json: ") + e.what());
    }
    archive.train = read_jsonl(dir + "/train.jsonl");
    archive.val = read_jsonl(dir + "/val.jsonl");
    archive.test = read_jsonl(dir + "/test.jsonl");
    return archive;
}

// --- IDX reader -------------------------------------------------------------------

std::vector<std::vector<double>> read_idx_images(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), "unreadable-file", "cannot open '" + path + "'");
    auto read_u32 = [&]() -> std::uint32_t {
        unsigned char b[4];
        in.read(reinterpret_cast<char*>(b), 4);
        require(static_cast<bool>(in), "parse-error", "truncated IDX header");
        return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
               (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
    };
    std::uint32_t magic = read_u32();
    require(magic == 0x00000803u, "parse-error", "bad IDX magic");
    std::uint32_t count = read_u32();
    std::uint32_t rows = read_u32();
    std::uint32_t cols = read_u32();
    std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    std::vector<std::vector<double>> images;
    images.reserve(count);
    std::vector<unsigned char> buf(pixels);
    for (std::uint32_t i = 0; i < count; ++i) {
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<long>(pixels));
        require(static_cast<bool>(in), "parse-error", "truncated IDX payload");
        std::vector<double> img(pixels);
        for (std::size_t p = 0; p < pixels; ++p) img[p] = buf[p] / 255.0;
        images.push_back(std::move(img));
    }
    return images;
}

}  // namespace nldt
