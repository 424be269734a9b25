#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nldt/example.hpp"
#include "nldt/neural.hpp"
#include "nldt/tests_pool.hpp"

namespace nldt {

struct BaselineConfig {
    int epochs = 50;
    double learning_rate = 1e-3;
    int batch_size = 32;  // 0 = full batch
    std::uint64_t seed = 0;
};

// MLP over binary features, or over per-feature glyph encoders (each image
// mapped to 2 softmax outputs feeding the trunk).
struct TabularMLP {
    TabularMode mode = TabularMode::symbolic;
    std::vector<std::string> feature_keys;  // scalar names; glyph inputs use key + "_img"
    std::vector<NeuralNet> encoders;        // subsymbolic only
    NeuralNet trunk;                        // sigmoid head
    std::vector<double> loss_trace;
};

TabularMLP train_mlp(const std::vector<LabeledFeatures>& data, TabularMode mode,
                     const std::vector<std::string>& feature_keys, const BaselineConfig& config);

double predict_mlp(const TabularMLP& model, const LabeledFeatures& row);

// Four per-image encoders feeding a two-class decoder, as used on the card
// datasets.
struct CardEncoderDecoder {
    std::vector<NeuralNet> encoders;  // rank0, suit0, rank1, suit1
    NeuralNet decoder;                // softmax over {pos, neg}
    std::vector<double> loss_trace;
};

CardEncoderDecoder train_card_nn(const std::vector<LabeledFeatures>& data,
                                 const BaselineConfig& config);

double predict_card(const CardEncoderDecoder& model, const LabeledFeatures& row);

}  // namespace nldt
