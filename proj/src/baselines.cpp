#include "nldt/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "nldt/rng.hpp"

namespace nldt {

namespace {

// One Adam state per component net of a composite model.
struct Trainer {
    std::vector<NeuralNet*> nets;
    std::vector<AdamState> states;
    std::vector<std::vector<double>> grads;

    explicit Trainer(std::vector<NeuralNet*> n, double lr) : nets(std::move(n)) {
        for (NeuralNet* net : nets) {
            states.emplace_back(net->params.size(), lr);
            grads.emplace_back(net->params.size(), 0.0);
        }
    }

    void zero() {
        for (auto& g : grads) std::fill(g.begin(), g.end(), 0.0);
    }

    void add(std::size_t i, const std::vector<double>& g) {
        for (std::size_t k = 0; k < g.size(); ++k) grads[i][k] += g[k];
    }

    void step() {
        for (std::size_t i = 0; i < nets.size(); ++i) adam_step(*nets[i], states[i], grads[i]);
    }
};

std::vector<std::size_t> index_order(std::size_t n) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    return order;
}

}  // namespace

// --- Tabular MLP -----------------------------------------------------------------

namespace {

std::vector<double> mlp_trunk_input(const TabularMLP& model, const LabeledFeatures& row) {
    std::vector<double> input;
    if (model.mode == TabularMode::symbolic) {
        for (const std::string& key : model.feature_keys) {
            const std::vector<double>& f = row.feature(key);
            input.insert(input.end(), f.begin(), f.end());
        }
        return input;
    }
    for (std::size_t i = 0; i < model.feature_keys.size(); ++i) {
        std::vector<double> enc =
            forward(model.encoders[i], row.feature(model.feature_keys[i] + "_img"));
        input.insert(input.end(), enc.begin(), enc.end());
    }
    return input;
}

}  // namespace

double predict_mlp(const TabularMLP& model, const LabeledFeatures& row) {
    return forward(model.trunk, mlp_trunk_input(model, row))[0];
}

TabularMLP train_mlp(const std::vector<LabeledFeatures>& data, TabularMode mode,
                     const std::vector<std::string>& feature_keys, const BaselineConfig& config) {
    require(!data.empty(), "empty-dataset", "no rows to train on");
    TabularMLP model;
    model.mode = mode;
    model.feature_keys = feature_keys;
    int n_features = static_cast<int>(feature_keys.size());

    std::vector<NeuralNet*> nets;
    if (mode == TabularMode::subsymbolic) {
        for (int i = 0; i < n_features; ++i) {
            int dim = static_cast<int>(data[0].feature(feature_keys[static_cast<std::size_t>(i)] + "_img").size());
            NeuralNet enc({dim, 16, 2}, Head::softmax);
            enc.init_params(derive_seed(config.seed, "mlp_enc/" + std::to_string(i)));
            model.encoders.push_back(std::move(enc));
        }
        model.trunk = NeuralNet({2 * n_features, 64, 32, 1}, Head::sigmoid);
    } else {
        model.trunk = NeuralNet({n_features, 64, 32, 1}, Head::sigmoid);
    }
    model.trunk.init_params(derive_seed(config.seed, "mlp_trunk"));

    for (NeuralNet& enc : model.encoders) nets.push_back(&enc);
    nets.push_back(&model.trunk);
    Trainer trainer(nets, config.learning_rate);

    std::vector<std::size_t> order = index_order(data.size());
    std::size_t batch = config.batch_size <= 0 ? data.size() : static_cast<std::size_t>(config.batch_size);
    Rng shuffler(derive_seed(config.seed, "mlp_shuffle"));

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (batch < order.size()) shuffler.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            std::size_t end = std::min(order.size(), start + batch);
            trainer.zero();
            for (std::size_t bi = start; bi < end; ++bi) {
                const LabeledFeatures& row = data[order[bi]];
                std::vector<double> input = mlp_trunk_input(model, row);
                double p = clamp_prob(forward(model.trunk, input)[0]);
                bool is_pos = row.label == Label::pos;
                epoch_loss -= std::log(is_pos ? p : 1.0 - p);
                double dp = is_pos ? -1.0 / p : 1.0 / (1.0 - p);
                Gradients trunk_g = backward(model.trunk, input, {dp});
                trainer.add(model.encoders.size(), trunk_g.params);
                if (mode == TabularMode::subsymbolic) {
                    for (std::size_t i = 0; i < model.encoders.size(); ++i) {
                        std::vector<double> upstream(trunk_g.input.begin() + static_cast<long>(2 * i),
                                                     trunk_g.input.begin() + static_cast<long>(2 * i + 2));
                        Gradients enc_g = backward(
                            model.encoders[i], row.feature(model.feature_keys[i] + "_img"), upstream);
                        trainer.add(i, enc_g.params);
                    }
                }
            }
            trainer.step();
        }
        model.loss_trace.push_back(epoch_loss);
    }
    return model;
}

// --- Card encoder/decoder -----------------------------------------------------------

namespace {

const std::array<const char*, 4> card_keys = {"rank_img_0", "suit_img_0", "rank_img_1",
                                              "suit_img_1"};

std::vector<double> card_decoder_input(const CardEncoderDecoder& model,
                                       const LabeledFeatures& row) {
    std::vector<double> input;
    for (std::size_t i = 0; i < card_keys.size(); ++i) {
        std::vector<double> enc = forward(model.encoders[i], row.feature(card_keys[i]));
        input.insert(input.end(), enc.begin(), enc.end());
    }
    return input;
}

}  // namespace

double predict_card(const CardEncoderDecoder& model, const LabeledFeatures& row) {
    return forward(model.decoder, card_decoder_input(model, row))[0];
}

CardEncoderDecoder train_card_nn(const std::vector<LabeledFeatures>& data,
                                 const BaselineConfig& config) {
    require(!data.empty(), "empty-dataset", "no rows to train on");
    for (const char* key : card_keys) data[0].feature(key);  // surfaces "missing-feature"

    CardEncoderDecoder model;
    for (std::size_t i = 0; i < card_keys.size(); ++i) {
        int dim = static_cast<int>(data[0].feature(card_keys[i]).size());
        NeuralNet enc({dim, 32, 16, 8}, Head::softmax);
        enc.init_params(derive_seed(config.seed, std::string("card_enc/") + card_keys[i]));
        model.encoders.push_back(std::move(enc));
    }
    model.decoder = NeuralNet({32, 16, 2}, Head::softmax);
    model.decoder.init_params(derive_seed(config.seed, "card_dec"));

    std::vector<NeuralNet*> nets;
    for (NeuralNet& enc : model.encoders) nets.push_back(&enc);
    nets.push_back(&model.decoder);
    Trainer trainer(nets, config.learning_rate);

    std::vector<std::size_t> order = index_order(data.size());
    std::size_t batch = config.batch_size <= 0 ? data.size() : static_cast<std::size_t>(config.batch_size);
    Rng shuffler(derive_seed(config.seed, "card_shuffle"));

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (batch < order.size()) shuffler.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            std::size_t end = std::min(order.size(), start + batch);
            trainer.zero();
            for (std::size_t bi = start; bi < end; ++bi) {
                const LabeledFeatures& row = data[order[bi]];
                std::vector<double> input = card_decoder_input(model, row);
                std::vector<double> out = forward(model.decoder, input);
                int target = row.label == Label::pos ? 0 : 1;
                double p = clamp_prob(out[static_cast<std::size_t>(target)]);
                epoch_loss -= std::log(p);
                std::vector<double> dp(2, 0.0);
                dp[static_cast<std::size_t>(target)] = -1.0 / p;
                Gradients dec_g = backward(model.decoder, input, dp);
                trainer.add(model.encoders.size(), dec_g.params);
                for (std::size_t i = 0; i < model.encoders.size(); ++i) {
                    std::vector<double> upstream(dec_g.input.begin() + static_cast<long>(8 * i),
                                                 dec_g.input.begin() + static_cast<long>(8 * i + 8));
                    Gradients enc_g = backward(model.encoders[i], row.feature(card_keys[i]), upstream);
                    trainer.add(i, enc_g.params);
                }
            }
            trainer.step();
        }
        model.loss_trace.push_back(epoch_loss);
    }
    return model;
}

}  // namespace nldt
