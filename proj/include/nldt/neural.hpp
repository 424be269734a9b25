#pragma once

#include <cstdint>
#include <vector>

#include "nldt/common.hpp"
#include "nldt/rng.hpp"

namespace nldt {

enum class Head { sigmoid, softmax };

// Fully-connected net with ReLU hidden layers and a probability head.
// Parameters live in one flat vector (per layer: row-major weights, then
// biases) so optimizers and serialization treat every net uniformly.
struct NeuralNet {
    std::vector<int> layer_sizes;
    Head head = Head::sigmoid;
    std::vector<double> params;

    NeuralNet() = default;
    NeuralNet(std::vector<int> sizes, Head h);

    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
    std::size_t num_params() const;

    // Glorot-uniform weights, zero biases, deterministic per seed.
    void init_params(std::uint64_t seed);

    bool operator==(const NeuralNet& other) const {
        return layer_sizes == other.layer_sizes && head == other.head && params == other.params;
    }
};

std::vector<double> forward(const NeuralNet& net, const std::vector<double>& input);

struct Gradients {
    std::vector<double> params;  // d(output . upstream) / d theta
    std::vector<double> input;   // d(output . upstream) / d input
};

// Exact gradient of output.upstream by reverse accumulation. The input
// gradient lets composite models (encoder stacks) chain nets together.
Gradients backward(const NeuralNet& net, const std::vector<double>& input,
                   const std::vector<double>& upstream);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t step = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    explicit AdamState(std::size_t n_params = 0, double lr = 1e-3)
        : m(n_params, 0.0), v(n_params, 0.0), learning_rate(lr) {}
};

// One bias-corrected Adam update applied in place.
void adam_step(std::vector<double>& params, AdamState& state, const std::vector<double>& gradient);
void adam_step(NeuralNet& net, AdamState& state, const std::vector<double>& gradient);

// Probabilities are clamped to [1e-7, 1-1e-7] before entering any log.
inline double clamp_prob(double p) {
    if (p < 1e-7) return 1e-7;
    if (p > 1.0 - 1e-7) return 1.0 - 1e-7;
    return p;
}

}  // namespace nldt
