#include "nldt/neural.hpp"

#include <algorithm>
#include <cmath>

namespace nldt {

NeuralNet::NeuralNet(std::vector<int> sizes, Head h) : layer_sizes(std::move(sizes)), head(h) {
    require(layer_sizes.size() >= 2, "shape-error", "net needs at least input and output layers");
    for (int s : layer_sizes) require(s > 0, "shape-error", "layer sizes must be positive");
    if (head == Head::sigmoid) {
        require(layer_sizes.back() == 1, "shape-error", "sigmoid head requires a single output");
    }
    params.assign(num_params(), 0.0);
}

std::size_t NeuralNet::num_params() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        n += static_cast<std::size_t>(layer_sizes[l] + 1) * layer_sizes[l + 1];
    }
    return n;
}

void NeuralNet::init_params(std::uint64_t seed) {
    Rng rng(seed);
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        int fan_in = layer_sizes[l];
        int fan_out = layer_sizes[l + 1];
        double r = std::sqrt(6.0 / (fan_in + fan_out));
        for (int i = 0; i < fan_in * fan_out; ++i) params[offset + i] = rng.uniform(-r, r);
        offset += static_cast<std::size_t>(fan_in) * fan_out;
        for (int i = 0; i < fan_out; ++i) params[offset + i] = 0.0;
        offset += fan_out;
    }
}

namespace {

struct Trace {
    // activations[0] = input, activations[l+1] = post-activation of layer l
    std::vector<std::vector<double>> activations;
    std::vector<std::vector<double>> pre_activations;
};

std::vector<double> apply_head(Head head, std::vector<double> z) {
    if (head == Head::sigmoid) {
        double v = z[0];
        double s = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
        return {s};
    }
    double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        sum += v;
    }
    for (double& v : z) v /= sum;
    return z;
}

Trace run_forward(const NeuralNet& net, const std::vector<double>& input) {
    require(static_cast<int>(input.size()) == net.input_size(), "shape-error",
            "input length " + std::to_string(input.size()) + " does not match first layer " +
                std::to_string(net.input_size()));
    Trace trace;
    trace.activations.push_back(input);
    std::size_t offset = 0;
    std::size_t n_layers = net.layer_sizes.size() - 1;
    for (std::size_t l = 0; l < n_layers; ++l) {
        int in = net.layer_sizes[l];
        int out = net.layer_sizes[l + 1];
        const std::vector<double>& a = trace.activations.back();
        std::vector<double> z(out);
        for (int o = 0; o < out; ++o) {
            double acc = net.params[offset + static_cast<std::size_t>(in) * out + o];  // bias
            const double* w = net.params.data() + offset + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) acc += w[i] * a[i];
            z[o] = acc;
        }
        offset += static_cast<std::size_t>(in + 1) * out;
        trace.pre_activations.push_back(z);
        if (l + 1 == n_layers) {
            trace.activations.push_back(apply_head(net.head, std::move(z)));
        } else {
            for (double& v : z) v = v > 0.0 ? v : 0.0;
            trace.activations.push_back(std::move(z));
        }
    }
    return trace;
}

}  // namespace

std::vector<double> forward(const NeuralNet& net, const std::vector<double>& input) {
    return run_forward(net, input).activations.back();
}

Gradients backward(const NeuralNet& net, const std::vector<double>& input,
                   const std::vector<double>& upstream) {
    require(static_cast<int>(upstream.size()) == net.output_size(), "shape-error",
            "upstream length does not match output size");
    Trace trace = run_forward(net, input);
    Gradients g;
    g.params.assign(net.params.size(), 0.0);

    std::size_t n_layers = net.layer_sizes.size() - 1;
    const std::vector<double>& out = trace.activations.back();

    // Head jacobian applied to upstream.
    std::vector<double> dz(net.output_size());
    if (net.head == Head::sigmoid) {
        dz[0] = upstream[0] * out[0] * (1.0 - out[0]);
    } else {
        double dot = 0.0;
        for (int i = 0; i < net.output_size(); ++i) dot += upstream[i] * out[i];
        for (int i = 0; i < net.output_size(); ++i) dz[i] = out[i] * (upstream[i] - dot);
    }

    // Layer offsets into the flat parameter vector.
    std::vector<std::size_t> offsets(n_layers);
    std::size_t off = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
        offsets[l] = off;
        off += static_cast<std::size_t>(net.layer_sizes[l] + 1) * net.layer_sizes[l + 1];
    }

    for (std::size_t li = n_layers; li-- > 0;) {
        int in = net.layer_sizes[li];
        int out_n = net.layer_sizes[li + 1];
        const std::vector<double>& a_prev = trace.activations[li];
        std::size_t base = offsets[li];
        std::vector<double> da_prev(in, 0.0);
        for (int o = 0; o < out_n; ++o) {
            double d = dz[o];
            double* wg = g.params.data() + base + static_cast<std::size_t>(o) * in;
            const double* w = net.params.data() + base + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) {
                wg[i] += d * a_prev[i];
                da_prev[i] += d * w[i];
            }
            g.params[base + static_cast<std::size_t>(in) * out_n + o] += d;  // bias
        }
        if (li == 0) {
            g.input = std::move(da_prev);
        } else {
            const std::vector<double>& z_prev = trace.pre_activations[li - 1];
            for (int i = 0; i < in; ++i) da_prev[i] = z_prev[i] > 0.0 ? da_prev[i] : 0.0;
            dz = std::move(da_prev);
        }
    }
    return g;
}

void adam_step(std::vector<double>& params, AdamState& state, const std::vector<double>& gradient) {
    require(params.size() == gradient.size(), "shape-error",
            "gradient length does not match parameter length");
    if (state.m.size() != params.size()) {
        require(state.m.empty() && state.step == 0, "shape-error",
                "Adam state sized for a different parameter vector");
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    state.step += 1;
    double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * gradient[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * gradient[i] * gradient[i];
        double mhat = state.m[i] / b1t;
        double vhat = state.v[i] / b2t;
        params[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
}

void adam_step(NeuralNet& net, AdamState& state, const std::vector<double>& gradient) {
    adam_step(net.params, state, gradient);
}

}  // namespace nldt
