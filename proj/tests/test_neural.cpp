#include <doctest.h>

#include <cmath>

#include "nldt/neural.hpp"
#include "nldt/rng.hpp"

using namespace nldt;

namespace {

// |a-b| / max(1, |a|+|b|), the usual gradient-check metric.
double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max(1.0, std::fabs(a) + std::fabs(b));
}

double scalar_loss(const NeuralNet& net, const std::vector<double>& input,
                   const std::vector<double>& upstream) {
    std::vector<double> out = forward(net, input);
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * upstream[i];
    return s;
}

NeuralNet random_net(Rng& rng, std::vector<int> sizes, Head head) {
    NeuralNet net(std::move(sizes), head);
    net.init_params(rng.next_u64());
    // Shift biases a little so ReLU kinks move away from the finite-difference
    // probes.
    for (double& p : net.params) p += 0.01 * rng.uniform(-1.0, 1.0);
    return net;
}

}  // namespace

TEST_CASE("zero-initialized heads") {
    NeuralNet sig({4, 8, 1}, Head::sigmoid);
    CHECK(forward(sig, {1.0, -2.0, 0.5, 3.0})[0] == 0.5);

    NeuralNet soft({4, 8, 8}, Head::softmax);
    std::vector<double> out = forward(soft, {1.0, -2.0, 0.5, 3.0});
    for (double v : out) CHECK(v == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("forward matches a step-by-step hand computation") {
    NeuralNet net({2, 2, 1}, Head::sigmoid);
    // layer 0: W = [[1,-1],[0.5,2]], b = [0.1,-0.2]; layer 1: W = [[1,1]], b = [0.3]
    net.params = {1.0, -1.0, 0.5, 2.0, 0.1, -0.2, 1.0, 1.0, 0.3};
    std::vector<double> input{0.5, 1.0};

    double z0 = 1.0 * 0.5 + (-1.0) * 1.0 + 0.1;   // -0.4 -> relu 0
    double z1 = 0.5 * 0.5 + 2.0 * 1.0 + (-0.2);   // 2.05
    double a0 = z0 > 0 ? z0 : 0.0;
    double a1 = z1 > 0 ? z1 : 0.0;
    double z_out = 1.0 * a0 + 1.0 * a1 + 0.3;     // 2.35
    double expected = 1.0 / (1.0 + std::exp(-z_out));

    CHECK(forward(net, input)[0] == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("forward validates input shape") {
    NeuralNet net({3, 2, 1}, Head::sigmoid);
    CHECK_THROWS_WITH_AS(forward(net, {1.0, 2.0}), doctest::Contains("shape-error"), Error);
}

TEST_CASE("sigmoid head requires one output") {
    CHECK_THROWS_WITH_AS(NeuralNet({3, 2, 2}, Head::sigmoid), doctest::Contains("shape-error"),
                         Error);
}

TEST_CASE("backward with zero upstream is zero") {
    Rng rng(11);
    NeuralNet net = random_net(rng, {3, 5, 2}, Head::softmax);
    Gradients g = backward(net, {0.3, -0.2, 0.8}, {0.0, 0.0});
    for (double v : g.params) CHECK(v == 0.0);
}

TEST_CASE("single linear layer gradient is the input outer product") {
    NeuralNet net({2, 1}, Head::sigmoid);  // zero weights: output 0.5, slope 0.25
    std::vector<double> input{0.7, -1.3};
    double upstream = 2.0;
    Gradients g = backward(net, input, {upstream});
    CHECK(g.params[0] == doctest::Approx(upstream * 0.25 * input[0]).epsilon(1e-12));
    CHECK(g.params[1] == doctest::Approx(upstream * 0.25 * input[1]).epsilon(1e-12));
    CHECK(g.params[2] == doctest::Approx(upstream * 0.25).epsilon(1e-12));  // bias
}

TEST_CASE("gradients match central finite differences") {
    Rng rng(20240502);
    int checked = 0;
    for (int trial = 0; trial < 110; ++trial) {
        std::vector<int> sizes;
        Head head;
        if (trial % 2 == 0) {
            sizes = {2 + static_cast<int>(rng.next_below(3)), 4, 1};
            head = Head::sigmoid;
        } else {
            sizes = {2 + static_cast<int>(rng.next_below(3)), 4,
                     2 + static_cast<int>(rng.next_below(4))};
            head = Head::softmax;
        }
        NeuralNet net = random_net(rng, sizes, head);
        std::vector<double> input, upstream;
        for (int i = 0; i < net.input_size(); ++i) input.push_back(rng.uniform(-1.0, 1.0));
        for (int i = 0; i < net.output_size(); ++i) upstream.push_back(rng.uniform(-1.0, 1.0));

        Gradients g = backward(net, input, upstream);
        Gradients gi = g;  // also check input gradient below
        const double h = 1e-5;
        for (std::size_t p = 0; p < net.params.size(); ++p) {
            NeuralNet plus = net, minus = net;
            plus.params[p] += h;
            minus.params[p] -= h;
            double fd =
                (scalar_loss(plus, input, upstream) - scalar_loss(minus, input, upstream)) /
                (2.0 * h);
            CHECK(rel_err(g.params[p], fd) < 1e-4);
        }
        for (std::size_t i = 0; i < input.size(); ++i) {
            std::vector<double> plus = input, minus = input;
            plus[i] += h;
            minus[i] -= h;
            double fd = (scalar_loss(net, plus, upstream) - scalar_loss(net, minus, upstream)) /
                        (2.0 * h);
            CHECK(rel_err(gi.input[i], fd) < 1e-4);
        }
        ++checked;
    }
    CHECK(checked >= 100);
}

TEST_CASE("adam leaves parameters unchanged under zero gradient") {
    NeuralNet net({2, 2, 1}, Head::sigmoid);
    net.init_params(3);
    std::vector<double> before = net.params;
    AdamState state(net.params.size());
    adam_step(net, state, std::vector<double>(net.params.size(), 0.0));
    CHECK(net.params == before);
}

TEST_CASE("adam first step moves by the learning rate") {
    std::vector<double> w{0.0};
    AdamState state(1, 1e-3);
    adam_step(w, state, {1.0});
    CHECK(w[0] == doctest::Approx(-1e-3).epsilon(1e-6));
}

TEST_CASE("adam minimizes a quadratic") {
    std::vector<double> w{0.0};
    AdamState state(1, 0.1);
    for (int i = 0; i < 100; ++i) adam_step(w, state, {2.0 * (w[0] - 3.0)});
    CHECK(std::fabs(w[0] - 3.0) < 0.5);
}

TEST_CASE("seeded initialization is bit-identical") {
    NeuralNet a({5, 7, 3}, Head::softmax), b({5, 7, 3}, Head::softmax);
    a.init_params(42);
    b.init_params(42);
    CHECK(a.params == b.params);
    NeuralNet c({5, 7, 3}, Head::softmax);
    c.init_params(43);
    CHECK(a.params != c.params);
}

TEST_CASE("training trajectories are deterministic given the seed") {
    auto run = [] {
        NeuralNet net({3, 4, 1}, Head::sigmoid);
        net.init_params(7);
        AdamState state(net.params.size(), 1e-2);
        Rng rng(7);
        for (int step = 0; step < 50; ++step) {
            std::vector<double> input{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            double target = input[0] > 0 ? 1.0 : 0.0;
            double p = clamp_prob(forward(net, input)[0]);
            double dp = p - target > 0 ? 1.0 / (1.0 - p) : -1.0 / p;
            Gradients g = backward(net, input, {dp});
            adam_step(net, state, g.params);
        }
        return net.params;
    };
    CHECK(run() == run());
}

TEST_CASE("clamped probabilities stay strictly inside (0,1)") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        NeuralNet net = random_net(rng, {4, 6, 5}, Head::softmax);
        // Exaggerate logits to push the raw softmax toward 0/1.
        for (double& p : net.params) p *= 50.0;
        std::vector<double> input{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2),
                                  rng.uniform(-2, 2)};
        std::vector<double> out = forward(net, input);
        double sum = 0.0;
        for (double v : out) {
            sum += v;
            double c = clamp_prob(v);
            CHECK(c >= 1e-7);
            CHECK(c <= 1.0 - 1e-7);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}
