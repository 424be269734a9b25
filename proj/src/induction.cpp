#include "nldt/induction.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "nldt/parallel.hpp"
#include "nldt/rng.hpp"

namespace nldt {

namespace {

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    require(res.ec == std::errc(), "bad-config", "expected number, got '" + s + "'");
    return v;
}

}  // namespace

std::map<std::string, std::string> InductionConfig::to_kv() const {
    return {
        {"epsilon", fmt(epsilon)},
        {"max_depth", std::to_string(max_depth)},
        {"min_examples", std::to_string(min_examples)},
        {"min_gain", fmt(min_gain)},
        {"epochs_per_test", std::to_string(epochs_per_test)},
        {"learning_rate", fmt(learning_rate)},
        {"smoothing_alpha", fmt(smoothing_alpha)},
        {"seed", std::to_string(seed)},
        {"batch_size", std::to_string(batch_size)},
        {"jobs", std::to_string(jobs)},
    };
}

InductionConfig InductionConfig::from_kv(const std::map<std::string, std::string>& kv) {
    InductionConfig c;
    for (const auto& [key, value] : kv) {
        if (key == "epsilon") c.epsilon = parse_double(value);
        else if (key == "max_depth") c.max_depth = static_cast<int>(parse_double(value));
        else if (key == "min_examples") c.min_examples = static_cast<int>(parse_double(value));
        else if (key == "min_gain") c.min_gain = parse_double(value);
        else if (key == "epochs_per_test") c.epochs_per_test = static_cast<int>(parse_double(value));
        else if (key == "learning_rate") c.learning_rate = parse_double(value);
        else if (key == "smoothing_alpha") c.smoothing_alpha = parse_double(value);
        else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_double(value));
        else if (key == "batch_size") c.batch_size = static_cast<int>(parse_double(value));
        else if (key == "jobs") c.jobs = static_cast<int>(parse_double(value));
        else fail("bad-config", "unknown induction key '" + key + "'");
    }
    require(c.epsilon > 0.0 && c.epsilon < 1.0, "bad-config", "epsilon must be in (0,1)");
    require(c.max_depth >= 1, "bad-config", "max_depth must be >= 1");
    return c;
}

std::vector<WeightedExample> full_mass(const Dataset& data) {
    std::vector<WeightedExample> wex;
    wex.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        wex.push_back(WeightedExample{static_cast<int>(i), 1.0});
    }
    return wex;
}

double estimate_probability(const Dataset& data, const std::vector<WeightedExample>& examples,
                            double alpha) {
    double pos_mass = 0.0;
    double total = 0.0;
    for (const WeightedExample& we : examples) {
        total += we.path_prob;
        if (data[static_cast<std::size_t>(we.index)].label == Label::pos) {
            pos_mass += we.path_prob;
        }
    }
    require(alpha > 0.0 || total > 0.0, "empty-leaf",
            "cannot estimate a class probability from zero mass without smoothing");
    return (alpha + pos_mass) / (2.0 * alpha + total);
}

double conditional_test_prob(const Dataset& data, const std::vector<SignedTest>& path,
                             const Test& test, const Example& example) {
    (void)data;
    return conditional_prob(path, test, example);
}

ClassWeights class_weights(double delta_raw) {
    require(delta_raw > 0.0 && delta_raw < 1.0, "degenerate-node",
            "class weights need an impure node");
    return ClassWeights{1.0 / (2.0 * delta_raw), 1.0 / (2.0 * (1.0 - delta_raw))};
}

namespace {

struct CandidateEval {
    bool shares;  // test shares predicate variables with the path
    double q(const std::vector<SignedTest>& path, const Test& test, const Example& e) const {
        return shares ? conditional_prob(path, test, e) : eval_test(test, e);
    }
};

}  // namespace

double weighted_ce_loss(const Dataset& data, const std::vector<WeightedExample>& examples,
                        const std::vector<SignedTest>& path, double delta_raw, const Test& test,
                        std::vector<double>* grad_out) {
    require(test.is_neural() || std::holds_alternative<ProbabilisticFactTest>(test.body()),
            "not-trainable", "weighted CE applies to neural or probabilistic tests");
    if (grad_out) {
        require(test.is_neural(), "not-trainable", "gradients exist only for neural tests");
        grad_out->assign(test.get_params().size(), 0.0);
    }
    ClassWeights cw = class_weights(delta_raw);
    CandidateEval ce{shares_variables(path, test)};
    double loss = 0.0;
    for (const WeightedExample& we : examples) {
        const Example& e = data[static_cast<std::size_t>(we.index)];
        double q_raw = ce.q(path, test, e);
        double q = clamp_prob(q_raw);
        bool is_pos = e.label == Label::pos;
        double w = we.path_prob * (is_pos ? cw.pos_scale : cw.neg_scale);
        loss -= w * std::log(is_pos ? q : 1.0 - q);
        if (grad_out) {
            // d(-w log q)/dq = -w/q; clamping zeroes the slope outside range.
            if (q_raw > 1e-7 && q_raw < 1.0 - 1e-7) {
                double dq = is_pos ? -w / q : w / (1.0 - q);
                std::vector<double> g = eval_test_grad(test, e, dq);
                for (std::size_t i = 0; i < g.size(); ++i) (*grad_out)[i] += g[i];
            }
        }
    }
    return loss;
}

namespace {

// Gradient of the weighted CE over a subset of examples (one minibatch).
void batch_gradient(const Dataset& data, const std::vector<WeightedExample>& examples,
                    const std::vector<std::size_t>& batch, const std::vector<SignedTest>& path,
                    const ClassWeights& cw, bool shares, const Test& test,
                    std::vector<double>& grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t bi : batch) {
        const WeightedExample& we = examples[bi];
        const Example& e = data[static_cast<std::size_t>(we.index)];
        double q_raw = shares ? conditional_prob(path, test, e) : eval_test(test, e);
        if (q_raw <= 1e-7 || q_raw >= 1.0 - 1e-7) continue;
        bool is_pos = e.label == Label::pos;
        double w = we.path_prob * (is_pos ? cw.pos_scale : cw.neg_scale);
        double dq = is_pos ? -w / q_raw : w / (1.0 - q_raw);
        std::vector<double> g = eval_test_grad(test, e, dq);
        for (std::size_t i = 0; i < g.size(); ++i) grad[i] += g[i];
    }
}

Test train_one(const Dataset& data, const std::vector<WeightedExample>& examples,
               const std::vector<SignedTest>& path, double delta_raw, const Test& original,
               const InductionConfig& config, const std::string& node_scope) {
    Test candidate = clone_test(original, node_scope);
    if (auto* pf = std::get_if<ProbabilisticFactTest>(&candidate.body())) {
        if (!candidate.frozen()) {
            double pos_mass = 0.0, total = 0.0;
            for (const WeightedExample& we : examples) {
                total += we.path_prob;
                if (data[static_cast<std::size_t>(we.index)].label == Label::pos) {
                    pos_mass += we.path_prob;
                }
            }
            if (total > 0.0) pf->prob = pos_mass / total;
        }
        return candidate;
    }
    if (!candidate.trainable()) return candidate;

    ClassWeights cw = class_weights(delta_raw);
    bool shares = shares_variables(path, candidate);
    std::vector<double> params = candidate.get_params();
    AdamState adam(params.size(), config.learning_rate);
    std::vector<double> grad(params.size(), 0.0);

    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::size_t batch =
        config.batch_size <= 0 ? examples.size() : static_cast<std::size_t>(config.batch_size);
    Rng shuffler(derive_seed(config.seed, "train/" + node_scope + "/" + original.id()));

    for (int epoch = 0; epoch < config.epochs_per_test; ++epoch) {
        if (batch < examples.size()) shuffler.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += batch) {
            std::size_t end = std::min(order.size(), start + batch);
            std::vector<std::size_t> slice(order.begin() + start, order.begin() + end);
            batch_gradient(data, examples, slice, path, cw, shares, candidate, grad);
            adam_step(params, adam, grad);
            candidate.set_params(params);
        }
    }
    return candidate;
}

}  // namespace

std::vector<Test> train_tests(const Dataset& data, const std::vector<WeightedExample>& examples,
                              const std::vector<SignedTest>& path, double delta_raw,
                              const std::vector<Test>& pool, const InductionConfig& config,
                              const std::string& node_scope) {
    std::vector<Test> trained;
    trained.reserve(pool.size());
    for (const Test& t : pool) trained.push_back(t);  // placeholder slots
    parallel_for(pool.size(), config.jobs, [&](std::size_t i) {
        trained[i] = train_one(data, examples, path, delta_raw, pool[i], config, node_scope);
    });
    return trained;
}

double entropy(double delta) {
    double h = 0.0;
    if (delta > 0.0) h -= delta * std::log2(delta);
    if (delta < 1.0) h -= (1.0 - delta) * std::log2(1.0 - delta);
    return h;
}

double information_gain(const Dataset& data, const std::vector<WeightedExample>& examples,
                        const std::vector<SignedTest>& path, const Test& test) {
    CandidateEval ce{shares_variables(path, test)};
    double mass = 0.0, pos_mass = 0.0;
    double mass_l = 0.0, pos_l = 0.0;
    double mass_r = 0.0, pos_r = 0.0;
    for (const WeightedExample& we : examples) {
        const Example& e = data[static_cast<std::size_t>(we.index)];
        double q = ce.q(path, test, e);
        double pp = we.path_prob;
        bool is_pos = e.label == Label::pos;
        mass += pp;
        mass_l += pp * q;
        mass_r += pp * (1.0 - q);
        if (is_pos) {
            pos_mass += pp;
            pos_l += pp * q;
            pos_r += pp * (1.0 - q);
        }
    }
    require(mass > 0.0, "empty-leaf", "information gain on zero mass");
    double ig = entropy(pos_mass / mass);
    if (mass_l > 0.0) ig -= (mass_l / mass) * entropy(pos_l / mass_l);
    if (mass_r > 0.0) ig -= (mass_r / mass) * entropy(pos_r / mass_r);
    return ig;
}

std::size_t best_test(const std::vector<double>& gains) {
    require(!gains.empty(), "empty-pool", "no candidates to choose from");
    std::size_t best = 0;
    for (std::size_t i = 1; i < gains.size(); ++i) {
        if (gains[i] > gains[best]) best = i;
    }
    return best;
}

namespace {

const char* test_kind_name(const Test& t) {
    if (std::holds_alternative<DeterministicFactTest>(t.body())) return "deterministic_fact";
    if (std::holds_alternative<ProbabilisticFactTest>(t.body())) return "probabilistic_fact";
    if (std::holds_alternative<NeuralFactTest>(t.body())) return "neural_fact";
    return "neural_rule";
}

std::unique_ptr<Node> induce(const Dataset& data, std::vector<WeightedExample> wex,
                             const std::vector<Test>& pool, std::vector<SignedTest>& path,
                             int depth, const InductionConfig& config,
                             const std::string& scope) {
    double pos_mass = 0.0, total = 0.0;
    for (const WeightedExample& we : wex) {
        total += we.path_prob;
        if (data[static_cast<std::size_t>(we.index)].label == Label::pos) pos_mass += we.path_prob;
    }
    double delta_leaf = (config.smoothing_alpha + pos_mass) / (2.0 * config.smoothing_alpha + total);

    bool pure = pos_mass == 0.0 || pos_mass == total;
    if (depth >= config.max_depth || static_cast<int>(wex.size()) < config.min_examples || pure ||
        pool.empty() || total == 0.0) {
        return Node::make_leaf(delta_leaf);
    }

    double delta_raw = pos_mass / total;
    std::vector<Test> trained =
        train_tests(data, wex, path, delta_raw, pool, config, scope);
    std::vector<double> gains(trained.size(), 0.0);
    for (std::size_t i = 0; i < trained.size(); ++i) {
        gains[i] = information_gain(data, wex, path, trained[i]);
    }
    std::size_t best = best_test(gains);
    if (gains[best] < config.min_gain) return Node::make_leaf(delta_leaf);

    // Winner moves into the node; the subtree pool drops its base id.
    auto node = std::make_unique<Node>();
    node->test = std::make_unique<Test>(std::move(trained[best]));
    std::vector<Test> child_pool;
    child_pool.reserve(pool.size() - 1);
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (i != best) child_pool.push_back(pool[i]);
    }

    CandidateEval ce{shares_variables(path, *node->test)};
    std::vector<WeightedExample> left, right;
    for (const WeightedExample& we : wex) {
        const Example& e = data[static_cast<std::size_t>(we.index)];
        double q = ce.q(path, *node->test, e);
        double pl = we.path_prob * q;
        double pr = we.path_prob * (1.0 - q);
        if (pl >= config.epsilon) left.push_back(WeightedExample{we.index, pl});
        if (pr >= config.epsilon) right.push_back(WeightedExample{we.index, pr});
    }

    if (left.empty()) {
        node->left = Node::make_leaf(delta_leaf);
    } else {
        path.push_back(SignedTest{node->test.get(), true});
        node->left = induce(data, std::move(left), child_pool, path, depth + 1, config,
                            scope + "L");
        path.pop_back();
    }
    if (right.empty()) {
        node->right = Node::make_leaf(delta_leaf);
    } else {
        path.push_back(SignedTest{node->test.get(), false});
        node->right = induce(data, std::move(right), child_pool, path, depth + 1, config,
                             scope + "R");
        path.pop_back();
    }
    return node;
}

}  // namespace

NLDT neuid3(const Dataset& data, const std::vector<Test>& pool, const InductionConfig& config) {
    require(!data.empty(), "empty-dataset", "cannot induce from zero examples");
    std::vector<SignedTest> path;
    NLDT tree(induce(data, full_mass(data), pool, path, 0, config, "n"));
    tree.seed = config.seed;
    tree.config = config.to_kv();
    for (const Test& t : pool) tree.pool_metadata.push_back(TestInfo{t.id(), test_kind_name(t)});
    return tree;
}

void preload_pool(std::vector<Test>& pool, const std::vector<Test>& trained, bool freeze) {
    for (Test& entry : pool) {
        for (const Test& t : trained) {
            if (t.id() != entry.id()) continue;
            if (entry.is_neural()) entry.set_params(t.get_params());
            if (freeze) entry.set_frozen(true);
            break;
        }
    }
}

}  // namespace nldt
