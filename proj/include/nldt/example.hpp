#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "nldt/common.hpp"
#include "nldt/logic.hpp"

namespace nldt {

enum class Label { pos, neg };

inline const char* label_name(Label l) { return l == Label::pos ? "pos" : "neg"; }

// One supervised example: true atoms (absent = false), named subsymbolic
// feature vectors, and a binary label.
struct Example {
    std::vector<Atom> symbolic_facts;  // kept sorted by atom id
    std::map<std::string, std::vector<double>> features;
    Label label = Label::neg;

    bool has_fact(Atom a) const {
        for (const Atom& f : symbolic_facts) {
            if (f == a) return true;
        }
        return false;
    }

    void add_fact(Atom a) {
        if (has_fact(a)) return;
        symbolic_facts.push_back(a);
        std::sort(symbolic_facts.begin(), symbolic_facts.end());
    }

    const std::vector<double>& feature(const std::string& key) const {
        auto it = features.find(key);
        require(it != features.end(), "missing-feature", "no feature '" + key + "'");
        return it->second;
    }
};

using Dataset = std::vector<Example>;

// Feature-only view handed to baseline models; the symbolic ground truth is
// not reachable through it.
struct LabeledFeatures {
    const std::map<std::string, std::vector<double>>* features;
    Label label;

    const std::vector<double>& feature(const std::string& key) const {
        auto it = features->find(key);
        require(it != features->end(), "missing-feature", "no feature '" + key + "'");
        return it->second;
    }
};

inline std::vector<LabeledFeatures> strip_symbolic(const Dataset& data) {
    std::vector<LabeledFeatures> out;
    out.reserve(data.size());
    for (const Example& e : data) out.push_back(LabeledFeatures{&e.features, e.label});
    return out;
}

}  // namespace nldt
