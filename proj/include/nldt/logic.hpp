#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nldt/common.hpp"

namespace nldt {

// Interned proposition. Atoms compare by identity; the process-wide intern
// table guarantees one id per distinct name.
class Atom {
public:
    Atom() : id_(0) {}
    static Atom intern(const std::string& name);

    const std::string& name() const;
    std::uint32_t id() const { return id_; }

    bool operator==(const Atom& other) const { return id_ == other.id_; }
    bool operator!=(const Atom& other) const { return id_ != other.id_; }
    bool operator<(const Atom& other) const { return id_ < other.id_; }

private:
    explicit Atom(std::uint32_t id) : id_(id) {}
    std::uint32_t id_;
};

struct AtomHash {
    std::size_t operator()(const Atom& a) const { return a.id(); }
};

struct Literal {
    Atom atom;
    bool negated = false;

    bool operator==(const Literal& other) const {
        return atom == other.atom && negated == other.negated;
    }
};

inline Literal pos(Atom a) { return Literal{a, false}; }
inline Literal neg(Atom a) { return Literal{a, true}; }

// Ordered conjunction of literals. Rejects repeated atoms so contradictions
// (a AND not a) and redundancies cannot be represented. Empty = true.
class Conjunction {
public:
    Conjunction() = default;
    explicit Conjunction(const std::vector<Literal>& literals);

    void append(Literal lit);
    const std::vector<Literal>& literals() const { return literals_; }
    bool empty() const { return literals_.empty(); }
    std::size_t size() const { return literals_.size(); }

private:
    std::vector<Literal> literals_;
};

struct Rule {
    Atom head;
    std::vector<Literal> body;

    Rule(Atom h, std::vector<Literal> b);
    bool operator==(const Rule& other) const { return head == other.head && body == other.body; }
};

struct ProbFact {
    Atom atom;
    double prob = 0.0;

    ProbFact(Atom a, double p);
    bool is_deterministic() const { return prob == 0.0 || prob == 1.0; }
    bool operator==(const ProbFact& other) const {
        return atom == other.atom && prob == other.prob;
    }
};

// Acyclic propositional program: rules + probabilistic facts. Fact atoms may
// not be rule heads; the head dependency graph must be acyclic (checked at
// construction, error "cyclic-program").
class LogicProgram {
public:
    LogicProgram() = default;
    LogicProgram(std::vector<Rule> rules, std::vector<ProbFact> prob_facts);

    const std::vector<Rule>& rules() const { return rules_; }
    const std::vector<ProbFact>& prob_facts() const { return prob_facts_; }

    bool operator==(const LogicProgram& other) const {
        return rules_ == other.rules_ && prob_facts_ == other.prob_facts_;
    }

private:
    std::vector<Rule> rules_;
    std::vector<ProbFact> prob_facts_;
    void validate() const;
};

// Deterministic entailment under negation as failure. Requires every fact
// probability to be exactly 0 or 1.
bool entails(const LogicProgram& program, Atom query);

// Product over literals of kappa: p(atom) for positive, 1-p for negated.
double conjunction_prob(const Conjunction& kappa,
                        const std::unordered_map<Atom, double, AtomHash>& fact_probs);

// Exact query probability by enumerating all 2^n truth assignments of the
// probabilistic facts. n above `max_facts` raises "wmc-too-large".
double wmc_query(const LogicProgram& program, Atom query, int max_facts = 20);

// Textual clause-per-line format:   0.3 :: f.   /   h :- a, \+b.
// Facts with empty bodies print as  h.
std::string print_program(const LogicProgram& program);
LogicProgram parse_program(const std::string& text);

}  // namespace nldt
