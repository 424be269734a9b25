#include "nldt/logic.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <unordered_set>

namespace nldt {

namespace {

struct InternTable {
    std::mutex mutex;
    std::vector<std::string> names{""};  // id 0 reserved
    std::unordered_map<std::string, std::uint32_t> ids;
};

InternTable& table() {
    static InternTable t;
    return t;
}

}  // namespace

Atom Atom::intern(const std::string& name) {
    require(!name.empty(), "bad-atom", "atom name must be nonempty");
    InternTable& t = table();
    std::lock_guard<std::mutex> lock(t.mutex);
    auto it = t.ids.find(name);
    if (it != t.ids.end()) return Atom(it->second);
    auto id = static_cast<std::uint32_t>(t.names.size());
    t.names.push_back(name);
    t.ids.emplace(name, id);
    return Atom(id);
}

const std::string& Atom::name() const {
    InternTable& t = table();
    std::lock_guard<std::mutex> lock(t.mutex);
    return t.names.at(id_);
}

Conjunction::Conjunction(const std::vector<Literal>& literals) {
    for (const Literal& lit : literals) append(lit);
}

void Conjunction::append(Literal lit) {
    for (const Literal& existing : literals_) {
        require(existing.atom != lit.atom, "duplicate-atom",
                "atom '" + lit.atom.name() + "' appears twice in conjunction");
    }
    literals_.push_back(lit);
}

Rule::Rule(Atom h, std::vector<Literal> b) : head(h), body(std::move(b)) {
    for (const Literal& lit : body) {
        require(lit.atom != head, "self-recursion",
                "rule head '" + head.name() + "' appears in its own body");
    }
}

ProbFact::ProbFact(Atom a, double p) : atom(a), prob(p) {
    require(p >= 0.0 && p <= 1.0, "bad-probability",
            "fact probability must be in [0,1], got " + std::to_string(p));
}

LogicProgram::LogicProgram(std::vector<Rule> rules, std::vector<ProbFact> prob_facts)
    : rules_(std::move(rules)), prob_facts_(std::move(prob_facts)) {
    validate();
}

void LogicProgram::validate() const {
    std::unordered_set<std::uint32_t> fact_atoms;
    for (const ProbFact& f : prob_facts_) fact_atoms.insert(f.atom.id());
    std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> deps;  // head -> body heads
    std::unordered_set<std::uint32_t> heads;
    for (const Rule& r : rules_) heads.insert(r.head.id());
    for (const Rule& r : rules_) {
        require(fact_atoms.count(r.head.id()) == 0, "fact-as-head",
                "atom '" + r.head.name() + "' is both a probabilistic fact and a rule head");
        for (const Literal& lit : r.body) {
            if (heads.count(lit.atom.id())) deps[r.head.id()].push_back(lit.atom.id());
        }
    }
    // DFS cycle detection over the head dependency graph.
    enum class Mark { none, active, done };
    std::unordered_map<std::uint32_t, Mark> marks;
    std::vector<std::pair<std::uint32_t, std::size_t>> stack;
    for (std::uint32_t start : heads) {
        if (marks[start] == Mark::done) continue;
        stack.emplace_back(start, 0);
        marks[start] = Mark::active;
        while (!stack.empty()) {
            auto& [node, idx] = stack.back();
            auto& edges = deps[node];
            if (idx >= edges.size()) {
                marks[node] = Mark::done;
                stack.pop_back();
                continue;
            }
            std::uint32_t child = edges[idx++];
            if (marks[child] == Mark::active) fail("cyclic-program", "rule dependency cycle detected");
            if (marks[child] == Mark::none) {
                marks[child] = Mark::active;
                stack.emplace_back(child, 0);
            }
        }
    }
}

namespace {

// Program compiled to dense local indices for fast repeated evaluation.
struct CompiledProgram {
    std::vector<Atom> atoms;                                // local -> atom
    std::unordered_map<std::uint32_t, int> local;           // atom id -> local
    std::vector<int> fact_local;                            // per prob fact
    struct LocalRule {
        int head;
        std::vector<std::pair<int, bool>> body;  // (local, negated)
    };
    std::vector<LocalRule> rules;
    std::vector<int> eval_order;  // rule indices, topologically sorted by head

    int local_index(Atom a) const {
        auto it = local.find(a.id());
        return it == local.end() ? -1 : it->second;
    }
};

CompiledProgram compile(const LogicProgram& program) {
    CompiledProgram c;
    auto add_atom = [&](Atom a) {
        auto it = c.local.find(a.id());
        if (it != c.local.end()) return it->second;
        int idx = static_cast<int>(c.atoms.size());
        c.atoms.push_back(a);
        c.local.emplace(a.id(), idx);
        return idx;
    };
    for (const ProbFact& f : program.prob_facts()) c.fact_local.push_back(add_atom(f.atom));
    for (const Rule& r : program.rules()) {
        CompiledProgram::LocalRule lr;
        lr.head = add_atom(r.head);
        for (const Literal& lit : r.body) lr.body.emplace_back(add_atom(lit.atom), lit.negated);
        c.rules.push_back(std::move(lr));
    }
    // Topological order of heads (program is acyclic by construction): repeated
    // sweeps until a rule's body heads are all scheduled.
    std::vector<bool> head_scheduled(c.atoms.size(), true);
    for (const auto& lr : c.rules) head_scheduled[lr.head] = false;
    std::vector<bool> rule_done(c.rules.size(), false);
    std::size_t remaining = c.rules.size();
    while (remaining > 0) {
        bool progress = false;
        for (std::size_t i = 0; i < c.rules.size(); ++i) {
            if (rule_done[i]) continue;
            bool ready = true;
            for (auto [b, negated] : c.rules[i].body) {
                (void)negated;
                if (!head_scheduled[b]) {
                    // Wait until every rule with this head is scheduled.
                    ready = false;
                    break;
                }
            }
            // A head defined by several rules: schedule them together once all
            // their bodies depend only on scheduled heads.
            if (!ready) continue;
            // Collect all rules sharing this head in one pass so disjunction
            // evaluates before dependents read it.
            int head = c.rules[i].head;
            bool group_ready = true;
            std::vector<int> group;
            for (std::size_t j = 0; j < c.rules.size(); ++j) {
                if (c.rules[j].head != head || rule_done[j]) continue;
                for (auto [b, negated] : c.rules[j].body) {
                    (void)negated;
                    if (!head_scheduled[b] && b != head) {
                        group_ready = false;
                        break;
                    }
                }
                if (!group_ready) break;
                group.push_back(static_cast<int>(j));
            }
            if (!group_ready) continue;
            for (int j : group) {
                c.eval_order.push_back(j);
                rule_done[j] = true;
                --remaining;
            }
            head_scheduled[head] = true;
            progress = true;
        }
        require(progress, "cyclic-program", "could not order rules (cycle)");
    }
    return c;
}

// Evaluates all atoms given a truth assignment of the probabilistic facts.
void evaluate(const CompiledProgram& c, const std::vector<bool>& fact_truth,
              std::vector<bool>& truth) {
    truth.assign(c.atoms.size(), false);
    for (std::size_t i = 0; i < c.fact_local.size(); ++i) truth[c.fact_local[i]] = fact_truth[i];
    for (int ri : c.eval_order) {
        const auto& lr = c.rules[ri];
        if (truth[lr.head]) continue;
        bool sat = true;
        for (auto [b, negated] : lr.body) {
            if (truth[b] == negated) {
                sat = false;
                break;
            }
        }
        if (sat) truth[lr.head] = true;
    }
}

}  // namespace

bool entails(const LogicProgram& program, Atom query) {
    for (const ProbFact& f : program.prob_facts()) {
        require(f.is_deterministic(), "not-deterministic",
                "entails requires 0/1 fact probabilities; '" + f.atom.name() + "' has " +
                    std::to_string(f.prob));
    }
    CompiledProgram c = compile(program);
    std::vector<bool> fact_truth;
    fact_truth.reserve(program.prob_facts().size());
    for (const ProbFact& f : program.prob_facts()) fact_truth.push_back(f.prob == 1.0);
    std::vector<bool> truth;
    evaluate(c, fact_truth, truth);
    int qi = c.local_index(query);
    return qi >= 0 && truth[qi];
}

double conjunction_prob(const Conjunction& kappa,
                        const std::unordered_map<Atom, double, AtomHash>& fact_probs) {
    double p = 1.0;
    for (const Literal& lit : kappa.literals()) {
        auto it = fact_probs.find(lit.atom);
        require(it != fact_probs.end(), "unknown-atom",
                "no probability for atom '" + lit.atom.name() + "'");
        p *= lit.negated ? (1.0 - it->second) : it->second;
    }
    return p;
}

double wmc_query(const LogicProgram& program, Atom query, int max_facts) {
    int n = static_cast<int>(program.prob_facts().size());
    require(n <= max_facts, "wmc-too-large",
            "program has " + std::to_string(n) + " probabilistic facts, cap is " +
                std::to_string(max_facts));
    CompiledProgram c = compile(program);
    int qi = c.local_index(query);
    if (qi < 0) return 0.0;

    std::vector<double> probs;
    probs.reserve(n);
    for (const ProbFact& f : program.prob_facts()) probs.push_back(f.prob);

    double total = 0.0;
    std::vector<bool> fact_truth(n);
    std::vector<bool> truth;
    std::uint64_t count = 1ULL << n;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        double w = 1.0;
        for (int i = 0; i < n; ++i) {
            bool on = (mask >> i) & 1ULL;
            fact_truth[i] = on;
            w *= on ? probs[i] : (1.0 - probs[i]);
        }
        if (w == 0.0) continue;
        evaluate(c, fact_truth, truth);
        if (truth[qi]) total += w;
    }
    return total;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string print_program(const LogicProgram& program) {
    std::ostringstream out;
    for (const ProbFact& f : program.prob_facts()) {
        out << format_double(f.prob) << " :: " << f.atom.name() << ".\n";
    }
    for (const Rule& r : program.rules()) {
        out << r.head.name();
        if (!r.body.empty()) {
            out << " :- ";
            for (std::size_t i = 0; i < r.body.size(); ++i) {
                if (i) out << ", ";
                if (r.body[i].negated) out << "\\+";
                out << r.body[i].atom.name();
            }
        }
        out << ".\n";
    }
    return out.str();
}

namespace {

struct Parser {
    std::string_view text;
    std::size_t pos = 0;
    int line = 1;

    [[noreturn]] void error(const std::string& message) const {
        fail("parse-error", "line " + std::to_string(line) + ": " + message);
    }

    void skip_ws() {
        while (pos < text.size()) {
            char ch = text[pos];
            if (ch == '\n') {
                ++line;
                ++pos;
            } else if (ch == ' ' || ch == '\t' || ch == '\r') {
                ++pos;
            } else if (ch == '%' || ch == '#') {
                while (pos < text.size() && text[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    bool eof() {
        skip_ws();
        return pos >= text.size();
    }

    bool try_consume(std::string_view token) {
        skip_ws();
        if (text.substr(pos, token.size()) == token) {
            pos += token.size();
            return true;
        }
        return false;
    }

    void expect(std::string_view token) {
        if (!try_consume(token)) error("expected '" + std::string(token) + "'");
    }

    std::string identifier() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) {
            ++pos;
        }
        if (pos == start) error("expected identifier");
        return std::string(text.substr(start, pos - start));
    }

    double number() {
        skip_ws();
        const char* begin = text.data() + pos;
        const char* end = text.data() + text.size();
        double value = 0.0;
        auto res = std::from_chars(begin, end, value);
        if (res.ec != std::errc()) error("expected number");
        pos += static_cast<std::size_t>(res.ptr - begin);
        return value;
    }

    bool looks_like_number() {
        skip_ws();
        if (pos >= text.size()) return false;
        char ch = text[pos];
        return std::isdigit(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' || ch == '+';
    }
};

}  // namespace

LogicProgram parse_program(const std::string& text) {
    Parser p{text};
    std::vector<Rule> rules;
    std::vector<ProbFact> facts;
    while (!p.eof()) {
        if (p.looks_like_number()) {
            double prob = p.number();
            p.expect("::");
            std::string name = p.identifier();
            p.expect(".");
            if (prob < 0.0 || prob > 1.0) p.error("fact probability out of [0,1]");
            facts.emplace_back(Atom::intern(name), prob);
            continue;
        }
        std::string head = p.identifier();
        std::vector<Literal> body;
        if (p.try_consume(":-")) {
            for (;;) {
                bool negated = p.try_consume("\\+");
                body.push_back(Literal{Atom::intern(p.identifier()), negated});
                if (!p.try_consume(",")) break;
            }
        }
        p.expect(".");
        rules.emplace_back(Atom::intern(head), std::move(body));
    }
    return LogicProgram(std::move(rules), std::move(facts));
}

}  // namespace nldt
