#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lazyasp {

// Errors --------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown for input that violates a documented precondition of the API.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class IncompleteSubstitution : public Error {
public:
    explicit IncompleteSubstitution(std::string variable)
        : Error("substitution does not cover variable " + variable), variable_(std::move(variable)) {}
    [[nodiscard]] const std::string& variable() const noexcept { return variable_; }

private:
    std::string variable_;
};

class ResourceError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

// Terms ---------------------------------------------------------------------

/// A constant (integer or symbolic name) or a variable.
///
/// Terms are totally ordered: integers (numerically) before symbolic
/// constants (lexicographically) before variables.
class Term {
public:
    enum class Kind : std::uint8_t { integer, symbol, variable };

    static Term integer(std::int64_t value) { return Term(Kind::integer, value, {}); }
    static Term symbol(std::string name) { return Term(Kind::symbol, 0, std::move(name)); }
    static Term variable(std::string name) { return Term(Kind::variable, 0, std::move(name)); }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_variable() const noexcept { return kind_ == Kind::variable; }
    [[nodiscard]] bool is_constant() const noexcept { return kind_ != Kind::variable; }
    [[nodiscard]] std::int64_t number() const noexcept { return number_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

    [[nodiscard]] std::string to_string() const {
        return kind_ == Kind::integer ? std::to_string(number_) : name_;
    }

    friend bool operator==(const Term&, const Term&) = default;
    friend std::strong_ordering operator<=>(const Term& a, const Term& b) {
        if (auto c = a.kind_ <=> b.kind_; c != 0) {
            return c;
        }
        if (a.kind_ == Kind::integer) {
            return a.number_ <=> b.number_;
        }
        return a.name_.compare(b.name_) <=> 0;
    }

private:
    Term(Kind k, std::int64_t n, std::string s) : kind_(k), number_(n), name_(std::move(s)) {}

    Kind         kind_;
    std::int64_t number_;
    std::string  name_;
};

inline std::ostream& operator<<(std::ostream& os, const Term& t) { return os << t.to_string(); }

struct Predicate {
    std::string name;
    std::size_t arity{0};

    friend bool                 operator==(const Predicate&, const Predicate&) = default;
    friend std::strong_ordering operator<=>(const Predicate& a, const Predicate& b) {
        if (auto c = a.name.compare(b.name) <=> 0; c != 0) {
            return c;
        }
        return a.arity <=> b.arity;
    }
    [[nodiscard]] std::string to_string() const { return name + "/" + std::to_string(arity); }
};

struct Atom {
    std::string       predicate;
    std::vector<Term> args;

    Atom() = default;
    Atom(std::string pred, std::vector<Term> a = {}) : predicate(std::move(pred)), args(std::move(a)) {}

    [[nodiscard]] Predicate signature() const { return {predicate, args.size()}; }
    [[nodiscard]] bool      is_ground() const {
        return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_variable(); });
    }

    friend bool                 operator==(const Atom&, const Atom&) = default;
    friend std::strong_ordering operator<=>(const Atom& a, const Atom& b) {
        if (auto c = a.predicate.compare(b.predicate) <=> 0; c != 0) {
            return c;
        }
        if (auto c = a.args.size() <=> b.args.size(); c != 0) {
            return c;
        }
        return std::lexicographical_compare_three_way(a.args.begin(), a.args.end(), b.args.begin(), b.args.end());
    }

    [[nodiscard]] std::string to_string() const {
        std::string out = predicate;
        if (!args.empty()) {
            out += '(';
            for (std::size_t i = 0; i < args.size(); ++i) {
                if (i) {
                    out += ',';
                }
                out += args[i].to_string();
            }
            out += ')';
        }
        return out;
    }
};

inline std::ostream& operator<<(std::ostream& os, const Atom& a) { return os << a.to_string(); }

struct Literal {
    Atom atom;
    bool negated{false};

    friend bool operator==(const Literal&, const Literal&) = default;
    friend auto operator<=>(const Literal&, const Literal&) = default;
};

/// Normal rule `head :- positive_body, not negative_body`.
///
/// A missing head makes the rule a constraint; a rule with both bodies
/// empty is a fact. Bodies have set semantics: `normalize()` sorts them and
/// removes duplicates.
struct Rule {
    std::optional<Atom> head;
    std::vector<Atom>   positive_body;
    std::vector<Atom>   negative_body;

    [[nodiscard]] bool is_constraint() const noexcept { return !head.has_value(); }
    [[nodiscard]] bool is_fact() const noexcept {
        return head.has_value() && positive_body.empty() && negative_body.empty();
    }
    [[nodiscard]] bool is_ground() const {
        auto ground = [](const Atom& a) { return a.is_ground(); };
        return (!head || head->is_ground()) && std::all_of(positive_body.begin(), positive_body.end(), ground) &&
               std::all_of(negative_body.begin(), negative_body.end(), ground);
    }

    Rule& normalize() {
        for (auto* body : {&positive_body, &negative_body}) {
            std::sort(body->begin(), body->end());
            body->erase(std::unique(body->begin(), body->end()), body->end());
        }
        return *this;
    }

    friend bool operator==(const Rule&, const Rule&) = default;
    friend auto operator<=>(const Rule&, const Rule&) = default;

    [[nodiscard]] std::string to_string() const {
        std::string out;
        if (head) {
            out += head->to_string();
        }
        if (!positive_body.empty() || !negative_body.empty()) {
            out += head ? " :- " : ":- ";
            bool first = true;
            for (const auto& a : positive_body) {
                out += first ? "" : ", ";
                out += a.to_string();
                first = false;
            }
            for (const auto& a : negative_body) {
                out += first ? "not " : ", not ";
                out += a.to_string();
                first = false;
            }
        }
        out += '.';
        return out;
    }
};

inline std::ostream& operator<<(std::ostream& os, const Rule& r) { return os << r.to_string(); }

struct Program {
    std::vector<Rule> rules;

    friend bool operator==(const Program&, const Program&) = default;

    [[nodiscard]] std::string to_string() const {
        std::string out;
        for (const auto& r : rules) {
            out += r.to_string();
            out += '\n';
        }
        return out;
    }
};

/// Variable name to constant.
using Substitution = std::map<std::string, Term>;

// Reserved names -----------------------------------------------------------

/// Prefix of complement atoms introduced by choice desugaring. The parser
/// rejects identifiers starting with '_', so user predicates never clash.
inline constexpr std::string_view kComplementPrefix = "_neg_";

[[nodiscard]] inline bool is_reserved_predicate(std::string_view name) {
    return !name.empty() && name.front() == '_';
}

[[nodiscard]] inline Atom complement_atom(const Atom& a) {
    return Atom(std::string(kComplementPrefix) + a.predicate, a.args);
}

// Variables and safety -----------------------------------------------------

inline void collect_variables(const Atom& a, std::set<std::string>& out) {
    for (const auto& t : a.args) {
        if (t.is_variable()) {
            out.insert(t.name());
        }
    }
}

[[nodiscard]] inline std::set<std::string> variables(const Atom& a) {
    std::set<std::string> out;
    collect_variables(a, out);
    return out;
}

[[nodiscard]] inline std::set<std::string> variables(const Rule& r) {
    std::set<std::string> out;
    if (r.head) {
        collect_variables(*r.head, out);
    }
    for (const auto& a : r.positive_body) {
        collect_variables(a, out);
    }
    for (const auto& a : r.negative_body) {
        collect_variables(a, out);
    }
    return out;
}

[[nodiscard]] inline std::set<std::string> positive_body_variables(const Rule& r) {
    std::set<std::string> out;
    for (const auto& a : r.positive_body) {
        collect_variables(a, out);
    }
    return out;
}

struct SafetyCheck {
    std::vector<std::string> unsafe_variables;
    [[nodiscard]] bool       ok() const noexcept { return unsafe_variables.empty(); }
};

/// A rule is safe iff every variable also occurs in its positive body.
[[nodiscard]] inline SafetyCheck check_safety(const Rule& r) {
    SafetyCheck out;
    auto        bound = positive_body_variables(r);
    for (const auto& v : variables(r)) {
        if (!bound.contains(v)) {
            out.unsafe_variables.push_back(v);
        }
    }
    return out;
}

// Substitution ---------------------------------------------------------------

[[nodiscard]] inline Atom apply_substitution(const Atom& a, const Substitution& sigma) {
    Atom out(a.predicate);
    out.args.reserve(a.args.size());
    for (const auto& t : a.args) {
        if (!t.is_variable()) {
            out.args.push_back(t);
            continue;
        }
        auto it = sigma.find(t.name());
        if (it == sigma.end()) {
            throw IncompleteSubstitution(t.name());
        }
        out.args.push_back(it->second);
    }
    return out;
}

/// Applies `sigma` pointwise; every variable of `r` must be bound.
[[nodiscard]] inline Rule apply_substitution(const Rule& r, const Substitution& sigma) {
    Rule out;
    if (r.head) {
        out.head = apply_substitution(*r.head, sigma);
    }
    out.positive_body.reserve(r.positive_body.size());
    for (const auto& a : r.positive_body) {
        out.positive_body.push_back(apply_substitution(a, sigma));
    }
    out.negative_body.reserve(r.negative_body.size());
    for (const auto& a : r.negative_body) {
        out.negative_body.push_back(apply_substitution(a, sigma));
    }
    return out.normalize();
}

/// Applies the bindings of `sigma` and leaves unbound variables in place.
[[nodiscard]] inline Atom apply_partial(const Atom& a, const Substitution& sigma) {
    Atom out(a.predicate);
    out.args.reserve(a.args.size());
    for (const auto& t : a.args) {
        auto it = t.is_variable() ? sigma.find(t.name()) : sigma.end();
        out.args.push_back(it == sigma.end() ? t : it->second);
    }
    return out;
}

[[nodiscard]] inline Rule apply_partial(const Rule& r, const Substitution& sigma) {
    Rule out;
    if (r.head) {
        out.head = apply_partial(*r.head, sigma);
    }
    for (const auto& a : r.positive_body) {
        out.positive_body.push_back(apply_partial(a, sigma));
    }
    for (const auto& a : r.negative_body) {
        out.negative_body.push_back(apply_partial(a, sigma));
    }
    return out;
}

// Program meta ---------------------------------------------------------------

struct ProgramMeta {
    std::set<Predicate> head_predicates;
    std::set<Atom>      fact_atoms;
    std::set<Term>      constants;
};

inline void collect_constants(const Atom& a, std::set<Term>& out) {
    for (const auto& t : a.args) {
        if (t.is_constant()) {
            out.insert(t);
        }
    }
}

[[nodiscard]] inline ProgramMeta program_meta(const Program& p) {
    ProgramMeta meta;
    for (const auto& r : p.rules) {
        if (r.head) {
            meta.head_predicates.insert(r.head->signature());
            collect_constants(*r.head, meta.constants);
            if (r.is_fact() && r.head->is_ground()) {
                meta.fact_atoms.insert(*r.head);
            }
        }
        for (const auto& a : r.positive_body) {
            collect_constants(a, meta.constants);
        }
        for (const auto& a : r.negative_body) {
            collect_constants(a, meta.constants);
        }
    }
    return meta;
}

// Output ---------------------------------------------------------------------

/// `{a, b, ...}` in canonical order, reserved atoms filtered.
[[nodiscard]] inline std::string format_answer_set(const std::set<Atom>& atoms) {
    std::string out = "{";
    bool        first = true;
    for (const auto& a : atoms) {
        if (is_reserved_predicate(a.predicate)) {
            continue;
        }
        out += first ? "" : ", ";
        out += a.to_string();
        first = false;
    }
    out += '}';
    return out;
}

[[nodiscard]] inline std::set<Atom> visible_atoms(const std::set<Atom>& atoms) {
    std::set<Atom> out;
    for (const auto& a : atoms) {
        if (!is_reserved_predicate(a.predicate)) {
            out.insert(out.end(), a);
        }
    }
    return out;
}

} // namespace lazyasp
