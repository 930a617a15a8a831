#pragma once

#include "program.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <unordered_map>
#include <unordered_set>

namespace lazyasp {

// Strategy configuration -----------------------------------------------------

/// Bound on the number of unassigned positive body literals; either a natural
/// number or the distinct token "inf".
class KBound {
public:
    constexpr KBound(std::uint32_t k = 0) noexcept : value_(k) {}
    static constexpr KBound unbounded() noexcept { return KBound(kInf, 0); }

    [[nodiscard]] constexpr bool          is_unbounded() const noexcept { return value_ == kInf; }
    [[nodiscard]] constexpr std::uint32_t value() const noexcept { return value_; }
    [[nodiscard]] constexpr bool          admits(std::size_t count) const noexcept {
        return is_unbounded() || count <= value_;
    }

    friend constexpr bool operator==(KBound, KBound) = default;
    friend constexpr auto operator<=>(KBound a, KBound b) { return a.value_ <=> b.value_; }

    [[nodiscard]] std::string to_string() const { return is_unbounded() ? "inf" : std::to_string(value_); }

    static KBound parse(std::string_view s) {
        if (s == "inf") {
            return unbounded();
        }
        std::uint32_t v = 0;
        if (s.empty() || s.size() > 9 || s.find_first_not_of("0123456789") != std::string_view::npos) {
            throw ParameterError("invalid bound '" + std::string(s) + "'");
        }
        for (char c : s) {
            v = v * 10 + static_cast<std::uint32_t>(c - '0');
        }
        return KBound(v);
    }

private:
    static constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();
    constexpr KBound(std::uint32_t v, int) noexcept : value_(v) {}
    std::uint32_t value_;
};

struct StrategyConfig {
    enum class Family : std::uint8_t { default_strategy, k_unassigned };

    Family family{Family::default_strategy};
    KBound k_co{0};
    KBound k_ru{0};
    bool   accumulator{false};

    static StrategyConfig make_default(bool acc = false) { return {Family::default_strategy, 0, 0, acc}; }
    static StrategyConfig make_k(KBound co, KBound ru, bool acc = false) { return {Family::k_unassigned, co, ru, acc}; }

    /// `default`, `k:<k_co>,<k_ru>` (`inf` allowed), optional `+acc` suffix.
    static StrategyConfig parse(std::string_view s) {
        StrategyConfig cfg;
        constexpr std::string_view acc = "+acc";
        if (s.size() >= acc.size() && s.substr(s.size() - acc.size()) == acc) {
            cfg.accumulator = true;
            s.remove_suffix(acc.size());
        }
        if (s == "default") {
            return cfg;
        }
        if (s.substr(0, 2) != "k:") {
            throw ParameterError("unknown strategy '" + std::string(s) + "'");
        }
        s.remove_prefix(2);
        auto comma = s.find(',');
        if (comma == std::string_view::npos) {
            throw ParameterError("strategy needs two bounds: k:<k_co>,<k_ru>");
        }
        cfg.family = Family::k_unassigned;
        cfg.k_co   = KBound::parse(s.substr(0, comma));
        cfg.k_ru   = KBound::parse(s.substr(comma + 1));
        return cfg;
    }

    [[nodiscard]] std::string to_string() const {
        std::string out = family == Family::default_strategy ? "default"
                                                             : "k:" + k_co.to_string() + "," + k_ru.to_string();
        return accumulator ? out + "+acc" : out;
    }

    friend bool operator==(const StrategyConfig&, const StrategyConfig&) = default;
};

// Assignments ------------------------------------------------------------------

struct Assignment {
    std::set<Atom> positive;
    std::set<Atom> negative;

    [[nodiscard]] bool consistent() const {
        return std::none_of(positive.begin(), positive.end(), [&](const Atom& a) { return negative.contains(a); });
    }
    friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Ground atoms kept across grounder calls. Used for matching as the fully
/// positive assignment (atoms, {}).
struct GrounderMemory {
    std::set<Atom> atoms;

    [[nodiscard]] Assignment as_assignment() const { return {atoms, {}}; }
    friend bool operator==(const GrounderMemory&, const GrounderMemory&) = default;
};

/// Componentwise union; the result may be inconsistent.
[[nodiscard]] inline Assignment combine(const Assignment& a, const Assignment& b) {
    Assignment out = a;
    out.positive.insert(b.positive.begin(), b.positive.end());
    out.negative.insert(b.negative.begin(), b.negative.end());
    return out;
}

struct GroundInstance {
    Rule         origin;
    Substitution sigma;
    Rule         ground;

    friend bool operator==(const GroundInstance&, const GroundInstance&) = default;
    friend auto operator<=>(const GroundInstance& a, const GroundInstance& b) {
        if (auto c = a.ground <=> b.ground; c != 0) {
            return c;
        }
        if (auto c = a.sigma <=> b.sigma; c != 0) {
            return c;
        }
        return a.origin <=> b.origin;
    }
};

[[nodiscard]] inline GroundInstance make_instance(const Rule& origin, Substitution sigma) {
    Rule ground = apply_substitution(origin, sigma);
    return {origin, std::move(sigma), std::move(ground)};
}

// Predicate tests --------------------------------------------------------------

/// Inactive: some positive body atom has a predicate that heads no rule, or
/// some negative body atom is a fact.
[[nodiscard]] inline bool is_inactive(const Rule& g, const ProgramMeta& meta) {
    if (!g.is_ground()) {
        throw ContractViolation("is_inactive expects a ground rule");
    }
    for (const auto& a : g.positive_body) {
        if (!meta.head_predicates.contains(a.signature())) {
            return true;
        }
    }
    return std::any_of(g.negative_body.begin(), g.negative_body.end(),
                       [&](const Atom& a) { return meta.fact_atoms.contains(a); });
}

[[nodiscard]] inline bool is_of_interest(const Rule& g, const Assignment& a) {
    return std::all_of(g.positive_body.begin(), g.positive_body.end(),
                       [&](const Atom& b) { return a.positive.contains(b); });
}

[[nodiscard]] inline bool is_weakly_applicable(const Rule& g, const Assignment& a, const ProgramMeta& meta) {
    bool touches_false = std::any_of(g.positive_body.begin(), g.positive_body.end(),
                                     [&](const Atom& b) { return a.negative.contains(b); });
    return !touches_false && !is_inactive(g, meta);
}

/// Positive body literals of `origin` whose instance under `sigma` is in A+.
[[nodiscard]] inline std::vector<Atom> assigned_literals(const Rule& origin, const Substitution& sigma,
                                                         const Assignment& a) {
    std::vector<Atom> out;
    for (const auto& l : origin.positive_body) {
        if (a.positive.contains(apply_substitution(l, sigma))) {
            out.push_back(l);
        }
    }
    return out;
}

[[nodiscard]] inline bool is_all_variable_assigning(const Rule& origin, const std::vector<Atom>& literals) {
    std::set<std::string> covered;
    for (const auto& l : literals) {
        collect_variables(l, covered);
    }
    return covered == variables(origin);
}

[[nodiscard]] inline bool is_k_unassigned(const GroundInstance& inst, const Assignment& a, KBound k,
                                          const ProgramMeta& meta) {
    if (!is_weakly_applicable(inst.ground, a, meta)) {
        return false;
    }
    auto assigned = assigned_literals(inst.origin, inst.sigma, a);
    return is_all_variable_assigning(inst.origin, assigned) &&
           k.admits(inst.origin.positive_body.size() - assigned.size());
}

namespace detail {

using SymbolId = std::int32_t;
using AtomId   = std::uint32_t;

class SymbolTable {
public:
    SymbolId intern(const Term& t) {
        auto [it, inserted] = ids_.try_emplace(t, static_cast<SymbolId>(terms_.size()));
        if (inserted) {
            terms_.push_back(t);
        }
        return it->second;
    }
    [[nodiscard]] std::optional<SymbolId> find(const Term& t) const {
        auto it = ids_.find(t);
        return it == ids_.end() ? std::nullopt : std::optional<SymbolId>(it->second);
    }
    [[nodiscard]] const Term& term(SymbolId id) const { return terms_[static_cast<std::size_t>(id)]; }
    [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }

private:
    std::map<Term, SymbolId> ids_;
    std::vector<Term>        terms_;
};

class PredicateTable {
public:
    std::uint32_t intern(const Predicate& p) {
        auto [it, inserted] = ids_.try_emplace(p, static_cast<std::uint32_t>(preds_.size()));
        if (inserted) {
            preds_.push_back(p);
        }
        return it->second;
    }
    [[nodiscard]] const Predicate& predicate(std::uint32_t id) const { return preds_[id]; }
    [[nodiscard]] std::size_t      size() const noexcept { return preds_.size(); }

private:
    std::map<Predicate, std::uint32_t> ids_;
    std::vector<Predicate>             preds_;
};

/// Dense ids for ground atoms (predicate id + symbol tuple) and for
/// auxiliary atoms that have no tuple (rule body representatives).
class AtomTable {
public:
    static constexpr std::uint32_t kAuxiliary = std::numeric_limits<std::uint32_t>::max();

    [[nodiscard]] std::optional<AtomId> find(std::uint32_t pred, std::span<const SymbolId> args) const {
        auto range = index_.equal_range(hash(pred, args));
        for (auto it = range.first; it != range.second; ++it) {
            if (matches(it->second, pred, args)) {
                return it->second;
            }
        }
        return std::nullopt;
    }

    AtomId intern(std::uint32_t pred, std::span<const SymbolId> args) {
        auto h     = hash(pred, args);
        auto range = index_.equal_range(h);
        for (auto it = range.first; it != range.second; ++it) {
            if (matches(it->second, pred, args)) {
                return it->second;
            }
        }
        auto id = static_cast<AtomId>(entries_.size());
        entries_.push_back({pred, static_cast<std::uint32_t>(pool_.size()), static_cast<std::uint32_t>(args.size())});
        pool_.insert(pool_.end(), args.begin(), args.end());
        index_.emplace(h, id);
        return id;
    }

    AtomId add_auxiliary() {
        auto id = static_cast<AtomId>(entries_.size());
        entries_.push_back({kAuxiliary, 0, 0});
        return id;
    }

    [[nodiscard]] std::size_t   size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool          is_auxiliary(AtomId id) const { return entries_[id].pred == kAuxiliary; }
    [[nodiscard]] std::uint32_t predicate(AtomId id) const { return entries_[id].pred; }
    [[nodiscard]] std::span<const SymbolId> args(AtomId id) const {
        const auto& e = entries_[id];
        return {pool_.data() + e.offset, e.arity};
    }

private:
    struct Entry {
        std::uint32_t pred;
        std::uint32_t offset;
        std::uint32_t arity;
    };

    static std::uint64_t hash(std::uint32_t pred, std::span<const SymbolId> args) {
        std::uint64_t h = 1469598103934665603ULL ^ pred;
        for (auto a : args) {
            h = (h ^ static_cast<std::uint32_t>(a)) * 1099511628211ULL;
        }
        return (h ^ args.size()) * 1099511628211ULL;
    }
    [[nodiscard]] bool matches(AtomId id, std::uint32_t pred, std::span<const SymbolId> args) const {
        const auto& e = entries_[id];
        return e.pred == pred && e.arity == args.size() &&
               std::equal(args.begin(), args.end(), pool_.begin() + e.offset);
    }

    std::vector<Entry>                             entries_;
    std::vector<SymbolId>                          pool_;
    std::unordered_multimap<std::uint64_t, AtomId> index_;
};

/// Argument slot: a symbol id (>= 0) or variable index v encoded as -(v+1).
struct CompiledAtom {
    std::uint32_t         pred{0};
    std::vector<SymbolId> args;
};

struct CompiledRule {
    std::optional<CompiledAtom> head;
    std::vector<CompiledAtom>   positive;
    std::vector<CompiledAtom>   negative;
    std::vector<std::string>    variable_names;
    std::size_t                 source_index{0};

    [[nodiscard]] bool is_constraint() const noexcept { return !head.has_value(); }
};

inline constexpr bool is_variable_slot(SymbolId s) noexcept { return s < 0; }
inline constexpr std::size_t variable_of(SymbolId s) noexcept { return static_cast<std::size_t>(-(s + 1)); }

/// Symbols, predicates and atoms of one grounding context.
struct Universe {
    SymbolTable    symbols;
    PredicateTable predicates;
    AtomTable      atoms;

    CompiledAtom compile(const Atom& a, std::vector<std::string>& vars) {
        CompiledAtom out;
        out.pred = predicates.intern(a.signature());
        for (const auto& t : a.args) {
            if (t.is_variable()) {
                auto it = std::find(vars.begin(), vars.end(), t.name());
                auto v  = static_cast<std::size_t>(it - vars.begin());
                if (it == vars.end()) {
                    vars.push_back(t.name());
                }
                out.args.push_back(-static_cast<SymbolId>(v) - 1);
            }
            else {
                out.args.push_back(symbols.intern(t));
            }
        }
        return out;
    }

    CompiledRule compile(const Rule& r, std::size_t index) {
        CompiledRule out;
        out.source_index = index;
        // Positive body first so that variable indices follow body order.
        for (const auto& a : r.positive_body) {
            out.positive.push_back(compile(a, out.variable_names));
        }
        for (const auto& a : r.negative_body) {
            out.negative.push_back(compile(a, out.variable_names));
        }
        if (r.head) {
            out.head = compile(*r.head, out.variable_names);
        }
        return out;
    }

    AtomId intern(const Atom& a) {
        if (!a.is_ground()) {
            throw ContractViolation("cannot intern non-ground atom " + a.to_string());
        }
        std::vector<SymbolId> args;
        args.reserve(a.args.size());
        for (const auto& t : a.args) {
            args.push_back(symbols.intern(t));
        }
        return atoms.intern(predicates.intern(a.signature()), args);
    }

    [[nodiscard]] Atom decode(AtomId id) const {
        Atom out(predicates.predicate(atoms.predicate(id)).name);
        for (auto s : atoms.args(id)) {
            out.args.push_back(symbols.term(s));
        }
        return out;
    }
};

/// Truth values of atoms as seen by the grounder: 1 true, -1 false, 0 unassigned.
using Truth = std::int8_t;

struct MatchInput {
    const AtomTable*       atoms{nullptr};
    std::span<const Truth> truth;      ///< by atom id; missing entries are unassigned
    std::span<const char>  memory;     ///< accumulator atoms by id, may be empty
    std::span<const char>  facts;      ///< fact atoms by id
    std::span<const char>  head_preds; ///< by predicate id

    [[nodiscard]] Truth value(AtomId id) const { return id < truth.size() ? truth[id] : Truth{0}; }
    [[nodiscard]] bool  in_match(AtomId id) const {
        return value(id) > 0 || (id < memory.size() && memory[id]);
    }
    [[nodiscard]] bool is_fact(AtomId id) const { return id < facts.size() && facts[id]; }
    [[nodiscard]] bool is_head_pred(std::uint32_t p) const { return p < head_preds.size() && head_preds[p]; }
};

/// Matching atoms grouped by predicate and by (predicate, position, symbol).
struct MatchIndex {
    std::vector<std::vector<AtomId>>                     by_pred;
    std::unordered_map<std::uint64_t, std::vector<AtomId>> by_arg;

    static std::uint64_t key(std::uint32_t pred, std::size_t pos, SymbolId s) {
        return (static_cast<std::uint64_t>(pred) << 40) ^ (static_cast<std::uint64_t>(pos) << 32) ^
               static_cast<std::uint32_t>(s);
    }

    static MatchIndex build(const MatchInput& in, std::size_t num_preds) {
        MatchIndex out;
        out.by_pred.resize(num_preds);
        for (AtomId id = 0; id < in.atoms->size(); ++id) {
            if (!in.atoms->is_auxiliary(id) && in.in_match(id)) {
                auto pred = in.atoms->predicate(id);
                out.by_pred[pred].push_back(id);
                auto args = in.atoms->args(id);
                for (std::size_t j = 0; j < args.size(); ++j) {
                    out.by_arg[key(pred, j, args[j])].push_back(id);
                }
            }
        }
        return out;
    }
    [[nodiscard]] std::size_t count(std::uint32_t pred) const {
        return pred < by_pred.size() ? by_pred[pred].size() : 0;
    }
    [[nodiscard]] std::span<const AtomId> with_arg(std::uint32_t pred, std::size_t pos, SymbolId s) const {
        auto it = by_arg.find(key(pred, pos, s));
        return it == by_arg.end() ? std::span<const AtomId>() : std::span<const AtomId>(it->second);
    }
};

struct JoinFilter {
    KBound k{0};
    bool   inactive{false}; ///< drop inactive instances
    bool   weak{false};     ///< drop instances with a positive body atom assigned false
};

/// Enumerates substitutions σ of `rule` whose assigned literals L (positive
/// body literals with lσ matching) bind every variable with at most k
/// literals left over. Each σ is produced exactly once: the join tries every
/// literal both as matched and as deferred, and a deferred literal whose
/// instance turns out to match is rejected (that σ is found on the path
/// where it was matched).
class Join {
public:
    Join(const CompiledRule& rule, const MatchInput& in, const MatchIndex& index, JoinFilter filter)
        : rule_(rule), in_(in), index_(index), filter_(filter), binding_(rule.variable_names.size(), -1) {}

    template <class Emit>
    void run(Emit&& emit) {
        if (filter_.inactive) {
            for (const auto& l : rule_.positive) {
                if (!in_.is_head_pred(l.pred)) {
                    return;
                }
            }
        }
        done_.assign(rule_.positive.size(), 0);
        open_uses_.assign(binding_.size(), 0);
        lit_vars_.clear();
        for (const auto& l : rule_.positive) {
            lit_vars_.push_back(vars_of(l));
            for (auto v : lit_vars_.back()) {
                ++open_uses_[v];
            }
        }
        step(0, 0, emit);
    }

private:
    static std::vector<std::size_t> vars_of(const CompiledAtom& a) {
        std::vector<std::size_t> out;
        for (auto s : a.args) {
            if (is_variable_slot(s) && std::find(out.begin(), out.end(), variable_of(s)) == out.end()) {
                out.push_back(variable_of(s));
            }
        }
        return out;
    }

    [[nodiscard]] bool bound(const CompiledAtom& a) const {
        return std::none_of(a.args.begin(), a.args.end(),
                            [&](SymbolId s) { return is_variable_slot(s) && binding_[variable_of(s)] < 0; });
    }

    std::optional<AtomId> lookup(const CompiledAtom& a) {
        scratch_.clear();
        for (auto s : a.args) {
            scratch_.push_back(is_variable_slot(s) ? binding_[variable_of(s)] : s);
        }
        return in_.atoms->find(a.pred, scratch_);
    }

    /// A deferred literal must not match and, under the weak filter, must
    /// not be false.
    bool deferred_ok(const CompiledAtom& a) {
        auto id = lookup(a);
        if (!id) {
            return true;
        }
        return !in_.in_match(*id) && !(filter_.weak && in_.value(*id) < 0);
    }

    bool accept() {
        if (std::find(binding_.begin(), binding_.end(), -1) != binding_.end()) {
            return false;
        }
        for (auto i : deferred_) {
            if (!deferred_ok(rule_.positive[i])) {
                return false;
            }
        }
        if (filter_.inactive) {
            for (const auto& l : rule_.negative) {
                if (auto id = lookup(l); id && in_.is_fact(*id)) {
                    return false;
                }
            }
        }
        return true;
    }

    /// False when the partial binding cannot lead to an instance.
    bool viable() {
        for (std::size_t v = 0; v < binding_.size(); ++v) {
            if (binding_[v] < 0 && open_uses_[v] == 0) {
                return false;
            }
        }
        for (auto i : deferred_) {
            if (bound(rule_.positive[i]) && !deferred_ok(rule_.positive[i])) {
                return false;
            }
        }
        return true;
    }

    /// Next literal: the one with the most bound arguments, then the fewest
    /// matching atoms, then the lowest index.
    std::size_t pick() const {
        std::size_t best = rule_.positive.size(), best_bound = 0, best_count = 0;
        for (std::size_t i = 0; i < rule_.positive.size(); ++i) {
            if (done_[i]) {
                continue;
            }
            const auto& l = rule_.positive[i];
            std::size_t nb = 0;
            for (auto s : l.args) {
                nb += !is_variable_slot(s) || binding_[variable_of(s)] >= 0;
            }
            auto count = index_.count(l.pred);
            if (best == rule_.positive.size() || nb > best_bound || (nb == best_bound && count < best_count)) {
                best       = i;
                best_bound = nb;
                best_count = count;
            }
        }
        return best;
    }

    std::span<const AtomId> candidates(const CompiledAtom& lit) const {
        for (std::size_t j = 0; j < lit.args.size(); ++j) {
            auto s = lit.args[j];
            if (is_variable_slot(s)) {
                s = binding_[variable_of(s)];
            }
            if (s >= 0) {
                return index_.with_arg(lit.pred, j, s);
            }
        }
        return lit.pred < index_.by_pred.size() ? std::span<const AtomId>(index_.by_pred[lit.pred])
                                                : std::span<const AtomId>();
    }

    template <class Emit>
    void step(std::size_t depth, std::size_t deferred, Emit& emit) {
        if (!viable()) {
            return;
        }
        if (depth == rule_.positive.size()) {
            if (accept()) {
                emit(std::span<const SymbolId>(binding_));
            }
            return;
        }
        auto        i   = pick();
        const auto& lit = rule_.positive[i];
        const auto& vs  = lit_vars_[i];
        done_[i]        = 1;
        for (auto v : vs) {
            --open_uses_[v];
        }
        auto mark = bound_stack_.size();
        for (AtomId id : candidates(lit)) {
            auto args = in_.atoms->args(id);
            if (args.size() != lit.args.size() || (filter_.weak && in_.value(id) < 0)) {
                continue;
            }
            bool ok = true;
            for (std::size_t j = 0; j < args.size() && ok; ++j) {
                auto s = lit.args[j];
                if (!is_variable_slot(s)) {
                    ok = s == args[j];
                    continue;
                }
                auto& b = binding_[variable_of(s)];
                if (b < 0) {
                    b = args[j];
                    bound_stack_.push_back(variable_of(s));
                }
                else {
                    ok = b == args[j];
                }
            }
            if (ok) {
                step(depth + 1, deferred, emit);
            }
            while (bound_stack_.size() > mark) {
                binding_[bound_stack_.back()] = -1;
                bound_stack_.pop_back();
            }
        }
        if (filter_.k.admits(deferred + 1)) {
            deferred_.push_back(i);
            step(depth + 1, deferred + 1, emit);
            deferred_.pop_back();
        }
        for (auto v : vs) {
            ++open_uses_[v];
        }
        done_[i] = 0;
    }

    const CompiledRule&      rule_;
    const MatchInput&        in_;
    const MatchIndex&        index_;
    JoinFilter               filter_;
    std::vector<SymbolId>    binding_;
    std::vector<char>        done_;
    std::vector<std::size_t> open_uses_; ///< per variable: unprocessed literals containing it
    std::vector<std::vector<std::size_t>> lit_vars_;
    std::vector<std::size_t> bound_stack_;
    std::vector<std::size_t> deferred_;
    std::vector<SymbolId>    scratch_;
};

/// Join filter implementing a strategy for one rule.
[[nodiscard]] inline JoinFilter strategy_filter(const StrategyConfig& cfg, bool constraint) {
    if (cfg.family == StrategyConfig::Family::default_strategy) {
        return {0, true, false};
    }
    return {constraint ? cfg.k_co : cfg.k_ru, true, true};
}

/// Self-contained context for the value-level strategy API.
class LocalContext {
public:
    LocalContext(const Rule& r, const Assignment& a, const std::set<Atom>* memory, const ProgramMeta* meta) {
        rule_ = u_.compile(r, 0);
        auto set = [&](std::vector<Truth>& v, AtomId id, Truth t) {
            if (v.size() <= id) {
                v.resize(id + 1, 0);
            }
            v[id] = t;
        };
        for (const auto& x : a.negative) {
            set(truth_, u_.intern(x), -1);
        }
        for (const auto& x : a.positive) {
            set(truth_, u_.intern(x), 1);
        }
        if (memory) {
            for (const auto& x : *memory) {
                auto id = u_.intern(x);
                if (memory_.size() <= id) {
                    memory_.resize(id + 1, 0);
                }
                memory_[id] = 1;
            }
        }
        if (meta) {
            for (const auto& x : meta->fact_atoms) {
                auto id = u_.intern(x);
                if (facts_.size() <= id) {
                    facts_.resize(id + 1, 0);
                }
                facts_[id] = 1;
            }
            for (const auto& p : meta->head_predicates) {
                auto id = u_.predicates.intern(p);
                if (heads_.size() <= id) {
                    heads_.resize(id + 1, 0);
                }
                heads_[id] = 1;
            }
        }
        input_ = {&u_.atoms, truth_, memory_, facts_, heads_};
        index_ = MatchIndex::build(input_, u_.predicates.size());
    }

    std::set<GroundInstance> run(const Rule& origin, JoinFilter filter) {
        std::set<GroundInstance> out;
        Join(rule_, input_, index_, filter).run([&](std::span<const SymbolId> binding) {
            Substitution sigma;
            for (std::size_t v = 0; v < binding.size(); ++v) {
                sigma.emplace(rule_.variable_names[v], u_.symbols.term(binding[v]));
            }
            out.insert(make_instance(origin, std::move(sigma)));
        });
        return out;
    }

private:
    Universe           u_;
    CompiledRule       rule_;
    std::vector<Truth> truth_;
    std::vector<char>  memory_;
    std::vector<char>  facts_;
    std::vector<char>  heads_;
    MatchInput         input_;
    MatchIndex         index_;
};

} // namespace detail

// Strategy functions --------------------------------------------------------

struct StrategyResult {
    GrounderMemory           memory;
    std::set<GroundInstance> instances;
};

/// Instances rσ with some L ⊆ B+(r), vars(L) = vars(r), Lσ ⊆ match+ and
/// |B+(r) \ L| <= k. No inactivity or falsity filtering.
[[nodiscard]] inline std::set<GroundInstance> enumerate_candidates(const Rule& r, const Assignment& match_against,
                                                                   KBound k) {
    detail::LocalContext ctx(r, match_against, nullptr, nullptr);
    return ctx.run(r, {k, false, false});
}

/// Not inactive and of interest w.r.t. `a`; the memory becomes A+.
[[nodiscard]] inline StrategyResult ground_default(const Assignment& a, const GrounderMemory&, const Rule& r,
                                                   const ProgramMeta& meta) {
    detail::LocalContext ctx(r, a, nullptr, &meta);
    return {{a.positive}, ctx.run(r, {0, true, false})};
}

/// k_co-unassigned instances of constraints, k_ru-unassigned instances of
/// other rules; the memory becomes A+.
[[nodiscard]] inline StrategyResult ground_k_unassigned(const Assignment& a, const GrounderMemory&, const Rule& r,
                                                        KBound k_co, KBound k_ru, const ProgramMeta& meta) {
    detail::LocalContext ctx(r, a, nullptr, &meta);
    return {{a.positive}, ctx.run(r, {r.is_constraint() ? k_co : k_ru, true, true})};
}

/// Accumulator variant: memory G' = G ∪ A+, matching against G' ⊎ A.
[[nodiscard]] inline StrategyResult ground_accumulator(const Assignment& a, const GrounderMemory& g, const Rule& r,
                                                       const StrategyConfig& cfg, const ProgramMeta& meta) {
    GrounderMemory next = g;
    next.atoms.insert(a.positive.begin(), a.positive.end());
    detail::LocalContext ctx(r, a, &next.atoms, &meta);
    auto                 instances = ctx.run(r, detail::strategy_filter(cfg, r.is_constraint()));
    return {std::move(next), std::move(instances)};
}

/// Dispatches on the configured strategy family and accumulator flag.
[[nodiscard]] inline StrategyResult apply_strategy(const StrategyConfig& cfg, const Assignment& a,
                                                   const GrounderMemory& g, const Rule& r, const ProgramMeta& meta) {
    if (cfg.accumulator) {
        return ground_accumulator(a, g, r, cfg, meta);
    }
    if (cfg.family == StrategyConfig::Family::default_strategy) {
        return ground_default(a, g, r, meta);
    }
    return ground_k_unassigned(a, g, r, cfg.k_co, cfg.k_ru, meta);
}

// Engine-side grounder --------------------------------------------------------

using detail::AtomId;

/// A ground rule over interned atom ids.
struct GroundRule {
    std::optional<AtomId> head;
    std::vector<AtomId>   positive;
    std::vector<AtomId>   negative;
    std::size_t           origin{0}; ///< index into the program's rules
};

/// Incremental grounder owned by one solver engine. Non-ground rules are
/// grounded by the configured strategy against the solver's current truth
/// values; ground rules and facts are produced once by `initial()`. Already
/// emitted instances are never produced again.
class LazyGrounder {
public:
    LazyGrounder(const Program& p, StrategyConfig cfg) : program_(p), config_(cfg) {
        auto meta = program_meta(program_);
        for (const auto& pred : meta.head_predicates) {
            auto id = universe_.predicates.intern(pred);
            if (head_preds_.size() <= id) {
                head_preds_.resize(id + 1, 0);
            }
            head_preds_[id] = 1;
        }
        for (const auto& f : meta.fact_atoms) {
            auto id = universe_.intern(f);
            grow(facts_, id);
            facts_[id] = 1;
        }
        std::vector<detail::CompiledRule> all;
        for (std::size_t i = 0; i < program_.rules.size(); ++i) {
            const auto& r = program_.rules[i];
            all.push_back(universe_.compile(r, i));
            if (!r.is_ground()) {
                rules_.push_back(all.back());
            }
        }
        emitted_.resize(rules_.size());
        compute_domains(all);
    }

    [[nodiscard]] const StrategyConfig& config() const noexcept { return config_; }
    [[nodiscard]] detail::Universe&     universe() noexcept { return universe_; }
    [[nodiscard]] const detail::Universe& universe() const noexcept { return universe_; }
    [[nodiscard]] const Program&        program() const noexcept { return program_; }
    [[nodiscard]] bool is_fact(AtomId id) const { return id < facts_.size() && facts_[id]; }

    /// Facts and ground rules of the program.
    std::vector<GroundRule> initial() {
        std::vector<GroundRule> out;
        for (std::size_t i = 0; i < program_.rules.size(); ++i) {
            const auto& r = program_.rules[i];
            if (!r.is_ground()) {
                continue;
            }
            GroundRule g;
            g.origin = i;
            if (r.head) {
                g.head = universe_.intern(*r.head);
            }
            for (const auto& a : r.positive_body) {
                g.positive.push_back(universe_.intern(a));
            }
            for (const auto& a : r.negative_body) {
                g.negative.push_back(universe_.intern(a));
            }
            out.push_back(std::move(g));
        }
        return out;
    }

    /// One strategy call per non-ground rule; returns the new instances.
    std::vector<GroundRule> pass(std::span<const detail::Truth> truth) {
        if (config_.accumulator) {
            for (AtomId id = 0; id < truth.size(); ++id) {
                if (truth[id] > 0 && !universe_.atoms.is_auxiliary(id)) {
                    grow(memory_, id);
                    memory_[id] = 1;
                }
            }
        }
        std::span<const char> memory = config_.accumulator ? std::span<const char>(memory_) : std::span<const char>();
        return run(truth, memory, [&](const detail::CompiledRule& r) {
            return detail::strategy_filter(config_, r.is_constraint());
        });
    }

    /// Instances of interest (default strategy, no memory) not yet emitted.
    std::vector<GroundRule> missing_of_interest(std::span<const detail::Truth> truth) {
        return run(truth, {}, [](const detail::CompiledRule&) { return detail::JoinFilter{0, true, false}; });
    }

    /// False whenever no answer set can contain the atom (an argument lies
    /// outside the constants its position can take).
    [[nodiscard]] bool possible(std::uint32_t pred, std::span<const detail::SymbolId> args) const {
        if (pred >= domains_.size() || domains_[pred].size() != args.size()) {
            return true;
        }
        for (std::size_t j = 0; j < args.size(); ++j) {
            const auto& d = domains_[pred][j];
            if (static_cast<std::size_t>(args[j]) < d.size() && !d[static_cast<std::size_t>(args[j])]) {
                return false;
            }
        }
        return true;
    }

    /// False for atoms no rule can derive: the predicate heads no rule or an
    /// argument lies outside its position's domain.
    [[nodiscard]] bool possible(AtomId id) const {
        auto pred = universe_.atoms.predicate(id);
        if (pred >= head_preds_.size() || !head_preds_[pred]) {
            return false;
        }
        return possible(pred, universe_.atoms.args(id));
    }

    /// Body literal showing that a rule instance does not fire: a positive
    /// body atom that is false, or a negative body atom that is true.
    struct Witness {
        AtomId atom;
        bool   positive;
    };

    /// One witness per instance with head `u` that could fire in some answer
    /// set but was never emitted. Prefers falsified literals of low level;
    /// interns a positive body atom when none is falsified. nullopt when more
    /// than `cap` instances would be inspected or an instance has no witness.
    [[nodiscard]] std::optional<std::vector<Witness>> support_witnesses(AtomId u, std::span<const detail::Truth> truth,
                                                                      std::span<const int> levels,
                                                                      std::size_t cap = 100'000) {
        auto upred = universe_.atoms.predicate(u);
        auto uargs = std::vector<detail::SymbolId>(universe_.atoms.args(u).begin(), universe_.atoms.args(u).end());
        auto value = [&](AtomId id) { return id < truth.size() ? truth[id] : detail::Truth{0}; };
        auto level = [&](AtomId id) { return id < levels.size() ? levels[id] : 0; };
        std::vector<Witness> out;
        std::size_t          inspected = 0;
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            const auto& r = rules_[i];
            if (!r.head || r.head->pred != upred || r.head->args.size() != uargs.size()) {
                continue;
            }
            std::vector<detail::SymbolId> binding(r.variable_names.size(), -1);
            bool                          unifies = true;
            for (std::size_t j = 0; j < uargs.size() && unifies; ++j) {
                auto s = r.head->args[j];
                if (!detail::is_variable_slot(s)) {
                    unifies = s == uargs[j];
                }
                else if (auto& b = binding[detail::variable_of(s)]; b < 0 || b == uargs[j]) {
                    b = uargs[j];
                }
                else {
                    unifies = false;
                }
            }
            if (!unifies) {
                continue;
            }
            std::vector<std::size_t>                   open;
            std::vector<std::vector<detail::SymbolId>> ranges;
            for (std::size_t v = 0; v < binding.size(); ++v) {
                if (binding[v] >= 0) {
                    continue;
                }
                open.push_back(v);
                ranges.push_back(variable_range(r, v));
                if (ranges.back().empty()) {
                    open.clear();
                    break;
                }
            }
            if (open.size() != ranges.size()) {
                continue;
            }
            std::vector<std::size_t> digit(open.size(), 0);
            while (true) {
                for (std::size_t d = 0; d < open.size(); ++d) {
                    binding[open[d]] = ranges[d][digit[d]];
                }
                if (++inspected > cap) {
                    return std::nullopt;
                }
                if (!emitted_[i].contains(binding)) {
                    auto w = witness(r, binding, value, level);
                    if (!w) {
                        return std::nullopt;
                    }
                    if (w->atom != kNoWitness) {
                        out.push_back(*w);
                    }
                }
                std::size_t d = 0;
                while (d < open.size() && ++digit[d] == ranges[d].size()) {
                    digit[d++] = 0;
                }
                if (d == open.size()) {
                    break;
                }
            }
        }
        return out;
    }

    /// Accumulated memory as ground atoms.
    [[nodiscard]] GrounderMemory memory() const {
        GrounderMemory out;
        for (AtomId id = 0; id < memory_.size(); ++id) {
            if (memory_[id]) {
                out.atoms.insert(universe_.decode(id));
            }
        }
        return out;
    }

    [[nodiscard]] Rule decode(const GroundRule& g) const {
        Rule r;
        if (g.head) {
            r.head = universe_.decode(*g.head);
        }
        for (auto id : g.positive) {
            r.positive_body.push_back(universe_.decode(id));
        }
        for (auto id : g.negative) {
            r.negative_body.push_back(universe_.decode(id));
        }
        return r.normalize();
    }

private:
    struct BindingHash {
        std::size_t operator()(const std::vector<detail::SymbolId>& v) const noexcept {
            std::uint64_t h = 1469598103934665603ULL;
            for (auto x : v) {
                h = (h ^ static_cast<std::uint32_t>(x)) * 1099511628211ULL;
            }
            return static_cast<std::size_t>(h);
        }
    };

    static constexpr AtomId kNoWitness = std::numeric_limits<AtomId>::max();

    void compute_domains(const std::vector<detail::CompiledRule>& all) {
        auto nsym = universe_.symbols.size();
        domains_.assign(universe_.predicates.size(), {});
        for (std::uint32_t p = 0; p < domains_.size(); ++p) {
            domains_[p].assign(universe_.predicates.predicate(p).arity, std::vector<char>(nsym, 0));
        }
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& r : all) {
                if (!r.head) {
                    continue;
                }
                std::vector<std::vector<char>> range(r.variable_names.size(), std::vector<char>(nsym, 1));
                bool                           empty = false;
                for (const auto& a : r.positive) {
                    for (std::size_t j = 0; j < a.args.size(); ++j) {
                        const auto& d = domains_[a.pred][j];
                        auto        s = a.args[j];
                        if (detail::is_variable_slot(s)) {
                            auto& rv = range[detail::variable_of(s)];
                            for (std::size_t x = 0; x < nsym; ++x) {
                                rv[x] = static_cast<char>(rv[x] && d[x]);
                            }
                        }
                        else if (!d[static_cast<std::size_t>(s)]) {
                            empty = true;
                        }
                    }
                }
                if (empty) {
                    continue;
                }
                auto& head = domains_[r.head->pred];
                for (std::size_t j = 0; j < r.head->args.size(); ++j) {
                    auto s = r.head->args[j];
                    for (std::size_t x = 0; x < nsym; ++x) {
                        bool in = detail::is_variable_slot(s) ? range[detail::variable_of(s)][x] != 0
                                                              : static_cast<std::size_t>(s) == x;
                        if (in && !head[j][x]) {
                            head[j][x] = 1;
                            changed    = true;
                        }
                    }
                }
            }
        }
    }

    /// Constants variable `v` of `r` can take in any firing instance.
    [[nodiscard]] std::vector<detail::SymbolId> variable_range(const detail::CompiledRule& r, std::size_t v) const {
        std::vector<detail::SymbolId> out;
        for (std::size_t x = 0; x < universe_.symbols.size(); ++x) {
            bool ok = true;
            for (const auto& a : r.positive) {
                for (std::size_t j = 0; j < a.args.size() && ok; ++j) {
                    if (a.args[j] == -static_cast<detail::SymbolId>(v) - 1) {
                        const auto& d = domains_[a.pred][j];
                        ok            = x >= d.size() || d[x];
                    }
                }
            }
            if (ok) {
                out.push_back(static_cast<detail::SymbolId>(x));
            }
        }
        return out;
    }

    /// kNoWitness when the instance can never fire; nullopt when it could
    /// fire under the current assignment.
    template <class Value, class Level>
    std::optional<Witness> witness(const detail::CompiledRule& r, std::span<const detail::SymbolId> binding,
                                   Value&& value, Level&& level) {
        auto ground = [&](const detail::CompiledAtom& a) {
            scratch_.clear();
            for (auto s : a.args) {
                scratch_.push_back(detail::is_variable_slot(s) ? binding[detail::variable_of(s)] : s);
            }
        };
        std::optional<Witness>       best;
        int                          best_level = 0;
        const detail::CompiledAtom* fresh      = nullptr;
        auto consider = [&](AtomId id, bool positive) {
            if (!best || level(id) < best_level) {
                best       = Witness{id, positive};
                best_level = level(id);
            }
        };
        for (const auto& a : r.positive) {
            ground(a);
            auto id = universe_.atoms.find(a.pred, scratch_);
            bool head_pred = a.pred < head_preds_.size() && head_preds_[a.pred];
            if (!head_pred) {
                if (!id || !is_fact(*id)) {
                    return Witness{kNoWitness, true};
                }
                continue;
            }
            if (!possible(a.pred, scratch_)) {
                return Witness{kNoWitness, true};
            }
            if (!id) {
                fresh = fresh ? fresh : &a;
            }
            else if (value(*id) < 0) {
                consider(*id, true);
            }
        }
        for (const auto& a : r.negative) {
            ground(a);
            if (auto id = universe_.atoms.find(a.pred, scratch_)) {
                if (is_fact(*id)) {
                    return Witness{kNoWitness, true};
                }
                if (value(*id) > 0) {
                    consider(*id, false);
                }
            }
        }
        if (best) {
            return best;
        }
        if (fresh) {
            ground(*fresh);
            return Witness{universe_.atoms.intern(fresh->pred, scratch_), true};
        }
        return std::nullopt;
    }

    static void grow(std::vector<char>& v, AtomId id) {
        if (v.size() <= id) {
            v.resize(std::max<std::size_t>(id + 1, v.size() * 2), 0);
        }
    }

    template <class FilterFor>
    std::vector<GroundRule> run(std::span<const detail::Truth> truth, std::span<const char> memory,
                                FilterFor&& filter_for) {
        detail::MatchInput in{&universe_.atoms, truth, memory, facts_, head_preds_};
        auto               index = detail::MatchIndex::build(in, universe_.predicates.size());
        std::vector<std::pair<std::size_t, std::vector<detail::SymbolId>>> found;
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            detail::Join(rules_[i], in, index, filter_for(rules_[i])).run([&](std::span<const detail::SymbolId> b) {
                if (!emitted_[i].contains(std::vector<detail::SymbolId>(b.begin(), b.end()))) {
                    found.emplace_back(i, std::vector<detail::SymbolId>(b.begin(), b.end()));
                }
            });
        }
        // Interning happens after all joins: the atom table must not change
        // while the match index refers to it.
        std::vector<GroundRule> out;
        out.reserve(found.size());
        for (auto& [i, binding] : found) {
            if (!emitted_[i].insert(binding).second) {
                continue;
            }
            out.push_back(instantiate(rules_[i], binding));
        }
        return out;
    }

    AtomId instantiate(const detail::CompiledAtom& a, std::span<const detail::SymbolId> binding) {
        scratch_.clear();
        for (auto s : a.args) {
            scratch_.push_back(detail::is_variable_slot(s) ? binding[detail::variable_of(s)] : s);
        }
        return universe_.atoms.intern(a.pred, scratch_);
    }

    GroundRule instantiate(const detail::CompiledRule& r, std::span<const detail::SymbolId> binding) {
        GroundRule g;
        g.origin = r.source_index;
        if (r.head) {
            g.head = instantiate(*r.head, binding);
        }
        for (const auto& a : r.positive) {
            g.positive.push_back(instantiate(a, binding));
        }
        for (const auto& a : r.negative) {
            g.negative.push_back(instantiate(a, binding));
        }
        return g;
    }

    Program                                 program_;
    StrategyConfig                          config_;
    detail::Universe                        universe_;
    std::vector<detail::CompiledRule>       rules_;
    std::vector<char>                       facts_;
    std::vector<char>                       head_preds_;
    std::vector<char>                       memory_;
    std::vector<std::vector<std::vector<char>>> domains_; ///< [predicate][position][symbol]
    std::vector<std::unordered_set<std::vector<detail::SymbolId>, BindingHash>> emitted_;
    std::vector<detail::SymbolId>           scratch_;
};

} // namespace lazyasp
