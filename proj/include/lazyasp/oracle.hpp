#pragma once

#include "program.hpp"

#include <deque>

namespace lazyasp {

using Interpretation = std::set<Atom>;

struct GroundProgram {
    std::vector<Rule> rules;
    std::set<Atom>    herbrand_base;

    void add(Rule r) {
        if (r.head) {
            herbrand_base.insert(*r.head);
        }
        herbrand_base.insert(r.positive_body.begin(), r.positive_body.end());
        herbrand_base.insert(r.negative_body.begin(), r.negative_body.end());
        rules.push_back(std::move(r));
    }
    /// Sorts rules and drops duplicates.
    void canonicalize() {
        std::sort(rules.begin(), rules.end());
        rules.erase(std::unique(rules.begin(), rules.end()), rules.end());
    }
};

struct FullGroundOptions {
    bool          filter_inactive{false};
    std::uint64_t cap{1'000'000}; ///< maximum number of candidate substitutions
};

/// All instances of every rule over the constants of `p`.
[[nodiscard]] inline GroundProgram full_ground(const Program& p, FullGroundOptions opts = {}) {
    auto meta = program_meta(p);
    std::vector<Term> constants(meta.constants.begin(), meta.constants.end());

    std::uint64_t total = 0;
    for (const auto& r : p.rules) {
        std::uint64_t count = 1;
        for (std::size_t i = 0; i < variables(r).size(); ++i) {
            if (constants.empty()) {
                count = 0;
                break;
            }
            if (count > opts.cap / constants.size() + 1) {
                throw ResourceError("full grounding exceeds the instantiation cap of " + std::to_string(opts.cap));
            }
            count *= constants.size();
        }
        total += count;
        if (total > opts.cap) {
            throw ResourceError("full grounding exceeds the instantiation cap of " + std::to_string(opts.cap));
        }
    }

    auto inactive = [&](const Rule& g) {
        for (const auto& a : g.positive_body) {
            if (!meta.head_predicates.contains(a.signature())) {
                return true;
            }
        }
        return std::any_of(g.negative_body.begin(), g.negative_body.end(),
                           [&](const Atom& a) { return meta.fact_atoms.contains(a); });
    };

    GroundProgram out;
    for (const auto& r : p.rules) {
        auto                     vars_set = variables(r);
        std::vector<std::string> vars(vars_set.begin(), vars_set.end());
        if (!vars.empty() && constants.empty()) {
            continue;
        }
        std::vector<std::size_t> odometer(vars.size(), 0);
        while (true) {
            Substitution sigma;
            for (std::size_t i = 0; i < vars.size(); ++i) {
                sigma.emplace(vars[i], constants[odometer[i]]);
            }
            Rule g = apply_substitution(r, sigma);
            if (!opts.filter_inactive || !inactive(g)) {
                out.add(std::move(g));
            }
            std::size_t pos = 0;
            while (pos < odometer.size() && ++odometer[pos] == constants.size()) {
                odometer[pos++] = 0;
            }
            if (pos == odometer.size()) {
                break;
            }
        }
    }
    out.canonicalize();
    return out;
}

/// Drops rules that can never fire: some positive body atom is outside the
/// least model of the program's positive part, or some negative body atom is
/// a fact. Answer sets are unchanged.
[[nodiscard]] inline GroundProgram simplify(const GroundProgram& gp) {
    std::set<Atom> facts;
    for (const auto& r : gp.rules) {
        if (r.is_fact()) {
            facts.insert(*r.head);
        }
    }
    std::set<Atom> possible;
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& r : gp.rules) {
            if (r.head && !possible.contains(*r.head) &&
                std::all_of(r.positive_body.begin(), r.positive_body.end(),
                            [&](const Atom& a) { return possible.contains(a); })) {
                possible.insert(*r.head);
                changed = true;
            }
        }
    }
    GroundProgram out;
    for (const auto& r : gp.rules) {
        bool dead = std::any_of(r.positive_body.begin(), r.positive_body.end(),
                                [&](const Atom& a) { return !possible.contains(a); }) ||
                    std::any_of(r.negative_body.begin(), r.negative_body.end(),
                                [&](const Atom& a) { return facts.contains(a); });
        if (!dead) {
            out.add(r);
        }
    }
    return out;
}

/// Rules whose body is satisfied by `i`.
[[nodiscard]] inline GroundProgram flp_reduct(const GroundProgram& gp, const Interpretation& i) {
    GroundProgram out;
    out.herbrand_base = gp.herbrand_base;
    for (const auto& r : gp.rules) {
        bool pos = std::all_of(r.positive_body.begin(), r.positive_body.end(), [&](const Atom& a) { return i.contains(a); });
        bool neg = std::none_of(r.negative_body.begin(), r.negative_body.end(), [&](const Atom& a) { return i.contains(a); });
        if (pos && neg) {
            out.rules.push_back(r);
        }
    }
    return out;
}

[[nodiscard]] inline bool satisfies(const Interpretation& i, const Rule& r) {
    bool pos = std::all_of(r.positive_body.begin(), r.positive_body.end(), [&](const Atom& a) { return i.contains(a); });
    bool neg = std::none_of(r.negative_body.begin(), r.negative_body.end(), [&](const Atom& a) { return i.contains(a); });
    return !(pos && neg) || (r.head && i.contains(*r.head));
}

[[nodiscard]] inline bool is_model(const GroundProgram& gp, const Interpretation& i) {
    return std::all_of(gp.rules.begin(), gp.rules.end(), [&](const Rule& r) { return satisfies(i, r); });
}

namespace detail {

/// Ground program over dense atom indices, for repeated least-model runs.
class IndexedProgram {
public:
    explicit IndexedProgram(const GroundProgram& gp) {
        for (const auto& a : gp.herbrand_base) {
            index_.emplace(a, atoms_.size());
            atoms_.push_back(a);
        }
        for (const auto& r : gp.rules) {
            Entry e;
            e.head = r.head ? static_cast<long>(id(*r.head)) : -1;
            for (const auto& a : r.positive_body) {
                e.pos.push_back(id(a));
            }
            for (const auto& a : r.negative_body) {
                e.neg.push_back(id(a));
            }
            rules_.push_back(std::move(e));
        }
        watch_.resize(atoms_.size());
        for (std::size_t r = 0; r < rules_.size(); ++r) {
            for (auto a : rules_[r].pos) {
                watch_[a].push_back(r);
            }
        }
    }

    [[nodiscard]] std::size_t            size() const noexcept { return atoms_.size(); }
    [[nodiscard]] const Atom&            atom(std::size_t i) const { return atoms_[i]; }
    [[nodiscard]] std::optional<std::size_t> find(const Atom& a) const {
        auto it = index_.find(a);
        return it == index_.end() ? std::nullopt : std::optional<std::size_t>(it->second);
    }

    /// Least model of the positive rules whose negative body avoids `blocked`.
    [[nodiscard]] std::vector<char> least_model(const std::vector<char>& blocked) const {
        std::vector<char>        model(atoms_.size(), 0);
        std::vector<std::size_t> missing(rules_.size());
        std::vector<char>        enabled(rules_.size(), 0);
        std::deque<std::size_t>  queue;
        for (std::size_t r = 0; r < rules_.size(); ++r) {
            const auto& e = rules_[r];
            enabled[r]    = std::none_of(e.neg.begin(), e.neg.end(), [&](std::size_t a) { return blocked[a]; });
            missing[r]    = e.pos.size();
            if (enabled[r] && missing[r] == 0 && e.head >= 0) {
                queue.push_back(static_cast<std::size_t>(e.head));
            }
        }
        while (!queue.empty()) {
            auto a = queue.front();
            queue.pop_front();
            if (model[a]) {
                continue;
            }
            model[a] = 1;
            for (auto r : watch_[a]) {
                // Duplicate body atoms are removed by Rule::normalize.
                if (--missing[r] == 0 && enabled[r] && rules_[r].head >= 0) {
                    queue.push_back(static_cast<std::size_t>(rules_[r].head));
                }
            }
        }
        return model;
    }

    [[nodiscard]] bool is_model(const std::vector<char>& i) const {
        for (const auto& e : rules_) {
            bool body = std::all_of(e.pos.begin(), e.pos.end(), [&](std::size_t a) { return i[a]; }) &&
                        std::none_of(e.neg.begin(), e.neg.end(), [&](std::size_t a) { return i[a]; });
            if (body && (e.head < 0 || !i[static_cast<std::size_t>(e.head)])) {
                return false;
            }
        }
        return true;
    }

    [[nodiscard]] bool is_answer_set(const std::vector<char>& i) const {
        return is_model(i) && least_model(i) == i;
    }

    [[nodiscard]] std::vector<std::size_t> negative_atoms() const {
        std::set<std::size_t> out;
        for (const auto& e : rules_) {
            out.insert(e.neg.begin(), e.neg.end());
        }
        return {out.begin(), out.end()};
    }

    [[nodiscard]] Interpretation decode(const std::vector<char>& bits) const {
        Interpretation out;
        for (std::size_t a = 0; a < bits.size(); ++a) {
            if (bits[a]) {
                out.insert(out.end(), atoms_[a]);
            }
        }
        return out;
    }

private:
    struct Entry {
        long                     head{-1};
        std::vector<std::size_t> pos;
        std::vector<std::size_t> neg;
    };
    std::size_t id(const Atom& a) const { return index_.at(a); }

    std::vector<Atom>                     atoms_;
    std::map<Atom, std::size_t>           index_;
    std::vector<Entry>                    rules_;
    std::vector<std::vector<std::size_t>> watch_;
};

} // namespace detail

/// I is an answer set iff it is a model and equals the least model of the
/// reduct with satisfied negative literals erased. For normal programs this
/// coincides with subset-minimality of I among models of the FLP-reduct.
[[nodiscard]] inline bool is_answer_set(const GroundProgram& gp, const Interpretation& i) {
    if (!std::includes(gp.herbrand_base.begin(), gp.herbrand_base.end(), i.begin(), i.end())) {
        return false;
    }
    detail::IndexedProgram ip(gp);
    std::vector<char>      bits(ip.size(), 0);
    for (const auto& a : i) {
        bits[*ip.find(a)] = 1;
    }
    return ip.is_answer_set(bits);
}

/// Subset-minimality checked literally: no proper subset of I is a model of
/// the FLP-reduct. Exponential in |I|; cross-check only.
[[nodiscard]] inline bool is_answer_set_by_minimality(const GroundProgram& gp, const Interpretation& i,
                                                      std::size_t max_atoms = 20) {
    if (!is_model(gp, i)) {
        return false;
    }
    if (i.size() > max_atoms) {
        throw ResourceError("interpretation too large for the subset check");
    }
    auto                 reduct = flp_reduct(gp, i);
    std::vector<Atom>    atoms(i.begin(), i.end());
    const std::uint64_t  full = (std::uint64_t{1} << atoms.size()) - 1;
    for (std::uint64_t mask = 0; mask < full; ++mask) {
        Interpretation sub;
        for (std::size_t b = 0; b < atoms.size(); ++b) {
            if (mask >> b & 1U) {
                sub.insert(atoms[b]);
            }
        }
        if (is_model(reduct, sub)) {
            return false;
        }
    }
    return true;
}

/// Checks a printed answer set, which omits the reserved complement atoms:
/// those are restored from the choice rules the set makes applicable.
[[nodiscard]] inline bool verify_answer_set(const Program& p, const Interpretation& visible, std::uint64_t cap = 1'000'000) {
    auto gp = full_ground(p, {true, cap});
    auto i  = visible;
    for (const auto& r : gp.rules) {
        if (r.head && is_reserved_predicate(r.head->predicate) &&
            std::all_of(r.positive_body.begin(), r.positive_body.end(), [&](const Atom& a) { return visible.contains(a); }) &&
            std::none_of(r.negative_body.begin(), r.negative_body.end(), [&](const Atom& a) { return visible.contains(a); })) {
            i.insert(*r.head);
        }
    }
    return is_answer_set(gp, i);
}

struct BruteForceOptions {
    std::uint64_t cap{1'000'000}; ///< instantiation cap for the full grounding
    std::size_t   max_atoms{24};  ///< maximum number of guessed atoms
};

/// All answer sets, by guessing the truth of every atom that occurs
/// negatively and checking the least model it induces.
[[nodiscard]] inline std::set<Interpretation> enumerate_answer_sets_bruteforce(const Program& p,
                                                                              BruteForceOptions opts = {}) {
    auto                   gp = simplify(full_ground(p, {false, opts.cap}));
    detail::IndexedProgram ip(gp);
    auto                   guess = ip.negative_atoms();
    if (guess.size() > opts.max_atoms) {
        throw ResourceError("brute force needs " + std::to_string(guess.size()) + " guessed atoms (max " +
                            std::to_string(opts.max_atoms) + ")");
    }
    std::set<Interpretation> out;
    std::vector<char>        blocked(ip.size(), 0);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << guess.size()); ++mask) {
        for (std::size_t b = 0; b < guess.size(); ++b) {
            blocked[guess[b]] = static_cast<char>(mask >> b & 1U);
        }
        auto model = ip.least_model(blocked);
        bool agrees = std::all_of(guess.begin(), guess.end(), [&](std::size_t a) { return model[a] == blocked[a]; });
        if (agrees && ip.is_answer_set(model)) {
            out.insert(ip.decode(model));
        }
    }
    return out;
}

/// All answer sets by testing every subset of the derivable non-fact atoms.
[[nodiscard]] inline std::set<Interpretation> enumerate_answer_sets_exhaustive(const Program& p,
                                                                              BruteForceOptions opts = {}) {
    auto                     gp = simplify(full_ground(p, {false, opts.cap}));
    detail::IndexedProgram   ip(gp);
    std::vector<char>        base(ip.size(), 0);
    std::vector<std::size_t> open;
    std::set<std::size_t>    heads;
    for (const auto& r : gp.rules) {
        if (r.is_fact()) {
            base[*ip.find(*r.head)] = 1;
        }
        else if (r.head) {
            heads.insert(*ip.find(*r.head));
        }
    }
    for (auto a : heads) {
        if (!base[a]) {
            open.push_back(a);
        }
    }
    if (open.size() > opts.max_atoms) {
        throw ResourceError("exhaustive check over " + std::to_string(open.size()) + " atoms exceeds the limit");
    }
    std::set<Interpretation> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << open.size()); ++mask) {
        auto bits = base;
        for (std::size_t b = 0; b < open.size(); ++b) {
            bits[open[b]] = static_cast<char>(mask >> b & 1U);
        }
        if (ip.is_answer_set(bits)) {
            out.insert(ip.decode(bits));
        }
    }
    return out;
}

} // namespace lazyasp
