#pragma once

#include "grounding.hpp"
#include "instantiate.hpp"

#include <atomic>
#include <chrono>

namespace lazyasp {

// Literals and nogoods --------------------------------------------------------

/// Signed atom: `T a` (atom assigned true) or `F a` (atom assigned false).
using Lit = std::uint32_t;

[[nodiscard]] constexpr Lit    true_lit(AtomId a) noexcept { return a << 1 | 1U; }
[[nodiscard]] constexpr Lit    false_lit(AtomId a) noexcept { return a << 1; }
[[nodiscard]] constexpr AtomId atom_of(Lit l) noexcept { return l >> 1; }
[[nodiscard]] constexpr bool   is_true_lit(Lit l) noexcept { return (l & 1U) != 0; }
[[nodiscard]] constexpr Lit    complement(Lit l) noexcept { return l ^ 1U; }

/// A set of signed literals that must not all hold at once.
struct Nogood {
    std::vector<Lit> literals;
    bool             learned{false};
};

/// Nogoods of a ground rule. Constraints yield one nogood. A rule with head h
/// and body representative `body` yields: body satisfied forces `body` true;
/// `body` true forces h; `body` true forces each body literal.
[[nodiscard]] inline std::vector<Nogood> rule_to_nogoods(const GroundRule& g, std::optional<AtomId> body) {
    if (g.head && g.positive.empty() && g.negative.empty()) {
        throw ContractViolation("facts are asserted directly, not translated to nogoods");
    }
    std::vector<Nogood> out;
    if (!g.head) {
        Nogood n;
        for (auto a : g.positive) {
            n.literals.push_back(true_lit(a));
        }
        for (auto a : g.negative) {
            n.literals.push_back(false_lit(a));
        }
        out.push_back(std::move(n));
        return out;
    }
    if (!body) {
        throw ContractViolation("a rule with a head needs a body representative");
    }
    auto   beta = *body;
    Nogood fires{{false_lit(beta)}};
    for (auto a : g.positive) {
        fires.literals.push_back(true_lit(a));
    }
    for (auto a : g.negative) {
        fires.literals.push_back(false_lit(a));
    }
    out.push_back(std::move(fires));
    out.push_back({{true_lit(beta), false_lit(*g.head)}});
    for (auto a : g.positive) {
        out.push_back({{true_lit(beta), false_lit(a)}});
    }
    for (auto a : g.negative) {
        out.push_back({{true_lit(beta), true_lit(a)}});
    }
    return out;
}

// Heuristic -------------------------------------------------------------------

struct HeuristicOptions {
    double      bump{1.0};
    double      decay{0.95};
    std::size_t decay_interval{100}; ///< conflicts between two decays
    double      moms_binary_weight{2.0};
    double      moms_other_weight{1.0};
};

struct HeuristicState {
    std::vector<double> activity;
    HeuristicOptions    options;
};

/// MOMs-style initial scores: occurrences in binary nogoods weigh
/// `moms_binary_weight`, all other occurrences `moms_other_weight`.
[[nodiscard]] inline HeuristicState init_heuristic_moms(std::span<const Nogood> nogoods, std::size_t num_atoms,
                                                        HeuristicOptions opts = {}) {
    HeuristicState h{std::vector<double>(num_atoms, 0.0), opts};
    for (const auto& n : nogoods) {
        double w = n.literals.size() == 2 ? opts.moms_binary_weight : opts.moms_other_weight;
        for (auto l : n.literals) {
            if (atom_of(l) < num_atoms) {
                h.activity[atom_of(l)] += w;
            }
        }
    }
    return h;
}

/// A body representative and the literals of the body it stands for.
struct BranchCandidate {
    AtomId              body;
    std::vector<AtomId> positive;
    std::vector<AtomId> negative;
};

/// Highest-activity eligible body atom (ties to the lower id), polarity true.
/// Eligible: unassigned, no positive body atom false, some body atom unassigned.
[[nodiscard]] inline std::optional<Lit> choose_branch(std::span<const detail::Truth> values, const HeuristicState& h,
                                                      std::span<const BranchCandidate> candidates) {
    auto value = [&](AtomId a) { return a < values.size() ? values[a] : detail::Truth{0}; };
    std::optional<AtomId> best;
    double                best_score = 0;
    for (const auto& c : candidates) {
        if (value(c.body) != 0) {
            continue;
        }
        bool blocked = std::any_of(c.positive.begin(), c.positive.end(), [&](AtomId a) { return value(a) < 0; });
        bool open    = std::any_of(c.positive.begin(), c.positive.end(), [&](AtomId a) { return value(a) == 0; }) ||
                    std::any_of(c.negative.begin(), c.negative.end(), [&](AtomId a) { return value(a) == 0; });
        if (blocked || !open) {
            continue;
        }
        double score = c.body < h.activity.size() ? h.activity[c.body] : 0.0;
        if (!best || score > best_score || (score == best_score && c.body < *best)) {
            best       = c.body;
            best_score = score;
        }
    }
    return best ? std::optional<Lit>(true_lit(*best)) : std::nullopt;
}

/// Nogood over the decision literals of the trail.
[[nodiscard]] inline Nogood enumeration_blocker(std::span<const Lit> trail, std::span<const std::size_t> level_starts) {
    Nogood n;
    for (auto start : level_starts) {
        n.literals.push_back(trail[start]);
    }
    return n;
}

// Solving ---------------------------------------------------------------------

struct Limits {
    double                   timeout_s{0};      ///< wall clock; 0 means none
    std::size_t              max_nogoods{0};    ///< 0 means none
    const std::atomic<bool>* stop{nullptr};
};

struct SolveStats {
    std::uint64_t guesses{0};
    std::uint64_t conflicts{0};
    std::uint64_t ground_rules{0};
    double        time_s{0};
    std::size_t   answer_sets{0};
    std::uint64_t rejected{0}; ///< total assignments that were not answer sets
};

struct SolveResult {
    std::vector<Interpretation> answer_sets;
    SolveStats                  stats;
    bool                        complete{false}; ///< search space exhausted
    bool                        timeout{false};
    bool                        memory_cap{false};

    [[nodiscard]] bool unsat() const noexcept { return complete && answer_sets.empty(); }
};

/// One lazy-grounding solver instance: grounder, nogood store, assignment,
/// heuristic. Not copyable across threads; one engine per run.
class Engine {
public:
    Engine(const Program& p, StrategyConfig cfg, HeuristicOptions heuristic = {})
        : grounder_(p, cfg), heuristic_{{}, heuristic} {}

    SolveResult solve(std::size_t max_answer_sets, const Limits& limits = {}) {
        using clock = std::chrono::steady_clock;
        auto        start = clock::now();
        SolveResult result;
        auto        elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };
        auto        finish  = [&]() -> SolveResult {
            result.stats.guesses      = guesses_;
            result.stats.conflicts    = conflicts_;
            result.stats.ground_rules = emitted_.size();
            result.stats.answer_sets  = result.answer_sets.size();
            result.stats.rejected     = rejected_;
            result.stats.time_s       = elapsed();
            return result;
        };

        auto initial = grounder_.initial();
        if (!add_ground_rules(initial)) {
            result.complete = true;
            return finish();
        }
        for (std::uint64_t iteration = 0;; ++iteration) {
            if ((limits.timeout_s > 0 && elapsed() > limits.timeout_s) ||
                (limits.stop && limits.stop->load(std::memory_order_relaxed))) {
                result.timeout = true;
                return finish();
            }
            if (limits.max_nogoods > 0 && nogoods_.size() > limits.max_nogoods) {
                result.memory_cap = true;
                return finish();
            }
            if (auto conflict = propagate()) {
                bool ok = closing_level_ != 0 ? reject() : resolve(*conflict);
                if (!ok) {
                    result.complete = true;
                    return finish();
                }
                continue;
            }
            if (closing_level_ != 0) {
                bool ok = true;
                if (confirm()) {
                    result.answer_sets.push_back(visible_atoms(current_interpretation()));
                    if (max_answer_sets != 0 && result.answer_sets.size() >= max_answer_sets) {
                        return finish();
                    }
                    auto blocker   = choice_blocker();
                    closing_level_ = 0;
                    backtrack(0);
                    ok = add_nogood(std::move(blocker.literals), false);
                }
                else {
                    ok = reject();
                }
                if (!ok) {
                    result.complete = true;
                    return finish();
                }
                continue;
            }
            if (epoch_ != grounded_epoch_) {
                grounded_epoch_ = epoch_;
                auto rules      = grounder_.pass(values_);
                if (!rules.empty()) {
                    if (!add_ground_rules(rules)) {
                        result.complete = true;
                        return finish();
                    }
                    continue;
                }
            }
            if (auto lit = choose_branch(values_, heuristic_, candidates_)) {
                ++guesses_;
                decide(*lit);
                continue;
            }
            auto missing = grounder_.missing_of_interest(values_);
            if (!missing.empty()) {
                if (!add_ground_rules(missing)) {
                    result.complete = true;
                    return finish();
                }
                continue;
            }
            close();
        }
    }

    // Introspection ----------------------------------------------------------

    [[nodiscard]] const LazyGrounder&         grounder() const noexcept { return grounder_; }
    [[nodiscard]] LazyGrounder&               grounder() noexcept { return grounder_; }
    [[nodiscard]] std::span<const detail::Truth> values() const noexcept { return values_; }
    [[nodiscard]] const std::vector<Nogood>&  nogoods() const noexcept { return nogoods_; }
    [[nodiscard]] const HeuristicState&       heuristic() const noexcept { return heuristic_; }
    [[nodiscard]] std::size_t                 decision_level() const noexcept { return level_starts_.size(); }
    [[nodiscard]] std::span<const Lit>        trail() const noexcept { return trail_; }
    [[nodiscard]] int level(AtomId a) const { return levels_[a]; }
    [[nodiscard]] std::optional<std::size_t> reason(AtomId a) const {
        return reasons_[a] < 0 ? std::nullopt : std::optional<std::size_t>(static_cast<std::size_t>(reasons_[a]));
    }
    [[nodiscard]] const std::vector<GroundRule>& emitted() const noexcept { return emitted_; }

    /// True iff no nogood is violated or unit-but-unpropagated, and every
    /// implied literal's reason has all other literals satisfied.
    [[nodiscard]] bool at_valid_fixpoint() const {
        for (const auto& n : nogoods_) {
            std::size_t sat = 0, open = 0;
            for (auto l : n.literals) {
                sat += satisfied(l) ? 1 : 0;
                open += value(atom_of(l)) == 0 ? 1 : 0;
            }
            if (sat == n.literals.size() || (open == 1 && sat + 1 == n.literals.size())) {
                return false;
            }
        }
        for (auto p : trail_) {
            auto r = reasons_[atom_of(p)];
            if (r < 0) {
                continue;
            }
            for (auto l : nogoods_[static_cast<std::size_t>(r)].literals) {
                if (l == complement(p) ? !falsified(l) : !satisfied(l)) {
                    return false;
                }
            }
        }
        return true;
    }

    // Low-level access used by the propagation and analysis tests.

    /// Registers `n` atoms without rules (test scaffolding).
    AtomId add_free_atoms(std::size_t n) {
        AtomId first = static_cast<AtomId>(grounder_.universe().atoms.size());
        for (std::size_t i = 0; i < n; ++i) {
            grounder_.universe().atoms.add_auxiliary();
        }
        sync_atoms();
        return first;
    }
    bool add_nogood_for_test(std::vector<Lit> lits) { return add_nogood(std::move(lits), false); }
    void decide_for_test(Lit l) { decide(l); }
    std::optional<std::size_t> propagate_for_test() { return propagate(); }
    bool resolve_for_test(std::size_t conflict) { return resolve(conflict); }

    struct Analysis {
        std::vector<Lit> learned;
        int              backjump_level{0};
    };
    /// First-UIP analysis of a violated nogood at the current decision level.
    [[nodiscard]] Analysis analyze(std::size_t conflict) {
        if (decision_level() == 0) {
            throw ContractViolation("conflict analysis needs a decision level above 0");
        }
        std::vector<Lit> learned{0};
        std::size_t      open  = 0;
        std::size_t      index = trail_.size();
        std::optional<Lit> pivot;
        int                current = static_cast<int>(decision_level());
        auto               reason  = conflict;
        std::vector<AtomId> touched;
        while (true) {
            for (auto q : nogoods_[reason].literals) {
                if (pivot && q == complement(*pivot)) {
                    continue;
                }
                auto v = atom_of(q);
                if (seen_[v] || levels_[v] == 0) {
                    continue;
                }
                seen_[v] = 1;
                touched.push_back(v);
                if (levels_[v] == current) {
                    ++open;
                }
                else {
                    learned.push_back(q);
                }
            }
            do {
                --index;
            } while (!seen_[atom_of(trail_[index])] || levels_[atom_of(trail_[index])] != current);
            pivot = trail_[index];
            seen_[atom_of(*pivot)] = 0;
            if (--open == 0) {
                break;
            }
            reason = static_cast<std::size_t>(reasons_[atom_of(*pivot)]);
        }
        for (auto v : touched) {
            seen_[v] = 0;
        }
        learned[0] = *pivot;
        for (auto l : learned) {
            heuristic_.activity[atom_of(l)] += heuristic_.options.bump;
        }
        int backjump = 0;
        for (std::size_t i = 1; i < learned.size(); ++i) {
            if (levels_[atom_of(learned[i])] > backjump) {
                backjump = levels_[atom_of(learned[i])];
                std::swap(learned[1], learned[i]);
            }
        }
        return {std::move(learned), backjump};
    }

private:
    [[nodiscard]] detail::Truth value(AtomId a) const { return values_[a]; }
    [[nodiscard]] bool          satisfied(Lit l) const { return values_[atom_of(l)] == (is_true_lit(l) ? 1 : -1); }
    [[nodiscard]] bool          falsified(Lit l) const { return values_[atom_of(l)] == (is_true_lit(l) ? -1 : 1); }
    [[nodiscard]] bool is_auxiliary(AtomId a) const { return grounder_.universe().atoms.is_auxiliary(a); }

    void sync_atoms() {
        auto n = grounder_.universe().atoms.size();
        if (values_.size() >= n) {
            return;
        }
        values_.resize(n, 0);
        levels_.resize(n, 0);
        reasons_.resize(n, -1);
        seen_.resize(n, 0);
        heuristic_.activity.resize(n, 0.0);
        watches_.resize(2 * n);
    }

    void assign(Lit l, std::int64_t reason) {
        auto a      = atom_of(l);
        values_[a]  = is_true_lit(l) ? 1 : -1;
        levels_[a]  = static_cast<int>(decision_level());
        reasons_[a] = reason;
        trail_.push_back(l);
        if (is_true_lit(l) && !is_auxiliary(a)) {
            ++epoch_;
        }
    }

    void decide(Lit l) {
        level_starts_.push_back(trail_.size());
        assign(l, -1);
    }

    void backtrack(std::size_t level) {
        if (level >= decision_level()) {
            return;
        }
        auto start = level_starts_[level];
        for (auto i = trail_.size(); i > start; --i) {
            auto a      = atom_of(trail_[i - 1]);
            values_[a]  = 0;
            reasons_[a] = -1;
            if (!is_auxiliary(a)) {
                ++epoch_;
            }
        }
        trail_.resize(start);
        level_starts_.resize(level);
        propagated_ = std::min(propagated_, trail_.size());
    }

    void attach(std::size_t idx) {
        const auto& lits = nogoods_[idx].literals;
        watches_[lits[0]].push_back(static_cast<std::uint32_t>(idx));
        watches_[lits[1]].push_back(static_cast<std::uint32_t>(idx));
    }

    /// Adds a nogood at any point of the search. Unit or violated nogoods
    /// backtrack to the level where they would have fired. Returns false iff
    /// the nogood store became unsatisfiable.
    bool add_nogood(std::vector<Lit> lits, bool learned) {
        std::sort(lits.begin(), lits.end());
        lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
        for (std::size_t i = 1; i < lits.size(); ++i) {
            if (atom_of(lits[i]) == atom_of(lits[i - 1])) {
                return true; // contains T a and F a: never violated
            }
        }
        if (lits.empty()) {
            return false;
        }
        auto rank = [&](Lit l) {
            // Unassigned first, then falsified, then satisfied by decreasing level.
            if (value(atom_of(l)) == 0) {
                return std::make_pair(0, 0);
            }
            if (falsified(l)) {
                return std::make_pair(1, -levels_[atom_of(l)]);
            }
            return std::make_pair(2, -levels_[atom_of(l)]);
        };
        std::stable_sort(lits.begin(), lits.end(), [&](Lit a, Lit b) { return rank(a) < rank(b); });
        auto open = static_cast<std::size_t>(
            std::count_if(lits.begin(), lits.end(), [&](Lit l) { return !satisfied(l); }));

        auto idx = nogoods_.size();
        nogoods_.push_back({std::move(lits), learned});
        const auto& ls = nogoods_[idx].literals;

        if (ls.size() == 1) {
            auto l = ls[0];
            if (value(atom_of(l)) == 0 || levels_[atom_of(l)] > 0) {
                backtrack(0);
                assign(complement(l), static_cast<std::int64_t>(idx));
                return true;
            }
            return !satisfied(l);
        }
        attach(idx);
        if (open >= 2) {
            return true;
        }
        if (open == 1) {
            auto u      = ls[0];
            auto second = static_cast<std::size_t>(levels_[atom_of(ls[1])]);
            if (value(atom_of(u)) == 0) {
                backtrack(second);
                assign(complement(u), static_cast<std::int64_t>(idx));
            }
            else if (static_cast<std::size_t>(levels_[atom_of(u)]) > second) {
                backtrack(second);
                assign(complement(u), static_cast<std::int64_t>(idx));
            }
            return true;
        }
        auto top    = static_cast<std::size_t>(levels_[atom_of(ls[0])]);
        auto second = static_cast<std::size_t>(levels_[atom_of(ls[1])]);
        if (top == 0) {
            return false;
        }
        if (top > second) {
            ++conflicts_;
            backtrack(second);
            assign(complement(ls[0]), static_cast<std::int64_t>(idx));
            return true;
        }
        backtrack(top);
        return resolve(idx);
    }

    /// Learns from `conflict`, backjumps and keeps propagating until a
    /// conflict-free fixpoint or a top-level conflict (returns false).
    bool resolve(std::size_t conflict) {
        while (true) {
            if (decision_level() == 0) {
                return false;
            }
            ++conflicts_;
            auto [learned, level] = analyze(conflict);
            if (heuristic_.options.decay_interval > 0 && conflicts_ % heuristic_.options.decay_interval == 0) {
                for (auto& a : heuristic_.activity) {
                    a *= heuristic_.options.decay;
                }
            }
            backtrack(static_cast<std::size_t>(level));
            auto idx = nogoods_.size();
            nogoods_.push_back({std::move(learned), true});
            const auto& ls = nogoods_[idx].literals;
            if (ls.size() >= 2) {
                attach(idx);
            }
            assign(complement(ls[0]), static_cast<std::int64_t>(idx));
            auto next = propagate();
            if (!next) {
                return true;
            }
            conflict = *next;
        }
    }

    std::optional<std::size_t> propagate() {
        while (propagated_ < trail_.size()) {
            Lit   p  = trail_[propagated_++];
            auto& ws = watches_[p];
            std::size_t keep = 0;
            for (std::size_t i = 0; i < ws.size(); ++i) {
                auto  idx  = ws[i];
                auto& lits = nogoods_[idx].literals;
                if (lits[0] == p) {
                    std::swap(lits[0], lits[1]);
                }
                if (falsified(lits[0])) {
                    ws[keep++] = idx;
                    continue;
                }
                bool moved = false;
                for (std::size_t k = 2; k < lits.size(); ++k) {
                    if (!satisfied(lits[k])) {
                        std::swap(lits[1], lits[k]);
                        watches_[lits[1]].push_back(idx);
                        moved = true;
                        break;
                    }
                }
                if (moved) {
                    continue;
                }
                ws[keep++] = idx;
                if (value(atom_of(lits[0])) == 0) {
                    assign(complement(lits[0]), idx);
                    continue;
                }
                for (++i; i < ws.size(); ++i) {
                    ws[keep++] = ws[i];
                }
                ws.resize(keep);
                propagated_ = trail_.size();
                return idx;
            }
            ws.resize(keep);
        }
        return std::nullopt;
    }

    /// Translates and adds a batch of ground rules; new atoms get MOMs scores
    /// from the batch. Returns false on a top-level conflict.
    bool add_ground_rules(std::vector<GroundRule>& rules) {
        auto                first_new = values_.size();
        std::vector<Nogood> batch;
        for (auto& g : rules) {
            if (g.head && g.positive.empty() && g.negative.empty()) {
                batch.push_back({{false_lit(*g.head)}});
            }
            else if (!g.head) {
                auto ng = rule_to_nogoods(g, std::nullopt);
                batch.insert(batch.end(), ng.begin(), ng.end());
            }
            else {
                auto beta = grounder_.universe().atoms.add_auxiliary();
                auto ng   = rule_to_nogoods(g, beta);
                batch.insert(batch.end(), ng.begin(), ng.end());
                candidates_.push_back({beta, g.positive, g.negative});
                if (bodies_of_.size() <= *g.head) {
                    bodies_of_.resize(*g.head + 1);
                }
                bodies_of_[*g.head].push_back(beta);
            }
            emitted_.push_back(std::move(g));
        }
        sync_atoms();
        fix_impossible(first_new);
        auto scores = init_heuristic_moms(batch, values_.size(), heuristic_.options);
        for (auto a = first_new; a < values_.size(); ++a) {
            heuristic_.activity[a] = scores.activity[a];
        }
        for (auto& n : batch) {
            if (!add_nogood(std::move(n.literals), false)) {
                return false;
            }
        }
        return true;
    }

    /// Atoms from `first` on that no rule can derive become false at level 0.
    /// They are fresh, so no nogood watches them yet.
    void fix_impossible(std::size_t first) {
        std::vector<Lit> fixed;
        for (auto a = static_cast<AtomId>(first); a < values_.size(); ++a) {
            if (values_[a] == 0 && !is_auxiliary(a) && !grounder_.possible(a)) {
                values_[a]  = -1;
                levels_[a]  = 0;
                reasons_[a] = -1;
                fixed.push_back(false_lit(a));
            }
        }
        if (fixed.empty()) {
            return;
        }
        auto root_end = level_starts_.empty() ? trail_.size() : level_starts_[0];
        trail_.insert(trail_.begin() + static_cast<std::ptrdiff_t>(root_end), fixed.begin(), fixed.end());
        for (auto& s : level_starts_) {
            s += fixed.size();
        }
        if (propagated_ >= root_end) {
            propagated_ += fixed.size();
        }
    }

    /// With every body decided and nothing of interest left to ground, an
    /// answer set extending the assignment makes all open atoms false. The
    /// closing assignment gets its own level and is not a choice.
    void close() {
        level_starts_.push_back(trail_.size());
        closing_level_ = decision_level();
        for (AtomId a = 0; a < values_.size(); ++a) {
            if (values_[a] == 0) {
                assign(false_lit(a), -1);
            }
        }
    }

    [[nodiscard]] Nogood choice_blocker() const {
        auto levels = std::span<const std::size_t>(level_starts_);
        return enumeration_blocker(trail_, closing_level_ != 0 ? levels.first(closing_level_ - 1) : levels);
    }

    /// The closed assignment is no answer set, so no answer set extends the
    /// choices. Each true atom without support yields a support nogood (it is
    /// true while every instance that could derive it has a false body); the
    /// choices themselves are blocked only if those nogoods change nothing.
    bool reject() {
        ++rejected_;
        std::vector<std::vector<Lit>> learned;
        for (auto u : unsupported_atoms()) {
            auto witnesses = grounder_.support_witnesses(u, values_, levels_);
            if (!witnesses) {
                continue;
            }
            std::vector<Lit> n{true_lit(u)};
            if (u < bodies_of_.size()) {
                for (auto beta : bodies_of_[u]) {
                    n.push_back(false_lit(beta));
                }
            }
            for (auto w : *witnesses) {
                n.push_back(w.positive ? false_lit(w.atom) : true_lit(w.atom));
            }
            learned.push_back(std::move(n));
        }
        auto blocker = choice_blocker();
        backtrack(closing_level_ - 1);
        closing_level_ = 0;
        sync_atoms();
        auto level = decision_level();
        auto size  = trail_.size();
        for (auto& n : learned) {
            if (!add_nogood(std::move(n), true)) {
                return false;
            }
        }
        if (decision_level() == level && trail_.size() == size) {
            return add_nogood(std::move(blocker.literals), false);
        }
        return true;
    }

    [[nodiscard]] Interpretation current_interpretation() const {
        Interpretation out;
        for (AtomId a = 0; a < values_.size(); ++a) {
            if (values_[a] > 0 && !is_auxiliary(a)) {
                out.insert(grounder_.universe().decode(a));
            }
        }
        return out;
    }

    /// True atoms outside the least model of the emitted rules whose
    /// negative body is false.
    [[nodiscard]] std::vector<AtomId> unsupported_atoms() const {
        std::vector<char> model(values_.size(), 0);
        bool              changed = true;
        while (changed) {
            changed = false;
            for (const auto& g : emitted_) {
                if (!g.head || model[*g.head]) {
                    continue;
                }
                bool fires = std::all_of(g.positive.begin(), g.positive.end(), [&](AtomId a) { return model[a] != 0; }) &&
                             std::none_of(g.negative.begin(), g.negative.end(), [&](AtomId a) { return values_[a] > 0; });
                if (fires) {
                    model[*g.head] = 1;
                    changed        = true;
                }
            }
        }
        std::vector<AtomId> out;
        for (AtomId a = 0; a < values_.size(); ++a) {
            if (!is_auxiliary(a) && values_[a] > 0 && !model[a]) {
                out.push_back(a);
            }
        }
        return out;
    }

    /// Answer-set check of the total assignment against the emitted ground
    /// program, using the oracle's definition.
    [[nodiscard]] bool confirm() const {
        if (!unsupported_atoms().empty()) {
            return false;
        }
        GroundProgram gp;
        for (const auto& g : emitted_) {
            gp.add(grounder_.decode(g));
        }
        return is_answer_set(gp, current_interpretation());
    }

    LazyGrounder                       grounder_;
    HeuristicState                     heuristic_;
    std::vector<detail::Truth>         values_;
    std::vector<int>                   levels_;
    std::vector<std::int64_t>          reasons_;
    std::vector<char>                  seen_;
    std::vector<Lit>                   trail_;
    std::vector<std::size_t>           level_starts_;
    std::size_t                        propagated_{0};
    std::vector<Nogood>                nogoods_;
    std::vector<std::vector<std::uint32_t>> watches_;
    std::vector<BranchCandidate>       candidates_;
    std::vector<std::vector<AtomId>>   bodies_of_; ///< body representatives by head atom
    std::vector<GroundRule>            emitted_;
    std::uint64_t                      guesses_{0};
    std::uint64_t                      conflicts_{0};
    std::uint64_t                      rejected_{0};
    std::size_t                        closing_level_{0};
    std::uint64_t                      epoch_{1};
    std::uint64_t                      grounded_epoch_{0};
};

/// How ground rules reach the solver: a lazy strategy, or full grounding upfront.
struct GroundingMode {
    bool           upfront{false};
    StrategyConfig strategy{};

    /// Strategy string or `upfront`.
    static GroundingMode parse(std::string_view s) {
        if (s == "upfront") {
            return {true, {}};
        }
        return {false, StrategyConfig::parse(s)};
    }
    [[nodiscard]] std::string to_string() const { return upfront ? "upfront" : strategy.to_string(); }
};

/// Finds up to `max_answer_sets` answer sets (0: all).
[[nodiscard]] inline SolveResult solve(const Program& p, const StrategyConfig& cfg, std::size_t max_answer_sets,
                                       const Limits& limits = {}, HeuristicOptions heuristic = {}) {
    Engine engine(p, cfg, heuristic);
    return engine.solve(max_answer_sets, limits);
}

/// Grounds `p` completely first (oracle grounding plus simplification),
/// then solves the ground program.
[[nodiscard]] inline SolveResult solve_upfront(const Program& p, std::size_t max_answer_sets, const Limits& limits = {},
                                               std::uint64_t cap = 1'000'000, HeuristicOptions heuristic = {}) {
    auto start = std::chrono::steady_clock::now();
    auto gp    = instantiate(p, cap);
    Program ground{gp.rules};
    auto    spent  = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Limits  remain = limits;
    if (remain.timeout_s > 0) {
        remain.timeout_s = std::max(remain.timeout_s - spent, 1e-9);
    }
    auto result = solve(ground, StrategyConfig::make_default(), max_answer_sets, remain, heuristic);
    result.stats.time_s += spent;
    return result;
}

[[nodiscard]] inline SolveResult solve(const Program& p, const GroundingMode& mode, std::size_t max_answer_sets,
                                       const Limits& limits = {}, std::uint64_t cap = 1'000'000) {
    return mode.upfront ? solve_upfront(p, max_answer_sets, limits, cap) : solve(p, mode.strategy, max_answer_sets, limits);
}

} // namespace lazyasp
