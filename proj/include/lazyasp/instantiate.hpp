#pragma once

#include "oracle.hpp"

#include <map>
#include <unordered_map>

namespace lazyasp {

namespace detail {

/// Atoms of one predicate, indexed by (argument position, term).
class AtomIndex {
public:
    bool add(const Atom& a) {
        if (!seen_.insert(a).second) {
            return false;
        }
        auto& bucket = by_pred_[a.signature()];
        bucket.all.push_back(a);
        for (std::size_t i = 0; i < a.args.size(); ++i) {
            bucket.by_arg[{i, a.args[i]}].push_back(bucket.all.size() - 1);
        }
        return true;
    }

    [[nodiscard]] bool contains(const Atom& a) const { return seen_.contains(a); }

    /// Calls `f` on every stored atom that can match `pattern` under `sigma`.
    template <class F>
    void candidates(const Atom& pattern, const Substitution& sigma, F&& f) const {
        auto it = by_pred_.find(pattern.signature());
        if (it == by_pred_.end()) {
            return;
        }
        const auto& bucket = it->second;
        for (std::size_t i = 0; i < pattern.args.size(); ++i) {
            const auto& t = pattern.args[i];
            const Term* bound = &t;
            if (t.is_variable()) {
                auto s = sigma.find(t.name());
                if (s == sigma.end()) {
                    continue;
                }
                bound = &s->second;
            }
            auto b = bucket.by_arg.find({i, *bound});
            if (b == bucket.by_arg.end()) {
                return;
            }
            for (auto idx : b->second) {
                f(bucket.all[idx]);
            }
            return;
        }
        for (const auto& a : bucket.all) {
            f(a);
        }
    }

private:
    struct Bucket {
        std::vector<Atom>                                          all;
        std::map<std::pair<std::size_t, Term>, std::vector<std::size_t>> by_arg;
    };
    std::map<Predicate, Bucket> by_pred_;
    std::set<Atom>              seen_;
};

/// Extends `sigma` so that `pattern` becomes `ground`; false on a clash.
inline bool unify(const Atom& pattern, const Atom& ground, Substitution& sigma, std::vector<std::string>& bound) {
    for (std::size_t i = 0; i < pattern.args.size(); ++i) {
        const auto& t = pattern.args[i];
        if (!t.is_variable()) {
            if (!(t == ground.args[i])) {
                return false;
            }
            continue;
        }
        auto [it, fresh] = sigma.emplace(t.name(), ground.args[i]);
        if (fresh) {
            bound.push_back(t.name());
        }
        else if (!(it->second == ground.args[i])) {
            return false;
        }
    }
    return true;
}

/// Every substitution mapping the positive body of `r` into `index`.
template <class F>
void join_positive(const Rule& r, const AtomIndex& index, F&& emit) {
    std::vector<char> used(r.positive_body.size(), 0);
    Substitution      sigma;
    auto              bound_count = [&](const Atom& a) {
        std::size_t n = 0;
        for (const auto& t : a.args) {
            n += !t.is_variable() || sigma.contains(t.name());
        }
        return n;
    };
    auto step = [&](auto& self, std::size_t depth) -> void {
        if (depth == r.positive_body.size()) {
            emit(sigma);
            return;
        }
        std::size_t pick = r.positive_body.size();
        for (std::size_t i = 0; i < r.positive_body.size(); ++i) {
            if (!used[i] && (pick == r.positive_body.size() ||
                             bound_count(r.positive_body[i]) > bound_count(r.positive_body[pick]))) {
                pick = i;
            }
        }
        used[pick] = 1;
        index.candidates(r.positive_body[pick], sigma, [&](const Atom& g) {
            std::vector<std::string> bound;
            if (unify(r.positive_body[pick], g, sigma, bound)) {
                self(self, depth + 1);
            }
            for (const auto& v : bound) {
                sigma.erase(v);
            }
        });
        used[pick] = 0;
    };
    step(step, 0);
}

} // namespace detail

/// Bottom-up instantiation: the instances of every rule whose positive body
/// lies in the least model of the positive part and whose negative body
/// contains no fact. Same rules as simplify(full_ground(p)).
[[nodiscard]] inline GroundProgram instantiate(const Program& p, std::uint64_t cap = 1'000'000) {
    detail::AtomIndex possible;
    std::set<Atom>    facts;
    for (const auto& r : p.rules) {
        if (r.is_fact()) {
            facts.insert(*r.head);
            possible.add(*r.head);
        }
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& r : p.rules) {
            if (!r.head || r.is_fact()) {
                continue;
            }
            std::vector<Atom> heads;
            detail::join_positive(r, possible, [&](const Substitution& sigma) {
                auto h = apply_substitution(*r.head, sigma);
                if (!possible.contains(h)) {
                    heads.push_back(std::move(h));
                }
            });
            for (const auto& h : heads) {
                changed |= possible.add(h);
            }
        }
    }

    GroundProgram out;
    std::uint64_t count = 0;
    for (const auto& r : p.rules) {
        detail::join_positive(r, possible, [&](const Substitution& sigma) {
            auto g = apply_substitution(r, sigma);
            if (std::any_of(g.negative_body.begin(), g.negative_body.end(),
                            [&](const Atom& a) { return facts.contains(a); })) {
                return;
            }
            if (++count > cap) {
                throw ResourceError("instantiation exceeds the cap of " + std::to_string(cap));
            }
            out.add(std::move(g));
        });
    }
    out.canonicalize();
    return out;
}

} // namespace lazyasp
