#include <catch_amalgamated.hpp>

#include "support/random_programs.hpp"

using namespace lazyasp;

namespace {

std::set<Lit> as_set(const std::vector<Lit>& v) { return {v.begin(), v.end()}; }

std::set<std::set<Lit>> nogood_sets(const std::vector<Nogood>& ns) {
    std::set<std::set<Lit>> out;
    for (const auto& n : ns) {
        out.insert(as_set(n.literals));
    }
    return out;
}

std::set<Interpretation> solve_all(std::string_view text, const GroundingMode& mode) {
    auto r = solve(parse_program(text), mode, 0);
    REQUIRE(r.complete);
    return {r.answer_sets.begin(), r.answer_sets.end()};
}

Interpretation interp(std::initializer_list<std::string_view> atoms) {
    Interpretation out;
    for (auto a : atoms) {
        out.insert(*parse_program(std::string(a) + ".").rules[0].head);
    }
    return out;
}

bool violated_by(const std::vector<Lit>& nogood, std::uint32_t bits, AtomId first) {
    return std::all_of(nogood.begin(), nogood.end(), [&](Lit l) {
        bool v = (bits >> (atom_of(l) - first)) & 1U;
        return v == is_true_lit(l);
    });
}

} // namespace

TEST_CASE("rule_to_nogoods") {
    // h <- b, not c with atoms h=0, b=1, c=2 and body atom 3.
    GroundRule g{0, {1}, {2}, 0};
    auto       ns = rule_to_nogoods(g, 3);
    CHECK(nogood_sets(ns) == std::set<std::set<Lit>>{
                                 {false_lit(3), true_lit(1), false_lit(2)},
                                 {true_lit(3), false_lit(0)},
                                 {true_lit(3), false_lit(1)},
                                 {true_lit(3), true_lit(2)},
                             });

    GroundRule c{std::nullopt, {1}, {}, 0};
    CHECK(nogood_sets(rule_to_nogoods(c, std::nullopt)) == std::set<std::set<Lit>>{{true_lit(1)}});

    GroundRule fact{0, {}, {}, 0};
    CHECK_THROWS_AS(rule_to_nogoods(fact, 3), ContractViolation);
    CHECK_THROWS_AS(rule_to_nogoods(g, std::nullopt), ContractViolation);
}

TEST_CASE("unit propagation") {
    SECTION("a unit nogood forces the remaining literal") {
        Engine e(Program{}, StrategyConfig::make_default());
        auto   a = e.add_free_atoms(2), b = a + 1;
        REQUIRE(e.add_nogood_for_test({true_lit(a), true_lit(b)}));
        e.decide_for_test(true_lit(a));
        CHECK_FALSE(e.propagate_for_test());
        CHECK(e.values()[b] < 0);
        CHECK(e.reason(b).has_value());
        CHECK(e.at_valid_fixpoint());
    }
    SECTION("complementary units conflict") {
        Engine e(Program{}, StrategyConfig::make_default());
        auto   a = e.add_free_atoms(2), b = a + 1;
        REQUIRE(e.add_nogood_for_test({true_lit(a), true_lit(b)}));
        REQUIRE(e.add_nogood_for_test({true_lit(a), false_lit(b)}));
        e.decide_for_test(true_lit(a));
        CHECK(e.propagate_for_test().has_value());
    }
    SECTION("nothing applicable leaves the assignment unchanged") {
        Engine e(Program{}, StrategyConfig::make_default());
        auto   a = e.add_free_atoms(3);
        REQUIRE(e.add_nogood_for_test({true_lit(a), true_lit(a + 1), true_lit(a + 2)}));
        e.decide_for_test(true_lit(a));
        auto before = std::vector<Lit>(e.trail().begin(), e.trail().end());
        CHECK_FALSE(e.propagate_for_test());
        CHECK(std::vector<Lit>(e.trail().begin(), e.trail().end()) == before);
    }
}

TEST_CASE("conflict analysis") {
    SECTION("a conflict caused by one decision is learned as a unary nogood") {
        Engine e(Program{}, StrategyConfig::make_default());
        auto   a = e.add_free_atoms(2), b = a + 1;
        REQUIRE(e.add_nogood_for_test({true_lit(a), true_lit(b)}));
        REQUIRE(e.add_nogood_for_test({true_lit(a), false_lit(b)}));
        e.decide_for_test(true_lit(a));
        auto conflict = e.propagate_for_test();
        REQUIRE(conflict);
        auto before = e.heuristic().activity[a];
        auto res    = e.analyze(*conflict);
        CHECK(res.learned == std::vector<Lit>{true_lit(a)});
        CHECK(res.backjump_level == 0);
        CHECK(e.heuristic().activity[a] > before);
    }
    SECTION("no analysis at level 0") {
        Engine e(Program{}, StrategyConfig::make_default());
        auto   a = e.add_free_atoms(1);
        REQUIRE(e.add_nogood_for_test({true_lit(a)}));
        CHECK_FALSE(e.add_nogood_for_test({false_lit(a)}));
        Engine f(Program{}, StrategyConfig::make_default());
        (void)f.add_free_atoms(1);
        CHECK_THROWS_AS(f.analyze(0), ContractViolation);
    }
}

TEST_CASE("learned nogoods are asserting consequences on random runs") {
    std::mt19937_64 rng(23);
    int             analysed = 0;
    for (int run = 0; run < 400; ++run) {
        Engine e(Program{}, StrategyConfig::make_default());
        constexpr std::size_t n = 8;
        auto                  first = e.add_free_atoms(n);
        std::vector<std::vector<Lit>> input;
        bool                          ok = true;
        for (int i = 0; i < 14 && ok; ++i) {
            std::vector<Lit> lits;
            auto             size = 2 + rng() % 2;
            for (std::size_t j = 0; j < size; ++j) {
                auto a = first + static_cast<AtomId>(rng() % n);
                lits.push_back(rng() % 2 ? true_lit(a) : false_lit(a));
            }
            input.push_back(lits);
            ok = e.add_nogood_for_test(lits);
        }
        if (!ok) {
            continue;
        }
        for (int step = 0; step < 20; ++step) {
            auto conflict = e.propagate_for_test();
            if (!conflict) {
                REQUIRE(e.at_valid_fixpoint());
                std::vector<AtomId> open;
                for (AtomId a = first; a < first + n; ++a) {
                    if (e.values()[a] == 0) {
                        open.push_back(a);
                    }
                }
                if (open.empty()) {
                    break;
                }
                auto a = open[rng() % open.size()];
                e.decide_for_test(rng() % 2 ? true_lit(a) : false_lit(a));
                continue;
            }
            if (e.decision_level() == 0) {
                break;
            }
            auto res     = e.analyze(*conflict);
            int  current = static_cast<int>(e.decision_level());
            int  at_top = 0, second = 0;
            for (auto l : res.learned) {
                auto lv = e.level(atom_of(l));
                CHECK(e.values()[atom_of(l)] == (is_true_lit(l) ? 1 : -1));
                if (lv == current) {
                    ++at_top;
                }
                else {
                    second = std::max(second, lv);
                }
            }
            CHECK(at_top == 1);
            CHECK(res.backjump_level == second);
            for (std::uint32_t bits = 0; bits < (1U << n); ++bits) {
                bool model = std::none_of(input.begin(), input.end(),
                                          [&](const auto& ng) { return violated_by(ng, bits, first); });
                if (model) {
                    CHECK_FALSE(violated_by(res.learned, bits, first));
                }
            }
            ++analysed;
            if (!e.resolve_for_test(*conflict)) {
                break;
            }
        }
    }
    CHECK(analysed > 100);
}

TEST_CASE("MOMs initial scores") {
    std::vector<Nogood> ns{{{true_lit(0), true_lit(1)}}, {{false_lit(0), true_lit(2)}}, {{true_lit(1), true_lit(2), true_lit(3)}}};
    auto                h = init_heuristic_moms(ns, 5);
    CHECK(h.activity[0] == 4.0);
    CHECK(h.activity[1] == 3.0);
    CHECK(h.activity[3] == 1.0);
    CHECK(h.activity[4] == 0.0);
}

TEST_CASE("choose_branch") {
    std::vector<detail::Truth>   values(6, 0);
    std::vector<BranchCandidate> cands{{4, {0}, {}}, {5, {1}, {}}};
    HeuristicState               h{{0, 0, 0, 0, 1.0, 3.0}, {}};
    CHECK(choose_branch(values, h, cands) == true_lit(5));

    h.activity = {0, 0, 0, 0, 2.0, 2.0};
    CHECK(choose_branch(values, h, cands) == true_lit(4));

    values[1] = -1;
    CHECK(choose_branch(values, h, cands) == true_lit(4));

    std::fill(values.begin(), values.end(), detail::Truth{1});
    CHECK_FALSE(choose_branch(values, h, cands));
}

TEST_CASE("enumeration_blocker") {
    std::vector<Lit> trail{false_lit(0), true_lit(3), false_lit(1), true_lit(4)};
    CHECK(enumeration_blocker(trail, std::vector<std::size_t>{1}).literals == std::vector<Lit>{true_lit(3)});
    CHECK(enumeration_blocker(trail, std::vector<std::size_t>{1, 3}).literals ==
          std::vector<Lit>{true_lit(3), true_lit(4)});
    CHECK(enumeration_blocker(trail, std::vector<std::size_t>{}).literals.empty());
}

TEST_CASE("small programs under every configuration") {
    for (const auto& mode : testing::strategy_matrix()) {
        INFO(mode.to_string());
        CHECK(solve_all("a :- not b. b :- not a.", mode) == std::set<Interpretation>{interp({"a"}), interp({"b"})});
        CHECK(solve_all("a :- not a.", mode).empty());
        CHECK(solve_all("q(1). p(X) :- q(X).", mode) == std::set<Interpretation>{interp({"q(1)", "p(1)"})});
        CHECK(solve_all("a :- b. b :- a.", mode) == std::set<Interpretation>{Interpretation{}});

        auto triangle = with_encoding(parse_program("node(1). node(2). node(3). colour(1). colour(2). colour(3). "
                                                    "edge(1,2). edge(1,3). edge(2,3)."),
                                      kGraphColouringEncoding);
        auto r = solve(triangle, mode, 10);
        CHECK(r.answer_sets.size() == 6);
        CHECK(r.complete);
    }
    auto r = solve(parse_program("a :- not b. b :- not a."), GroundingMode::parse("default"), 10);
    CHECK(r.stats.guesses >= 1);
    CHECK(r.stats.answer_sets == 2);
}

TEST_CASE("a unique model is found without guessing and enumeration stops") {
    auto r = solve(parse_program("q(1). q(2). p(X) :- q(X), not r(X). r(2)."), GroundingMode::parse("default"), 0);
    CHECK(r.complete);
    CHECK(r.stats.guesses == 0);
    REQUIRE(r.answer_sets.size() == 1);
    CHECK(r.answer_sets[0] == interp({"q(1)", "q(2)", "p(1)", "r(2)"}));
}

TEST_CASE("answer sets found per configuration match the brute-force oracle") {
    testing::ProgramSampler sampler(77);
    for (int i = 0; i < 150; ++i) {
        auto p        = sampler.sample();
        auto expected = testing::visible(enumerate_answer_sets_bruteforce(p));
        for (const auto& mode : testing::strategy_matrix()) {
            auto r = solve(p, mode, 0);
            INFO(p.to_string() << "\n" << mode.to_string());
            REQUIRE(r.complete);
            CHECK(std::set<Interpretation>(r.answer_sets.begin(), r.answer_sets.end()) == expected);
            CHECK(r.answer_sets.size() == expected.size());
            for (const auto& s : r.answer_sets) {
                CHECK(verify_answer_set(p, s));
            }
        }
    }
}

TEST_CASE("no nogood is violated when an answer set is reported") {
    testing::ProgramSampler sampler(88);
    for (int i = 0; i < 100; ++i) {
        auto   p = sampler.sample();
        Engine e(p, StrategyConfig::make_k(1, 1));
        if (e.solve(1).answer_sets.empty()) {
            continue;
        }
        for (const auto& n : e.nogoods()) {
            CHECK_FALSE(std::all_of(n.literals.begin(), n.literals.end(), [&](Lit l) {
                return e.values()[atom_of(l)] == (is_true_lit(l) ? 1 : -1);
            }));
        }
    }
}

TEST_CASE("limits") {
    auto k5 = with_encoding(gen_graph_colouring({5, 10, 3, 1, 1}, 0), kGraphColouringEncoding);
    auto r  = solve(k5, GroundingMode::parse("default"), 10);
    CHECK(r.unsat());

    Limits none;
    none.timeout_s = 1e-9;
    auto t         = solve(k5, GroundingMode::parse("default"), 10, none);
    CHECK(t.timeout);
    CHECK_FALSE(t.complete);

    Limits mem;
    mem.max_nogoods = 5;
    auto m          = solve(k5, GroundingMode::parse("k:inf,inf"), 10, mem);
    CHECK(m.memory_cap);
    CHECK(m.answer_sets.empty());

    CHECK_THROWS_AS(solve(k5, GroundingMode::parse("upfront"), 10, {}, 10), ResourceError);
}
