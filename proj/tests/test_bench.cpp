#include <catch_amalgamated.hpp>

#include <lazyasp/lazyasp.hpp>

#include <fstream>
#include <sstream>

using namespace lazyasp;

namespace {

std::vector<const Rule*> facts_of(const Program& p, std::string_view pred) {
    std::vector<const Rule*> out;
    for (const auto& r : p.rules) {
        if (r.is_fact() && r.head->predicate == pred) {
            out.push_back(&r);
        }
    }
    return out;
}

std::int64_t arg(const Rule* r, std::size_t i) { return r->head->args[i].number(); }

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

RunRecord record(std::string cls, std::string strategy, double time, std::uint64_t guesses, bool timeout) {
    RunRecord r;
    r.problem  = "gc";
    r.class_id = std::move(cls);
    r.strategy = std::move(strategy);
    r.time_s   = time;
    r.guesses  = guesses;
    r.timeout  = timeout;
    return r;
}

} // namespace

TEST_CASE("graph colouring generator") {
    auto p = gen_graph_colouring({4, 3, 3, 1, 1}, 0);
    CHECK(facts_of(p, "node").size() == 4);
    CHECK(facts_of(p, "colour").size() == 3);
    auto edges = facts_of(p, "edge");
    REQUIRE(edges.size() == 3);
    std::set<std::pair<std::int64_t, std::int64_t>> distinct;
    for (auto e : edges) {
        CHECK(arg(e, 0) < arg(e, 1));
        CHECK(arg(e, 0) >= 1);
        CHECK(arg(e, 1) <= 4);
        distinct.insert({arg(e, 0), arg(e, 1)});
    }
    CHECK(distinct.size() == 3);

    auto triangle = gen_graph_colouring({3, 3, 3, 1, 1}, 0);
    auto tri      = facts_of(triangle, "edge");
    std::set<std::pair<std::int64_t, std::int64_t>> tri_edges;
    for (auto e : tri) {
        tri_edges.insert({arg(e, 0), arg(e, 1)});
    }
    CHECK(tri_edges == std::set<std::pair<std::int64_t, std::int64_t>>{{1, 2}, {1, 3}, {2, 3}});

    CHECK_THROWS_AS(gen_graph_colouring({3, 4, 3, 1, 1}, 0), ParameterError);
    CHECK_THROWS_AS(gen_graph_colouring({3, 3, 3, 1, 2}, 0), ParameterError);
}

TEST_CASE("G(n,m) edges are uniform") {
    Rng                       rng(99);
    std::map<std::pair<int, int>, int> counts;
    constexpr int             draws = 10'000;
    for (int i = 0; i < draws; ++i) {
        auto es = gnm_edges(10, 5, rng);
        REQUIRE(es.size() == 5);
        for (auto e : es) {
            ++counts[e];
        }
    }
    CHECK(counts.size() == 45);
    for (const auto& [e, c] : counts) {
        CHECK(std::abs(static_cast<double>(c) / draws - 5.0 / 45.0) < 0.01);
    }
}

TEST_CASE("house generator") {
    for (int T : {5, 10, 15}) {
        for (std::uint64_t i = 0; i < 300; ++i) {
            auto h = sample_house({T, 3, 11}, i);
            CHECK(h.P >= 2);
            CHECK(h.P <= T / 2 + 1);
            CHECK(h.T_long <= T);
            CHECK(static_cast<int>(h.long_things.size()) == h.T_long);
            for (int o : h.owner) {
                CHECK(o >= 1);
                CHECK(o <= h.P);
            }
            for (int c : h.legacy) {
                CHECK(c >= 0);
                CHECK(c <= (T + 1) / 2);
            }
        }
    }
    auto p = gen_house({5, 1, 11}, 2);
    auto h = sample_house({5, 1, 11}, 2);
    CHECK(static_cast<int>(facts_of(p, "person").size()) == h.P);
    CHECK(facts_of(p, "thing").size() == 5);
    CHECK(static_cast<int>(facts_of(p, "room").size()) == h.total_rooms());
    CHECK_THROWS_AS(gen_house({1, 1, 11}, 0), ParameterError);
}

TEST_CASE("long things follow a half-normal with scale T") {
    double sum = 0;
    int    n   = 2000;
    for (int i = 0; i < n; ++i) {
        sum += sample_house({10, 5, 11}, static_cast<std::uint64_t>(i)).T_long;
    }
    // E[min(10, |N(0,10)|)] is about 6.1.
    CHECK(sum / n > 5.5);
    CHECK(sum / n < 6.7);
}

TEST_CASE("generators are deterministic") {
    CHECK(gen_graph_colouring({20, 40, 3, 7, 11}, 3).to_string() ==
          gen_graph_colouring({20, 40, 3, 7, 11}, 3).to_string());
    CHECK(gen_graph_colouring({20, 40, 3, 7, 11}, 3).to_string() !=
          gen_graph_colouring({20, 40, 3, 7, 11}, 4).to_string());
    CHECK(gen_house({10, 7, 11}, 1).to_string() == gen_house({10, 7, 11}, 1).to_string());
    CHECK(derive_seed(1, "T5", 0) != derive_seed(1, "T5", 1));
    CHECK(derive_seed(1, "T5", 0) != derive_seed(2, "T5", 0));
}

TEST_CASE("generated instances parse and are safe with the encodings") {
    for (const auto& cls : default_gc_classes(1, 1)) {
        auto inst = gc_instance(cls, 0);
        CHECK_NOTHROW(parse_program(inst.program.to_string(), {true}));
    }
    for (const auto& cls : default_house_classes(1, 1)) {
        auto inst = house_instance(cls, 0);
        CHECK_NOTHROW(parse_program(inst.program.to_string(), {true}));
    }
}

TEST_CASE("shipped encoding files match the built-in encodings") {
    std::string dir = LAZYASP_SOURCE_DIR;
    CHECK(parse_program(slurp(dir + "/encodings/graph_colouring.lp")) == parse_program(kGraphColouringEncoding));
    CHECK(parse_program(slurp(dir + "/encodings/house.lp")) == parse_program(kHouseEncoding));
}

TEST_CASE("house instances are satisfiable at small sizes") {
    for (std::uint64_t i = 0; i < 5; ++i) {
        auto r = solve(house_instance({5, 1, 11}, i).program, GroundingMode::parse("k:0,0"), 1);
        CHECK(r.answer_sets.size() == 1);
    }
}

TEST_CASE("run matrix") {
    std::vector<BenchInstance> instances;
    for (const auto& cls : {GraphColouringClass{4, 3, 3, 1, 3}, GraphColouringClass{5, 4, 3, 1, 3}}) {
        for (std::uint64_t i = 0; i < 3; ++i) {
            instances.push_back(gc_instance(cls, i));
        }
    }
    std::vector<GroundingMode> modes{GroundingMode::parse("default"), GroundingMode::parse("k:inf,0")};
    BenchOptions               opts;
    opts.timeout_s = 10;
    opts.jobs      = 2;
    auto recs      = run_benchmark(instances, modes, opts);
    REQUIRE(recs.size() == 12);
    for (const auto& r : recs) {
        CHECK(r.completed());
        CHECK(r.answer_sets == 10);
    }
    opts.jobs  = 1;
    auto again = run_benchmark(instances, modes, opts);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(recs[i].guesses == again[i].guesses);
        CHECK(recs[i].strategy == again[i].strategy);
    }

    BenchOptions tight;
    tight.timeout_s = 1e-9;
    auto slow       = run_one(gc_instance({30, 100, 3, 1, 1}, 0), GroundingMode::parse("default"), tight);
    CHECK(slow.timeout);

    auto broken = run_one(gc_instance({30, 100, 3, 1, 1}, 0), GroundingMode::parse("upfront"),
                          BenchOptions{10, 10, 1, 5, 0});
    CHECK_FALSE(broken.error.empty());
    CHECK_THROWS_AS(run_benchmark(instances, modes, BenchOptions{10, 0, 1, 1, 0}), ParameterError);
}

TEST_CASE("medians") {
    CHECK(median({1, 2, 900}) == 2.0);
    CHECK(median({5, 7}) == 6.0);
    CHECK(median({4}) == 4.0);
    CHECK_FALSE(median({}).has_value());

    std::vector<RunRecord> recs{record("A", "default", 1, 5, false), record("A", "default", 2, 0, true),
                                record("A", "default", 900, 7, false), record("B", "default", 3, 1, false)};
    auto s = summarize_medians(recs);
    REQUIRE(s.size() == 2);
    CHECK(s[0].class_id == "A");
    CHECK(s[0].median_time_s == 2.0);
    CHECK(s[0].median_guesses == 6.0);
    CHECK(s[0].completed == 2);
    CHECK(s[0].timeouts == 1);
    CHECK(s[1].median_time_s == 3.0);
}

TEST_CASE("CSV output") {
    std::vector<RunRecord> recs{record("V4_E3_C3", "k:inf,0", 0.5, 3, false)};
    std::ostringstream     out;
    write_results_csv(out, recs);
    std::istringstream in(out.str());
    std::string        header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "problem,class,instance,strategy,answersets,guesses,conflicts,time_s,timeout");
    CHECK(row.rfind("gc,V4_E3_C3,0,\"k:inf,0\",0,3,0,", 0) == 0);

    std::ostringstream sum;
    write_summary_csv(sum, summarize_medians(recs));
    CHECK(sum.str().rfind("problem,class,strategy,median_time_s,median_guesses,completed,timeouts\n", 0) == 0);
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a\"b") == "\"a\"\"b\"");
}
