#pragma once

#include "parser.hpp"
#include "solver.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <random>
#include <ostream>
#include <sstream>
#include <thread>

namespace lazyasp {

// Random numbers --------------------------------------------------------------

/// splitmix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

[[nodiscard]] inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view class_id, std::uint64_t index) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : class_id) {
        h = (h ^ c) * 1099511628211ULL;
    }
    return mix64(mix64(seed) ^ mix64(h) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// mt19937_64 with distributions written out here, so that streams are the
/// same on every standard library (the std:: distributions are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [lo, hi], by rejection.
    std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
        if (hi < lo) {
            throw ParameterError("empty range");
        }
        auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) {
            return static_cast<std::int64_t>(next());
        }
        auto limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return lo + static_cast<std::int64_t>(x % span);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return unit() < p; }

    /// Box-Muller.
    double normal(double mean, double sd) {
        double u1 = 1.0 - unit();
        double u2 = unit();
        return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Partial Fisher-Yates: the first k entries become a uniform k-sample.
    template <class T>
    void sample_prefix(std::vector<T>& v, std::size_t k) {
        for (std::size_t i = 0; i < k && i + 1 < v.size(); ++i) {
            auto j = static_cast<std::size_t>(uniform(static_cast<std::int64_t>(i), static_cast<std::int64_t>(v.size() - 1)));
            std::swap(v[i], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Instance classes --------------------------------------------------------------

struct GraphColouringClass {
    int           V{10};
    int           E{20};
    int           C{3};
    std::uint64_t seed{1};
    int           replicas{11};

    [[nodiscard]] std::string id() const {
        return "V" + std::to_string(V) + "_E" + std::to_string(E) + "_C" + std::to_string(C);
    }
    void validate() const {
        if (V < 1 || C < 1 || E < 0 || static_cast<std::int64_t>(E) > static_cast<std::int64_t>(V) * (V - 1) / 2) {
            throw ParameterError("graph colouring class " + id() + " is out of range");
        }
        if (replicas < 1 || replicas % 2 == 0) {
            throw ParameterError("replicas must be odd");
        }
    }
};

struct HouseClass {
    int           T{5};
    std::uint64_t seed{1};
    int           replicas{11};

    [[nodiscard]] std::string id() const { return "T" + std::to_string(T); }
    void validate() const {
        if (T < 2) {
            throw ParameterError("house class needs at least 2 things");
        }
        if (replicas < 1 || replicas % 2 == 0) {
            throw ParameterError("replicas must be odd");
        }
    }
};

namespace detail {

inline Rule fact(std::string pred, std::initializer_list<std::int64_t> args) {
    Atom a(std::move(pred));
    for (auto x : args) {
        a.args.push_back(Term::integer(x));
    }
    return Rule{a, {}, {}};
}

} // namespace detail

/// Edges of a G(n,m) graph, each as (u, v) with u < v, sorted.
[[nodiscard]] inline std::vector<std::pair<int, int>> gnm_edges(int V, int E, Rng& rng) {
    std::vector<std::pair<int, int>> pairs;
    for (int u = 1; u <= V; ++u) {
        for (int v = u + 1; v <= V; ++v) {
            pairs.emplace_back(u, v);
        }
    }
    if (E < 0 || static_cast<std::size_t>(E) > pairs.size()) {
        throw ParameterError("G(n,m) needs 0 <= m <= n(n-1)/2");
    }
    rng.sample_prefix(pairs, static_cast<std::size_t>(E));
    pairs.resize(static_cast<std::size_t>(E));
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

/// node(1..V), colour(1..C) and E uniformly drawn distinct edges.
[[nodiscard]] inline Program gen_graph_colouring(const GraphColouringClass& cls, std::uint64_t index) {
    cls.validate();
    Rng     rng(derive_seed(cls.seed, cls.id(), index));
    Program p;
    for (int v = 1; v <= cls.V; ++v) {
        p.rules.push_back(detail::fact("node", {v}));
    }
    for (int c = 1; c <= cls.C; ++c) {
        p.rules.push_back(detail::fact("colour", {c}));
    }
    for (auto [u, v] : gnm_edges(cls.V, cls.E, rng)) {
        p.rules.push_back(detail::fact("edge", {u, v}));
    }
    return p;
}

/// Raw parameters of a house instance.
struct HouseInstance {
    int                 T{0};
    int                 P{0};
    std::vector<int>    owner;  ///< owner[t-1] in 1..P
    std::vector<int>    legacy; ///< legacy[t-1]: cabinet in 1..ceil(T/2), or 0
    std::vector<int>    long_things;
    int                 T_long{0};
    std::vector<int>    rooms; ///< rooms[p-1]: rooms owned by person p

    [[nodiscard]] int total_rooms() const { return std::accumulate(rooms.begin(), rooms.end(), 0); }
};

[[nodiscard]] inline HouseInstance sample_house(const HouseClass& cls, std::uint64_t index) {
    cls.validate();
    Rng           rng(derive_seed(cls.seed, cls.id(), index));
    HouseInstance h;
    h.T = cls.T;
    h.P = static_cast<int>(rng.uniform(2, cls.T / 2 + 1));
    int cabinets = (cls.T + 1) / 2;
    for (int t = 1; t <= cls.T; ++t) {
        h.owner.push_back(static_cast<int>(rng.uniform(1, h.P)));
        h.legacy.push_back(rng.bernoulli(0.5) ? static_cast<int>(rng.uniform(1, cabinets)) : 0);
    }
    auto n   = rng.normal(0.0, static_cast<double>(cls.T));
    h.T_long = static_cast<int>(std::min<double>(cls.T, std::fabs(std::round(n))));
    std::vector<int> things(static_cast<std::size_t>(cls.T));
    for (int t = 0; t < cls.T; ++t) {
        things[static_cast<std::size_t>(t)] = t + 1;
    }
    rng.sample_prefix(things, static_cast<std::size_t>(h.T_long));
    h.long_things.assign(things.begin(), things.begin() + h.T_long);
    std::sort(h.long_things.begin(), h.long_things.end());
    std::vector<int> longs(static_cast<std::size_t>(h.P)), shorts(static_cast<std::size_t>(h.P));
    for (int t = 1; t <= cls.T; ++t) {
        auto owner = static_cast<std::size_t>(h.owner[static_cast<std::size_t>(t - 1)] - 1);
        if (std::binary_search(h.long_things.begin(), h.long_things.end(), t)) {
            ++longs[owner];
        }
        else {
            ++shorts[owner];
        }
    }
    for (std::size_t x = 0; x < longs.size(); ++x) {
        int cabinets_needed = longs[x] + (shorts[x] + 1) / 2;
        h.rooms.push_back((cabinets_needed + 1) / 2 + 1);
    }
    return h;
}

/// Facts: person/1, thing/1, owner(Thing,Person), long/1, cabinet(1..T),
/// room/1 and roomOwner(Room,Person) numbered consecutively per person
/// (one room more than the person's things need), legacy(Thing,Cabinet)
/// for the previous placement, and lt(A,B) for 1 <= A < B <= max(T, rooms).
[[nodiscard]] inline Program gen_house(const HouseClass& cls, std::uint64_t index) {
    auto    h = sample_house(cls, index);
    Program p;
    for (int x = 1; x <= h.P; ++x) {
        p.rules.push_back(detail::fact("person", {x}));
    }
    for (int t = 1; t <= h.T; ++t) {
        p.rules.push_back(detail::fact("thing", {t}));
        p.rules.push_back(detail::fact("owner", {t, h.owner[static_cast<std::size_t>(t - 1)]}));
    }
    for (int t : h.long_things) {
        p.rules.push_back(detail::fact("long", {t}));
    }
    for (int c = 1; c <= h.T; ++c) {
        p.rules.push_back(detail::fact("cabinet", {c}));
    }
    int room = 0;
    for (int x = 1; x <= h.P; ++x) {
        for (int k = 0; k < h.rooms[static_cast<std::size_t>(x - 1)]; ++k) {
            ++room;
            p.rules.push_back(detail::fact("room", {room}));
            p.rules.push_back(detail::fact("roomOwner", {room, x}));
        }
    }
    for (int t = 1; t <= h.T; ++t) {
        if (auto c = h.legacy[static_cast<std::size_t>(t - 1)]) {
            p.rules.push_back(detail::fact("legacy", {t, c}));
        }
    }
    int top = std::max(h.T, h.total_rooms());
    for (int a = 1; a <= top; ++a) {
        for (int b = a + 1; b <= top; ++b) {
            p.rules.push_back(detail::fact("lt", {a, b}));
        }
    }
    return p;
}

// Encodings -------------------------------------------------------------------

inline constexpr std::string_view kGraphColouringEncoding = R"(% Graph colouring: node/1, edge/2, colour/1.
{col(X,C)} :- node(X), colour(C).
coloured(X) :- col(X,C).
:- node(X), not coloured(X).
:- edge(X,Y), col(X,C), col(Y,C).
)";

inline constexpr std::string_view kHouseEncoding = R"(% House reconfiguration, decision variant.
% Every thing goes into exactly one cabinet, every used cabinet into exactly
% one room of the thing owner's rooms. A cabinet holds two short things or
% one long thing; a room holds at most two cabinets. Cabinets that held
% things before must stay in use.

{thingCab(T,C)} :- thing(T), cabinet(C).
placed(T) :- thingCab(T,C).
:- thing(T), not placed(T).
:- thingCab(T,C1), thingCab(T,C2), lt(C1,C2).

short(T) :- thing(T), not long(T).
:- thingCab(T1,C), thingCab(T2,C), thingCab(T3,C), short(T1), short(T2), short(T3), lt(T1,T2), lt(T2,T3).
:- thingCab(T1,C), thingCab(T2,C), long(T1), lt(T1,T2).
:- thingCab(T1,C), thingCab(T2,C), long(T2), lt(T1,T2).

cabUsed(C) :- thingCab(T,C).
{cabRoom(C,R)} :- cabUsed(C), room(R).
roomed(C) :- cabRoom(C,R).
:- cabUsed(C), not roomed(C).
:- cabRoom(C,R1), cabRoom(C,R2), lt(R1,R2).
:- cabRoom(C1,R), cabRoom(C2,R), cabRoom(C3,R), lt(C1,C2), lt(C2,C3).

:- thingCab(T,C), cabRoom(C,R), owner(T,P), not roomOwner(R,P).
:- thingCab(T1,C), thingCab(T2,C), owner(T1,P1), owner(T2,P2), lt(P1,P2).

legacyCab(C) :- legacy(T,C).
:- legacyCab(C), not cabUsed(C).
)";

// Running ---------------------------------------------------------------------

struct BenchInstance {
    std::string   problem; ///< "gc" or "house"
    std::string   class_id;
    std::uint64_t index{0};
    Program       program; ///< facts and encoding
};

struct RunRecord {
    std::string   problem;
    std::string   class_id;
    std::uint64_t instance{0};
    std::string   strategy;
    std::size_t   answer_sets{0};
    std::uint64_t guesses{0};
    std::uint64_t conflicts{0};
    double        time_s{0};
    bool          timeout{false};
    bool          memory_cap{false};
    std::string   error;

    [[nodiscard]] bool completed() const noexcept { return !timeout && !memory_cap && error.empty(); }
};

[[nodiscard]] inline Program with_encoding(Program facts, std::string_view encoding) {
    for (auto& r : parse_program(encoding).rules) {
        facts.rules.push_back(std::move(r));
    }
    return facts;
}

[[nodiscard]] inline BenchInstance gc_instance(const GraphColouringClass& cls, std::uint64_t i) {
    return {"gc", cls.id(), i, with_encoding(gen_graph_colouring(cls, i), kGraphColouringEncoding)};
}

[[nodiscard]] inline BenchInstance house_instance(const HouseClass& cls, std::uint64_t i) {
    return {"house", cls.id(), i, with_encoding(gen_house(cls, i), kHouseEncoding)};
}

struct BenchOptions {
    std::size_t   n{10};
    double        timeout_s{60};
    unsigned      jobs{1};
    std::uint64_t cap{1'000'000};
    std::size_t   max_nogoods{0};
};

[[nodiscard]] inline RunRecord run_one(const BenchInstance& inst, const GroundingMode& mode, const BenchOptions& opts) {
    RunRecord rec;
    rec.problem  = inst.problem;
    rec.class_id = inst.class_id;
    rec.instance = inst.index;
    rec.strategy = mode.to_string();
    try {
        Limits limits{opts.timeout_s, opts.max_nogoods};
        auto   r       = solve(inst.program, mode, opts.n, limits, opts.cap);
        rec.answer_sets = r.answer_sets.size();
        rec.guesses     = r.stats.guesses;
        rec.conflicts   = r.stats.conflicts;
        rec.time_s      = r.stats.time_s;
        rec.timeout     = r.timeout;
        rec.memory_cap  = r.memory_cap;
    }
    catch (const std::exception& e) {
        rec.error = e.what();
    }
    return rec;
}

/// One record per (instance, strategy), in matrix order. Cells run on up to
/// `jobs` threads, one engine each.
[[nodiscard]] inline std::vector<RunRecord> run_benchmark(const std::vector<BenchInstance>& instances,
                                                          const std::vector<GroundingMode>& strategies,
                                                          const BenchOptions& opts) {
    if (opts.timeout_s <= 0) {
        throw ParameterError("timeout must be positive");
    }
    std::vector<RunRecord>   out(instances.size() * strategies.size());
    std::atomic<std::size_t> next{0};
    auto                     worker = [&] {
        for (std::size_t cell; (cell = next.fetch_add(1)) < out.size();) {
            out[cell] = run_one(instances[cell / strategies.size()], strategies[cell % strategies.size()], opts);
        }
    };
    unsigned jobs = std::max(1U, std::min<unsigned>(opts.jobs, static_cast<unsigned>(out.size())));
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    return out;
}

// Summaries -------------------------------------------------------------------

/// Median; an even count takes the mean of the two middle values.
[[nodiscard]] inline std::optional<double> median(std::vector<double> v) {
    if (v.empty()) {
        return std::nullopt;
    }
    std::sort(v.begin(), v.end());
    auto m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

struct Summary {
    std::string           problem;
    std::string           class_id;
    std::string           strategy;
    std::optional<double> median_time_s;
    std::optional<double> median_guesses; ///< over completed runs only
    std::size_t           completed{0};
    std::size_t           timeouts{0};
};

/// Per (problem, class, strategy): time median over all runs (timeouts count
/// with their time), guess median over completed runs.
[[nodiscard]] inline std::vector<Summary> summarize_medians(const std::vector<RunRecord>& records) {
    std::map<std::tuple<std::string, std::string, std::string>, std::vector<const RunRecord*>> groups;
    std::vector<std::tuple<std::string, std::string, std::string>>                            order;
    for (const auto& r : records) {
        auto key = std::make_tuple(r.problem, r.class_id, r.strategy);
        if (!groups.contains(key)) {
            order.push_back(key);
        }
        groups[key].push_back(&r);
    }
    std::vector<Summary> out;
    for (const auto& key : order) {
        Summary s;
        std::tie(s.problem, s.class_id, s.strategy) = key;
        std::vector<double> times, guesses;
        for (const auto* r : groups[key]) {
            if (!r->error.empty()) {
                continue;
            }
            times.push_back(r->time_s);
            if (r->completed()) {
                guesses.push_back(static_cast<double>(r->guesses));
                ++s.completed;
            }
            else {
                ++s.timeouts;
            }
        }
        s.median_time_s  = median(times);
        s.median_guesses = median(guesses);
        out.push_back(std::move(s));
    }
    return out;
}

/// RFC 4180 quoting when needed (strategy strings contain commas).
[[nodiscard]] inline std::string csv_field(std::string_view v) {
    if (v.find_first_of(",\"\n") == std::string_view::npos) {
        return std::string(v);
    }
    std::string out = "\"";
    for (char c : v) {
        out += c;
        if (c == '"') {
            out += '"';
        }
    }
    return out + '"';
}

inline void write_results_csv(std::ostream& os, const std::vector<RunRecord>& records) {
    os << "problem,class,instance,strategy,answersets,guesses,conflicts,time_s,timeout\n";
    for (const auto& r : records) {
        os << csv_field(r.problem) << ',' << csv_field(r.class_id) << ',' << r.instance << ',' << csv_field(r.strategy) << ',' << r.answer_sets << ','
           << r.guesses << ',' << r.conflicts << ',' << std::fixed << std::setprecision(6) << r.time_s
           << std::defaultfloat << ',' << (r.timeout || r.memory_cap ? 1 : 0) << '\n';
    }
}

inline void write_summary_csv(std::ostream& os, const std::vector<Summary>& summaries) {
    os << "problem,class,strategy,median_time_s,median_guesses,completed,timeouts\n";
    auto cell = [](std::optional<double> v) {
        if (!v) {
            return std::string();
        }
        std::ostringstream s;
        s << std::fixed << std::setprecision(6) << *v;
        return s.str();
    };
    for (const auto& s : summaries) {
        os << csv_field(s.problem) << ',' << csv_field(s.class_id) << ',' << csv_field(s.strategy) << ',' << cell(s.median_time_s) << ','
           << cell(s.median_guesses) << ',' << s.completed << ',' << s.timeouts << '\n';
    }
}

/// Desk-scale class grid.
[[nodiscard]] inline std::vector<GraphColouringClass> default_gc_classes(std::uint64_t seed, int replicas = 11) {
    std::vector<GraphColouringClass> out;
    for (int V : {10, 20, 30, 40, 50}) {
        for (int ratio : {4, 8, 16}) {
            int E = std::min(V * ratio, V * (V - 1) / 2);
            for (int C : {3, 5}) {
                GraphColouringClass cls{V, E, C, seed, replicas};
                if (std::none_of(out.begin(), out.end(), [&](const auto& o) { return o.id() == cls.id(); })) {
                    out.push_back(cls);
                }
            }
        }
    }
    return out;
}

[[nodiscard]] inline std::vector<HouseClass> default_house_classes(std::uint64_t seed, int replicas = 11) {
    return {{5, seed, replicas}, {10, seed, replicas}, {15, seed, replicas}};
}

} // namespace lazyasp
