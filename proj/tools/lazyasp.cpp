#include <lazyasp/lazyasp.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace lazyasp;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitSat   = 10;
constexpr int kExitUnsat = 20;
constexpr int kExitTime  = 30;

Program read_programs(const std::vector<std::string>& paths) {
    Program out;
    for (const auto& path : paths) {
        std::ifstream in(path);
        if (!in) {
            throw Error("cannot read " + path);
        }
        auto p = parse_program(in);
        out.rules.insert(out.rules.end(), p.rules.begin(), p.rules.end());
    }
    return out;
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << text;
}

std::vector<GroundingMode> parse_modes(const std::string& list) {
    // Strategies contain commas, so the list separator is ';'.
    std::vector<GroundingMode> out;
    std::size_t                start = 0;
    while (start <= list.size()) {
        auto end = list.find(';', start);
        auto item = list.substr(start, end == std::string::npos ? std::string::npos : end - start);
        if (!item.empty()) {
            out.push_back(GroundingMode::parse(item));
        }
        if (end == std::string::npos) {
            break;
        }
        start = end + 1;
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lazy-grounding answer set solver"};
    app.require_subcommand(1);

    std::vector<std::string> files;
    std::string              strategy = "default";
    std::size_t              n        = 10;
    double                   timeout  = 0;
    std::uint64_t            seed     = 1;
    unsigned                 jobs     = 1;
    std::string              out;
    std::uint64_t            cap = 1'000'000;

    auto* solve_cmd = app.add_subcommand("solve", "print answer sets of the given programs");
    solve_cmd->add_option("files", files, "program files")->required()->check(CLI::ExistingFile);
    solve_cmd->add_option("--strategy", strategy, "default, k:<k_co>,<k_ru>, either with +acc, or upfront");
    solve_cmd->add_option("--n", n, "answer sets to find (0: all)");
    solve_cmd->add_option("--timeout", timeout, "seconds (0: none)");
    solve_cmd->add_option("--cap", cap, "instantiation cap for upfront grounding");

    std::string problem = "gc";
    int         V = 50, E = 200, C = 3, T = 10, replicas = 11;
    bool        encoding = false;
    auto*       gen_cmd  = app.add_subcommand("gen", "write benchmark instances");
    gen_cmd->add_option("problem", problem, "gc or house")->check(CLI::IsMember({"gc", "house"}));
    gen_cmd->add_option("--V", V, "vertices");
    gen_cmd->add_option("--E", E, "edges");
    gen_cmd->add_option("--C", C, "colours");
    gen_cmd->add_option("--T", T, "things");
    gen_cmd->add_option("--replicas", replicas, "instances per class");
    gen_cmd->add_option("--seed", seed, "generator seed");
    gen_cmd->add_option("--out", out, "output directory")->required();
    gen_cmd->add_flag("--with-encoding", encoding, "append the problem encoding to each instance");

    std::string strategies = "default;k:0,0;k:inf,0;k:0,inf;k:inf,inf";
    std::string grid       = "default";
    auto*       bench_cmd  = app.add_subcommand("bench", "run the benchmark matrix and write CSVs");
    bench_cmd->add_option("--problem", problem, "gc, house or all")->check(CLI::IsMember({"gc", "house", "all"}));
    bench_cmd->add_option("--strategies", strategies, "';'-separated strategies");
    bench_cmd->add_option("--grid", grid, "class grid: default or v50 (V=50, E=200, C=3 only)")->check(CLI::IsMember({"default", "v50"}));
    bench_cmd->add_option("--replicas", replicas, "instances per class");
    bench_cmd->add_option("--n", n, "answer sets per run");
    bench_cmd->add_option("--timeout", timeout, "seconds per run")->default_val(60);
    bench_cmd->add_option("--seed", seed, "generator seed");
    bench_cmd->add_option("--jobs", jobs, "parallel runs");
    bench_cmd->add_option("--cap", cap, "instantiation cap for upfront grounding");
    bench_cmd->add_option("--out", out, "output directory")->required();

    std::string program, answers;
    auto*       verify_cmd = app.add_subcommand("verify", "check answer sets (one {...} per line) against a program");
    verify_cmd->add_option("program", program, "program file")->required()->check(CLI::ExistingFile);
    verify_cmd->add_option("answersets", answers, "answer set file")->required()->check(CLI::ExistingFile);
    verify_cmd->add_option("--cap", cap, "instantiation cap");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*solve_cmd) {
            auto   mode = GroundingMode::parse(strategy);
            auto   p    = read_programs(files);
            Limits limits;
            limits.timeout_s = timeout;
            auto r           = solve(p, mode, n, limits, cap);
            std::vector<std::string> lines;
            for (const auto& s : r.answer_sets) {
                lines.push_back(format_answer_set(s));
            }
            for (const auto& l : lines) {
                std::cout << l << '\n';
            }
            std::cout << "STATS guesses=" << r.stats.guesses << " conflicts=" << r.stats.conflicts
                      << " rules=" << r.stats.ground_rules << " time_s=" << std::fixed << std::setprecision(3)
                      << r.stats.time_s << '\n';
            if (!r.answer_sets.empty()) {
                return kExitSat;
            }
            return r.timeout || r.memory_cap ? kExitTime : kExitUnsat;
        }
        if (*gen_cmd) {
            for (int i = 0; i < replicas; ++i) {
                Program     p;
                std::string id, text;
                if (problem == "gc") {
                    GraphColouringClass cls{V, E, C, seed, replicas};
                    p  = gen_graph_colouring(cls, static_cast<std::uint64_t>(i));
                    id = cls.id();
                    if (encoding) {
                        text = kGraphColouringEncoding;
                    }
                }
                else {
                    HouseClass cls{T, seed, replicas};
                    p  = gen_house(cls, static_cast<std::uint64_t>(i));
                    id = cls.id();
                    if (encoding) {
                        text = kHouseEncoding;
                    }
                }
                write_file(fs::path(out) / (problem + "_" + id + "_" + std::to_string(i) + ".lp"),
                           p.to_string() + (text.empty() ? "" : "\n" + text));
            }
            return 0;
        }
        if (*bench_cmd) {
            std::vector<BenchInstance> instances;
            if (problem == "gc" || problem == "all") {
                auto classes = grid == "v50" ? std::vector<GraphColouringClass>{{50, 200, 3, seed, replicas}}
                                              : default_gc_classes(seed, replicas);
                for (const auto& cls : classes) {
                    for (int i = 0; i < cls.replicas; ++i) {
                        instances.push_back(gc_instance(cls, static_cast<std::uint64_t>(i)));
                    }
                }
            }
            if ((problem == "house" || problem == "all") && grid == "default") {
                for (const auto& cls : default_house_classes(seed, replicas)) {
                    for (int i = 0; i < cls.replicas; ++i) {
                        instances.push_back(house_instance(cls, static_cast<std::uint64_t>(i)));
                    }
                }
            }
            BenchOptions opts;
            opts.n         = n;
            opts.timeout_s = timeout;
            opts.jobs      = jobs;
            opts.cap       = cap;
            auto records   = run_benchmark(instances, parse_modes(strategies), opts);
            for (const auto& r : records) {
                if (!r.error.empty()) {
                    std::cerr << r.problem << ' ' << r.class_id << ' ' << r.instance << ' ' << r.strategy << ": "
                              << r.error << '\n';
                }
            }
            std::ostringstream results, summary;
            write_results_csv(results, records);
            write_summary_csv(summary, summarize_medians(records));
            write_file(fs::path(out) / "results.csv", results.str());
            write_file(fs::path(out) / "summary.csv", summary.str());
            return 0;
        }
        if (*verify_cmd) {
            auto          p = read_programs({program});
            std::ifstream in(answers);
            std::string   line;
            bool          ok = true;
            std::size_t   number = 0;
            while (std::getline(in, line)) {
                ++number;
                if (line.find('{') == std::string::npos) {
                    continue;
                }
                if (!verify_answer_set(p, parse_answer_set(line), cap)) {
                    std::cerr << answers << ':' << number << ": not an answer set\n";
                    ok = false;
                }
            }
            return ok ? 0 : 1;
        }
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
