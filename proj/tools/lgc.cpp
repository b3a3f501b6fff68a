#include <filesystem>
#include <fstream>
#include <iostream>
#include <omp.h>
#include <sstream>

#include <CLI11.hpp>

#include "lgc/corpus.hpp"
#include "lgc/gc.hpp"
#include "lgc/liveness_tables.hpp"
#include "lgc/machine.hpp"
#include "lgc/minefield.hpp"
#include "lgc/profiler.hpp"

namespace fs = std::filesystem;
using namespace lgc;

namespace {

struct Loaded {
    std::string text;
    Program program;
};

Loaded load(const std::string& path) {
    Loaded l;
    l.text = read_text_file(path);
    l.program = load_program(l.text);
    return l;
}

struct AnalysisFlags {
    std::string main_demand = "all";
    bool no_variants = false;
    bool serial = false;
    int workers = 0;
    bool no_cache = false;
    std::string cache_dir = ".lgc-cache";

    void add(CLI::App* app) {
        app->add_option("--main-demand", main_demand, "demand on main's result")
            ->check(CLI::IsMember({"all", "whnf"}));
        app->add_flag("--no-variants", no_variants, "skip evaluation-point refinement of closures");
        app->add_flag("--serial", serial, "build automata on one thread");
        app->add_option("--workers", workers, "threads for automata construction (0: default)")
            ->check(CLI::NonNegativeNumber);
        app->add_flag("--no-cache", no_cache, "rebuild automata instead of using the cache");
        app->add_option("--cache-dir", cache_dir, "directory for cached automata");
    }

    TableOptions options() const {
        TableOptions o;
        o.analysis.main_demand = main_demand == "whnf" ? MainDemand::Whnf : MainDemand::All;
        o.analysis.variants = !no_variants;
        o.parallelism = serial ? Parallelism::Serial : Parallelism::OpenMP;
        o.workers = workers;
        return o;
    }

    LivenessTables tables(const Loaded& l) const {
        if (no_cache) return LivenessTables::build(l.program, options());
        return LivenessTables::build_cached(l.program, l.text, options(), cache_dir);
    }
};

std::string file_safe(std::string s) {
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    return s;
}

void write_file(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << bytes;
}

GcMode mode_of(const std::string& s) { return parse_gc_mode(s); }

// ---- run ----

struct RunFlags {
    std::string file;
    std::string gc = "lgc";
    size_t heap_cells = 1 << 16;
    double cell_size_factor = 1.16;
    bool no_revisit = false;
    bool keep_stale = false;
    std::string gc_log;
    bool trace = false;
    std::uint64_t max_steps = 0;
    bool stats = false;
    AnalysisFlags analysis;
};

int cmd_run(const RunFlags& f) {
    Loaded l = load(f.file);
    const GcMode mode = mode_of(f.gc);
    std::optional<LivenessTables> tables;
    if (mode == GcMode::Lgc) tables = f.analysis.tables(l);
    MachineConfig cfg;
    cfg.gc.mode = mode;
    cfg.gc.revisit_heuristic = !f.no_revisit;
    cfg.gc.dangling_sentinel = !f.keep_stale;
    cfg.heap_cells = f.heap_cells;
    cfg.max_steps = f.max_steps;
    if (f.trace) cfg.trace = &std::cerr;
    Machine m(l.program, cfg, tables ? &*tables : nullptr);
    try {
        std::cout << m.run();
    } catch (const Error&) {
        std::cout << m.state().output << std::flush;
        if (!f.gc_log.empty()) write_gc_log_csv(f.gc_log, m.stats().gc);
        throw;
    }
    const RunStats& st = m.stats();
    if (!f.gc_log.empty()) write_gc_log_csv(f.gc_log, st.gc);
    if (f.stats) {
        const double scale = mode == GcMode::Lgc ? f.cell_size_factor : 1.0;
        std::cerr << "gc " << gc_mode_name(mode) << ", heap " << f.heap_cells << " cells\n"
                  << "steps " << st.steps << ", allocations " << st.allocations << ", closures forced "
                  << st.closure_entries << "\n"
                  << "collections " << st.gc.collections << ", cells collected " << st.gc.cells_collected
                  << ", cells touched " << st.gc.cells_touched << "\n"
                  << "peak memory " << st.peak_memory << " cells (" << st.peak_memory * scale
                  << " scaled)\n"
                  << "gc time " << st.gc.gc_seconds << " s, total " << st.seconds << " s\n";
    }
    return 0;
}

// ---- analyze ----

struct AnalyzeFlags {
    std::string file;
    std::string out;
    std::string emit_dot;
    std::string emit_automata;
    AnalysisFlags analysis;
};

int cmd_analyze(const AnalyzeFlags& f) {
    Loaded l = load(f.file);
    LivenessTables t = f.analysis.tables(l);
    std::ostringstream text;
    text << t.grammar.to_text();
    text << "# automata\n";
    for (const auto& [nt, id] : t.root_dfa)
        text << "# dfa <" << t.grammar.grammar.name(nt) << "> " << id << " states " << t.dfa(id).size() << "\n";
    if (f.out.empty()) std::cout << text.str();
    else write_file(f.out, text.str());

    if (!f.emit_dot.empty()) {
        fs::create_directories(f.emit_dot);
        NfaBuilder builder(t.strongly_regular);
        DfaEmbedding embed;
        for (const auto& [nt, id] : t.tail_dfa) embed[nt] = &t.dfas[id];
        for (const auto& [nt, id] : t.root_dfa) {
            const std::string name = file_safe(t.grammar.grammar.name(nt));
            write_file(fs::path(f.emit_dot) / (name + ".nfa.dot"), to_dot(builder.build(nt, embed), name));
            write_file(fs::path(f.emit_dot) / (name + ".dfa.dot"), t.dfa(id).to_dot(name));
        }
    }
    if (!f.emit_automata.empty()) {
        fs::create_directories(f.emit_automata);
        for (const auto& [nt, id] : t.root_dfa)
            write_file(fs::path(f.emit_automata) / (file_safe(t.grammar.grammar.name(nt)) + ".lgca"),
                       t.dfa(id).serialize());
        write_file(fs::path(f.emit_automata) / "tables.lgct", t.serialize_automata());
    }
    std::cerr << "nonterminals " << t.stats.nonterminals << ", productions " << t.stats.productions
              << ", roots " << t.stats.roots << ", automata " << t.stats.distinct_dfas << " ("
              << t.stats.dfa_states << " states), " << t.stats.build_seconds << " s"
              << (t.stats.from_cache ? " from cache" : "") << "\n";
    return 0;
}

// ---- check ----

struct CheckFlags {
    std::string file;
    std::string mutate;
    std::string trace_out;
    bool no_poison = false;
    size_t heap_cells = 1 << 15;
    std::uint64_t max_steps = 0;
    AnalysisFlags analysis;
};

int cmd_check(const CheckFlags& f) {
    Loaded l = load(f.file);
    MinefieldOptions o;
    o.tables = f.analysis.options();
    o.poison = !f.no_poison;
    o.heap_cells = f.heap_cells;
    o.max_steps = f.max_steps;
    if (!f.mutate.empty()) {
        const auto hash = f.mutate.rfind('#');
        if (hash == std::string::npos) throw Error("--mutate expects NONTERMINAL#INDEX");
        o.tables.mutation = GrammarMutation{f.mutate.substr(0, hash), std::stoul(f.mutate.substr(hash + 1))};
    }
    CheckResult r = check_program(l.program, o);
    if (r.bang) {
        r.trace["program"] = f.file;
        if (o.tables.mutation) r.trace["mutation"] = f.mutate;
        const std::string json = r.trace.dump(2);
        if (f.trace_out.empty()) std::cout << json << "\n";
        else write_file(f.trace_out, json + "\n");
        std::cerr << "bang at step " << r.steps << ": " << r.trace["access"].get<std::string>() << "\n";
        return 2;
    }
    std::cerr << "no bang: " << r.steps << " steps, " << r.collections << " witness collections, "
              << r.poisoned << " references poisoned, " << r.demands << " demand automata";
    if (r.null_demands) std::cerr << ", " << r.null_demands << " forces under an empty demand";
    if (r.demand_escapes) std::cerr << ", " << r.demand_escapes << " forces beyond the closure's demand";
    std::cerr << "\n";
    return 0;
}

// ---- census ----

struct CensusFlags {
    std::string file;
    std::string gc = "rgc";
    size_t heap_cells = 1 << 16;
    std::uint64_t interval = 16;
    std::string out;
    AnalysisFlags analysis;
};

int cmd_census(const CensusFlags& f) {
    Loaded l = load(f.file);
    const GcMode mode = mode_of(f.gc);
    std::optional<LivenessTables> tables;
    if (mode == GcMode::Lgc) tables = f.analysis.tables(l);
    BenchOptions bo;
    bo.heap_cells = f.heap_cells;
    bo.census_interval = f.interval;
    std::vector<MemorySample> samples;
    BenchRow row = bench_run(fs::path(f.file).stem().string(), l.program, tables ? &*tables : nullptr, mode, bo,
                             &samples);
    if (!row.ok) throw Error(row.error);
    if (f.out.empty()) {
        std::cout << "kind,alloc_clock,step,active_cells,reachable_cells,live_cells\n";
        for (const auto& s : samples) {
            if (s.kind == MemorySample::Census)
                std::cout << "census," << s.alloc_clock << ',' << s.step << ',' << s.active << ','
                          << s.reachable << ',' << s.live << '\n';
            else
                std::cout << "gc," << s.alloc_clock << ',' << s.step << ',' << s.active << ",,\n";
        }
    } else {
        write_memory_csv(f.out, samples);
    }
    return 0;
}

// ---- bench ----

struct BenchFlags {
    std::vector<std::string> files;
    std::string out = "bench-out";
    std::string modes = "none,rgc,lgc";
    size_t heap_cells = 1 << 14;
    double cell_size_factor = 1.16;
    bool no_revisit = false;
    std::uint64_t interval = 0;
    int jobs = 1;
    AnalysisFlags analysis;
};

int cmd_bench(const BenchFlags& f) {
    std::vector<std::string> files = f.files;
    if (files.empty())
        for (const auto& e : list_corpus()) files.push_back(e.path);
    std::vector<GcMode> modes;
    std::stringstream ms(f.modes);
    for (std::string m; std::getline(ms, m, ',');) modes.push_back(mode_of(m));
    fs::create_directories(f.out);

    BenchOptions bo;
    bo.heap_cells = f.heap_cells;
    bo.cell_size_factor = f.cell_size_factor;
    bo.revisit_heuristic = !f.no_revisit;
    bo.census_interval = f.interval;

    std::vector<std::vector<BenchRow>> rows(files.size());
    std::vector<AnalysisRow> analysis(files.size());
    std::vector<std::string> failures(files.size());
    const long n = static_cast<long>(files.size());
    // Programs are independent; automata for each are built serially inside the loop.
    AnalysisFlags af = f.analysis;
    af.serial = f.jobs > 1 || af.serial;
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, f.jobs))
    for (long i = 0; i < n; ++i) {
        const std::string name = fs::path(files[i]).stem().string();
        try {
            Loaded l = load(files[i]);
            LivenessTables t = af.tables(l);
            analysis[i] = {name, t.stats};
            for (GcMode m : modes) {
                std::vector<MemorySample> samples;
                BenchRow row = bench_run(name, l.program, &t, m, bo, &samples);
                rows[i].push_back(row);
                write_memory_csv((fs::path(f.out) / ("memory_" + name + "_" + gc_mode_name(m) + ".csv")).string(),
                                 samples);
            }
        } catch (const std::exception& e) {
            failures[i] = name + ": " + e.what();
        }
    }
    std::vector<BenchRow> all;
    std::vector<AnalysisRow> stats;
    for (size_t i = 0; i < files.size(); ++i) {
        all.insert(all.end(), rows[i].begin(), rows[i].end());
        if (failures[i].empty()) stats.push_back(analysis[i]);
        else std::cerr << failures[i] << "\n";
    }
    write_summary_csv((fs::path(f.out) / "summary.csv").string(), all);
    write_analysis_csv((fs::path(f.out) / "analysis.csv").string(), stats);
    for (const auto& r : all)
        std::cout << r.program << ' ' << r.mode << ": "
                  << (r.ok ? std::to_string(r.gcs) + " gcs, peak " + std::to_string(r.peak_memory) : r.error)
                  << "\n";
    return 0;
}

std::string version_text() {
    std::ostringstream v;
    v << "lgc " << LGC_VERSION << "\n"
      << "cache format " << kCacheFormatVersion << "\n"
      << "compiler " << __VERSION__ << ", C++ " << __cplusplus << ", OpenMP " << _OPENMP << "\n";
    return v.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Liveness-based garbage collection for a lazy first-order language"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version_text());

    RunFlags rf;
    auto* run = app.add_subcommand("run", "evaluate a program and print its result");
    run->add_option("file", rf.file, "program")->required()->check(CLI::ExistingFile);
    run->add_option("--gc", rf.gc, "collector")->check(CLI::IsMember({"none", "rgc", "lgc"}));
    run->add_option("--heap-cells", rf.heap_cells, "semispace size in cells")->check(CLI::PositiveNumber);
    run->add_option("--cell-size-factor", rf.cell_size_factor, "size of an LGC cell relative to an RGC cell")
        ->check(CLI::PositiveNumber);
    run->add_flag("--no-revisit-heuristic", rf.no_revisit, "follow every arrival at a copied cell again");
    run->add_flag("--keep-stale", rf.keep_stale, "leave untranslated references as they were");
    run->add_option("--gc-log", rf.gc_log, "CSV file with one row per collection");
    run->add_flag("--trace", rf.trace, "print one line per step on stderr");
    run->add_option("--max-steps", rf.max_steps, "stop after this many steps (0: no limit)");
    run->add_flag("--stats", rf.stats, "print run statistics on stderr");
    rf.analysis.add(run);

    AnalyzeFlags af;
    auto* analyze = app.add_subcommand("analyze", "print the liveness grammar and build its automata");
    analyze->add_option("file", af.file, "program")->required()->check(CLI::ExistingFile);
    analyze->add_option("-o,--out", af.out, "write the grammar here instead of stdout");
    analyze->add_option("--emit-dot", af.emit_dot, "directory for DOT files of every root's NFA and DFA");
    analyze->add_option("--emit-automata", af.emit_automata, "directory for serialized automata");
    af.analysis.add(analyze);

    CheckFlags cf;
    auto* check = app.add_subcommand("check", "run under poisoning collections; exit 2 on a bang");
    check->add_option("file", cf.file, "program")->required()->check(CLI::ExistingFile);
    check->add_option("--mutate", cf.mutate, "delete production INDEX of NONTERMINAL first (NONTERMINAL#INDEX)");
    check->add_option("--trace-out", cf.trace_out, "write the bang trace here instead of stdout");
    check->add_flag("--no-poison", cf.no_poison, "witness only; never poison");
    check->add_option("--heap-cells", cf.heap_cells, "semispace size in cells")->check(CLI::PositiveNumber);
    check->add_option("--max-steps", cf.max_steps, "stop after this many steps (0: no limit)");
    cf.analysis.add(check);

    CensusFlags sf;
    auto* census = app.add_subcommand("census", "sample active, reachable and live cells as CSV");
    census->add_option("file", sf.file, "program")->required()->check(CLI::ExistingFile);
    census->add_option("--gc", sf.gc, "collector")->check(CLI::IsMember({"none", "rgc", "lgc"}));
    census->add_option("--heap-cells", sf.heap_cells, "semispace size in cells")->check(CLI::PositiveNumber);
    census->add_option("--interval", sf.interval, "allocations between samples")->check(CLI::PositiveNumber);
    census->add_option("-o,--out", sf.out, "CSV file instead of stdout");
    sf.analysis.add(census);

    BenchFlags bf;
    auto* bench = app.add_subcommand("bench", "run programs under each collector and write CSV files");
    bench->add_option("files", bf.files, "programs (default: the bundled corpus)")->check(CLI::ExistingFile);
    bench->add_option("--out", bf.out, "output directory");
    bench->add_option("--modes", bf.modes, "comma-separated collectors");
    bench->add_option("--heap-cells", bf.heap_cells, "semispace size in cells")->check(CLI::PositiveNumber);
    bench->add_option("--cell-size-factor", bf.cell_size_factor, "size of an LGC cell relative to an RGC cell")
        ->check(CLI::PositiveNumber);
    bench->add_flag("--no-revisit-heuristic", bf.no_revisit, "follow every arrival at a copied cell again");
    bench->add_option("--interval", bf.interval, "census interval in allocations (0: none)");
    bench->add_option("-j,--jobs", bf.jobs, "programs run in parallel")->check(CLI::PositiveNumber);
    bf.analysis.add(bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*run) return cmd_run(rf);
        if (*analyze) return cmd_analyze(af);
        if (*check) return cmd_check(cf);
        if (*census) return cmd_census(sf);
        if (*bench) return cmd_bench(bf);
    } catch (const std::exception& e) {
        std::cerr << "lgc: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
