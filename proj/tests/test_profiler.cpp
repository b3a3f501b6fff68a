#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "lgc/corpus.hpp"
#include "lgc/profiler.hpp"

using namespace lgc;

namespace {

Program corpus_program(const std::string& name) {
    return load_program_file(std::string(LGC_CORPUS_DIR) + "/" + name + ".lisp");
}

bool subset(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::string first_line(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    return line;
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("lgc_profiler_" + name);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST(Profiler, CensusOrdering) {
    for (const char* name : {"motivating", "huffman", "gc_bench"}) {
        Program p = corpus_program(name);
        LivenessTables t = LivenessTables::build(p);
        for (GcMode mode : {GcMode::Rgc, GcMode::Lgc}) {
            MachineConfig c;
            c.gc.mode = mode;
            c.heap_cells = 8192;
            Machine m(p, c, mode == GcMode::Lgc ? &t : nullptr);
            ProfileOptions po;
            po.census_interval = 16;
            po.access_log = true;
            Profiler prof(po);
            m.add_observer(&prof);
            m.run();
            prof.finish();
            size_t census = 0;
            for (const auto& s : prof.samples()) {
                if (s.kind != MemorySample::Census) continue;
                ++census;
                EXPECT_LE(s.live, s.reachable) << name;
                EXPECT_LE(s.reachable, s.active) << name;
            }
            EXPECT_GT(census, 0u);
        }
    }
}

TEST(Profiler, LiveWithinPreservedWithinReachable) {
    for (const auto& entry : list_corpus()) {
        Program p = load_program_file(entry.path);
        LivenessTables t = LivenessTables::build(p);
        MachineConfig c;
        c.gc.mode = GcMode::Lgc;
        c.heap_cells = 2048;
        Machine m(p, c, &t);
        ProfileOptions po;
        po.access_log = true;
        po.collection_sets = true;
        Profiler prof(po);
        m.add_observer(&prof);
        m.run();
        prof.finish();
        for (const auto& s : prof.collections()) {
            EXPECT_TRUE(subset(s.live, s.preserved)) << entry.name << " gc " << s.index;
            EXPECT_TRUE(subset(s.preserved, s.reachable)) << entry.name << " gc " << s.index;
        }
    }
}

TEST(Profiler, AccessLogRecordsReads) {
    Program p = corpus_program("length");
    MachineConfig c;
    c.gc.mode = GcMode::None;
    c.heap_cells = 1 << 22;
    Machine m(p, c);
    ProfileOptions po;
    po.access_log = true;
    Profiler prof(po);
    m.add_observer(&prof);
    m.run();
    // Serial 0 is main's result cell, read by the printer at the end.
    EXPECT_GT(prof.last_access(0), 0u);
    EXPECT_EQ(prof.last_access(1u << 30), 0u);
}

TEST(Profiler, BenchRowScalesLgcPeak) {
    Program p = corpus_program("gc_bench");
    LivenessTables t = LivenessTables::build(p);
    BenchOptions o;
    o.heap_cells = 4096;
    BenchRow l = bench_run("gc_bench", p, &t, GcMode::Lgc, o);
    BenchRow r = bench_run("gc_bench", p, nullptr, GcMode::Rgc, o);
    ASSERT_TRUE(l.ok) << l.error;
    ASSERT_TRUE(r.ok) << r.error;
    EXPECT_EQ(l.output, r.output);
    EXPECT_DOUBLE_EQ(l.peak_memory_scaled, 1.16 * static_cast<double>(l.peak_memory));
    EXPECT_DOUBLE_EQ(r.peak_memory_scaled, static_cast<double>(r.peak_memory));
    EXPECT_LT(l.peak_memory, r.peak_memory);
}

TEST(Profiler, BenchRowReportsFailure) {
    Program p = corpus_program("huffman");
    BenchOptions o;
    o.heap_cells = 64;
    BenchRow r = bench_run("huffman", p, nullptr, GcMode::Rgc, o);
    EXPECT_FALSE(r.ok);
    EXPECT_FALSE(r.error.empty());
}

TEST(Profiler, CsvHeaders) {
    auto dir = scratch_dir("csv");
    Program p = corpus_program("motivating");
    LivenessTables t = LivenessTables::build(p);
    BenchOptions o;
    o.heap_cells = 64;
    o.census_interval = 8;
    std::vector<MemorySample> samples;
    BenchRow row = bench_run("motivating", p, &t, GcMode::Lgc, o, &samples);
    ASSERT_TRUE(row.ok) << row.error;
    EXPECT_FALSE(samples.empty());

    write_memory_csv((dir / "memory.csv").string(), samples);
    EXPECT_EQ(first_line((dir / "memory.csv").string()), "kind,alloc_clock,step,active_cells,reachable_cells,live_cells");
    write_summary_csv((dir / "summary.csv").string(), {row});
    EXPECT_NE(first_line((dir / "summary.csv").string()).find("program,mode"), std::string::npos);
    write_analysis_csv((dir / "analysis.csv").string(), {{"motivating", t.stats}});
    EXPECT_NE(first_line((dir / "analysis.csv").string()).find("program"), std::string::npos);

    MachineConfig c;
    c.gc.mode = GcMode::Lgc;
    c.heap_cells = 64;
    RunResult rr = run_program(p, c, &t);
    write_gc_log_csv((dir / "gc.csv").string(), rr.stats.gc);
    EXPECT_EQ(first_line((dir / "gc.csv").string()), "index,alloc_clock,cells_before,cells_after,cells_touched,duration");
    std::ifstream in(dir / "gc.csv");
    size_t lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    EXPECT_EQ(lines, rr.stats.gc.collections + 1);
    std::filesystem::remove_all(dir);
}
