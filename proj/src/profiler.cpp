#include "lgc/profiler.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "lgc/gc.hpp"

namespace lgc {

void Profiler::on_read(Machine& m, Ref r, const char*) {
    if (!opts_.access_log || is_sentinel(r)) return;
    const std::uint64_t serial = m.state().heap.at(r).serial;
    if (serial >= last_read_.size()) last_read_.resize(std::max<size_t>(serial + 1, last_read_.size() * 2), 0);
    last_read_[serial] = m.state().steps + 1;
}

void Profiler::on_allocate(Machine& m, Ref) {
    const MachineState& st = m.state();
    if (!opts_.census_interval || st.allocations % opts_.census_interval != 0) return;
    MemorySample s;
    s.alloc_clock = st.allocations;
    s.step = st.steps;
    s.active = st.heap.used();
    s.reachable = reachable_serials(st).size();
    samples_.push_back(s);
}

void Profiler::before_collection(Machine& m, const GcPoint&) {
    if (opts_.collection_sets) pending_reachable_ = reachable_serials(m.state());
}

void Profiler::after_collection(Machine& m, const CollectionRecord& rec) {
    const MachineState& st = m.state();
    if (opts_.census_interval) {
        MemorySample s;
        s.kind = MemorySample::AfterGc;
        s.alloc_clock = st.allocations;
        s.step = st.steps;
        s.active = rec.cells_after;
        samples_.push_back(s);
    }
    if (opts_.collection_sets) {
        CollectionSets c;
        c.index = rec.index;
        c.step = st.steps;
        c.alloc_clock = st.allocations;
        c.reachable = std::move(pending_reachable_);
        c.preserved = heap_serials(st.heap);
        sets_.push_back(std::move(c));
    }
}

void Profiler::finish() {
    if (finished_ || !opts_.access_log) return;
    finished_ = true;
    // A cell is live at step t when it exists at t and is read after t.
    for (auto& s : samples_) {
        if (s.kind != MemorySample::Census) continue;
        size_t live = 0;
        for (std::uint64_t serial = 0; serial < std::min<std::uint64_t>(s.alloc_clock, last_read_.size()); ++serial)
            if (last_read_[serial] > s.step + 1) ++live;
        s.live = live;
    }
    for (auto& c : sets_) {
        c.live.clear();
        const std::uint64_t n = std::min<std::uint64_t>(c.alloc_clock, last_read_.size());
        for (std::uint64_t serial = 0; serial < n; ++serial)
            if (last_read_[serial] > c.step + 1) c.live.push_back(serial);
    }
}

BenchRow bench_run(const std::string& name, const Program& p, const LivenessTables* tables, GcMode mode,
                   const BenchOptions& opts, std::vector<MemorySample>* samples) {
    BenchRow row;
    row.program = name;
    row.mode = gc_mode_name(mode);
    row.heap_cells = opts.heap_cells;
    MachineConfig cfg;
    cfg.gc.mode = mode;
    cfg.gc.revisit_heuristic = opts.revisit_heuristic;
    cfg.heap_cells = opts.heap_cells;
    ProfileOptions po;
    po.census_interval = samples ? opts.census_interval : 0;
    po.access_log = po.census_interval != 0;
    Profiler prof(po);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Machine m(p, cfg, tables);
        if (po.census_interval) m.add_observer(&prof);
        row.output = m.run();
        const RunStats& st = m.stats();
        row.gcs = st.gc.collections;
        if (row.gcs) {
            row.cells_collected_per_gc = static_cast<double>(st.gc.cells_collected) / row.gcs;
            row.cells_touched_per_gc = static_cast<double>(st.gc.cells_touched) / row.gcs;
        }
        row.peak_memory = st.peak_memory;
        row.peak_memory_scaled = static_cast<double>(st.peak_memory) * (mode == GcMode::Lgc ? opts.cell_size_factor : 1.0);
        row.gc_time = st.gc.gc_seconds;
        row.steps = st.steps;
        row.allocations = st.allocations;
    } catch (const Error& e) {
        row.ok = false;
        row.error = e.what();
    }
    row.total_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (samples) {
        prof.finish();
        *samples = prof.samples();
    }
    return row;
}

namespace {

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c == '\n' ? ' ' : c;
    }
    return q + "\"";
}

}  // namespace

void write_memory_csv(const std::string& path, const std::vector<MemorySample>& samples) {
    auto out = open_csv(path);
    out << "kind,alloc_clock,step,active_cells,reachable_cells,live_cells\n";
    for (const auto& s : samples) {
        if (s.kind == MemorySample::Census)
            out << "census," << s.alloc_clock << ',' << s.step << ',' << s.active << ',' << s.reachable << ','
                << s.live << '\n';
        else
            out << "gc," << s.alloc_clock << ',' << s.step << ',' << s.active << ",,\n";
    }
}

void write_summary_csv(const std::string& path, const std::vector<BenchRow>& rows) {
    auto out = open_csv(path);
    out << "program,mode,heap_cells,status,gcs,cells_collected_per_gc,cells_touched_per_gc,peak_memory,"
           "peak_memory_scaled,gc_time,total_time,steps,allocations\n";
    for (const auto& r : rows) {
        out << csv_field(r.program) << ',' << r.mode << ',' << r.heap_cells << ','
            << (r.ok ? "ok" : csv_field(r.error)) << ',' << r.gcs << ',';
        if (r.gcs) out << r.cells_collected_per_gc << ',' << r.cells_touched_per_gc;
        else out << ',';
        out << ',' << r.peak_memory << ',' << r.peak_memory_scaled << ',' << r.gc_time << ',' << r.total_time
            << ',' << r.steps << ',' << r.allocations << '\n';
    }
}

void write_analysis_csv(const std::string& path, const std::vector<AnalysisRow>& rows) {
    auto out = open_csv(path);
    out << "program,nonterminals,productions,roots,distinct_dfas,dfa_states,dfa_transitions,analysis_seconds,from_cache\n";
    for (const auto& r : rows)
        out << csv_field(r.program) << ',' << r.stats.nonterminals << ',' << r.stats.productions << ','
            << r.stats.roots << ',' << r.stats.distinct_dfas << ',' << r.stats.dfa_states << ','
            << r.stats.dfa_transitions << ',' << r.stats.build_seconds << ',' << (r.stats.from_cache ? 1 : 0)
            << '\n';
}

void write_gc_log_csv(const std::string& path, const GcStats& stats) {
    auto out = open_csv(path);
    out << "index,alloc_clock,cells_before,cells_after,cells_touched,duration\n";
    for (const auto& c : stats.log)
        out << c.index << ',' << c.alloc_clock << ',' << c.cells_before << ',' << c.cells_after << ','
            << c.cells_touched << ',' << c.seconds << '\n';
}

}  // namespace lgc
