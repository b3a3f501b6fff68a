#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lgc/liveness_tables.hpp"
#include "lgc/machine.hpp"

namespace lgc {

struct MemorySample {
    enum Kind { Census, AfterGc } kind = Census;
    std::uint64_t alloc_clock = 0;
    std::uint64_t step = 0;
    size_t active = 0;     // cells in the heap
    size_t reachable = 0;  // census only
    size_t live = 0;       // census only; filled by finish()
};

// Per collection: serials reachable just before it and serials kept by it.
struct CollectionSets {
    size_t index = 0;
    std::uint64_t step = 0;
    std::uint64_t alloc_clock = 0;
    std::vector<std::uint64_t> reachable;
    std::vector<std::uint64_t> preserved;
    std::vector<std::uint64_t> live;  // read again after the collection; filled by finish()
};

struct ProfileOptions {
    std::uint64_t census_interval = 0;  // allocations between samples; 0 disables the census
    bool access_log = false;            // record the last read of every cell
    bool collection_sets = false;       // keep CollectionSets for every collection
};

class Profiler : public MachineObserver {
public:
    explicit Profiler(ProfileOptions opts) : opts_(opts) {}

    void on_read(Machine& m, Ref r, const char*) override;
    void on_allocate(Machine& m, Ref r) override;
    void before_collection(Machine& m, const GcPoint& p) override;
    void after_collection(Machine& m, const CollectionRecord& rec) override;

    // Post-processing once the run has ended: live counts from the access log.
    void finish();

    const std::vector<MemorySample>& samples() const { return samples_; }
    const std::vector<CollectionSets>& collections() const { return sets_; }
    // Step of the last read of the cell with this serial, or 0 if never read.
    std::uint64_t last_access(std::uint64_t serial) const {
        return serial < last_read_.size() ? last_read_[serial] : 0;
    }

private:
    ProfileOptions opts_;
    std::vector<MemorySample> samples_;
    std::vector<CollectionSets> sets_;
    std::vector<std::uint64_t> last_read_;  // by serial; step + 1 so that 0 means never
    std::vector<std::uint64_t> pending_reachable_;
    bool finished_ = false;
};

struct BenchRow {
    std::string program;
    std::string mode;
    size_t heap_cells = 0;
    bool ok = true;
    std::string error;
    std::string output;
    size_t gcs = 0;
    double cells_collected_per_gc = 0;
    double cells_touched_per_gc = 0;
    size_t peak_memory = 0;
    double peak_memory_scaled = 0;  // LGC rows: cell-size factor applied
    double gc_time = 0;
    double total_time = 0;
    std::uint64_t steps = 0;
    std::uint64_t allocations = 0;
};

struct AnalysisRow {
    std::string program;
    TableStats stats;
};

struct BenchOptions {
    size_t heap_cells = 1 << 14;
    double cell_size_factor = 1.16;
    bool revisit_heuristic = true;
    std::uint64_t census_interval = 0;  // with a census, live counts need the access log too
};

BenchRow bench_run(const std::string& name, const Program& p, const LivenessTables* tables, GcMode mode,
                   const BenchOptions& opts, std::vector<MemorySample>* samples = nullptr);

void write_memory_csv(const std::string& path, const std::vector<MemorySample>& samples);
void write_summary_csv(const std::string& path, const std::vector<BenchRow>& rows);
void write_analysis_csv(const std::string& path, const std::vector<AnalysisRow>& rows);
void write_gc_log_csv(const std::string& path, const GcStats& stats);

}  // namespace lgc
