#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "lgc/ast.hpp"
#include "lgc/heap.hpp"

namespace lgc {

class LivenessTables;

enum class Rule {
    Const, Cons,
    CarSelect, Car1Clo, CarClo,
    CdrSelect, Cdr1Clo, CdrClo,
    NullQ, NullQClo,
    Prim, Prim1Clo, Prim2Clo,
    Funcall, Let,
    IfTrue, IfFalse, IfClo,
    ReturnWhnf, ReturnClo,
    Print, PrintClo, Halt,
};

const char* rule_name(Rule r);

enum class ControlKind { Eval, Apply, Print, Halted };

enum class ResumeKind { Expr, App, Print };

struct Frame {
    ResumeKind resume = ResumeKind::Expr;
    const Expr* expr = nullptr;  // Expr: If or Return to resume; App: Let whose rhs resumes
    int fun = -1;
    std::vector<Ref> env;
    Ref update = kUnbound;
    std::vector<std::uint32_t> liveness;  // App: operand automata
    std::uint32_t demand = 0;
};

struct PrintItem {
    enum Kind { Value, Tail, Close } kind;
    Ref ref;
};

struct MachineState {
    ControlKind control = ControlKind::Eval;
    const Expr* expr = nullptr;  // Eval: current expression; Apply: Let whose rhs is evaluated
    int fun = -1;
    std::vector<Ref> env;        // Eval: slots of fun; Apply: operands by position
    std::vector<std::uint32_t> liveness;  // Apply: operand automata
    std::uint32_t demand = 0;
    std::vector<Frame> stack;
    std::vector<PrintItem> print_stack;
    Heap heap;
    Ref ans = kUnbound;
    std::string output;
    std::uint64_t steps = 0;
    std::uint64_t allocations = 0;
};

enum class GcPointKind { Entry, AfterIf };

struct GcPoint {
    GcPointKind kind = GcPointKind::Entry;
    int fun = -1;
    int psi = 0;
    int branch = -1;
    int bound = 0;  // cells the continuation may allocate before the next check
};

enum class GcMode { None, Rgc, Lgc };

const char* gc_mode_name(GcMode m);
GcMode parse_gc_mode(const std::string& s);

struct GcPolicy {
    GcMode mode = GcMode::Lgc;
    bool revisit_heuristic = true;
    bool dangling_sentinel = true;  // overwrite untranslated references with kDangling
};

struct CollectionRecord {
    size_t index = 0;
    std::uint64_t alloc_clock = 0;
    std::uint64_t step = 0;
    size_t cells_before = 0;
    size_t cells_after = 0;
    size_t cells_touched = 0;
    double seconds = 0;
};

struct GcStats {
    size_t collections = 0;
    size_t cells_collected = 0;
    size_t cells_touched = 0;
    size_t peak_retained = 0;  // largest heap right after a collection
    double gc_seconds = 0;
    std::vector<CollectionRecord> log;
};

struct RunStats {
    std::uint64_t steps = 0;
    std::uint64_t allocations = 0;
    std::uint64_t closure_entries = 0;
    size_t peak_memory = 0;  // peak_retained, or allocations when nothing was collected
    GcStats gc;
    double seconds = 0;
};

class Machine;

// Passive and active instrumentation of a run.
class MachineObserver {
public:
    virtual ~MachineObserver() = default;
    virtual void on_step(Machine&, Rule) {}
    virtual void on_read(Machine&, Ref, const char* /*what*/) {}
    virtual void on_allocate(Machine&, Ref) {}
    virtual void on_write(Machine&, Ref) {}
    virtual void before_let(Machine&, const Expr&) {}
    // Returning true forces a collection at this point.
    virtual bool on_gc_point(Machine&, const GcPoint&) { return false; }
    virtual void before_collection(Machine&, const GcPoint&) {}
    virtual void after_collection(Machine&, const CollectionRecord&) {}
};

// Supplies the demand carried by controls, frames and closures (minefield).
class DemandTracker {
public:
    virtual ~DemandTracker() = default;
    // Demand under which a forced closure runs; context is the forcing rule's own
    // transformation input, stored the demand recorded when the closure was built.
    virtual std::uint32_t on_force(Rule rule, std::uint32_t context, std::uint32_t stored) = 0;
    virtual std::uint32_t on_let(const Expr& let, std::uint32_t current) = 0;
    virtual std::uint32_t print_demand() = 0;
};

struct MachineConfig {
    GcPolicy gc;
    size_t heap_cells = 1 << 20;
    std::uint64_t max_steps = 0;  // 0: unlimited
    std::ostream* trace = nullptr;
};

class Machine {
public:
    Machine(const Program& p, MachineConfig config, const LivenessTables* tables = nullptr);

    // Returns the rule applied; Rule::Halt once the result has been printed.
    Rule step();
    // Runs to completion and returns the printed output.
    std::string run();

    MachineState& state() { return state_; }
    const MachineState& state() const { return state_; }
    const Program& program() const { return program_; }
    const LivenessTables* tables() const { return tables_; }
    const MachineConfig& config() const { return config_; }
    const RunStats& stats() const { return stats_; }
    bool halted() const { return state_.control == ControlKind::Halted; }

    void add_observer(MachineObserver* o) { observers_.push_back(o); }
    void set_demand_tracker(DemandTracker* d) { demand_ = d; }

    // Collects now, at the given point, with the configured policy.
    CollectionRecord collect(const GcPoint& point);

    // Ref bound to a variable of the current Eval environment.
    Ref lookup(const std::string& name) const;

private:
    const Program& program_;
    MachineConfig config_;
    const LivenessTables* tables_;
    MachineState state_;
    RunStats stats_;
    std::vector<MachineObserver*> observers_;
    DemandTracker* demand_ = nullptr;
    bool entry_checked_ = false;

    const Cell& read(Ref r, const char* what);
    void write_value(Ref loc, const Cell& value);
    void push_frame(ResumeKind resume, Ref update);
    void force(Ref r, Rule rule);
    void pop_frame();
    void gc_point(const GcPoint& point);
    void refine(int psi, int branch);

    Rule step_eval();
    Rule step_apply();
    Rule step_print();
    Rule apply_select(bool car);
};

// Machine::run for a source program in one call.
struct RunResult {
    std::string output;
    RunStats stats;
};

RunResult run_program(const Program& p, const MachineConfig& config,
                      const LivenessTables* tables = nullptr);

}  // namespace lgc
