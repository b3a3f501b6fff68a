#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lgc/liveness_tables.hpp"
#include "lgc/machine.hpp"

namespace lgc {

struct TraceRoot {
    Ref ref;
    DfaId dfa;  // kDfaAll for plain reachability
};

// Automata for the operands of a closure cell, one per argument.
using ClosureDfas = std::function<void(Ref, const Cell&, std::vector<DfaId>&)>;

struct TraceResult {
    std::vector<Ref> order;    // cells in copy order
    std::vector<Ref> forward;  // from-space ref -> to-space ref, or kUnbound
    size_t touched = 0;
};

// Visits the cells a liveness-guided copy would duplicate. A cell is taken when it is
// reached in a live automaton state; pairs pass next(state, 0/1) to their fields and
// closures restart their operands from closure_dfas. With the revisit heuristic a pair
// is re-entered only in a (dfa, state) not seen before and closures are never
// re-entered; without it every arrival is followed again.
TraceResult trace_heap(const std::vector<Cell>& cells, const std::vector<TraceRoot>& roots,
                       const std::vector<LivenessDfa>& dfas, const ClosureDfas& closure_dfas,
                       bool revisit_heuristic);

// Cheney copy order of everything reachable from the roots (automata ignored).
TraceResult trace_reachable(const std::vector<Cell>& cells, const std::vector<Ref>& roots);

// Roots of the machine state at a collection point, paired with their automata.
std::vector<TraceRoot> gc_roots(const MachineState& st, const GcPoint& point,
                                const LivenessTables* tables, GcMode mode);

// Every reference held outside the heap: environments, frames, updates, print stack.
void for_each_root_ref(MachineState& st, const std::function<void(Ref&)>& f);
std::vector<Ref> all_root_refs(const MachineState& st);

CollectionRecord collect_garbage(MachineState& st, const GcPoint& point, const Program& p,
                                 const LivenessTables* tables, const GcPolicy& policy);

// Serials of the cells reachable from the machine roots, sorted.
std::vector<std::uint64_t> reachable_serials(const MachineState& st);
// Serials of all cells in the heap, sorted.
std::vector<std::uint64_t> heap_serials(const Heap& h);

}  // namespace lgc
