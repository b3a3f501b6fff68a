#include "lgc/gc.hpp"

#include <algorithm>
#include <chrono>
#include <deque>

#include "lgc/error.hpp"

namespace lgc {

namespace {

struct Item {
    Ref ref;
    DfaId dfa;
    int state;
};

bool state_live(const std::vector<LivenessDfa>& dfas, DfaId dfa, int state) {
    if (dfa == kDfaAll) return true;
    if (dfa == kDfaNone) return false;
    return dfas.at(dfa).is_live(state);
}

int start_of(const std::vector<LivenessDfa>& dfas, DfaId dfa) {
    return dfa == kDfaAll || dfa == kDfaNone ? 0 : dfas.at(dfa).start;
}

int next_of(const std::vector<LivenessDfa>& dfas, DfaId dfa, int state, int bit) {
    return dfa == kDfaAll || dfa == kDfaNone ? 0 : dfas.at(dfa).step(state, bit);
}

}  // namespace

TraceResult trace_heap(const std::vector<Cell>& cells, const std::vector<TraceRoot>& roots,
                       const std::vector<LivenessDfa>& dfas, const ClosureDfas& closure_dfas,
                       bool revisit_heuristic) {
    TraceResult out;
    out.forward.assign(cells.size(), kUnbound);
    std::vector<std::vector<std::pair<DfaId, int>>> seen(cells.size());
    std::vector<Item> work;
    for (auto it = roots.rbegin(); it != roots.rend(); ++it)
        work.push_back({it->ref, it->dfa, start_of(dfas, it->dfa)});
    std::vector<DfaId> args;
    while (!work.empty()) {
        const Item item = work.back();
        work.pop_back();
        if (is_sentinel(item.ref) || item.ref >= cells.size()) continue;
        if (!state_live(dfas, item.dfa, item.state)) continue;
        const Cell& c = cells[item.ref];
        ++out.touched;
        if (out.forward[item.ref] == kUnbound) {
            out.forward[item.ref] = static_cast<Ref>(out.order.size());
            out.order.push_back(item.ref);
        } else if (revisit_heuristic) {
            if (c.kind != CellKind::Pair) continue;
            auto& s = seen[item.ref];
            if (std::find(s.begin(), s.end(), std::make_pair(item.dfa, item.state)) != s.end()) continue;
        }
        if (revisit_heuristic && c.kind == CellKind::Pair) seen[item.ref].push_back({item.dfa, item.state});
        if (c.kind == CellKind::Pair) {
            work.push_back({c.cdr, item.dfa, next_of(dfas, item.dfa, item.state, 1)});
            work.push_back({c.car, item.dfa, next_of(dfas, item.dfa, item.state, 0)});
        } else if (c.kind == CellKind::Closure) {
            args.clear();
            closure_dfas(item.ref, c, args);
            for (size_t i = c.args.size(); i-- > 0;) {
                const DfaId d = i < args.size() ? args[i] : kDfaAll;
                work.push_back({c.args[i], d, start_of(dfas, d)});
            }
        }
    }
    return out;
}

TraceResult trace_reachable(const std::vector<Cell>& cells, const std::vector<Ref>& roots) {
    TraceResult out;
    out.forward.assign(cells.size(), kUnbound);
    auto visit = [&](Ref r) {
        if (is_sentinel(r) || r >= cells.size() || out.forward[r] != kUnbound) return;
        out.forward[r] = static_cast<Ref>(out.order.size());
        out.order.push_back(r);
    };
    for (Ref r : roots) visit(r);
    for (size_t scan = 0; scan < out.order.size(); ++scan) {
        const Cell& c = cells[out.order[scan]];
        ++out.touched;
        if (c.kind == CellKind::Pair) {
            visit(c.car);
            visit(c.cdr);
        } else if (c.kind == CellKind::Closure) {
            for (Ref a : c.args) visit(a);
        }
    }
    return out;
}

void for_each_root_ref(MachineState& st, const std::function<void(Ref&)>& f) {
    for (Ref& r : st.env) f(r);
    for (Frame& fr : st.stack) {
        for (Ref& r : fr.env) f(r);
        f(fr.update);
    }
    for (PrintItem& it : st.print_stack) f(it.ref);
    f(st.ans);
}

std::vector<Ref> all_root_refs(const MachineState& st) {
    std::vector<Ref> out;
    for_each_root_ref(const_cast<MachineState&>(st), [&](Ref& r) { out.push_back(r); });
    return out;
}

namespace {

void add_slots(std::vector<TraceRoot>& roots, const std::vector<Ref>& env, const std::vector<SlotDfa>& slots) {
    for (const auto& s : slots)
        if (s.slot < static_cast<int>(env.size())) roots.push_back({env[s.slot], s.dfa});
}

}  // namespace

std::vector<TraceRoot> gc_roots(const MachineState& st, const GcPoint& point, const LivenessTables* tables,
                                GcMode mode) {
    std::vector<TraceRoot> roots;
    const bool lgc = mode == GcMode::Lgc && tables;
    if (lgc && st.control == ControlKind::Eval) {
        if (point.kind == GcPointKind::Entry) add_slots(roots, st.env, tables->entry.at(point.fun));
        else add_slots(roots, st.env, tables->after_if.at(point.psi)[point.branch]);
    } else {
        for (Ref r : st.env) roots.push_back({r, kDfaAll});
        if (lgc)
            for (size_t i = 0; i < st.env.size(); ++i)
                roots[i].dfa = i < st.liveness.size() ? st.liveness[i] : kDfaAll;
    }
    for (const Frame& f : st.stack) {
        if (lgc && f.resume == ResumeKind::Expr && f.expr) {
            if (f.expr->kind == ExprKind::If) add_slots(roots, f.env, tables->frame_if.at(f.expr->psi));
            else add_slots(roots, f.env, tables->frame_return.at(f.expr->psi));
        } else {
            for (size_t i = 0; i < f.env.size(); ++i) {
                const DfaId d = lgc && f.resume == ResumeKind::App && i < f.liveness.size() ? f.liveness[i] : kDfaAll;
                roots.push_back({f.env[i], d});
            }
        }
        roots.push_back({f.update, kDfaAll});
    }
    for (const PrintItem& it : st.print_stack) roots.push_back({it.ref, kDfaAll});
    roots.push_back({st.ans, kDfaAll});
    return roots;
}

CollectionRecord collect_garbage(MachineState& st, const GcPoint& point, const Program&,
                                 const LivenessTables* tables, const GcPolicy& policy) {
    const auto t0 = std::chrono::steady_clock::now();
    CollectionRecord rec;
    rec.alloc_clock = st.allocations;
    rec.cells_before = st.heap.used();
    const auto& from = st.heap.cells();
    TraceResult tr;
    if (policy.mode == GcMode::Lgc && tables) {
        auto closure_dfas = [](Ref, const Cell& c, std::vector<DfaId>& out) {
            out.assign(c.liveness.begin(), c.liveness.end());
        };
        tr = trace_heap(from, gc_roots(st, point, tables, policy.mode), tables->dfas, closure_dfas,
                        policy.revisit_heuristic);
    } else {
        tr = trace_reachable(from, all_root_refs(st));
    }
    auto translate = [&](Ref& r) {
        if (is_sentinel(r)) return;
        if (r < tr.forward.size() && tr.forward[r] != kUnbound) r = tr.forward[r];
        else if (policy.dangling_sentinel) r = kDangling;
    };
    std::vector<Cell> to;
    to.reserve(st.heap.capacity());
    for (Ref r : tr.order) to.push_back(from[r]);
    for (Cell& c : to) {
        if (c.kind == CellKind::Pair) {
            translate(c.car);
            translate(c.cdr);
        } else if (c.kind == CellKind::Closure) {
            for (Ref& a : c.args) translate(a);
        }
    }
    for_each_root_ref(st, translate);
    st.heap.replace(std::move(to));
    rec.cells_after = st.heap.used();
    rec.cells_touched = tr.touched;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

std::vector<std::uint64_t> reachable_serials(const MachineState& st) {
    const auto& cells = st.heap.cells();
    TraceResult tr = trace_reachable(cells, all_root_refs(st));
    std::vector<std::uint64_t> out;
    for (Ref r : tr.order) out.push_back(cells[r].serial);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::uint64_t> heap_serials(const Heap& h) {
    std::vector<std::uint64_t> out;
    for (const Cell& c : h.cells()) out.push_back(c.serial);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace lgc
