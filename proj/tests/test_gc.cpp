#include <gtest/gtest.h>

#include <algorithm>

#include "lgc/corpus.hpp"
#include "lgc/gc.hpp"
#include "lgc/profiler.hpp"
#include "oracles.hpp"

using namespace lgc;

namespace {

Cell num(std::int64_t v, std::uint64_t serial) {
    Cell c;
    c.kind = CellKind::Num;
    c.num = v;
    c.serial = serial;
    return c;
}

Cell pair(Ref car, Ref cdr, std::uint64_t serial) {
    Cell c;
    c.kind = CellKind::Pair;
    c.car = car;
    c.cdr = cdr;
    c.serial = serial;
    return c;
}

// (10 11 12): pairs at 0, 2, 4; numbers at 1, 3, 5; nil at 6.
std::vector<Cell> three_list() {
    std::vector<Cell> h;
    h.push_back(pair(1, 2, 0));
    h.push_back(num(10, 1));
    h.push_back(pair(3, 4, 2));
    h.push_back(num(11, 3));
    h.push_back(pair(5, 6, 4));
    h.push_back(num(12, 5));
    Cell nil;
    nil.kind = CellKind::Nil;
    nil.serial = 6;
    h.push_back(nil);
    return h;
}

LivenessDfa ones_star() {
    Nfa n;
    n.add_state();
    n.start = 0;
    n.final[0] = 1;
    n.add_edge(0, Label::One, 0);
    return finalize(n);
}

std::vector<Ref> taken(const TraceResult& tr) {
    std::vector<Ref> out = tr.order;
    std::sort(out.begin(), out.end());
    return out;
}

const ClosureDfas kNoClosures = [](Ref, const Cell&, std::vector<DfaId>&) {};

bool subset(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

Program corpus_program(const std::string& name) {
    return load_program_file(std::string(LGC_CORPUS_DIR) + "/" + name + ".lisp");
}

}  // namespace

TEST(Gc, SpineLivenessKeepsOnlyTheSpine) {
    auto h = three_list();
    std::vector<LivenessDfa> dfas{LivenessDfa::all(), LivenessDfa::none(), ones_star()};
    TraceResult tr = trace_heap(h, {{0, 2}}, dfas, kNoClosures, true);
    EXPECT_EQ(taken(tr), (std::vector<Ref>{0, 2, 4, 6}));
    EXPECT_EQ(tr.forward[1], kUnbound);
    EXPECT_NE(tr.forward[4], kUnbound);
}

TEST(Gc, ReachabilityKeepsEverything) {
    auto h = three_list();
    TraceResult tr = trace_reachable(h, {0});
    EXPECT_EQ(taken(tr), (std::vector<Ref>{0, 1, 2, 3, 4, 5, 6}));
    // Cheney order is breadth first.
    EXPECT_EQ(tr.order.front(), 0u);
    EXPECT_EQ(tr.order[1], 1u);
    EXPECT_EQ(tr.order[2], 2u);
}

TEST(Gc, EmptyLivenessKeepsNothing) {
    auto h = three_list();
    std::vector<LivenessDfa> dfas{LivenessDfa::all(), LivenessDfa::none()};
    EXPECT_TRUE(trace_heap(h, {{0, kDfaNone}}, dfas, kNoClosures, true).order.empty());
    EXPECT_EQ(trace_heap(h, {{0, kDfaAll}}, dfas, kNoClosures, true).order.size(), 7u);
}

TEST(Gc, SharedCellsAreCopiedOnce) {
    std::vector<Cell> h;
    h.push_back(pair(1, 1, 0));
    h.push_back(num(3, 1));
    std::vector<LivenessDfa> dfas{LivenessDfa::all(), LivenessDfa::none()};
    for (bool heuristic : {true, false}) {
        TraceResult tr = trace_heap(h, {{0, kDfaAll}, {1, kDfaAll}}, dfas, kNoClosures, heuristic);
        EXPECT_EQ(tr.order.size(), 2u);
    }
}

TEST(Gc, ClosureOperandsFollowTheirAutomata) {
    std::vector<Cell> h = three_list();
    Cell clo;
    clo.kind = CellKind::Closure;
    clo.args = {0, 3};
    clo.serial = 7;
    h.push_back(clo);
    std::vector<LivenessDfa> dfas{LivenessDfa::all(), LivenessDfa::none(), ones_star()};
    ClosureDfas cd = [](Ref, const Cell&, std::vector<DfaId>& out) { out = {2, kDfaNone}; };
    TraceResult tr = trace_heap(h, {{7, kDfaAll}}, dfas, cd, true);
    EXPECT_EQ(taken(tr), (std::vector<Ref>{0, 2, 4, 6, 7}));
}

TEST(Gc, RevisitHeuristicOnlySavesWork) {
    for (const char* name : {"motivating", "huffman", "msort"}) {
        Program p = corpus_program(name);
        LivenessTables t = LivenessTables::build(p);
        MachineConfig c;
        c.gc.mode = GcMode::Lgc;
        c.heap_cells = 4096;
        RunResult on = run_program(p, c, &t);
        c.gc.revisit_heuristic = false;
        RunResult off = run_program(p, c, &t);
        EXPECT_EQ(on.output, off.output) << name;
        EXPECT_LE(on.stats.gc.cells_touched, off.stats.gc.cells_touched) << name;
    }
}

TEST(Gc, PreservedWithinReachablePerCollection) {
    for (const auto& entry : list_corpus()) {
        Program p = load_program_file(entry.path);
        LivenessTables t = LivenessTables::build(p);
        MachineConfig c;
        c.gc.mode = GcMode::Lgc;
        c.heap_cells = 2048;
        Machine m(p, c, &t);
        ProfileOptions po;
        po.collection_sets = true;
        Profiler prof(po);
        m.add_observer(&prof);
        m.run();
        for (const auto& s : prof.collections())
            EXPECT_TRUE(subset(s.preserved, s.reachable)) << entry.name << " gc " << s.index;
    }
}

namespace {

// At every LGC, traces once with the refined closure automata and once with the
// automata recorded when each closure was built.
struct RefinementProbe : MachineObserver {
    size_t compared = 0;
    bool ok = true;
    void before_collection(Machine& m, const GcPoint& point) override {
        const auto& st = m.state();
        const LivenessTables& t = *m.tables();
        auto roots = gc_roots(st, point, &t, GcMode::Lgc);
        ClosureDfas refined = [](Ref, const Cell& c, std::vector<DfaId>& out) {
            out.assign(c.liveness.begin(), c.liveness.end());
        };
        ClosureDfas initial = [&t](Ref, const Cell& c, std::vector<DfaId>& out) {
            out = t.closure.at(c.site->pi);
        };
        auto a = taken(trace_heap(st.heap.cells(), roots, t.dfas, refined, false));
        auto b = taken(trace_heap(st.heap.cells(), roots, t.dfas, initial, false));
        ok = ok && std::includes(b.begin(), b.end(), a.begin(), a.end());
        ++compared;
    }
};

}  // namespace

TEST(Gc, RefinementOnlyShrinksPreservedSet) {
    size_t compared = 0;
    for (const auto& entry : list_corpus()) {
        Program p = load_program_file(entry.path);
        LivenessTables t = LivenessTables::build(p);
        MachineConfig c;
        c.gc.mode = GcMode::Lgc;
        c.heap_cells = 2048;
        Machine m(p, c, &t);
        RefinementProbe probe;
        m.add_observer(&probe);
        m.run();
        EXPECT_TRUE(probe.ok) << entry.name;
        compared += probe.compared;
    }
    EXPECT_GT(compared, 0u);
}

namespace {

struct PointLog : MachineObserver {
    std::vector<GcPoint> collected;
    void before_collection(Machine&, const GcPoint& p) override { collected.push_back(p); }
};

}  // namespace

TEST(Gc, CollectsWhenBranchBoundExceedsFreeCells) {
    Program p = corpus_program("motivating");
    const int len = p.find("length");
    const Expr& iff = *p.defs[len].body->body;
    ASSERT_EQ(iff.kind, ExprKind::If);
    const int bound = oracle::count_lets(*iff.else_branch);
    EXPECT_EQ(bound, 4);
    LivenessTables t = LivenessTables::build(p);
    bool seen = false;
    for (size_t heap = 40; heap <= 80 && !seen; ++heap) {
        MachineConfig c;
        c.gc.mode = GcMode::Lgc;
        c.heap_cells = heap;
        Machine m(p, c, &t);
        PointLog log;
        m.add_observer(&log);
        try {
            m.run();
        } catch (const OutOfMemory&) {
            continue;
        }
        for (const auto& pt : log.collected)
            if (pt.kind == GcPointKind::AfterIf && pt.fun == len && pt.branch == 1) {
                EXPECT_EQ(pt.bound, bound);
                seen = true;
            }
    }
    EXPECT_TRUE(seen);
}

namespace {

struct RootCheck : MachineObserver {
    bool dangling = false;
    bool bad = false;
    void after_collection(Machine& m, const CollectionRecord&) override {
        for (Ref r : all_root_refs(m.state())) {
            if (r == kDangling) dangling = true;
            else if (r != kUnbound && !m.state().heap.valid(r)) bad = true;
        }
    }
};

}  // namespace

TEST(Gc, UntranslatedReferencesBecomeDangling) {
    Program p = corpus_program("motivating");
    LivenessTables t = LivenessTables::build(p);
    for (bool sentinel : {true, false}) {
        MachineConfig c;
        c.gc.mode = GcMode::Lgc;
        c.gc.dangling_sentinel = sentinel;
        c.heap_cells = 48;
        Machine m(p, c, &t);
        RootCheck rc;
        m.add_observer(&rc);
        EXPECT_EQ(m.run(), "5\n");
        EXPECT_EQ(rc.dangling, sentinel);
        EXPECT_FALSE(sentinel && rc.bad);
    }
}

TEST(Gc, LgcNeverCollectsMoreOftenThanRgc) {
    for (const auto& entry : list_corpus()) {
        Program p = load_program_file(entry.path);
        LivenessTables t = LivenessTables::build(p);
        MachineConfig c;
        c.heap_cells = 8192;
        c.gc.mode = GcMode::Rgc;
        RunResult r = run_program(p, c);
        c.gc.mode = GcMode::Lgc;
        RunResult l = run_program(p, c, &t);
        EXPECT_EQ(r.output, l.output) << entry.name;
        EXPECT_LE(l.stats.gc.collections, r.stats.gc.collections) << entry.name;
    }
}

TEST(Gc, CollectionLogIsConsistent) {
    Program p = corpus_program("huffman");
    MachineConfig c;
    c.gc.mode = GcMode::Rgc;
    c.heap_cells = 8192;
    RunResult r = run_program(p, c);
    ASSERT_EQ(r.stats.gc.log.size(), r.stats.gc.collections);
    size_t peak = 0;
    for (const auto& rec : r.stats.gc.log) {
        EXPECT_LE(rec.cells_after, rec.cells_before);
        peak = std::max(peak, rec.cells_after);
    }
    EXPECT_EQ(peak, r.stats.gc.peak_retained);
    EXPECT_EQ(r.stats.peak_memory, peak);
}
