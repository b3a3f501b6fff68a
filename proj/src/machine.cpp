#include "lgc/machine.hpp"

#include <chrono>

#include "lgc/gc.hpp"
#include "lgc/liveness_tables.hpp"

namespace lgc {

const char* rule_name(Rule r) {
    switch (r) {
    case Rule::Const: return "const";
    case Rule::Cons: return "cons";
    case Rule::CarSelect: return "car-select";
    case Rule::Car1Clo: return "car-1-clo";
    case Rule::CarClo: return "car-clo";
    case Rule::CdrSelect: return "cdr-select";
    case Rule::Cdr1Clo: return "cdr-1-clo";
    case Rule::CdrClo: return "cdr-clo";
    case Rule::NullQ: return "null";
    case Rule::NullQClo: return "null-clo";
    case Rule::Prim: return "prim";
    case Rule::Prim1Clo: return "prim-1-clo";
    case Rule::Prim2Clo: return "prim-2-clo";
    case Rule::Funcall: return "funcall";
    case Rule::Let: return "let";
    case Rule::IfTrue: return "if-true";
    case Rule::IfFalse: return "if-false";
    case Rule::IfClo: return "if-clo";
    case Rule::ReturnWhnf: return "return-whnf";
    case Rule::ReturnClo: return "return-clo";
    case Rule::Print: return "print";
    case Rule::PrintClo: return "print-clo";
    case Rule::Halt: return "halt";
    }
    return "?";
}

const char* gc_mode_name(GcMode m) {
    switch (m) {
    case GcMode::None: return "none";
    case GcMode::Rgc: return "rgc";
    case GcMode::Lgc: return "lgc";
    }
    return "?";
}

GcMode parse_gc_mode(const std::string& s) {
    if (s == "none") return GcMode::None;
    if (s == "rgc") return GcMode::Rgc;
    if (s == "lgc") return GcMode::Lgc;
    throw Error("unknown gc mode '" + s + "' (expected none, rgc or lgc)");
}

Machine::Machine(const Program& p, MachineConfig config, const LivenessTables* tables)
    : program_(p), config_(config), tables_(tables) {
    if (config_.gc.mode == GcMode::Lgc && !tables_)
        throw Error("liveness-based collection needs liveness tables");
    if (p.main_index < 0) throw ProgramError("no definition of main", {});
    state_.heap = Heap(config_.heap_cells);
    Cell ans;
    ans.serial = state_.allocations++;
    state_.ans = state_.heap.allocate(ans);
    Frame print;
    print.resume = ResumeKind::Print;
    print.env = {state_.ans};
    print.update = state_.ans;
    state_.stack.push_back(std::move(print));
    state_.print_stack.push_back({PrintItem::Value, state_.ans});
    const FunDef& main = p.main();
    state_.control = ControlKind::Eval;
    state_.fun = p.main_index;
    state_.expr = main.body.get();
    state_.env.assign(main.slot_count, kUnbound);
}

Ref Machine::lookup(const std::string& name) const {
    const FunDef& d = program_.defs.at(state_.fun);
    for (size_t i = 0; i < d.slot_names.size(); ++i)
        if (d.slot_names[i] == name) return state_.env.at(i);
    throw Error("no variable '" + name + "' in " + d.name);
}

const Cell& Machine::read(Ref r, const char* what) {
    for (auto* o : observers_) o->on_read(*this, r, what);
    const Cell& c = state_.heap.at(r);
    if (c.kind == CellKind::BlackHole)
        throw RuntimeFault("infinite loop: the value of '" + std::string(what) + "' depends on itself");
    if (c.kind == CellKind::Empty) throw InternalError("read of an empty cell");
    return c;
}

void Machine::write_value(Ref loc, const Cell& v) {
    Cell& dst = state_.heap.at(loc);
    dst.kind = v.kind;
    dst.num = v.num;
    dst.car = v.car;
    dst.cdr = v.cdr;
    dst.site = nullptr;
    dst.args.clear();
    dst.liveness.clear();
    for (auto* o : observers_) o->on_write(*this, loc);
}

void Machine::push_frame(ResumeKind resume, Ref update) {
    Frame f;
    f.resume = resume;
    f.expr = state_.expr;
    f.fun = state_.fun;
    f.env = std::move(state_.env);
    f.update = update;
    f.liveness = std::move(state_.liveness);
    f.demand = state_.demand;
    state_.stack.push_back(std::move(f));
}

void Machine::force(Ref r, Rule rule) {
    Cell& c = state_.heap.at(r);
    state_.control = ControlKind::Apply;
    state_.expr = c.site;
    state_.env = std::move(c.args);
    state_.liveness = std::move(c.liveness);
    if (demand_) {
        const std::uint32_t context = rule == Rule::PrintClo ? demand_->print_demand() : state_.stack.back().demand;
        state_.demand = demand_->on_force(rule, context, c.demand);
    } else {
        state_.demand = 0;
    }
    c.kind = CellKind::BlackHole;
    c.args.clear();
    c.liveness.clear();
    ++stats_.closure_entries;
}

namespace {

Cell value_copy(const Cell& c) {
    Cell v;
    v.kind = c.kind;
    v.num = c.num;
    v.car = c.car;
    v.cdr = c.cdr;
    return v;
}

Cell number(std::int64_t n) {
    Cell v;
    v.kind = CellKind::Num;
    v.num = n;
    return v;
}

[[noreturn]] void type_error(const std::string& op, const Cell& c) {
    throw RuntimeFault(op + " applied to " + cell_kind_name(c.kind));
}

}  // namespace

// Pops the top frame after the current control produced a value.
void Machine::pop_frame() {
    Frame f = std::move(state_.stack.back());
    state_.stack.pop_back();
    switch (f.resume) {
    case ResumeKind::Expr: state_.control = ControlKind::Eval; break;
    case ResumeKind::App: state_.control = ControlKind::Apply; break;
    case ResumeKind::Print: state_.control = ControlKind::Print; break;
    }
    state_.expr = f.expr;
    state_.fun = f.fun;
    state_.env = std::move(f.env);
    state_.liveness = std::move(f.liveness);
    state_.demand = f.demand;
}

Rule Machine::step() {
    if (!entry_checked_) {
        entry_checked_ = true;
        gc_point({GcPointKind::Entry, program_.main_index, 0, -1, program_.main().body->let_count});
    }
    if (config_.max_steps && state_.steps >= config_.max_steps)
        throw RuntimeFault("step limit of " + std::to_string(config_.max_steps) + " reached");
    std::string label;
    if (config_.trace && state_.expr && state_.control != ControlKind::Print)
        label = "pi" + std::to_string(state_.expr->pi);
    Rule r = Rule::Halt;
    switch (state_.control) {
    case ControlKind::Eval: r = step_eval(); break;
    case ControlKind::Apply: r = step_apply(); break;
    case ControlKind::Print: r = step_print(); break;
    case ControlKind::Halted: return Rule::Halt;
    }
    ++state_.steps;
    if (config_.trace)
        *config_.trace << rule_name(r) << ' ' << (label.empty() ? "print" : label) << ' '
                       << state_.stack.size() << ' ' << state_.heap.used() << '\n';
    for (auto* o : observers_) o->on_step(*this, r);
    return r;
}

Rule Machine::step_eval() {
    const Expr& e = *state_.expr;
    switch (e.kind) {
    case ExprKind::Let: {
        for (auto* o : observers_) o->before_let(*this, e);
        Cell c;
        c.kind = CellKind::Closure;
        c.site = &e;
        for (const auto& a : e.rhs.args) c.args.push_back(state_.env.at(a.slot));
        if (tables_ && config_.gc.mode == GcMode::Lgc) c.liveness = tables_->closure.at(e.pi);
        if (demand_) c.demand = demand_->on_let(e, state_.demand);
        c.serial = state_.allocations++;
        Ref r = state_.heap.allocate(std::move(c));
        for (auto* o : observers_) o->on_allocate(*this, r);
        state_.env.at(e.var.slot) = r;
        state_.expr = e.body.get();
        return Rule::Let;
    }
    case ExprKind::If: {
        const Ref r = state_.env.at(e.var.slot);
        const Cell& c = read(r, e.var.name.c_str());
        if (c.kind == CellKind::Closure) {
            push_frame(ResumeKind::Expr, r);
            force(r, Rule::IfClo);
            return Rule::IfClo;
        }
        if (c.kind != CellKind::Num) type_error("if", c);
        const int branch = c.num != 0 ? 0 : 1;
        const Expr* next = branch == 0 ? e.then_branch.get() : e.else_branch.get();
        state_.expr = next;
        refine(e.psi, branch);
        gc_point({GcPointKind::AfterIf, state_.fun, e.psi, branch, next->let_count});
        return branch == 0 ? Rule::IfTrue : Rule::IfFalse;
    }
    case ExprKind::Return: {
        const Ref r = state_.env.at(e.var.slot);
        const Cell& c = read(r, e.var.name.c_str());
        if (c.kind == CellKind::Closure) {
            push_frame(ResumeKind::Expr, r);
            force(r, Rule::ReturnClo);
            return Rule::ReturnClo;
        }
        const Cell v = value_copy(c);
        const Ref loc = state_.stack.back().update;
        pop_frame();
        write_value(loc, v);
        return Rule::ReturnWhnf;
    }
    }
    throw InternalError("bad expression");
}

Rule Machine::apply_select(bool car) {
    const App& a = state_.expr->rhs;
    const Ref x = state_.env.at(0);
    const std::string name = a.args[0].name;
    const Cell& c = read(x, name.c_str());
    if (c.kind == CellKind::Closure) {
        push_frame(ResumeKind::App, x);
        force(x, car ? Rule::CarClo : Rule::CdrClo);
        return car ? Rule::CarClo : Rule::CdrClo;
    }
    if (c.kind != CellKind::Pair) type_error(car ? "car" : "cdr", c);
    const Ref field = car ? c.car : c.cdr;
    const std::string path = name + (car ? ".0" : ".1");
    const Cell& f = read(field, path.c_str());
    if (f.kind == CellKind::Closure) {
        push_frame(ResumeKind::App, field);
        force(field, car ? Rule::Car1Clo : Rule::Cdr1Clo);
        return car ? Rule::Car1Clo : Rule::Cdr1Clo;
    }
    const Cell v = value_copy(f);
    const Ref loc = state_.stack.back().update;
    pop_frame();
    write_value(loc, v);
    return car ? Rule::CarSelect : Rule::CdrSelect;
}

Rule Machine::step_apply() {
    const App& a = state_.expr->rhs;
    auto finish = [&](const Cell& v, Rule r) {
        const Ref loc = state_.stack.back().update;
        pop_frame();
        write_value(loc, v);
        return r;
    };
    switch (a.kind) {
    case AppKind::Const: {
        Cell v;
        if (a.value) v = number(*a.value);
        else v.kind = CellKind::Nil;
        return finish(v, Rule::Const);
    }
    case AppKind::Cons: {
        Cell v;
        v.kind = CellKind::Pair;
        v.car = state_.env.at(0);
        v.cdr = state_.env.at(1);
        return finish(v, Rule::Cons);
    }
    case AppKind::Car: return apply_select(true);
    case AppKind::Cdr: return apply_select(false);
    case AppKind::NullQ: {
        const Ref x = state_.env.at(0);
        const Cell& c = read(x, a.args[0].name.c_str());
        if (c.kind == CellKind::Closure) {
            push_frame(ResumeKind::App, x);
            force(x, Rule::NullQClo);
            return Rule::NullQClo;
        }
        return finish(number(c.kind == CellKind::Nil ? 1 : 0), Rule::NullQ);
    }
    case AppKind::Prim: {
        const Ref x = state_.env.at(0);
        const Cell& cx = read(x, a.args[0].name.c_str());
        if (cx.kind == CellKind::Closure) {
            push_frame(ResumeKind::App, x);
            force(x, Rule::Prim1Clo);
            return Rule::Prim1Clo;
        }
        const std::int64_t u = cx.num;
        const CellKind ku = cx.kind;
        const Ref y = state_.env.at(1);
        const Cell& cy = read(y, a.args[1].name.c_str());
        if (cy.kind == CellKind::Closure) {
            push_frame(ResumeKind::App, y);
            force(y, Rule::Prim2Clo);
            return Rule::Prim2Clo;
        }
        if (ku != CellKind::Num) type_error(prim_name(a.op), state_.heap.at(x));
        if (cy.kind != CellKind::Num) type_error(prim_name(a.op), cy);
        const std::int64_t v = cy.num;
        std::int64_t out = 0;
        bool overflow = false;
        switch (a.op) {
        case PrimOp::Add: overflow = __builtin_add_overflow(u, v, &out); break;
        case PrimOp::Sub: overflow = __builtin_sub_overflow(u, v, &out); break;
        case PrimOp::Mul: overflow = __builtin_mul_overflow(u, v, &out); break;
        case PrimOp::Div:
            if (v == 0) throw RuntimeFault("division by zero");
            if (u == INT64_MIN && v == -1) overflow = true;
            else out = u / v;
            break;
        case PrimOp::Lt: out = u < v ? 1 : 0; break;
        case PrimOp::Eq: out = u == v ? 1 : 0; break;
        }
        if (overflow) throw RuntimeFault(std::string("integer overflow in ") + prim_name(a.op));
        return finish(number(out), Rule::Prim);
    }
    case AppKind::Call: {
        const int callee = a.callee_index;
        const FunDef& d = program_.defs.at(callee);
        std::vector<Ref> env(d.slot_count, kUnbound);
        for (size_t i = 0; i < d.params.size(); ++i) env[i] = state_.env.at(i);
        state_.control = ControlKind::Eval;
        state_.expr = d.body.get();
        state_.fun = callee;
        state_.env = std::move(env);
        state_.liveness.clear();
        gc_point({GcPointKind::Entry, callee, 0, -1, d.body->let_count});
        return Rule::Funcall;
    }
    }
    throw InternalError("bad application");
}

Rule Machine::step_print() {
    auto& ps = state_.print_stack;
    if (ps.empty()) {
        state_.output += '\n';
        state_.control = ControlKind::Halted;
        return Rule::Halt;
    }
    const PrintItem item = ps.back();
    if (item.kind == PrintItem::Close) {
        ps.pop_back();
        state_.output += ')';
        return Rule::Print;
    }
    const Cell& c = read(item.ref, item.kind == PrintItem::Value ? "ans" : "ans.1");
    if (c.kind == CellKind::Closure) {
        state_.expr = nullptr;
        state_.env.clear();
        state_.liveness.clear();
        state_.demand = demand_ ? demand_->print_demand() : 0;
        push_frame(ResumeKind::Print, item.ref);
        force(item.ref, Rule::PrintClo);
        return Rule::PrintClo;
    }
    ps.pop_back();
    const Ref car = c.car, cdr = c.cdr;
    if (item.kind == PrintItem::Value) {
        switch (c.kind) {
        case CellKind::Num: state_.output += std::to_string(c.num); break;
        case CellKind::Nil: state_.output += "nil"; break;
        case CellKind::Pair:
            state_.output += '(';
            ps.push_back({PrintItem::Tail, cdr});
            ps.push_back({PrintItem::Value, car});
            break;
        default: throw InternalError("cannot print a " + std::string(cell_kind_name(c.kind)));
        }
    } else {
        switch (c.kind) {
        case CellKind::Nil: state_.output += ')'; break;
        case CellKind::Pair:
            state_.output += ' ';
            ps.push_back({PrintItem::Tail, cdr});
            ps.push_back({PrintItem::Value, car});
            break;
        case CellKind::Num: state_.output += " . " + std::to_string(c.num) + ")"; break;
        default: throw InternalError("cannot print a " + std::string(cell_kind_name(c.kind)));
        }
    }
    return Rule::Print;
}

void Machine::refine(int psi, int branch) {
    if (!tables_ || config_.gc.mode != GcMode::Lgc) return;
    for (const auto& ref : tables_->refinements.at(psi)[branch]) {
        const Ref r = state_.env.at(ref.slot);
        if (is_sentinel(r) || !state_.heap.valid(r)) continue;
        Cell& c = state_.heap.at(r);
        if (c.kind == CellKind::Closure && c.site && c.site->pi == ref.pi) c.liveness = ref.dfas;
    }
}

void Machine::gc_point(const GcPoint& point) {
    bool forced = false;
    for (auto* o : observers_) forced = o->on_gc_point(*this, point) || forced;
    const size_t bound = static_cast<size_t>(point.bound);
    if (config_.gc.mode == GcMode::None) {
        if (state_.heap.free() < bound)
            throw OutOfMemory("heap of " + std::to_string(state_.heap.capacity()) +
                              " cells exhausted (collection disabled)");
        return;
    }
    if (!forced && state_.heap.free() >= bound) return;
    collect(point);
    if (state_.heap.free() < bound)
        throw OutOfMemory("heap of " + std::to_string(state_.heap.capacity()) + " cells exhausted: " +
                          std::to_string(state_.heap.used()) + " cells survive collection, " +
                          std::to_string(bound) + " needed");
}

CollectionRecord Machine::collect(const GcPoint& point) {
    for (auto* o : observers_) o->before_collection(*this, point);
    CollectionRecord rec = collect_garbage(state_, point, program_, tables_, config_.gc);
    rec.index = stats_.gc.collections++;
    rec.step = state_.steps;
    stats_.gc.cells_collected += rec.cells_before - rec.cells_after;
    stats_.gc.cells_touched += rec.cells_touched;
    stats_.gc.peak_retained = std::max(stats_.gc.peak_retained, rec.cells_after);
    stats_.gc.gc_seconds += rec.seconds;
    stats_.gc.log.push_back(rec);
    for (auto* o : observers_) o->after_collection(*this, rec);
    return rec;
}

std::string Machine::run() {
    const auto t0 = std::chrono::steady_clock::now();
    while (!halted()) step();
    stats_.steps = state_.steps;
    stats_.allocations = state_.allocations;
    stats_.peak_memory = stats_.gc.collections ? stats_.gc.peak_retained : state_.allocations;
    stats_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return state_.output;
}

RunResult run_program(const Program& p, const MachineConfig& config, const LivenessTables* tables) {
    Machine m(p, config, tables);
    RunResult r;
    r.output = m.run();
    r.stats = m.stats();
    return r;
}

}  // namespace lgc
