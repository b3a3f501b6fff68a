#include "lgc/minefield.hpp"

#include <set>

namespace lgc {

DemandStore::DemandStore(const LivenessTables& tables) : tables_(tables), builder_(tables.strongly_regular) {
    intern(LivenessDfa::all());
    intern(LivenessDfa::none());
    epsilon_ = intern(LivenessDfa::epsilon());
}

DfaId DemandStore::intern(const LivenessDfa& d) {
    if (dfas_.size() < 2) {
        by_bytes_.emplace(d.serialize(), static_cast<DfaId>(dfas_.size()));
        dfas_.push_back(d);
        return static_cast<DfaId>(dfas_.size() - 1);
    }
    if (d.empty()) return kDfaNone;
    auto [it, fresh] = by_bytes_.emplace(d.serialize(), static_cast<DfaId>(dfas_.size()));
    if (fresh) dfas_.push_back(d);
    return it->second;
}

DfaId DemandStore::epsilon() { return epsilon_; }

DfaId DemandStore::select(DfaId sigma, int bit) {
    if (sigma == kDfaNone) return epsilon_;
    auto it = selected_.find({sigma, bit});
    if (it != selected_.end()) return it->second;
    Nfa n;
    n.start = n.add_state();
    const int q = n.add_state();
    n.add_edge(n.start, bit ? Label::One : Label::Zero, q);
    n.final[q] = 1;
    Nfa m = concat(n, dfas_.at(sigma));
    const int s = m.add_state();
    m.add_edge(s, Label::Eps, m.start);
    m.start = s;
    m.final[s] = 1;
    const DfaId id = intern(finalize(m));
    selected_[{sigma, bit}] = id;
    return id;
}

bool DemandStore::covers(DfaId b, DfaId a) const {
    if (a == kDfaNone || b == kDfaAll) return true;
    const LivenessDfa& da = dfas_.at(a);
    const LivenessDfa& db = dfas_.at(b);
    std::set<std::pair<int, int>> seen{{da.start, db.start}};
    std::vector<std::pair<int, int>> work{{da.start, db.start}};
    while (!work.empty()) {
        auto [x, y] = work.back();
        work.pop_back();
        if (!da.is_live(x)) continue;
        if (!db.is_live(y)) return false;
        for (int bit = 0; bit < 2; ++bit) {
            std::pair<int, int> nxt{da.step(x, bit), db.step(y, bit)};
            if (seen.insert(nxt).second) work.push_back(nxt);
        }
    }
    return true;
}

DfaId DemandStore::compose(int nt, DfaId sigma) {
    if (sigma == kDfaNone) return kDfaNone;
    auto it = composed_.find({nt, sigma});
    if (it != composed_.end()) return it->second;
    auto nit = nfa_.find(nt);
    if (nit == nfa_.end()) nit = nfa_.emplace(nt, builder_.build(nt)).first;
    const DfaId id = intern(finalize(concat(nit->second, dfas_.at(sigma))));
    composed_[{nt, sigma}] = id;
    return id;
}

Minefield::Minefield(const LivenessTables& tables, const MinefieldOptions& opts)
    : tables_(tables), opts_(opts), store_(tables) {}

void Minefield::attach(Machine& m) {
    m.add_observer(this);
    m.set_demand_tracker(this);
}

void Minefield::on_step(Machine&, Rule r) {
    recent_.push_back(r);
    if (recent_.size() > opts_.rule_history) recent_.pop_front();
    if (opts_.record_rules) rules_.push_back(r);
}

std::uint32_t Minefield::on_force(Rule rule, std::uint32_t context, std::uint32_t stored) {
    DfaId d = context;
    switch (rule) {
    case Rule::CarClo: d = store_.select(context, 0); break;
    case Rule::CdrClo: d = store_.select(context, 1); break;
    case Rule::NullQClo:
    case Rule::Prim1Clo:
    case Rule::Prim2Clo:
    case Rule::IfClo: d = store_.whnf(context); break;
    case Rule::PrintClo: d = kDfaAll; break;
    default: break;
    }
    // The value is shared by every later use, so evaluation runs under the closure's own
    // demand; the rule's demand must be part of it.
    auto key = std::make_pair(d, static_cast<DfaId>(stored));
    auto it = covered_.find(key);
    if (it == covered_.end()) it = covered_.emplace(key, store_.covers(stored, d)).first;
    if (!it->second) ++escapes_;
    if (stored == kDfaNone) ++null_demands_;
    return stored;
}

std::uint32_t Minefield::on_let(const Expr& let, std::uint32_t current) {
    auto it = tables_.rel_let.find(let.pi);
    if (it == tables_.rel_let.end()) throw InternalError("no demand-free root for let at pi" + std::to_string(let.pi));
    return store_.compose(it->second, current);
}

std::vector<TraceRoot> Minefield::roots(const Machine& m, const Expr& let) {
    const MachineState& st = m.state();
    const Program& p = m.program();
    std::vector<TraceRoot> out;
    auto point = [&](int pi, int fun, const std::vector<Ref>& env, DfaId sigma) {
        const auto& names = p.defs.at(fun).slot_names;
        for (size_t s = 0; s < env.size(); ++s) {
            auto it = tables_.rel_point.find({pi, names[s]});
            if (it != tables_.rel_point.end()) out.push_back({env[s], store_.compose(it->second, sigma)});
        }
    };
    point(let.pi, st.fun, st.env, st.demand);
    for (const Frame& f : st.stack) {
        if (f.resume == ResumeKind::Expr) {
            point(f.expr->pi, f.fun, f.env, f.demand);
        } else if (f.resume == ResumeKind::App) {
            for (size_t i = 0; i < f.env.size(); ++i) {
                auto it = tables_.rel_ref.find({f.expr->pi, static_cast<int>(i)});
                out.push_back({f.env[i], it == tables_.rel_ref.end() ? kDfaAll : store_.compose(it->second, f.demand)});
            }
        } else {
            for (Ref r : f.env) out.push_back({r, kDfaAll});
        }
        out.push_back({f.update, kDfaAll});
    }
    for (const PrintItem& it : st.print_stack) out.push_back({it.ref, kDfaAll});
    out.push_back({st.ans, kDfaAll});
    return out;
}

TraceResult Minefield::witness(const Machine& m, const Expr& let) {
    const auto r = roots(m, let);
    auto closure_dfas = [&](Ref, const Cell& c, std::vector<DfaId>& out) {
        for (size_t i = 0; i < c.args.size(); ++i) {
            auto it = tables_.rel_ref.find({c.site->pi, static_cast<int>(i)});
            out.push_back(it == tables_.rel_ref.end() ? kDfaAll : store_.compose(it->second, c.demand));
        }
    };
    // Closure automata are interned while tracing, so the store may grow under the trace.
    return trace_heap(m.state().heap.cells(), r, store_.dfas(), closure_dfas, true);
}

void Minefield::poison(Machine& m, const Expr& let, const TraceResult& tr) {
    MachineState& st = m.state();
    const Program& p = m.program();
    const auto& cells = st.heap.cells();
    auto kill = [&](Ref& r, const std::string& where) {
        if (is_sentinel(r) || r >= tr.forward.size() || tr.forward[r] != kUnbound) return;
        PoisonEvent ev;
        ev.collection = collections_;
        ev.step = st.steps;
        ev.let_pi = let.pi;
        ev.function = p.defs.at(st.fun).name;
        ev.location = where;
        ev.target = cells[r].serial;
        r = kPoisonBase + static_cast<Ref>(events_.size());
        events_.push_back(std::move(ev));
    };
    const auto& names = p.defs.at(st.fun).slot_names;
    for (size_t s = 0; s < st.env.size(); ++s) kill(st.env[s], "env:" + names[s]);
    for (size_t k = 0; k < st.stack.size(); ++k) {
        Frame& f = st.stack[k];
        if (f.resume == ResumeKind::Print) continue;
        for (size_t s = 0; s < f.env.size(); ++s) {
            const std::string var = f.resume == ResumeKind::Expr ? p.defs.at(f.fun).slot_names[s]
                                                                 : f.expr->rhs.args.at(s).name;
            kill(f.env[s], "frame#" + std::to_string(k) + ":" + var);
        }
    }
    for (Ref r : tr.order) {
        Cell& c = st.heap.at(r);
        const std::string cell = "cell#" + std::to_string(c.serial);
        if (c.kind == CellKind::Pair) {
            kill(c.car, cell + ".car");
            kill(c.cdr, cell + ".cdr");
        } else if (c.kind == CellKind::Closure) {
            for (size_t i = 0; i < c.args.size(); ++i)
                kill(c.args[i], cell + ".arg" + std::to_string(i) + ":" + c.site->rhs.args[i].name);
        }
    }
}

void Minefield::before_let(Machine& m, const Expr& let) {
    TraceResult tr = witness(m, let);
    if (opts_.poison) poison(m, let, tr);
    ++collections_;
}

void Minefield::on_read(Machine& m, Ref r, const char* what) {
    if (!is_poison(r)) return;
    const MachineState& st = m.state();
    nlohmann::json t;
    t["result"] = "bang";
    t["step"] = st.steps;
    t["function"] = st.fun >= 0 ? m.program().defs.at(st.fun).name : "";
    t["pi"] = st.expr ? st.expr->pi : 0;
    t["access"] = what;
    const PoisonEvent& ev = events_.at(r - kPoisonBase);
    t["poisoned"] = {{"collection", ev.collection}, {"step", ev.step},      {"before_let", ev.let_pi},
                     {"function", ev.function},     {"location", ev.location}, {"cell", ev.target}};
    nlohmann::json rules = nlohmann::json::array();
    for (Rule x : recent_) rules.push_back(rule_name(x));
    t["rules"] = rules;
    throw MinefieldBang(std::move(t));
}

CheckResult check_program(const Program& p, const MinefieldOptions& opts) {
    TableOptions to = opts.tables;
    to.analysis.relative_roots = true;
    const LivenessTables tables = LivenessTables::build(p, to);
    Minefield mf(tables, opts);
    MachineConfig cfg;
    cfg.gc.mode = opts.collector;
    cfg.heap_cells = opts.heap_cells;
    cfg.max_steps = opts.max_steps;
    Machine m(p, cfg, &tables);
    mf.attach(m);
    CheckResult res;
    try {
        res.output = m.run();
    } catch (MinefieldBang& b) {
        res.bang = true;
        res.trace = std::move(b.trace);
        res.output = m.state().output;
    }
    res.steps = m.state().steps;
    res.collections = mf.collections();
    res.poisoned = mf.events().size();
    res.null_demands = mf.null_demands();
    res.demand_escapes = mf.demand_escapes();
    res.demands = mf.demands().size();
    res.rules = mf.rules();
    return res;
}

}  // namespace lgc
