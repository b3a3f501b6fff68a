#include "lgc/analysis.hpp"

namespace lgc {

void merge_into(SymbolicEnv& into, const SymbolicEnv& from) {
    for (const auto& [v, set] : from) {
        if (set.empty()) continue;
        into[v].insert(set.begin(), set.end());
    }
}

StringSet identity_demand() { return StringSet{SymString{}}; }

namespace {

StringSet single(Terminal t) { return StringSet{SymString{Symbol::t(t)}}; }

void add_liveness(SymbolicEnv& env, const std::string& var, StringSet strings) {
    if (strings.empty()) return;
    env[var].insert(strings.begin(), strings.end());
}

}  // namespace

LivenessEquations::LivenessEquations(const Program& p, Grammar& g) : program_(p) {
    for (const auto& d : p.defs) {
        std::vector<int> nts;
        for (size_t i = 0; i < d.params.size(); ++i)
            nts.push_back(g.intern("D:" + d.name + ":" + std::to_string(i + 1)));
        d_nts_.push_back(std::move(nts));
    }
}

StringSet LivenessEquations::prefixes(const App& a, size_t operand) const {
    switch (a.kind) {
    case AppKind::Const: return {};
    case AppKind::Cons: return single(operand == 0 ? Terminal::BarZero : Terminal::BarOne);
    case AppKind::Car: return {{Symbol::t(Terminal::Two)}, {Symbol::t(Terminal::Zero)}};
    case AppKind::Cdr: return {{Symbol::t(Terminal::Two)}, {Symbol::t(Terminal::One)}};
    case AppKind::NullQ:
    case AppKind::Prim: return single(Terminal::Two);
    case AppKind::Call: {
        int callee = a.callee_index >= 0 ? a.callee_index : program_.find(a.callee);
        if (callee < 0) throw ProgramError("call to undefined function '" + a.callee + "'", a.pos);
        return StringSet{SymString{Symbol::nt(d_nts_.at(callee).at(operand))}};
    }
    }
    return {};
}

SymbolicEnv LivenessEquations::ref_app(const App& a, const StringSet& demand) const {
    SymbolicEnv env;
    for (size_t i = 0; i < a.args.size(); ++i)
        add_liveness(env, a.args[i].name, concat(prefixes(a, i), demand));
    return env;
}

SymbolicEnv LivenessEquations::live_expr(const Expr& e, const StringSet& demand,
                                         const EvalFilter& filter, LivenessRecord* record) const {
    SymbolicEnv env;
    switch (e.kind) {
    case ExprKind::Return:
        if (filter.admits(e.psi)) add_liveness(env, e.var.name, demand);
        break;
    case ExprKind::If:
        env = live_expr(*e.then_branch, demand, filter, record);
        merge_into(env, live_expr(*e.else_branch, demand, filter, record));
        if (filter.admits(e.psi)) add_liveness(env, e.var.name, concat(single(Terminal::Two), demand));
        break;
    case ExprKind::Let: {
        env = live_expr(*e.body, demand, filter, record);
        StringSet bound;
        if (auto it = env.find(e.var.name); it != env.end()) {
            bound = std::move(it->second);
            env.erase(it);
        }
        std::vector<StringSet> per_operand;
        for (size_t i = 0; i < e.rhs.args.size(); ++i) {
            StringSet s = concat(prefixes(e.rhs, i), bound);
            add_liveness(env, e.rhs.args[i].name, s);
            per_operand.push_back(std::move(s));
        }
        if (record) {
            record->let_var[e.pi] = bound;
            record->closure[e.pi] = std::move(per_operand);
        }
        break;
    }
    }
    if (record) record->at[e.pi] = env;
    return env;
}

namespace {

struct FunctionFacts {
    LivenessRecord rec;
};

SymString with_tail(const SymString& s, const SymString& tail) {
    SymString w = s;
    w.insert(w.end(), tail.begin(), tail.end());
    return w;
}

int add_root(LivenessGrammar& lg, Root r, const std::string& name, const StringSet& strings,
             const SymString& tail) {
    r.nt = lg.grammar.intern(name);
    for (const auto& s : strings) lg.grammar.add(r.nt, with_tail(s, tail));
    lg.roots.push_back(std::move(r));
    return lg.roots.back().nt;
}

std::vector<FunctionFacts> analyze_bodies(const Program& p, const LivenessEquations& eq) {
    std::vector<FunctionFacts> facts(p.defs.size());
    for (size_t f = 0; f < p.defs.size(); ++f)
        eq.live_expr(*p.defs[f].body, identity_demand(), {}, &facts[f].rec);
    return facts;
}

int slot_of(const FunDef& d, const std::string& name) {
    for (size_t i = 0; i < d.slot_names.size(); ++i)
        if (d.slot_names[i] == name) return static_cast<int>(i);
    return -1;
}

const StringSet& lookup(const SymbolicEnv& env, const std::string& var) {
    static const StringSet empty;
    auto it = env.find(var);
    return it == env.end() ? empty : it->second;
}

// Visits every expression with the variables in scope before it.
void walk_scoped(const FunDef& d,
                 const std::function<void(const Expr&, const std::vector<std::string>&)>& fn) {
    std::vector<std::string> scope;
    for (const auto& v : d.params) scope.push_back(v.name);
    std::function<void(const Expr&)> go = [&](const Expr& e) {
        fn(e, scope);
        switch (e.kind) {
        case ExprKind::Let:
            scope.push_back(e.var.name);
            go(*e.body);
            scope.pop_back();
            break;
        case ExprKind::If:
            go(*e.then_branch);
            go(*e.else_branch);
            break;
        case ExprKind::Return: break;
        }
    };
    go(*d.body);
}

std::string point_name(const char* prefix, int label) {
    return std::string(prefix) + std::to_string(label);
}

}  // namespace

LivenessGrammar build_grammar(const Program& p, const AnalysisOptions& opts) {
    LivenessGrammar lg;
    Grammar& g = lg.grammar;
    lg.main_whnf = opts.main_demand == MainDemand::Whnf;
    lg.s_all = g.intern("S_all");
    g.add(lg.s_all, {});
    g.add(lg.s_all, {Symbol::t(Terminal::Zero), Symbol::nt(lg.s_all)});
    g.add(lg.s_all, {Symbol::t(Terminal::One), Symbol::nt(lg.s_all)});

    LivenessEquations eq(p, g);
    for (const auto& d : p.defs) lg.sigma.push_back(g.intern("sigma:" + d.name));
    auto facts = analyze_bodies(p, eq);

    for (size_t f = 0; f < p.defs.size(); ++f) {
        const FunDef& d = p.defs[f];
        const auto& entry = facts[f].rec.at.at(d.body->pi);
        for (size_t i = 0; i < d.params.size(); ++i) {
            int nt = eq.demand_nt(static_cast<int>(f), static_cast<int>(i));
            for (const auto& s : lookup(entry, d.params[i].name)) g.add(nt, s);
        }
    }
    for (size_t f = 0; f < p.defs.size(); ++f) {
        const FunDef& d = p.defs[f];
        const SymString tail = lg.tail(static_cast<int>(f), p.main_index);
        for_each_expr(*d.body, [&](const Expr& e) {
            if (e.kind != ExprKind::Let || e.rhs.kind != AppKind::Call) return;
            int callee = p.find(e.rhs.callee);
            if (callee < 0)
                throw ProgramError("call to undefined function '" + e.rhs.callee + "'", e.rhs.pos);
            for (const auto& s : facts[f].rec.let_var.at(e.pi)) g.add(lg.sigma[callee], with_tail(s, tail));
        });
    }
    g.add(lg.sigma.at(p.main_index), lg.tail(p.main_index, p.main_index));

    for (size_t f = 0; f < p.defs.size(); ++f) {
        const FunDef& d = p.defs[f];
        const int fi = static_cast<int>(f);
        for (size_t i = 0; i < d.params.size(); ++i) {
            Root r;
            r.role = RootRole::DemandTransformer;
            r.fun = fi;
            r.arg = static_cast<int>(i);
            r.var = d.params[i].name;
            r.slot = static_cast<int>(i);
            r.nt = eq.demand_nt(fi, static_cast<int>(i));
            lg.roots.push_back(r);
        }
        Root sr;
            sr.role = RootRole::SummaryDemand;
        sr.fun = fi;
        sr.nt = lg.sigma[f];
        lg.roots.push_back(sr);
    }

    for (size_t f = 0; f < p.defs.size(); ++f) {
        const FunDef& d = p.defs[f];
        const int fi = static_cast<int>(f);
        const auto& rec = facts[f].rec;
        const SymString tail = lg.tail(fi, p.main_index);
        const auto& entry = rec.at.at(d.body->pi);
        for (size_t i = 0; i < d.params.size(); ++i) {
            Root r;
            r.role = RootRole::StackVar;
            r.fun = fi;
            r.var = d.params[i].name;
            r.slot = static_cast<int>(i);
            add_root(lg, r, "stack:" + d.name + ":" + r.var, lookup(entry, r.var), tail);
        }
        for_each_expr(*d.body, [&](const Expr& e) {
            if (e.kind != ExprKind::Let) return;
            Root r;
            r.role = RootRole::StackVar;
            r.fun = fi;
            r.pi = e.pi;
            r.var = e.var.name;
            r.slot = e.var.slot >= 0 ? e.var.slot : slot_of(d, e.var.name);
            add_root(lg, r, "stack:" + d.name + ":" + r.var, rec.let_var.at(e.pi), tail);
            const auto& ops = rec.closure.at(e.pi);
            for (size_t i = 0; i < ops.size(); ++i) {
                Root c;
            c.role = RootRole::ClosureVar;
                c.fun = fi;
                c.pi = e.pi;
                c.arg = static_cast<int>(i);
                c.var = e.rhs.args[i].name;
                c.slot = e.rhs.args[i].slot;
                add_root(lg, c, point_name("closure:pi", e.pi) + ":" + std::to_string(i), ops[i], tail);
            }
        });
    }
    return lg;
}

void build_gc_point_envs(const Program& p, LivenessGrammar& lg, const AnalysisOptions& opts) {
    Grammar& g = lg.grammar;
    LivenessEquations eq(p, g);
    auto facts = analyze_bodies(p, eq);
    for (size_t f = 0; f < p.defs.size(); ++f) {
        const FunDef& d = p.defs[f];
        const int fi = static_cast<int>(f);
        const auto& rec = facts[f].rec;
        const SymString tail = lg.tail(fi, p.main_index);
        const SymString none;
        auto var_root = [&](RootRole role, const Expr& e, const std::string& name,
                            const std::string& var, const SymbolicEnv& env, const SymString& t,
                            int branch) {
            Root r;
            r.role = role;
            r.fun = fi;
            r.pi = e.pi;
            r.psi = e.psi;
            r.branch = branch;
            r.var = var;
            r.slot = slot_of(d, var);
            add_root(lg, r, name + ":" + var, lookup(env, var), t);
        };
        walk_scoped(d, [&](const Expr& e, const std::vector<std::string>& scope) {
            if (&e == d.body.get())
                for (const auto& v : scope)
                    var_root(RootRole::GcEntry, e, "entry:" + d.name, v, rec.at.at(e.pi), tail, -1);
            if (e.kind == ExprKind::If) {
                for (int b = 0; b < 2; ++b) {
                    const Expr& br = b == 0 ? *e.then_branch : *e.else_branch;
                    std::string name = point_name("after:psi", e.psi) + (b == 0 ? ":then" : ":else");
                    for (const auto& v : scope)
                        var_root(RootRole::GcAfterIf, e, name, v, rec.at.at(br.pi), tail, b);
                }
                for (const auto& v : scope)
                    var_root(RootRole::FrameIf, e, point_name("frame-if:psi", e.psi), v,
                             rec.at.at(e.pi), tail, -1);
            }
            if (e.kind == ExprKind::Return)
                var_root(RootRole::FrameReturn, e, point_name("frame-return:psi", e.psi),
                         e.var.name, rec.at.at(e.pi), tail, -1);
            if (!opts.relative_roots) return;
            for (const auto& v : scope)
                var_root(RootRole::RelPoint, e, point_name("rel:pi", e.pi), v, rec.at.at(e.pi), none, -1);
            if (e.kind == ExprKind::Let) {
                Root r;
                r.role = RootRole::RelLetVar;
                r.fun = fi;
                r.pi = e.pi;
                r.var = e.var.name;
                r.slot = e.var.slot;
                add_root(lg, r, point_name("rel-let:pi", e.pi), rec.let_var.at(e.pi), none);
                for (size_t i = 0; i < e.rhs.args.size(); ++i) {
                    Root a;
                    a.role = RootRole::RelRef;
                    a.fun = fi;
                    a.pi = e.pi;
                    a.arg = static_cast<int>(i);
                    a.var = e.rhs.args[i].name;
                    a.slot = e.rhs.args[i].slot;
                    add_root(lg, a, point_name("rel-ref:pi", e.pi) + ":" + std::to_string(i),
                             eq.prefixes(e.rhs, i), none);
                }
            }
        });
    }
}

void build_eval_point_variants(const Program& p, LivenessGrammar& lg) {
    Grammar& g = lg.grammar;
    LivenessEquations eq(p, g);
    ProgramIndex index(p);
    for (size_t f = 0; f < p.defs.size(); ++f) {
        const FunDef& d = p.defs[f];
        const int fi = static_cast<int>(f);
        const SymString tail = lg.tail(fi, p.main_index);
        for_each_expr(*d.body, [&](const Expr& e) {
            if (e.kind != ExprKind::If) return;
            const auto& ancestors = index.let_ancestors.at(e.pi);
            if (ancestors.empty()) return;
            for (int b = 0; b < 2; ++b) {
                const Expr& br = b == 0 ? *e.then_branch : *e.else_branch;
                // Evaluation points of a branch form a contiguous range in pre-order.
                EvalFilter filter{1 << 30, 0};
                for_each_expr(br, [&](const Expr& x) {
                    if (!x.psi) return;
                    filter.lo = std::min(filter.lo, x.psi);
                    filter.hi = std::max(filter.hi, x.psi);
                });
                LivenessRecord rec;
                eq.live_expr(*d.body, identity_demand(), filter, &rec);
                for (const Expr* let : ancestors) {
                    const auto& ops = rec.closure.at(let->pi);
                    for (size_t i = 0; i < ops.size(); ++i) {
                        Root r;
            r.role = RootRole::ClosureVariant;
                        r.fun = fi;
                        r.pi = let->pi;
                        r.psi = e.psi;
                        r.branch = b;
                        r.arg = static_cast<int>(i);
                        r.var = let->rhs.args[i].name;
                        r.slot = let->rhs.args[i].slot;
                        add_root(lg, r,
                                 point_name("variant:pi", let->pi) + ":" + std::to_string(i) +
                                     point_name(":psi", e.psi) + (b == 0 ? ":then" : ":else"),
                                 ops[i], tail);
                    }
                }
            }
        });
    }
}

LivenessGrammar analyze_program(const Program& p, const AnalysisOptions& opts) {
    LivenessGrammar lg = build_grammar(p, opts);
    build_gc_point_envs(p, lg, opts);
    if (opts.variants) build_eval_point_variants(p, lg);
    return lg;
}

}  // namespace lgc
