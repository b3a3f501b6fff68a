#include "lgc/ast.hpp"

#include <fstream>
#include <sstream>

namespace lgc {

std::string to_string(const SourcePos& pos) {
    return std::to_string(pos.line) + ":" + std::to_string(pos.column);
}

SyntaxError::SyntaxError(const std::string& msg, SourcePos pos)
    : Error("syntax error at " + to_string(pos) + ": " + msg), pos(pos) {}

ProgramError::ProgramError(const std::string& msg, SourcePos pos)
    : Error("error at " + to_string(pos) + ": " + msg), pos(pos) {}

const char* prim_name(PrimOp op) {
    switch (op) {
    case PrimOp::Add: return "+";
    case PrimOp::Sub: return "-";
    case PrimOp::Mul: return "*";
    case PrimOp::Div: return "/";
    case PrimOp::Lt: return "<";
    case PrimOp::Eq: return "=";
    }
    return "?";
}

std::unique_ptr<Expr> Expr::clone() const {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->var = var;
    e->rhs = rhs;
    e->pi = pi;
    e->psi = psi;
    e->let_count = let_count;
    e->pos = pos;
    if (body) e->body = body->clone();
    if (then_branch) e->then_branch = then_branch->clone();
    if (else_branch) e->else_branch = else_branch->clone();
    return e;
}

FunDef FunDef::clone() const {
    FunDef d;
    d.name = name;
    d.params = params;
    d.body = body ? body->clone() : nullptr;
    d.slot_count = slot_count;
    d.slot_names = slot_names;
    d.pos = pos;
    return d;
}

Program Program::clone() const {
    Program p;
    for (const auto& d : defs) p.defs.push_back(d.clone());
    p.main_index = main_index;
    p.pi_count = pi_count;
    p.psi_count = psi_count;
    return p;
}

int Program::find(const std::string& name) const {
    for (size_t i = 0; i < defs.size(); ++i)
        if (defs[i].name == name) return static_cast<int>(i);
    return -1;
}

void for_each_expr(const Expr& e, const std::function<void(const Expr&)>& fn) {
    fn(e);
    switch (e.kind) {
    case ExprKind::Let: for_each_expr(*e.body, fn); break;
    case ExprKind::If:
        for_each_expr(*e.then_branch, fn);
        for_each_expr(*e.else_branch, fn);
        break;
    case ExprKind::Return: break;
    }
}

void validate(const Program& p) {
    int mains = 0;
    for (size_t i = 0; i < p.defs.size(); ++i) {
        const auto& d = p.defs[i];
        for (size_t j = 0; j < i; ++j)
            if (p.defs[j].name == d.name)
                throw ProgramError("function '" + d.name + "' defined twice", d.pos);
        for (size_t a = 0; a < d.params.size(); ++a)
            for (size_t b = 0; b < a; ++b)
                if (d.params[a].name == d.params[b].name)
                    throw ProgramError("parameter '" + d.params[a].name + "' repeated in '" +
                                           d.name + "'",
                                       d.params[a].pos);
        if (d.name == "main") {
            ++mains;
            if (!d.params.empty()) throw ProgramError("main takes no parameters", d.pos);
        }
    }
    if (mains == 0) throw ProgramError("no definition of main", SourcePos{1, 1});
    for (const auto& d : p.defs) {
        for_each_expr(*d.body, [&](const Expr& e) {
            if (e.kind != ExprKind::Let || e.rhs.kind != AppKind::Call) return;
            int callee = p.find(e.rhs.callee);
            if (callee < 0)
                throw ProgramError("call to undefined function '" + e.rhs.callee + "'", e.rhs.pos);
            if (p.defs[callee].params.size() != e.rhs.args.size())
                throw ProgramError("'" + e.rhs.callee + "' expects " +
                                       std::to_string(p.defs[callee].params.size()) +
                                       " arguments, got " + std::to_string(e.rhs.args.size()),
                                   e.rhs.pos);
        });
    }
}

namespace {

struct Labeler {
    int pi = 0;
    int psi = 0;

    void visit(Expr& e) {
        e.pi = ++pi;
        e.psi = 0;
        switch (e.kind) {
        case ExprKind::Let: visit(*e.body); break;
        case ExprKind::If:
            e.psi = ++psi;
            visit(*e.then_branch);
            visit(*e.else_branch);
            break;
        case ExprKind::Return: e.psi = ++psi; break;
        }
    }
};

}  // namespace

Program assign_labels(const Program& p) {
    Program out = p.clone();
    Labeler lab;
    for (auto& d : out.defs) lab.visit(*d.body);
    out.pi_count = lab.pi;
    out.psi_count = lab.psi;
    return out;
}

namespace {

struct Resolver {
    const Program& program;
    FunDef& def;
    std::vector<std::pair<std::string, int>> scope;

    int lookup(const Var& v) const {
        for (auto it = scope.rbegin(); it != scope.rend(); ++it)
            if (it->first == v.name) return it->second;
        throw ProgramError("unbound variable '" + v.name + "'", v.pos);
    }

    int visit(Expr& e) {
        switch (e.kind) {
        case ExprKind::Let: {
            for (auto& a : e.rhs.args) a.slot = lookup(a);
            if (e.rhs.kind == AppKind::Call) e.rhs.callee_index = program.find(e.rhs.callee);
            e.var.slot = def.slot_count++;
            def.slot_names.push_back(e.var.name);
            scope.emplace_back(e.var.name, e.var.slot);
            e.let_count = 1 + visit(*e.body);
            scope.pop_back();
            break;
        }
        case ExprKind::If:
            e.var.slot = lookup(e.var);
            e.let_count = visit(*e.then_branch) + visit(*e.else_branch);
            break;
        case ExprKind::Return:
            e.var.slot = lookup(e.var);
            e.let_count = 0;
            break;
        }
        return e.let_count;
    }
};

}  // namespace

void resolve(Program& p) {
    p.main_index = p.find("main");
    for (auto& d : p.defs) {
        d.slot_count = 0;
        d.slot_names.clear();
        Resolver r{p, d, {}};
        for (auto& param : d.params) {
            param.slot = d.slot_count++;
            d.slot_names.push_back(param.name);
            r.scope.emplace_back(param.name, param.slot);
        }
        r.visit(*d.body);
    }
}

Program load_program(const std::string& text) {
    Program parsed = parse_program(text);
    validate(parsed);
    Program p = assign_labels(rename_distinct(parsed));
    resolve(p);
    return p;
}

Program load_program_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_program(ss.str());
}

namespace {

void print_app(std::ostream& os, const App& a) {
    auto args = [&]() {
        for (const auto& v : a.args) os << ' ' << v.name;
    };
    switch (a.kind) {
    case AppKind::Const:
        if (a.value) os << *a.value;
        else os << "nil";
        return;
    case AppKind::Cons: os << "(cons"; break;
    case AppKind::Car: os << "(car"; break;
    case AppKind::Cdr: os << "(cdr"; break;
    case AppKind::NullQ: os << "(null?"; break;
    case AppKind::Prim: os << '(' << prim_name(a.op); break;
    case AppKind::Call: os << '(' << a.callee; break;
    }
    args();
    os << ')';
}

void print_expr(std::ostream& os, const Expr& e, int indent) {
    std::string pad(indent, ' ');
    switch (e.kind) {
    case ExprKind::Let:
        os << pad << "(let (" << e.var.name << ' ';
        print_app(os, e.rhs);
        os << ")\n";
        print_expr(os, *e.body, indent + 2);
        os << ')';
        break;
    case ExprKind::If:
        os << pad << "(if " << e.var.name << '\n';
        print_expr(os, *e.then_branch, indent + 4);
        os << '\n';
        print_expr(os, *e.else_branch, indent + 4);
        os << ')';
        break;
    case ExprKind::Return: os << pad << "(return " << e.var.name << ')'; break;
    }
}

}  // namespace

std::string print_program(const Program& p) {
    std::ostringstream os;
    for (size_t i = 0; i < p.defs.size(); ++i) {
        const auto& d = p.defs[i];
        if (i) os << '\n';
        os << "(define (" << d.name;
        for (const auto& v : d.params) os << ' ' << v.name;
        os << ")\n";
        print_expr(os, *d.body, 2);
        os << ")\n";
    }
    return os.str();
}

ProgramIndex::ProgramIndex(const Program& p) : program(&p) {
    by_pi.assign(p.pi_count + 1, nullptr);
    by_psi.assign(p.psi_count + 1, nullptr);
    fun_of_pi.assign(p.pi_count + 1, -1);
    let_ancestors.assign(p.pi_count + 1, {});
    for (size_t f = 0; f < p.defs.size(); ++f) {
        std::vector<const Expr*> lets;
        std::function<void(const Expr&)> walk = [&](const Expr& e) {
            by_pi.at(e.pi) = &e;
            fun_of_pi[e.pi] = static_cast<int>(f);
            if (e.psi) by_psi.at(e.psi) = &e;
            switch (e.kind) {
            case ExprKind::Let:
                lets.push_back(&e);
                walk(*e.body);
                lets.pop_back();
                break;
            case ExprKind::If:
                let_ancestors[e.pi] = lets;
                walk(*e.then_branch);
                walk(*e.else_branch);
                break;
            case ExprKind::Return: break;
            }
        };
        walk(*p.defs[f].body);
    }
}

}  // namespace lgc
