#include <map>
#include <set>

#include "lgc/ast.hpp"

namespace lgc {

namespace {

class Renamer {
public:
    std::string fresh(const std::string& base) {
        if (used_.insert(base).second) return base;
        int& n = counters_[base];
        std::string candidate;
        do {
            candidate = base + "_" + std::to_string(++n);
        } while (used_.count(candidate));
        used_.insert(candidate);
        return candidate;
    }

    void bind(Var& v) {
        std::string name = fresh(v.name);
        scope_.emplace_back(v.name, name);
        v.name = name;
    }

    void use(Var& v) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
            if (it->first == v.name) {
                v.name = it->second;
                return;
            }
        }
        throw ProgramError("unbound variable '" + v.name + "'", v.pos);
    }

    void visit(Expr& e) {
        switch (e.kind) {
        case ExprKind::Let:
            for (auto& a : e.rhs.args) use(a);
            bind(e.var);
            visit(*e.body);
            scope_.pop_back();
            break;
        case ExprKind::If:
            use(e.var);
            visit(*e.then_branch);
            visit(*e.else_branch);
            break;
        case ExprKind::Return: use(e.var); break;
        }
    }

    void visit(FunDef& d) {
        scope_.clear();
        for (auto& p : d.params) bind(p);
        visit(*d.body);
    }

private:
    std::set<std::string> used_;
    std::map<std::string, int> counters_;
    std::vector<std::pair<std::string, std::string>> scope_;
};

}  // namespace

Program rename_distinct(const Program& p) {
    Program out = p.clone();
    Renamer r;
    for (auto& d : out.defs) r.visit(d);
    return out;
}

}  // namespace lgc
