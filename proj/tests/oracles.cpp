#include "oracles.hpp"

#include <algorithm>
#include <deque>

namespace oracle {

using lgc::Symbol;
using lgc::Terminal;

namespace {

char letter(Terminal t) {
    switch (t) {
    case Terminal::Zero: return '0';
    case Terminal::One: return '1';
    case Terminal::BarZero: return 'a';
    case Terminal::BarOne: return 'b';
    case Terminal::Two: return '2';
    case Terminal::End: return '$';
    }
    return '?';
}

// Appends c to an already reduced word; false when the word has no continuation.
bool push(std::string& w, char c) {
    if (!w.empty()) {
        const char top = w.back();
        if (top == 'a') {
            if (c == '0') { w.pop_back(); return true; }
            if (c != 'a' && c != 'b') return false;
        }
        if (top == 'b') {
            if (c == '1') { w.pop_back(); return true; }
            if (c != 'a' && c != 'b') return false;
        }
        if (top == '2') {
            if (c == '0' || c == '1' || c == '2') return true;
            if (c == '$') { w.pop_back(); w.push_back('$'); return true; }
        }
    }
    w.push_back(c);
    return true;
}

std::optional<std::string> join(const std::string& u, const std::string& v) {
    std::string w = u;
    for (char c : v)
        if (!push(w, c)) return std::nullopt;
    return w;
}

struct Shorter {
    bool operator()(const std::string& a, const std::string& b) const {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    }
};
using Words = std::set<std::string, Shorter>;

}  // namespace

std::string spell(const lgc::SymString& s) {
    std::string out;
    for (const auto& sym : s) out += sym.nonterminal ? 'N' : letter(sym.terminal());
    return out;
}

std::optional<std::string> reduce(const std::string& w) {
    std::string acc;
    for (char c : w)
        if (!push(acc, c)) return std::nullopt;
    if (!push(acc, '$')) return std::nullopt;
    acc.pop_back();
    for (char c : acc)
        if (c != '0' && c != '1') return std::nullopt;
    return acc;
}

std::vector<std::set<std::string>> derivable_paths_all(const lgc::Grammar& g, size_t max_len,
                                                       const Bounds& b) {
    std::vector<Words> lang(g.size());
    for (int k = 0; k < b.depth; ++k) {
        std::vector<Words> next(g.size());
        for (int nt = 0; nt < g.size(); ++nt) {
            for (const auto& rhs : g.rules(nt)) {
                Words acc{""};
                for (const auto& sym : rhs) {
                    Words step;
                    if (sym.nonterminal) {
                        for (const auto& u : acc)
                            for (const auto& v : lang[sym.id]) {
                                auto w = join(u, v);
                                if (w && w->size() <= b.max_word) step.insert(*w);
                                if (step.size() >= b.max_words) break;
                            }
                        if (step.size() > b.max_words)
                            step.erase(std::next(step.begin(), static_cast<long>(b.max_words)), step.end());
                    } else {
                        const std::string t(1, letter(sym.terminal()));
                        for (const auto& u : acc)
                            if (auto w = join(u, t)) step.insert(*w);
                    }
                    acc = std::move(step);
                    if (acc.empty()) break;
                }
                for (const auto& w : acc) {
                    if (next[nt].size() >= b.max_words) break;
                    next[nt].insert(w);
                }
            }
        }
        lang = std::move(next);
    }
    std::vector<std::set<std::string>> out(g.size());
    for (int nt = 0; nt < g.size(); ++nt)
        for (const auto& w : lang[nt]) {
            auto r = reduce(w);
            if (r && r->size() <= max_len) out[nt].insert(*r);
        }
    return out;
}

std::set<std::string> derivable_paths(const lgc::Grammar& g, int root, size_t max_len, const Bounds& b) {
    return derivable_paths_all(g, max_len, b).at(root);
}

std::vector<std::string> binary_strings(size_t n) {
    std::vector<std::string> out{""};
    for (size_t i = 0; i < out.size(); ++i)
        if (out[i].size() < n) {
            out.push_back(out[i] + '0');
            out.push_back(out[i] + '1');
        }
    return out;
}

bool simulate(const lgc::Nfa& n, const std::string& path) {
    auto closure = [&](std::set<int> s) {
        std::deque<int> work(s.begin(), s.end());
        while (!work.empty()) {
            const int q = work.front();
            work.pop_front();
            for (const auto& e : n.out[q])
                if (e.label == lgc::Label::Eps && s.insert(e.to).second) work.push_back(e.to);
        }
        return s;
    };
    std::set<int> cur = closure({n.start});
    for (char c : path) {
        const lgc::Label want = c == '1' ? lgc::Label::One : lgc::Label::Zero;
        std::set<int> nxt;
        for (int q : cur)
            for (const auto& e : n.out[q])
                if (e.label == want) nxt.insert(e.to);
        cur = closure(nxt);
    }
    return std::any_of(cur.begin(), cur.end(), [&](int q) { return n.final[q] != 0; });
}

std::set<std::string> enumerate_words(const lgc::Grammar& g, int root, size_t max_len, int steps) {
    std::set<std::string> out;
    // (terminal prefix, remaining symbols)
    std::vector<std::pair<std::string, lgc::SymString>> frontier{{"", {Symbol::nt(root)}}};
    for (int k = 0; k <= steps && !frontier.empty(); ++k) {
        std::vector<std::pair<std::string, lgc::SymString>> next;
        for (auto& [prefix, rest] : frontier) {
            size_t i = 0;
            std::string p = prefix;
            while (i < rest.size() && !rest[i].nonterminal) p += letter(rest[i++].terminal());
            if (p.size() > max_len) continue;
            if (i == rest.size()) {
                out.insert(p);
                continue;
            }
            for (const auto& rhs : g.rules(rest[i].id)) {
                lgc::SymString r(rhs);
                r.insert(r.end(), rest.begin() + static_cast<long>(i) + 1, rest.end());
                next.emplace_back(p, std::move(r));
            }
        }
        frontier = std::move(next);
    }
    return out;
}

int count_lets(const lgc::Expr& e) {
    switch (e.kind) {
    case lgc::ExprKind::Let: return 1 + count_lets(*e.body);
    case lgc::ExprKind::If: return count_lets(*e.then_branch) + count_lets(*e.else_branch);
    case lgc::ExprKind::Return: return 0;
    }
    return 0;
}

namespace {

void bind_uses(const lgc::Expr& e, std::vector<const lgc::Var*>& scope,
               std::map<Position, Position>& out) {
    auto use = [&](const lgc::Var& v) {
        for (auto it = scope.rbegin(); it != scope.rend(); ++it)
            if ((*it)->name == v.name) {
                out[{v.pos.line, v.pos.column}] = {(*it)->pos.line, (*it)->pos.column};
                return;
            }
    };
    switch (e.kind) {
    case lgc::ExprKind::Let:
        for (const auto& a : e.rhs.args) use(a);
        scope.push_back(&e.var);
        bind_uses(*e.body, scope, out);
        scope.pop_back();
        break;
    case lgc::ExprKind::If:
        use(e.var);
        bind_uses(*e.then_branch, scope, out);
        bind_uses(*e.else_branch, scope, out);
        break;
    case lgc::ExprKind::Return:
        use(e.var);
        break;
    }
}

}  // namespace

std::map<Position, Position> binding_graph(const lgc::Program& p) {
    std::map<Position, Position> out;
    for (const auto& f : p.defs) {
        std::vector<const lgc::Var*> scope;
        for (const auto& v : f.params) scope.push_back(&v);
        bind_uses(*f.body, scope, out);
    }
    return out;
}

}  // namespace oracle
