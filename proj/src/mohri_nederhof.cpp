#include <algorithm>
#include <functional>

#include "lgc/automata.hpp"
#include "lgc/error.hpp"

namespace lgc {

SccInfo::SccInfo(const Grammar& g) {
    const int n = g.size();
    component.assign(n, -1);
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<int> stack;
    int counter = 0;

    // Iterative Tarjan; frames hold (node, rule, position).
    struct Frame {
        int node;
        size_t rule;
        size_t pos;
    };
    for (int s = 0; s < n; ++s) {
        if (index[s] >= 0) continue;
        std::vector<Frame> call{{s, 0, 0}};
        index[s] = low[s] = counter++;
        stack.push_back(s);
        on_stack[s] = 1;
        while (!call.empty()) {
            Frame& f = call.back();
            const auto& rules = g.rules(f.node);
            bool descended = false;
            while (f.rule < rules.size()) {
                const auto& rhs = rules[f.rule];
                if (f.pos >= rhs.size()) {
                    ++f.rule;
                    f.pos = 0;
                    continue;
                }
                const Symbol sym = rhs[f.pos++];
                if (!sym.nonterminal) continue;
                const int w = sym.id;
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, 0, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[f.node] = std::min(low[f.node], index[w]);
            }
            if (descended) continue;
            const int v = f.node;
            call.pop_back();
            if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
            if (low[v] == index[v]) {
                const int id = static_cast<int>(members.size());
                members.emplace_back();
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    component[w] = id;
                    members.back().push_back(w);
                } while (w != v);
                std::sort(members.back().begin(), members.back().end());
            }
        }
    }
    recursive.assign(members.size(), 0);
    right_linear.assign(members.size(), 1);
    for (size_t c = 0; c < members.size(); ++c) {
        for (int a : members[c]) {
            for (const auto& rhs : g.rules(a)) {
                for (size_t k = 0; k < rhs.size(); ++k) {
                    if (!rhs[k].nonterminal || component[rhs[k].id] != static_cast<int>(c)) continue;
                    recursive[c] = 1;
                    if (k + 1 != rhs.size()) right_linear[c] = 0;
                }
            }
        }
    }
}

namespace {

Grammar transform(const Grammar& g, const std::vector<int>& keep) {
    SccInfo scc(g);
    Grammar out;
    std::vector<int> map(g.size(), -1);
    for (int a : keep) map[a] = out.intern(g.name(a));
    auto mapped = [&](const SymString& s) {
        SymString r;
        for (const Symbol& x : s) r.push_back(x.nonterminal ? Symbol::nt(map.at(x.id)) : x);
        return r;
    };
    for (int a : keep) {
        const int c = scc.component[a];
        if (!scc.recursive[c] || scc.right_linear[c]) {
            for (const auto& rhs : g.rules(a)) out.add(map[a], mapped(rhs));
            continue;
        }
        auto primed = [&](int x) { return out.intern(g.name(x) + "'"); };
        out.add(primed(a), {});
        for (const auto& rhs : g.rules(a)) {
            // Split at members of the component: A -> a0 B1 a1 ... Bm am.
            SymString segment;
            int from = map[a];
            bool first = true;
            for (const Symbol& x : rhs) {
                if (x.nonterminal && scc.component[x.id] == c) {
                    segment.push_back(Symbol::nt(map[x.id]));
                    out.add(from, segment);
                    segment.clear();
                    from = primed(x.id);
                    first = false;
                } else {
                    segment.push_back(x.nonterminal ? Symbol::nt(map.at(x.id)) : x);
                }
            }
            (void)first;
            segment.push_back(Symbol::nt(primed(a)));
            out.add(from, segment);
        }
    }
    return out;
}

}  // namespace

Grammar mohri_nederhof(const Grammar& g) {
    std::vector<int> all(g.size());
    for (int i = 0; i < g.size(); ++i) all[i] = i;
    return transform(g, all);
}

Grammar mohri_nederhof(const Grammar& g, int root) {
    std::vector<int> keep = g.reachable({root});
    std::sort(keep.begin(), keep.end());
    return transform(g, keep);
}

NfaBuilder::NfaBuilder(const Grammar& sr) : g_(sr), scc_(sr) {
    for (size_t c = 0; c < scc_.members.size(); ++c)
        if (scc_.recursive[c] && !scc_.right_linear[c])
            throw InternalError("grammar is not strongly regular at <" +
                                sr.name(scc_.members[c].front()) + ">");
}

namespace {

class Construction {
public:
    Construction(const Grammar& g, const SccInfo& scc, const DfaEmbedding& embed, Nfa& n)
        : g_(g), scc_(scc), embed_(embed), n_(n) {}

    void string(int q0, const SymString& alpha, int q1) {
        if (alpha.empty()) {
            n_.add_edge(q0, Label::Eps, q1);
            return;
        }
        int q = q0;
        for (size_t k = 0; k < alpha.size(); ++k) {
            const int target = k + 1 == alpha.size() ? q1 : n_.add_state();
            symbol(q, alpha[k], target);
            q = target;
        }
    }

    void symbol(int q0, const Symbol& s, int q1) {
        if (!s.nonterminal) {
            n_.add_edge(q0, static_cast<Label>(s.id), q1);
            return;
        }
        if (auto it = embed_.find(s.id); it != embed_.end()) {
            embed_dfa(q0, *it->second, q1);
            return;
        }
        const int c = scc_.component[s.id];
        if (!scc_.recursive[c]) {
            for (const auto& rhs : g_.rules(s.id)) string(q0, rhs, q1);
            return;
        }
        std::map<int, int> state;
        for (int b : scc_.members[c]) state[b] = n_.add_state();
        n_.add_edge(q0, Label::Eps, state[s.id]);
        for (int b : scc_.members[c]) {
            for (const auto& rhs : g_.rules(b)) {
                if (!rhs.empty() && rhs.back().nonterminal && scc_.component[rhs.back().id] == c) {
                    SymString gamma(rhs.begin(), rhs.end() - 1);
                    string(state[b], gamma, state[rhs.back().id]);
                } else {
                    string(state[b], rhs, q1);
                }
            }
        }
    }

    void embed_dfa(int q0, const LivenessDfa& d, int q1) {
        if (!d.is_live(d.start)) return;
        std::vector<int> map(d.size(), -1);
        for (int s = 0; s < d.size(); ++s)
            if (d.is_live(s)) map[s] = n_.add_state();
        n_.add_edge(q0, Label::Eps, map[d.start]);
        for (int s = 0; s < d.size(); ++s) {
            if (map[s] < 0) continue;
            n_.add_edge(map[s], Label::Eps, q1);
            for (int b = 0; b < 2; ++b) {
                const int t = d.next[s][b];
                if (map[t] >= 0) n_.add_edge(map[s], b == 0 ? Label::Zero : Label::One, map[t]);
            }
        }
    }

private:
    const Grammar& g_;
    const SccInfo& scc_;
    const DfaEmbedding& embed_;
    Nfa& n_;
};

}  // namespace

Nfa NfaBuilder::build(int root, const DfaEmbedding& embed) const {
    Nfa n;
    n.start = n.add_state();
    const int fin = n.add_state();
    n.final[fin] = 1;
    Construction(g_, scc_, embed, n).symbol(n.start, Symbol::nt(root), fin);
    return n;
}

Nfa NfaBuilder::build_strings(const std::vector<SymString>& alternatives,
                              const DfaEmbedding& embed) const {
    Nfa n;
    n.start = n.add_state();
    const int fin = n.add_state();
    n.final[fin] = 1;
    Construction c(g_, scc_, embed, n);
    for (const auto& a : alternatives) c.string(n.start, a, fin);
    return n;
}

Nfa to_nfa(const Grammar& sr, int root, const DfaEmbedding& embed) {
    return NfaBuilder(sr).build(root, embed);
}

Nfa concat(const Nfa& n, const LivenessDfa& d) {
    Nfa out = n;
    const int join = out.add_state();
    for (int s = 0; s < n.size(); ++s) {
        if (!n.final[s]) continue;
        out.final[s] = 0;
        out.add_edge(s, Label::Eps, join);
    }
    const int fin = out.add_state();
    out.final[fin] = 1;
    std::vector<int> map(d.size(), -1);
    for (int s = 0; s < d.size(); ++s)
        if (d.is_live(s)) map[s] = out.add_state();
    if (map[d.start] < 0) return out;
    out.add_edge(join, Label::Eps, map[d.start]);
    for (int s = 0; s < d.size(); ++s) {
        if (map[s] < 0) continue;
        out.add_edge(map[s], Label::Eps, fin);
        for (int b = 0; b < 2; ++b)
            if (map[d.next[s][b]] >= 0)
                out.add_edge(map[s], b == 0 ? Label::Zero : Label::One, map[d.next[s][b]]);
    }
    return out;
}

}  // namespace lgc
