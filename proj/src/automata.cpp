#include <algorithm>
#include <cstring>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "lgc/automata.hpp"
#include "lgc/error.hpp"

namespace lgc {

const char* label_text(Label l) {
    switch (l) {
    case Label::Zero: return "0";
    case Label::One: return "1";
    case Label::BarZero: return "~0";
    case Label::BarOne: return "~1";
    case Label::Two: return "2";
    case Label::Eps: return "eps";
    }
    return "?";
}

int Nfa::add_state() {
    out.emplace_back();
    final.push_back(0);
    return size() - 1;
}

bool Nfa::has_label(Label l) const {
    for (const auto& es : out)
        for (const auto& e : es)
            if (e.label == l) return true;
    return false;
}

size_t Nfa::edge_count() const {
    size_t n = 0;
    for (const auto& es : out) n += es.size();
    return n;
}

namespace {

std::vector<int> eps_closure(const Nfa& n, const std::vector<int>& seeds) {
    std::vector<char> seen(n.size(), 0);
    std::vector<int> work = seeds, out;
    for (int s : seeds) seen[s] = 1;
    while (!work.empty()) {
        int q = work.back();
        work.pop_back();
        out.push_back(q);
        for (const auto& e : n.out[q])
            if (e.label == Label::Eps && !seen[e.to]) {
                seen[e.to] = 1;
                work.push_back(e.to);
            }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// States that can reach an accepting state along any edge.
std::vector<char> coreachable(const Nfa& n) {
    std::vector<std::vector<int>> rev(n.size());
    for (int q = 0; q < n.size(); ++q)
        for (const auto& e : n.out[q]) rev[e.to].push_back(q);
    std::vector<char> mark(n.size(), 0);
    std::vector<int> work;
    for (int q = 0; q < n.size(); ++q)
        if (n.final[q]) {
            mark[q] = 1;
            work.push_back(q);
        }
    while (!work.empty()) {
        int q = work.back();
        work.pop_back();
        for (int p : rev[q])
            if (!mark[p]) {
                mark[p] = 1;
                work.push_back(p);
            }
    }
    return mark;
}

// Drops states that are unreachable from start or cannot reach an accepting state.
Nfa trim(const Nfa& n) {
    std::vector<char> fwd(n.size(), 0);
    std::vector<int> work{n.start};
    fwd[n.start] = 1;
    while (!work.empty()) {
        int q = work.back();
        work.pop_back();
        for (const auto& e : n.out[q])
            if (!fwd[e.to]) {
                fwd[e.to] = 1;
                work.push_back(e.to);
            }
    }
    auto back = coreachable(n);
    std::vector<int> map(n.size(), -1);
    Nfa out;
    out.start = out.add_state();
    map[n.start] = out.start;
    for (int q = 0; q < n.size(); ++q)
        if (q != n.start && fwd[q] && back[q]) map[q] = out.add_state();
    for (int q = 0; q < n.size(); ++q) {
        if (map[q] < 0) continue;
        out.final[map[q]] = n.final[q];
        for (const auto& e : n.out[q])
            if (map[e.to] >= 0) out.add_edge(map[q], e.label, map[e.to]);
    }
    return out;
}

}  // namespace

Nfa simplify(const Nfa& input, std::uint64_t seed) {
    Nfa n = trim(input);
    std::vector<std::unordered_set<int>> eps(n.size());
    for (int q = 0; q < n.size(); ++q)
        for (const auto& e : n.out[q])
            if (e.label == Label::Eps) eps[q].insert(e.to);

    struct Barred {
        int from;
        Label match;
        int to;
    };
    std::vector<Barred> barred;
    for (int q = 0; q < n.size(); ++q)
        for (const auto& e : n.out[q]) {
            if (e.label == Label::BarZero) barred.push_back({q, Label::Zero, e.to});
            if (e.label == Label::BarOne) barred.push_back({q, Label::One, e.to});
        }
    std::mt19937_64 rng(seed);
    bool changed = true;
    while (changed) {
        changed = false;
        if (seed) std::shuffle(barred.begin(), barred.end(), rng);
        for (const auto& b : barred) {
            std::vector<int> targets;
            for (int r : eps_closure(n, {b.to}))
                for (const auto& e : n.out[r])
                    if (e.label == b.match && eps[b.from].insert(e.to).second) targets.push_back(e.to);
            for (int t : targets) n.add_edge(b.from, Label::Eps, t);
            if (!targets.empty()) changed = true;
        }
    }
    Nfa out = n;
    for (auto& es : out.out)
        es.erase(std::remove_if(es.begin(), es.end(),
                                [](const NfaEdge& e) {
                                    return e.label == Label::BarZero || e.label == Label::BarOne;
                                }),
                 es.end());
    return out;
}

Nfa resolve_two_edges(const Nfa& n) {
    if (n.has_label(Label::BarZero) || n.has_label(Label::BarOne))
        throw InternalError("resolve_two_edges on an automaton with barred edges");
    // A 2-edge turns any nonempty continuation into the empty path, so its source
    // accepts whenever the target can reach acceptance along any edges.
    auto reach = coreachable(n);
    Nfa out = n;
    for (int q = 0; q < n.size(); ++q)
        for (const auto& e : n.out[q])
            if (e.label == Label::Two && reach[e.to]) out.final[q] = 1;
    for (auto& es : out.out)
        es.erase(std::remove_if(es.begin(), es.end(),
                                [](const NfaEdge& e) { return e.label == Label::Two; }),
                 es.end());
    return out;
}

namespace {

void compute_live(LivenessDfa& d) {
    d.live.assign(d.size(), 0);
    bool changed = true;
    for (int s = 0; s < d.size(); ++s) d.live[s] = d.final[s];
    while (changed) {
        changed = false;
        for (int s = 0; s < d.size(); ++s)
            if (!d.live[s] && (d.live[d.next[s][0]] || d.live[d.next[s][1]])) {
                d.live[s] = 1;
                changed = true;
            }
    }
}

}  // namespace

LivenessDfa determinize(const Nfa& n) {
    for (const auto& es : n.out)
        for (const auto& e : es)
            if (e.label != Label::Zero && e.label != Label::One && e.label != Label::Eps)
                throw InternalError("determinize on an automaton with edge " +
                                    std::string(label_text(e.label)));
    LivenessDfa d;
    std::map<std::vector<int>, int> ids;
    std::vector<std::vector<int>> sets;
    auto intern = [&](std::vector<int> set) {
        auto [it, fresh] = ids.emplace(set, static_cast<int>(sets.size()));
        if (fresh) {
            sets.push_back(std::move(set));
            d.next.push_back({-1, -1});
            d.final.push_back(0);
        }
        return it->second;
    };
    d.start = intern(eps_closure(n, {n.start}));
    for (size_t i = 0; i < sets.size(); ++i) {
        for (int q : sets[i])
            if (n.final[q]) d.final[i] = 1;
        for (int b = 0; b < 2; ++b) {
            const Label want = b == 0 ? Label::Zero : Label::One;
            std::vector<int> targets;
            for (int q : sets[i])
                for (const auto& e : n.out[q])
                    if (e.label == want) targets.push_back(e.to);
            std::sort(targets.begin(), targets.end());
            targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
            int t = intern(eps_closure(n, targets));
            d.next[i][b] = t;
        }
    }
    compute_live(d);
    return d;
}

LivenessDfa minimize(const LivenessDfa& d) {
    // Moore refinement starting from the accepting / rejecting split.
    const int n = d.size();
    std::vector<int> block(n);
    for (int s = 0; s < n; ++s) block[s] = d.final[s] ? 1 : 0;
    int blocks = 0;
    while (true) {
        std::map<std::array<int, 3>, int> sig;
        std::vector<int> next_block(n);
        for (int s = 0; s < n; ++s) {
            std::array<int, 3> key{block[s], block[d.next[s][0]], block[d.next[s][1]]};
            auto it = sig.emplace(key, static_cast<int>(sig.size())).first;
            next_block[s] = it->second;
        }
        const int count = static_cast<int>(sig.size());
        block.swap(next_block);
        if (count == blocks) break;
        blocks = count;
    }
    // Canonical numbering: breadth-first from the start, 0 before 1.
    std::vector<int> order(blocks, -1);
    std::vector<int> rep(blocks, -1);
    for (int s = 0; s < n; ++s)
        if (rep[block[s]] < 0) rep[block[s]] = s;
    LivenessDfa out;
    std::queue<int> q;
    order[block[d.start]] = 0;
    q.push(block[d.start]);
    std::vector<int> seq;
    while (!q.empty()) {
        int b = q.front();
        q.pop();
        seq.push_back(b);
        for (int bit = 0; bit < 2; ++bit) {
            int t = block[d.next[rep[b]][bit]];
            if (order[t] < 0) {
                order[t] = static_cast<int>(seq.size() + q.size());
                q.push(t);
            }
        }
    }
    out.start = 0;
    out.next.resize(seq.size());
    out.final.resize(seq.size());
    for (size_t i = 0; i < seq.size(); ++i) {
        int b = seq[i];
        out.final[i] = d.final[rep[b]];
        for (int bit = 0; bit < 2; ++bit) out.next[i][bit] = order[block[d.next[rep[b]][bit]]];
    }
    compute_live(out);
    return out;
}

LivenessDfa finalize(const Nfa& n) { return minimize(determinize(resolve_two_edges(simplify(n)))); }

bool LivenessDfa::accepts(const std::string& path) const {
    int s = start;
    for (char c : path) s = next.at(s)[c == '1' ? 1 : 0];
    return final[s] != 0;
}

LivenessDfa LivenessDfa::all() {
    LivenessDfa d;
    d.next = {{0, 0}};
    d.final = {1};
    d.live = {1};
    return d;
}

LivenessDfa LivenessDfa::none() {
    LivenessDfa d;
    d.next = {{0, 0}};
    d.final = {0};
    d.live = {0};
    return d;
}

LivenessDfa LivenessDfa::epsilon() {
    LivenessDfa d;
    d.next = {{1, 1}, {1, 1}};
    d.final = {1, 0};
    d.live = {1, 0};
    return d;
}

namespace {

constexpr char kMagic[4] = {'L', 'G', 'C', 'A'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, size_t& pos) {
    if (pos + 4 > in.size()) throw Error("truncated automaton");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += 4;
    return v;
}

}  // namespace

std::string LivenessDfa::serialize() const {
    std::string out(kMagic, 4);
    put_u32(out, kFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(size()));
    put_u32(out, static_cast<std::uint32_t>(start));
    for (const auto& t : next) {
        put_u32(out, static_cast<std::uint32_t>(t[0]));
        put_u32(out, static_cast<std::uint32_t>(t[1]));
    }
    std::string bits((size() + 7) / 8, '\0');
    for (int s = 0; s < size(); ++s)
        if (final[s]) bits[s / 8] = static_cast<char>(bits[s / 8] | (1 << (s % 8)));
    return out + bits;
}

LivenessDfa LivenessDfa::deserialize(const std::string& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw Error("not an automaton");
    size_t pos = 4;
    if (get_u32(bytes, pos) != kFormatVersion) throw Error("unsupported automaton version");
    LivenessDfa d;
    const std::uint32_t n = get_u32(bytes, pos);
    d.start = static_cast<int>(get_u32(bytes, pos));
    d.next.resize(n);
    for (auto& t : d.next) {
        t[0] = static_cast<int>(get_u32(bytes, pos));
        t[1] = static_cast<int>(get_u32(bytes, pos));
        if (t[0] >= static_cast<int>(n) || t[1] >= static_cast<int>(n)) throw Error("corrupt automaton");
    }
    if (pos + (n + 7) / 8 > bytes.size()) throw Error("truncated automaton");
    d.final.resize(n);
    for (std::uint32_t s = 0; s < n; ++s) d.final[s] = (bytes[pos + s / 8] >> (s % 8)) & 1;
    compute_live(d);
    return d;
}

std::string LivenessDfa::to_dot(const std::string& name) const {
    std::ostringstream os;
    os << "digraph \"" << name << "\" {\n  rankdir=LR;\n  init [shape=point];\n";
    for (int s = 0; s < size(); ++s) {
        if (!live[s]) continue;
        os << "  q" << s << " [shape=" << (final[s] ? "doublecircle" : "circle") << "];\n";
    }
    if (live[start]) os << "  init -> q" << start << ";\n";
    for (int s = 0; s < size(); ++s) {
        if (!live[s]) continue;
        for (int b = 0; b < 2; ++b)
            if (live[next[s][b]]) os << "  q" << s << " -> q" << next[s][b] << " [label=\"" << b << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

std::string to_dot(const Nfa& n, const std::string& name) {
    std::ostringstream os;
    os << "digraph \"" << name << "\" {\n  rankdir=LR;\n  init [shape=point];\n";
    for (int s = 0; s < n.size(); ++s)
        os << "  q" << s << " [shape=" << (n.final[s] ? "doublecircle" : "circle") << "];\n";
    os << "  init -> q" << n.start << ";\n";
    for (int s = 0; s < n.size(); ++s)
        for (const auto& e : n.out[s])
            os << "  q" << s << " -> q" << e.to << " [label=\"" << label_text(e.label) << "\"];\n";
    os << "}\n";
    return os.str();
}

bool language_subset(const LivenessDfa& a, const LivenessDfa& b) {
    std::set<std::pair<int, int>> seen;
    std::vector<std::pair<int, int>> work{{a.start, b.start}};
    seen.insert(work.back());
    while (!work.empty()) {
        auto [x, y] = work.back();
        work.pop_back();
        if (a.final[x] && !b.final[y]) return false;
        for (int bit = 0; bit < 2; ++bit) {
            std::pair<int, int> nxt{a.next[x][bit], b.next[y][bit]};
            if (!a.live[nxt.first]) continue;
            if (seen.insert(nxt).second) work.push_back(nxt);
        }
    }
    return true;
}

bool nfa_accepts(const Nfa& n, const std::vector<Label>& word) {
    std::vector<int> cur = eps_closure(n, {n.start});
    for (Label l : word) {
        std::vector<int> nxt;
        for (int q : cur)
            for (const auto& e : n.out[q])
                if (e.label == l) nxt.push_back(e.to);
        std::sort(nxt.begin(), nxt.end());
        nxt.erase(std::unique(nxt.begin(), nxt.end()), nxt.end());
        cur = eps_closure(n, nxt);
    }
    for (int q : cur)
        if (n.final[q]) return true;
    return false;
}

}  // namespace lgc
