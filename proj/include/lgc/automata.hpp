#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lgc/grammar.hpp"

namespace lgc {

enum class Label : std::uint8_t { Zero, One, BarZero, BarOne, Two, Eps };

const char* label_text(Label l);

struct NfaEdge {
    Label label;
    int to;
};

struct Nfa {
    int start = 0;
    std::vector<std::vector<NfaEdge>> out;
    std::vector<char> final;

    int add_state();
    void add_edge(int from, Label label, int to) { out.at(from).push_back({label, to}); }
    int size() const { return static_cast<int>(out.size()); }
    bool has_label(Label l) const;
    size_t edge_count() const;
};

struct LivenessDfa {
    int start = 0;
    std::vector<std::array<int, 2>> next;  // total; the dead state loops on itself
    std::vector<char> final;
    std::vector<char> live;  // some final state is reachable

    int size() const { return static_cast<int>(next.size()); }
    bool is_live(int state) const { return live.at(state) != 0; }
    int step(int state, int bit) const { return next.at(state)[bit]; }
    bool accepts(const std::string& path) const;  // path over '0' and '1'
    bool empty() const { return !live.at(start); }
    bool operator==(const LivenessDfa& o) const = default;

    // Accepts every forward path.
    static LivenessDfa all();
    // Accepts nothing.
    static LivenessDfa none();
    // Accepts exactly the empty path.
    static LivenessDfa epsilon();

    std::string serialize() const;
    static LivenessDfa deserialize(const std::string& bytes);
    std::string to_dot(const std::string& name) const;
};

// Strongly regular approximation of every recursive component that is not right-linear.
Grammar mohri_nederhof(const Grammar& g);
// Same, restricted to the nonterminals reachable from root; root keeps its name.
Grammar mohri_nederhof(const Grammar& g, int root);

// Nonterminals whose language is supplied by an already finished automaton; its live
// states act as accepting, so the embedded language is prefix-closed.
using DfaEmbedding = std::map<int, const LivenessDfa*>;

Nfa to_nfa(const Grammar& sr, int root, const DfaEmbedding& embed = {});

// Appends the prefix closure of d after every accepting state of n.
Nfa concat(const Nfa& n, const LivenessDfa& d);

// seed 0 processes barred edges in construction order; other seeds shuffle it.
Nfa simplify(const Nfa& n, std::uint64_t seed = 0);
Nfa resolve_two_edges(const Nfa& n);
LivenessDfa determinize(const Nfa& n);
LivenessDfa minimize(const LivenessDfa& d);

// simplify, resolve_two_edges, determinize, minimize.
LivenessDfa finalize(const Nfa& n);

// Every string accepted by a is accepted by b.
bool language_subset(const LivenessDfa& a, const LivenessDfa& b);

std::string to_dot(const Nfa& n, const std::string& name);

// Simulates n on a string over labels; eps edges are followed freely.
bool nfa_accepts(const Nfa& n, const std::vector<Label>& word);

}  // namespace lgc

namespace lgc {

// Strongly connected components of the nonterminal reference graph.
struct SccInfo {
    explicit SccInfo(const Grammar& g);

    std::vector<int> component;                // nonterminal -> component id
    std::vector<std::vector<int>> members;     // component id -> nonterminals
    std::vector<char> recursive;               // component has a cycle
    std::vector<char> right_linear;            // every rule has at most a trailing member
};

// Builds NFAs for many roots of one strongly regular grammar.
class NfaBuilder {
public:
    explicit NfaBuilder(const Grammar& sr);
    Nfa build(int root, const DfaEmbedding& embed = {}) const;
    // NFA for the union of the given right-hand sides.
    Nfa build_strings(const std::vector<SymString>& alternatives, const DfaEmbedding& embed = {}) const;

private:
    const Grammar& g_;
    SccInfo scc_;
};

}  // namespace lgc
