#pragma once

// Reference implementations the tests compare the library against. They share no
// code with the analysis or automata pipeline beyond the Grammar container.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lgc/ast.hpp"
#include "lgc/automata.hpp"
#include "lgc/grammar.hpp"

namespace oracle {

// Words use one character per symbol: 0 1 a(~0) b(~1) 2.
std::string spell(const lgc::SymString& s);

// Rewrites w$ to a forward path, or nullopt when the rewriting gets stuck.
std::optional<std::string> reduce(const std::string& w);

struct Bounds {
    int depth = 7;            // derivation tree height
    size_t max_word = 14;     // longest partially reduced word kept
    size_t max_words = 6000;  // words kept per nonterminal
};

// Forward paths of length <= max_len reached by bounded derivations from root.
std::vector<std::set<std::string>> derivable_paths_all(const lgc::Grammar& g, size_t max_len,
                                                       const Bounds& b = {});
std::set<std::string> derivable_paths(const lgc::Grammar& g, int root, size_t max_len,
                                      const Bounds& b = {});

// Every string over {0,1} of length <= n, shortest first.
std::vector<std::string> binary_strings(size_t n);

// Subset-simulation of an NFA, following eps edges.
bool simulate(const lgc::Nfa& n, const std::string& path);

// Terminal strings of a grammar over {0,1} derivable in at most `steps` leftmost steps.
std::set<std::string> enumerate_words(const lgc::Grammar& g, int root, size_t max_len, int steps);

// Let nodes of a subtree.
int count_lets(const lgc::Expr& e);

// Use position -> position of the binder it refers to, under lexical scoping.
using Position = std::pair<int, int>;
std::map<Position, Position> binding_graph(const lgc::Program& p);

}  // namespace oracle
