#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lgc/analysis.hpp"
#include "lgc/automata.hpp"

namespace lgc {

using DfaId = std::uint32_t;
constexpr DfaId kDfaAll = 0;   // accepts every path
constexpr DfaId kDfaNone = 1;  // accepts nothing

enum class Parallelism { Serial, OpenMP };

// Deletes one production before automata are built.
struct GrammarMutation {
    std::string nonterminal;  // name without angle brackets
    size_t production = 0;
};

struct TableOptions {
    AnalysisOptions analysis;
    Parallelism parallelism = Parallelism::OpenMP;
    int workers = 0;              // 0: OpenMP default
    bool relative_dfas = false;   // also build automata for demand-free roots
    std::optional<GrammarMutation> mutation;
};

struct SlotDfa {
    int slot;
    DfaId dfa;
};

struct Refinement {
    int pi;    // Let whose closure is narrowed
    int slot;  // slot of the Let binder
    std::vector<DfaId> dfas;
};

struct TableStats {
    size_t nonterminals = 0;
    size_t productions = 0;
    size_t roots = 0;
    size_t distinct_dfas = 0;
    size_t dfa_states = 0;
    size_t dfa_transitions = 0;
    double build_seconds = 0;
    bool from_cache = false;
};

// The automata the collector and the oracle consult, indexed by program labels.
class LivenessTables {
public:
    LivenessGrammar grammar;
    Grammar strongly_regular;
    std::vector<LivenessDfa> dfas;          // indexed by DfaId
    std::map<int, DfaId> root_dfa;          // root nonterminal -> automaton
    std::map<int, DfaId> tail_dfa;          // summary demand / S_all nonterminal -> automaton

    std::vector<std::vector<SlotDfa>> entry;                  // function
    std::vector<std::array<std::vector<SlotDfa>, 2>> after_if;  // psi, branch
    std::vector<std::vector<SlotDfa>> frame_if;               // psi
    std::vector<std::vector<SlotDfa>> frame_return;           // psi
    std::vector<std::vector<DfaId>> closure;                  // Let pi -> operand
    std::vector<std::array<std::vector<Refinement>, 2>> refinements;  // psi, branch

    // Demand-free roots for the minefield.
    std::map<std::pair<int, std::string>, int> rel_point;  // (pi, var) -> nonterminal
    std::map<int, int> rel_let;                            // Let pi -> nonterminal
    std::map<std::pair<int, int>, int> rel_ref;            // (Let pi, operand) -> nonterminal

    TableStats stats;

    static LivenessTables build(const Program& p, const TableOptions& opts = {});
    // Uses cache_dir/<hash>.lgct when present and valid, writes it otherwise.
    static LivenessTables build_cached(const Program& p, const std::string& program_text,
                                       const TableOptions& opts, const std::string& cache_dir);

    const LivenessDfa& dfa(DfaId id) const { return dfas.at(id); }
    DfaId intern(const LivenessDfa& d);
    DfaId dfa_of_root(int nt) const;

    std::string serialize_automata() const;
    bool load_automata(const std::string& bytes);

private:
    std::map<std::string, DfaId> by_bytes_;
    void index_roots(const Program& p);
};

// The parallel kernel: one finished automaton per root nonterminal.
std::vector<LivenessDfa> build_root_dfas(const NfaBuilder& builder, const std::vector<int>& roots,
                                         const DfaEmbedding& embed, Parallelism par, int workers = 0);

std::uint64_t fnv1a(const std::string& bytes);
constexpr int kCacheFormatVersion = 1;

}  // namespace lgc
