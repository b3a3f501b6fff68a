#pragma once

#include <map>
#include <string>
#include <vector>

#include "lgc/ast.hpp"
#include "lgc/grammar.hpp"

namespace lgc {

// Demand imposed on main's result.
enum class MainDemand {
    All,   // S_all: the printer traverses the whole value
    Whnf,  // {eps}: only the outermost constructor
};

struct AnalysisOptions {
    MainDemand main_demand = MainDemand::All;
    bool variants = true;        // evaluation-point refined closure descriptors
    bool relative_roots = true;  // demand-free roots used by the minefield
};

// Variable name -> set of symbolic strings. An absent name has the empty set.
using SymbolicEnv = std::map<std::string, StringSet>;

void merge_into(SymbolicEnv& into, const SymbolicEnv& from);

// Evaluation points that contribute demand; everything when lo > hi is not set.
struct EvalFilter {
    int lo = 0;
    int hi = 1 << 30;
    bool admits(int psi) const { return psi >= lo && psi <= hi; }
};

// Per-expression facts gathered while evaluating the liveness equations.
struct LivenessRecord {
    std::map<int, SymbolicEnv> at;                   // pi -> liveness before the expression
    std::map<int, StringSet> let_var;                // Let pi -> liveness of its binder in the body
    std::map<int, std::vector<StringSet>> closure;   // Let pi -> per-operand closure liveness
};

class LivenessEquations {
public:
    // Interns D nonterminals for every function parameter in g.
    LivenessEquations(const Program& p, Grammar& g);

    int demand_nt(int fun, int param) const { return d_nts_.at(fun).at(param); }

    // Symbolic prefix applied to the demand for operand i of a.
    StringSet prefixes(const App& a, size_t operand) const;

    SymbolicEnv ref_app(const App& a, const StringSet& demand) const;

    SymbolicEnv live_expr(const Expr& e, const StringSet& demand, const EvalFilter& filter = {},
                          LivenessRecord* record = nullptr) const;

private:
    const Program& program_;
    std::vector<std::vector<int>> d_nts_;
};

// The single string eps, i.e. "the demand itself".
StringSet identity_demand();

// Demand transformers, summary demands and the stack/closure roots.
LivenessGrammar build_grammar(const Program& p, const AnalysisOptions& opts = {});

// Adds GC-point, frame-resume and relative roots to g.
void build_gc_point_envs(const Program& p, LivenessGrammar& g, const AnalysisOptions& opts = {});

// Adds closure descriptors narrowed by If outcomes.
void build_eval_point_variants(const Program& p, LivenessGrammar& g);

// build_grammar followed by the two root builders, as configured.
LivenessGrammar analyze_program(const Program& p, const AnalysisOptions& opts = {});

}  // namespace lgc
