#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lgc {

// Terminal alphabet of liveness grammars.
enum class Terminal : std::uint8_t { Zero, One, BarZero, BarOne, Two, End };
constexpr int kTerminalCount = 6;

const char* terminal_text(Terminal t);

struct Symbol {
    bool nonterminal = false;
    int id = 0;  // Terminal value or nonterminal index

    static Symbol t(Terminal term) { return {false, static_cast<int>(term)}; }
    static Symbol nt(int id) { return {true, id}; }
    bool is(Terminal term) const { return !nonterminal && id == static_cast<int>(term); }
    Terminal terminal() const { return static_cast<Terminal>(id); }

    auto operator<=>(const Symbol&) const = default;
};

using SymString = std::vector<Symbol>;
using StringSet = std::set<SymString>;

// Applies the local rewrites 0~0 -> eps, 1~1 -> eps, 2x -> 2 (x in 0,1,2), 2$ -> $,
// and detects the empty language (~0 followed by 1 or 2, ~1 followed by 0 or 2).
// Returns nullopt when the string denotes the empty set for every continuation.
std::optional<SymString> normalize(const SymString& s);

// Concatenates every prefix with every suffix and normalizes; empty input on
// either side yields the empty set.
StringSet concat(const StringSet& prefixes, const StringSet& suffixes);

class Grammar {
public:
    int add_nonterminal(const std::string& name);
    int find(const std::string& name) const;
    int intern(const std::string& name);  // find or add
    const std::string& name(int nt) const { return names_.at(nt); }
    int size() const { return static_cast<int>(names_.size()); }

    // Adds a production; duplicates are ignored.
    void add(int lhs, const SymString& rhs);
    const std::vector<SymString>& rules(int nt) const { return rules_.at(nt); }
    std::vector<SymString>& rules(int nt) { return rules_.at(nt); }
    size_t production_count() const;
    void remove(int lhs, size_t index);

    // Nonterminals reachable from the given roots (including them).
    std::vector<int> reachable(const std::vector<int>& roots) const;

    std::string symbol_text(const Symbol& s) const;
    std::string production_text(int lhs, const SymString& rhs) const;

private:
    std::vector<std::string> names_;
    std::map<std::string, int> index_;
    std::vector<std::vector<SymString>> rules_;
    std::vector<std::set<SymString>> seen_;
};

enum class RootRole {
    DemandTransformer,  // D[f,i]
    SummaryDemand,      // sigma[f]
    StackVar,           // whole-body liveness of a stack variable
    ClosureVar,         // creation-time descriptor of closure variable x_pi
    ClosureVariant,     // descriptor narrowed after an If outcome
    GcEntry,            // variable liveness at function entry
    GcAfterIf,          // variable liveness after an If condition resolved
    FrameIf,            // variable liveness of a suspended frame resuming at an If
    FrameReturn,        // variable liveness of a suspended frame resuming at a Return
    RelPoint,           // relative (demand-free) liveness at a Let/If/Return
    RelLetVar,          // relative liveness of a Let binder in its body
    RelRef,             // relative ref prefix of one operand of an application
};

const char* role_name(RootRole r);

struct Root {
    RootRole role = RootRole::StackVar;
    int nt = -1;
    int fun = -1;
    int pi = 0;       // Let for closure roots, point for Rel roots
    int psi = 0;      // If/Return evaluation point
    int branch = -1;  // 0 then, 1 else
    int arg = -1;     // operand position or parameter index
    int slot = -1;    // variable slot in fun
    std::string var;

    bool relative() const {
        return role == RootRole::RelPoint || role == RootRole::RelLetVar ||
               role == RootRole::RelRef || role == RootRole::DemandTransformer;
    }
};

struct LivenessGrammar {
    Grammar grammar;
    std::vector<Root> roots;
    int s_all = -1;
    std::vector<int> sigma;  // function index -> summary demand nonterminal
    bool main_whnf = false;  // main's demand is {eps} rather than S_all

    // Symbols that close a relative string of function fun into an absolute one.
    SymString tail(int fun, int main_index) const;

    std::string to_text() const;  // productions, one per line, then the roots index
    // First root with the given role in function fun (-1: any) bound to var (empty: any).
    const Root* find_root(RootRole role, int fun, const std::string& var = "") const;
    std::vector<const Root*> roots_of(RootRole role) const;
};

}  // namespace lgc
