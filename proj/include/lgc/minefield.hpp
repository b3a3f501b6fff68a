#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "lgc/gc.hpp"
#include "lgc/liveness_tables.hpp"
#include "lgc/machine.hpp"

namespace lgc {

// Regular demand sets, interned; ids 0 and 1 are the full and the empty demand.
class DemandStore {
public:
    explicit DemandStore(const LivenessTables& tables);

    DfaId intern(const LivenessDfa& d);
    const LivenessDfa& dfa(DfaId id) const { return dfas_.at(id); }
    const std::vector<LivenessDfa>& dfas() const { return dfas_; }
    size_t size() const { return dfas_.size(); }

    DfaId epsilon();
    // {eps} together with bit.sigma
    DfaId select(DfaId sigma, int bit);
    // Every prefix of a path in a is a prefix of a path in b.
    bool covers(DfaId b, DfaId a) const;
    // {eps} when sigma is nonempty, empty otherwise
    DfaId whnf(DfaId sigma) const { return sigma == kDfaNone ? kDfaNone : epsilon_; }
    // Demand-free liveness nonterminal instantiated with sigma.
    DfaId compose(int nt, DfaId sigma);

private:
    const LivenessTables& tables_;
    NfaBuilder builder_;
    std::vector<LivenessDfa> dfas_;
    std::map<std::string, DfaId> by_bytes_;
    std::map<int, Nfa> nfa_;
    std::map<std::pair<int, DfaId>, DfaId> composed_;
    std::map<std::pair<DfaId, int>, DfaId> selected_;
    DfaId epsilon_ = kDfaNone;
};

struct PoisonEvent {
    size_t collection = 0;
    std::uint64_t step = 0;
    int let_pi = 0;          // Let about to run when the reference was poisoned
    std::string function;
    std::string location;    // env:x, frame#k:x, cell#serial.car, ...
    std::uint64_t target = 0;  // serial of the cell that lost its witness
};

struct MinefieldOptions {
    TableOptions tables;
    bool poison = true;           // false: witness only, execution unchanged
    GcMode collector = GcMode::Rgc;  // reclaims memory underneath the witness collections
    size_t heap_cells = 1 << 15;
    std::uint64_t max_steps = 0;
    size_t rule_history = 64;
    bool record_rules = false;     // keep the full rule sequence
};

struct CheckResult {
    bool bang = false;
    std::string output;
    nlohmann::json trace;  // set on bang
    std::uint64_t steps = 0;
    size_t collections = 0;      // witness collections, one per let
    size_t poisoned = 0;         // references replaced by poison
    size_t null_demands = 0;     // forces under an empty demand
    size_t demand_escapes = 0;   // forces whose rule demand exceeds the closure's own
    size_t demands = 0;          // distinct demand automata
    std::vector<Rule> rules;     // with record_rules
};

class MinefieldBang : public Error {
public:
    explicit MinefieldBang(nlohmann::json trace)
        : Error("minefield: dereferenced a poisoned reference"), trace(std::move(trace)) {}
    nlohmann::json trace;
};

// Instruments a machine with demands and a poisoning collection before every let.
class Minefield : public MachineObserver, public DemandTracker {
public:
    Minefield(const LivenessTables& tables, const MinefieldOptions& opts);

    void attach(Machine& m);
    // The witness collection alone: forward map of the cells some live path reaches.
    TraceResult witness(const Machine& m, const Expr& let);

    const std::vector<PoisonEvent>& events() const { return events_; }
    DemandStore& demands() { return store_; }
    size_t collections() const { return collections_; }
    size_t null_demands() const { return null_demands_; }
    size_t demand_escapes() const { return escapes_; }
    const std::vector<Rule>& rules() const { return rules_; }

    void on_step(Machine&, Rule r) override;
    void on_read(Machine& m, Ref r, const char* what) override;
    void before_let(Machine& m, const Expr& let) override;

    std::uint32_t on_force(Rule rule, std::uint32_t context, std::uint32_t stored) override;
    std::uint32_t on_let(const Expr& let, std::uint32_t current) override;
    std::uint32_t print_demand() override { return kDfaAll; }

private:
    const LivenessTables& tables_;
    MinefieldOptions opts_;
    DemandStore store_;
    std::vector<PoisonEvent> events_;
    std::deque<Rule> recent_;
    std::vector<Rule> rules_;
    size_t collections_ = 0;
    size_t null_demands_ = 0;
    size_t escapes_ = 0;
    std::map<std::pair<DfaId, DfaId>, bool> covered_;

    std::vector<TraceRoot> roots(const Machine& m, const Expr& let);
    void poison(Machine& m, const Expr& let, const TraceResult& tr);
};

// Runs p under the minefield semantics.
CheckResult check_program(const Program& p, const MinefieldOptions& opts = {});

}  // namespace lgc
