#pragma once

#include <cstdint>
#include <vector>

#include "lgc/ast.hpp"

namespace lgc {

using Ref = std::uint32_t;
constexpr Ref kUnbound = 0xFFFFFFFF;   // slot not yet bound
constexpr Ref kDangling = 0xFFFFFFFE;  // reference the collector did not translate
// Minefield poison: kPoisonBase + index of the poisoning event.
constexpr Ref kPoisonBase = 0xC0000000;
inline bool is_poison(Ref r) { return r >= kPoisonBase && r < kDangling; }
inline bool is_sentinel(Ref r) { return r >= kPoisonBase; }

enum class CellKind : std::uint8_t { Empty, Num, Nil, Pair, Closure, BlackHole };

const char* cell_kind_name(CellKind k);

struct Cell {
    CellKind kind = CellKind::Empty;
    std::int64_t num = 0;
    Ref car = kUnbound;
    Ref cdr = kUnbound;
    const Expr* site = nullptr;           // Closure: Let whose right-hand side is suspended
    std::vector<Ref> args;                // Closure: operand values by position
    std::vector<std::uint32_t> liveness;  // Closure: one automaton per operand
    std::uint32_t demand = 0;             // Closure: minefield demand
    std::uint32_t witness = 0;            // minefield: last collection that witnessed the cell
    std::uint64_t serial = 0;             // allocation ordinal, stable across copies

    bool whnf() const { return kind == CellKind::Num || kind == CellKind::Nil || kind == CellKind::Pair; }
};

// One semispace; collections build the other and hand it back through replace().
class Heap {
public:
    explicit Heap(size_t capacity = 0) : capacity_(capacity) { cells_.reserve(capacity); }

    Ref allocate(Cell c);
    Cell& at(Ref r);
    const Cell& at(Ref r) const;
    bool valid(Ref r) const { return r < cells_.size(); }

    size_t used() const { return cells_.size(); }
    size_t capacity() const { return capacity_; }
    size_t free() const { return capacity_ - cells_.size(); }
    const std::vector<Cell>& cells() const { return cells_; }
    std::vector<Cell>& cells() { return cells_; }
    void replace(std::vector<Cell>&& to_space);

private:
    std::vector<Cell> cells_;
    size_t capacity_;
};

}  // namespace lgc
