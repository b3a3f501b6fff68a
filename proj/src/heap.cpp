#include "lgc/heap.hpp"

namespace lgc {

const char* cell_kind_name(CellKind k) {
    switch (k) {
    case CellKind::Empty: return "empty";
    case CellKind::Num: return "number";
    case CellKind::Nil: return "nil";
    case CellKind::Pair: return "pair";
    case CellKind::Closure: return "closure";
    case CellKind::BlackHole: return "closure under evaluation";
    }
    return "?";
}

Ref Heap::allocate(Cell c) {
    if (cells_.size() >= capacity_) throw OutOfMemory("heap exhausted");
    cells_.push_back(std::move(c));
    return static_cast<Ref>(cells_.size() - 1);
}

Cell& Heap::at(Ref r) {
    if (r >= cells_.size()) {
        if (is_poison(r)) throw InternalError("dereferenced a poisoned reference");
        if (r == kDangling) throw InternalError("dereferenced a reference the collector judged dead");
        throw InternalError("dereferenced an invalid reference");
    }
    return cells_[r];
}

const Cell& Heap::at(Ref r) const { return const_cast<Heap*>(this)->at(r); }

void Heap::replace(std::vector<Cell>&& to_space) {
    cells_ = std::move(to_space);
    if (cells_.capacity() < capacity_) cells_.reserve(capacity_);
}

}  // namespace lgc
