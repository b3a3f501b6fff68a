#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lgc/error.hpp"

namespace lgc {

enum class PrimOp { Add, Sub, Mul, Div, Lt, Eq };

const char* prim_name(PrimOp op);

struct Var {
    std::string name;
    int slot = -1;  // index into the enclosing function's frame, set by resolve()
    SourcePos pos;
};

enum class AppKind { Const, Cons, Car, Cdr, NullQ, Prim, Call };

struct App {
    AppKind kind = AppKind::Const;
    std::optional<std::int64_t> value;  // Const; nullopt is nil
    PrimOp op = PrimOp::Add;
    std::string callee;
    int callee_index = -1;
    std::vector<Var> args;  // operands in positional order
    SourcePos pos;
};

enum class ExprKind { Let, If, Return };

struct Expr {
    ExprKind kind = ExprKind::Return;
    Var var;  // Let: binder; If: condition; Return: result
    App rhs;  // Let only
    std::unique_ptr<Expr> body;
    std::unique_ptr<Expr> then_branch;
    std::unique_ptr<Expr> else_branch;
    int pi = 0;   // program point, every expression
    int psi = 0;  // evaluation point, If and Return only
    int let_count = 0;  // Let nodes in this subtree, set by resolve()
    SourcePos pos;

    std::unique_ptr<Expr> clone() const;
};

struct FunDef {
    std::string name;
    std::vector<Var> params;
    std::unique_ptr<Expr> body;
    int slot_count = 0;  // params followed by let binders
    std::vector<std::string> slot_names;
    SourcePos pos;

    FunDef clone() const;
};

struct Program {
    std::vector<FunDef> defs;
    int main_index = -1;
    int pi_count = 0;
    int psi_count = 0;

    Program() = default;
    Program(Program&&) = default;
    Program& operator=(Program&&) = default;
    Program clone() const;

    const FunDef& main() const { return defs.at(main_index); }
    int find(const std::string& name) const;
};

// Text -> AST, no checks beyond syntax and ANF shape.
Program parse_program(const std::string& text);

// Checks main, duplicate names, arities, duplicate params.
void validate(const Program& p);

// Fresh names for every binder; uses are rewritten to their binder's name.
Program rename_distinct(const Program& p);

// Pre-order numbering of program points (pi) and evaluation points (psi).
Program assign_labels(const Program& p);

// Slot indices, callee indices and per-subtree let counts.
void resolve(Program& p);

// parse + validate + rename + label + resolve.
Program load_program(const std::string& text);
Program load_program_file(const std::string& path);

std::string print_program(const Program& p);

// Lookup tables over a resolved program.
struct ProgramIndex {
    explicit ProgramIndex(const Program& p);

    const Program* program;
    std::vector<const Expr*> by_pi;     // pi -> expression
    std::vector<const Expr*> by_psi;    // psi -> If or Return
    std::vector<int> fun_of_pi;         // pi -> function index
    std::vector<std::vector<const Expr*>> let_ancestors;  // pi of an If -> enclosing Lets in its function, outermost first
};

void for_each_expr(const Expr& e, const std::function<void(const Expr&)>& fn);

}  // namespace lgc
