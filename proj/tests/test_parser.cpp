#include <gtest/gtest.h>

#include <set>

#include "lgc/ast.hpp"
#include "lgc/corpus.hpp"
#include "oracles.hpp"

using namespace lgc;

namespace {

const char* kLength = R"(
(define (length l)
  (let (x (null? l))
    (if x
        (let (v 0) (return v))
        (let (u (cdr l))
          (let (y (length u))
            (let (one 1)
              (let (z (+ one y))
                (return z))))))))
(define (main)
  (let (e nil)
    (let (b 7)
      (let (c (cons b e))
        (let (w (length c))
          (return w))))))
)";

template <class E>
SourcePos error_pos(const std::string& text) {
    try {
        load_program(text);
    } catch (const E& e) {
        return e.pos;
    }
    ADD_FAILURE() << "no error for:\n" << text;
    return {};
}

void preorder(const Expr& e, std::vector<int>& pis, std::vector<int>& psis) {
    pis.push_back(e.pi);
    if (e.kind != ExprKind::Let) psis.push_back(e.psi);
    if (e.kind == ExprKind::Let) preorder(*e.body, pis, psis);
    if (e.kind == ExprKind::If) {
        preorder(*e.then_branch, pis, psis);
        preorder(*e.else_branch, pis, psis);
    }
}

}  // namespace

TEST(Parser, ParsesLengthProgram) {
    Program p = load_program(kLength);
    ASSERT_EQ(p.defs.size(), 2u);
    EXPECT_EQ(p.main().name, "main");
    EXPECT_EQ(p.defs[0].params.size(), 1u);
    EXPECT_EQ(p.defs[0].body->kind, ExprKind::Let);
    EXPECT_EQ(p.defs[0].body->rhs.kind, AppKind::NullQ);
}

TEST(Parser, LabelsArePreorder) {
    Program p = load_program(kLength);
    std::vector<int> pis, psis;
    for (const auto& f : p.defs) preorder(*f.body, pis, psis);
    std::vector<int> want(pis.size());
    for (size_t i = 0; i < want.size(); ++i) want[i] = static_cast<int>(i) + 1;
    EXPECT_EQ(pis, want);
    std::vector<int> want_psi(psis.size());
    for (size_t i = 0; i < want_psi.size(); ++i) want_psi[i] = static_cast<int>(i) + 1;
    EXPECT_EQ(psis, want_psi);
    EXPECT_EQ(p.pi_count, static_cast<int>(pis.size()));
    EXPECT_EQ(p.psi_count, static_cast<int>(psis.size()));
}

TEST(Parser, LetCountsMatchTreeWalk) {
    for (const auto& entry : list_corpus()) {
        Program p = load_program_file(entry.path);
        for (const auto& f : p.defs)
            for_each_expr(*f.body, [&](const Expr& e) {
                EXPECT_EQ(e.let_count, oracle::count_lets(e)) << entry.name << " pi " << e.pi;
            });
    }
}

TEST(Parser, LengthBodyBound) {
    Program p = load_program(kLength);
    const Expr& body = *p.defs[0].body;
    // x, v, u, y, one, z
    EXPECT_EQ(body.let_count, 6);
    EXPECT_EQ(body.body->else_branch->let_count, 4);
    EXPECT_EQ(body.body->then_branch->let_count, 1);
}

TEST(Parser, SlotsCoverParamsAndBinders) {
    Program p = load_program(kLength);
    const FunDef& f = p.defs[0];
    EXPECT_EQ(f.slot_count, 7);
    ASSERT_EQ(f.slot_names.size(), 7u);
    EXPECT_EQ(f.slot_names[0], "l");
    EXPECT_EQ(f.params[0].slot, 0);
    std::set<int> seen;
    for_each_expr(*f.body, [&](const Expr& e) {
        if (e.kind == ExprKind::Let) EXPECT_TRUE(seen.insert(e.var.slot).second);
    });
    EXPECT_EQ(seen.size(), 6u);
    EXPECT_EQ(p.main().body->body->body->body->rhs.callee_index, 0);
}

TEST(Parser, ShadowingIsRenamed) {
    const char* text = R"(
(define (f x)
  (let (x (cdr x))
    (let (x (car x))
      (return x))))
(define (main)
  (let (x nil)
    (let (y 1)
      (let (x (cons y x))
        (let (z (cons x x))
          (let (r (f z))
            (return r)))))))
)";
    Program raw = parse_program(text);
    Program renamed = load_program(text);
    EXPECT_EQ(oracle::binding_graph(raw), oracle::binding_graph(renamed));
    for (const auto& f : renamed.defs) {
        std::set<std::string> names;
        for (const auto& v : f.params) names.insert(v.name);
        for_each_expr(*f.body, [&](const Expr& e) {
            if (e.kind == ExprKind::Let) EXPECT_TRUE(names.insert(e.var.name).second) << e.var.name;
        });
    }
}

TEST(Parser, RenamingKeepsCorpusBindings) {
    for (const auto& entry : list_corpus()) {
        const std::string text = read_text_file(entry.path);
        EXPECT_EQ(oracle::binding_graph(parse_program(text)), oracle::binding_graph(load_program(text)))
            << entry.name;
    }
}

TEST(Parser, PrintIsStableAndReparses) {
    for (const auto& entry : list_corpus()) {
        Program p = load_program_file(entry.path);
        const std::string once = print_program(p);
        Program q = load_program(once);
        EXPECT_EQ(print_program(q), once) << entry.name;
        EXPECT_EQ(print_program(load_program_file(entry.path)), once) << entry.name;
    }
}

TEST(Parser, RejectsNestedApplication) {
    SourcePos pos = error_pos<SyntaxError>("(define (main)\n  (let (x (car (cdr y)))\n    (return x)))");
    EXPECT_EQ(pos.line, 2);
}

TEST(Parser, RejectsUnterminatedList) {
    error_pos<SyntaxError>("(define (main) (let (x 1) (return x))");
}

TEST(Parser, RejectsConstantOperand) {
    error_pos<SyntaxError>("(define (main) (let (x (+ 1 2)) (return x)))");
}

TEST(Parser, RejectsBadLetShape) {
    error_pos<SyntaxError>("(define (main) (let x 1 (return x)))");
}

TEST(Parser, RejectsUnboundVariable) {
    SourcePos pos = error_pos<ProgramError>("(define (main)\n  (return q))");
    EXPECT_EQ(pos.line, 2);
}

TEST(Parser, RejectsArityMismatch) {
    error_pos<ProgramError>(
        "(define (f a b) (return a))\n(define (main) (let (x 1) (let (y (f x)) (return y))))");
}

TEST(Parser, RejectsMissingMain) {
    error_pos<ProgramError>("(define (f a) (return a))");
}

TEST(Parser, RejectsDuplicateFunction) {
    error_pos<ProgramError>("(define (f a) (return a))\n(define (f b) (return b))\n"
                            "(define (main) (let (x 1) (return x)))");
}

TEST(Parser, RejectsUndefinedCallee) {
    error_pos<ProgramError>("(define (main) (let (x 1) (let (y (g x)) (return y))))");
}

TEST(Parser, RejectsRepeatedParameter) {
    error_pos<ProgramError>("(define (f a a) (return a))\n(define (main) (let (x 1) (return x)))");
}

TEST(Parser, CommentsAndWhitespaceIgnored) {
    Program a = load_program("(define (main) (let (x 1) (return x)))");
    Program b = load_program("; header\n(define (main)\n  ; body\n  (let (x 1)\n\t(return x)))\n");
    EXPECT_EQ(print_program(a), print_program(b));
}
