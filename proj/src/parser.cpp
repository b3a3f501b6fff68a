#include <cctype>
#include <charconv>

#include "lgc/ast.hpp"

namespace lgc {

namespace {

struct SExpr {
    bool is_list = false;
    std::string atom;
    std::vector<SExpr> items;
    SourcePos pos;
};

class Reader {
public:
    explicit Reader(const std::string& text) : text_(text) {}

    std::vector<SExpr> read_all() {
        std::vector<SExpr> out;
        skip();
        while (i_ < text_.size()) {
            out.push_back(read());
            skip();
        }
        return out;
    }

private:
    const std::string& text_;
    size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;

    SourcePos here() const { return {line_, col_}; }

    void advance() {
        if (text_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }

    void skip() {
        while (i_ < text_.size()) {
            char c = text_[i_];
            if (c == ';') {
                while (i_ < text_.size() && text_[i_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    SExpr read() {
        SExpr s;
        s.pos = here();
        char c = text_[i_];
        if (c == ')') throw SyntaxError("unexpected ')'", here());
        if (c == '(') {
            advance();
            s.is_list = true;
            skip();
            while (true) {
                if (i_ >= text_.size()) throw SyntaxError("unterminated list", s.pos);
                if (text_[i_] == ')') {
                    advance();
                    break;
                }
                s.items.push_back(read());
                skip();
            }
            return s;
        }
        while (i_ < text_.size()) {
            c = text_[i_];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ';')
                break;
            s.atom.push_back(c);
            advance();
        }
        return s;
    }
};

bool is_integer(const std::string& s) {
    size_t start = (s.size() > 1 && s[0] == '-') ? 1 : 0;
    if (start >= s.size()) return false;
    for (size_t k = start; k < s.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
    return true;
}

const char* const kReserved[] = {"define", "let", "if", "return", "cons", "car", "cdr",
                                 "null?", "nil", "+", "-", "*", "/", "<", "="};

bool is_reserved(const std::string& s) {
    for (const char* r : kReserved)
        if (s == r) return true;
    return false;
}

Var to_var(const SExpr& s, const std::string& what) {
    if (s.is_list)
        throw SyntaxError(what + " must be a variable (programs are in A-normal form; bind "
                                 "the subexpression with let first)",
                          s.pos);
    if (is_integer(s.atom) || s.atom == "nil")
        throw SyntaxError(what + " must be a variable, not the constant '" + s.atom +
                              "' (bind it with let first)",
                          s.pos);
    if (is_reserved(s.atom)) throw SyntaxError("'" + s.atom + "' is a keyword", s.pos);
    return Var{s.atom, -1, s.pos};
}

std::string head_of(const SExpr& s) {
    if (!s.is_list || s.items.empty() || s.items[0].is_list) return "";
    return s.items[0].atom;
}

void expect_arity(const SExpr& s, size_t n, const std::string& form) {
    if (s.items.size() != n)
        throw SyntaxError("'" + form + "' takes " + std::to_string(n - 1) + " operand(s)", s.pos);
}

App to_app(const SExpr& s) {
    App a;
    a.pos = s.pos;
    if (!s.is_list) {
        if (s.atom == "nil") {
            a.kind = AppKind::Const;
            return a;
        }
        if (is_integer(s.atom)) {
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(s.atom.data(), s.atom.data() + s.atom.size(), v);
            if (ec != std::errc() || p != s.atom.data() + s.atom.size())
                throw SyntaxError("integer literal out of range", s.pos);
            a.kind = AppKind::Const;
            a.value = v;
            return a;
        }
        throw SyntaxError("right-hand side of let must be an application or constant, got '" +
                              s.atom + "'",
                          s.pos);
    }
    if (s.items.empty()) throw SyntaxError("empty application", s.pos);
    const std::string head = head_of(s);
    if (head.empty()) throw SyntaxError("application head must be a name", s.pos);
    auto operands = [&](const std::string& what) {
        for (size_t k = 1; k < s.items.size(); ++k)
            a.args.push_back(to_var(s.items[k], "operand " + std::to_string(k) + " of " + what));
    };
    static const std::pair<const char*, PrimOp> prims[] = {
        {"+", PrimOp::Add}, {"-", PrimOp::Sub}, {"*", PrimOp::Mul},
        {"/", PrimOp::Div}, {"<", PrimOp::Lt},  {"=", PrimOp::Eq}};
    if (head == "cons") {
        expect_arity(s, 3, head);
        a.kind = AppKind::Cons;
    } else if (head == "car") {
        expect_arity(s, 2, head);
        a.kind = AppKind::Car;
    } else if (head == "cdr") {
        expect_arity(s, 2, head);
        a.kind = AppKind::Cdr;
    } else if (head == "null?") {
        expect_arity(s, 2, head);
        a.kind = AppKind::NullQ;
    } else {
        bool prim = false;
        for (const auto& [name, op] : prims) {
            if (head == name) {
                expect_arity(s, 3, head);
                a.kind = AppKind::Prim;
                a.op = op;
                prim = true;
            }
        }
        if (!prim) {
            if (is_reserved(head) || is_integer(head))
                throw SyntaxError("'" + head + "' cannot be applied", s.pos);
            a.kind = AppKind::Call;
            a.callee = head;
        }
    }
    operands(head);
    return a;
}

std::unique_ptr<Expr> to_expr(const SExpr& s) {
    auto e = std::make_unique<Expr>();
    e->pos = s.pos;
    const std::string head = head_of(s);
    if (head == "let") {
        expect_arity(s, 3, "let");
        const SExpr& b = s.items[1];
        if (!b.is_list || b.items.size() != 2)
            throw SyntaxError("let binding must have the form (name rhs)", b.pos);
        e->kind = ExprKind::Let;
        e->var = to_var(b.items[0], "let binder");
        e->rhs = to_app(b.items[1]);
        e->body = to_expr(s.items[2]);
    } else if (head == "if") {
        expect_arity(s, 4, "if");
        e->kind = ExprKind::If;
        e->var = to_var(s.items[1], "condition of if");
        e->then_branch = to_expr(s.items[2]);
        e->else_branch = to_expr(s.items[3]);
    } else if (head == "return") {
        expect_arity(s, 2, "return");
        e->kind = ExprKind::Return;
        e->var = to_var(s.items[1], "operand of return");
    } else {
        throw SyntaxError("expected let, if or return", s.pos);
    }
    return e;
}

FunDef to_def(const SExpr& s) {
    if (head_of(s) != "define") throw SyntaxError("expected (define (f x...) body)", s.pos);
    expect_arity(s, 3, "define");
    const SExpr& sig = s.items[1];
    if (!sig.is_list || sig.items.empty() || sig.items[0].is_list)
        throw SyntaxError("expected function signature (f x...)", sig.pos);
    FunDef d;
    d.pos = s.pos;
    d.name = sig.items[0].atom;
    if (is_reserved(d.name) || is_integer(d.name))
        throw SyntaxError("invalid function name '" + d.name + "'", sig.items[0].pos);
    for (size_t k = 1; k < sig.items.size(); ++k)
        d.params.push_back(to_var(sig.items[k], "parameter"));
    d.body = to_expr(s.items[2]);
    return d;
}

}  // namespace

Program parse_program(const std::string& text) {
    Program p;
    for (const auto& s : Reader(text).read_all()) p.defs.push_back(to_def(s));
    p.main_index = p.find("main");
    return p;
}

}  // namespace lgc
