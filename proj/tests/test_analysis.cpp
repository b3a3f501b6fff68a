#include <gtest/gtest.h>

#include <random>
#include <set>

#include "lgc/analysis.hpp"
#include "lgc/corpus.hpp"
#include "oracles.hpp"

using namespace lgc;

namespace {

Program corpus_program(const std::string& name) {
    return load_program_file(std::string(LGC_CORPUS_DIR) + "/" + name + ".lisp");
}

// Productions of nt with nonterminal names passed through rename.
std::set<std::string> productions(const Grammar& g, const std::string& nt,
                                  const std::map<std::string, std::string>& rename) {
    std::set<std::string> out;
    const int id = g.find(nt);
    if (id < 0) return out;
    for (const auto& rhs : g.rules(id)) {
        std::string s;
        for (const auto& sym : rhs) {
            if (!s.empty()) s += ' ';
            if (sym.nonterminal) {
                auto it = rename.find(g.name(sym.id));
                s += it == rename.end() ? "<" + g.name(sym.id) + ">" : it->second;
            } else {
                s += terminal_text(sym.terminal());
            }
        }
        out.insert(s);
    }
    return out;
}

SymString word(const std::string& w) {
    SymString s;
    for (char c : w) {
        switch (c) {
        case '0': s.push_back(Symbol::t(Terminal::Zero)); break;
        case '1': s.push_back(Symbol::t(Terminal::One)); break;
        case 'a': s.push_back(Symbol::t(Terminal::BarZero)); break;
        case 'b': s.push_back(Symbol::t(Terminal::BarOne)); break;
        case '2': s.push_back(Symbol::t(Terminal::Two)); break;
        }
    }
    return s;
}

std::vector<std::string> all_words(size_t n) {
    std::vector<std::string> out{""};
    for (size_t i = 0; i < out.size(); ++i)
        if (out[i].size() < n)
            for (char c : std::string("01ab2")) out.push_back(out[i] + c);
    return out;
}

}  // namespace

TEST(Analysis, GoldenLengthGrammar) {
    Program p = corpus_program("length");
    AnalysisOptions o;
    o.main_demand = MainDemand::Whnf;
    LivenessGrammar g = build_grammar(p, o);
    const std::map<std::string, std::string> names{{"D:length:1", "D"}, {"sigma:length", "S"}};
    EXPECT_EQ(productions(g.grammar, "D:length:1", names),
              (std::set<std::string>{"2", "1 D 2", "2 D 2"}));
    EXPECT_EQ(productions(g.grammar, "sigma:length", names), (std::set<std::string>{"", "2 S"}));
}

TEST(Analysis, MainDemandAllUsesFullTail) {
    Program p = corpus_program("length");
    LivenessGrammar g = build_grammar(p, {});
    const int main_sigma = g.sigma.at(p.main_index);
    ASSERT_GE(main_sigma, 0);
    ASSERT_EQ(g.grammar.rules(main_sigma).size(), 1u);
    const SymString& rhs = g.grammar.rules(main_sigma)[0];
    ASSERT_EQ(rhs.size(), 1u);
    EXPECT_EQ(rhs[0], Symbol::nt(g.s_all));
}

TEST(Analysis, CarDemandOnOperand) {
    Program p = load_program("(define (main) (let (n nil) (let (o 1) (let (x (cons o n)) "
                             "(let (y (car x)) (return y))))))");
    Grammar g;
    LivenessEquations eq(p, g);
    const Expr* let_y = p.main().body->body->body->body.get();
    ASSERT_EQ(let_y->rhs.kind, AppKind::Car);
    SymbolicEnv env = eq.ref_app(let_y->rhs, identity_demand());
    ASSERT_EQ(env.count("x"), 1u);
    std::set<std::string> got;
    for (const auto& s : env["x"]) got.insert(oracle::reduce(oracle::spell(s)).value_or("?"));
    EXPECT_EQ(got, (std::set<std::string>{"", "0"}));
    const Expr* let_x = p.main().body->body->body.get();
    SymbolicEnv cons_env = eq.ref_app(let_x->rhs, identity_demand());
    std::set<std::string> head;
    for (const auto& s : cons_env["o"]) head.insert(oracle::spell(s));
    // The head operand is reached through ~0: demand 0w on the pair becomes w on o.
    EXPECT_EQ(head, (std::set<std::string>{"a"}));
}

TEST(Analysis, NormalizeAgreesWithRewriting) {
    for (const auto& w : all_words(6)) {
        auto n = normalize(word(w));
        auto want = oracle::reduce(w);
        if (!n) {
            EXPECT_FALSE(want.has_value()) << w;
            continue;
        }
        EXPECT_EQ(oracle::reduce(oracle::spell(*n)), want) << w << " -> " << oracle::spell(*n);
        EXPECT_LE(n->size(), w.size());
    }
}

TEST(Analysis, NormalizeFixedCases) {
    EXPECT_EQ(oracle::spell(*normalize(word("a0"))), "");
    EXPECT_EQ(oracle::spell(*normalize(word("b1"))), "");
    EXPECT_EQ(oracle::spell(*normalize(word("201"))), "2");
    EXPECT_EQ(oracle::spell(*normalize(word("0a01"))), "01");
    EXPECT_FALSE(normalize(word("a1")).has_value());
    EXPECT_FALSE(normalize(word("b0")).has_value());
    EXPECT_FALSE(normalize(word("a2")).has_value());
}

TEST(Analysis, ConcatNormalizesAndIsEmptyOnEmpty) {
    StringSet pre{word("0"), word("a")};
    StringSet suf{word("0"), word("1")};
    std::set<std::string> got;
    for (const auto& s : concat(pre, suf)) got.insert(oracle::spell(s));
    EXPECT_EQ(got, (std::set<std::string>{"00", "01", ""}));
    EXPECT_TRUE(concat(pre, {}).empty());
    EXPECT_TRUE(concat({}, suf).empty());
}

TEST(Analysis, Deterministic) {
    for (const auto& entry : list_corpus()) {
        Program p = load_program_file(entry.path);
        EXPECT_EQ(analyze_program(p).to_text(), analyze_program(p).to_text()) << entry.name;
    }
}

TEST(Analysis, RootsReferToGrammar) {
    for (const auto& entry : list_corpus()) {
        Program p = load_program_file(entry.path);
        LivenessGrammar g = analyze_program(p);
        EXPECT_FALSE(g.roots.empty());
        for (const auto& r : g.roots) {
            ASSERT_GE(r.nt, 0) << entry.name;
            ASSERT_LT(r.nt, g.grammar.size()) << entry.name;
        }
        for (int nt = 0; nt < g.grammar.size(); ++nt)
            for (const auto& rhs : g.grammar.rules(nt))
                for (const auto& s : rhs)
                    if (s.nonterminal) EXPECT_LT(s.id, g.grammar.size());
    }
}

TEST(Analysis, EveryStackVariableHasARoot) {
    Program p = corpus_program("motivating");
    LivenessGrammar g = analyze_program(p);
    for (size_t f = 0; f < p.defs.size(); ++f)
        for (const auto& name : p.defs[f].slot_names)
            EXPECT_NE(g.find_root(RootRole::StackVar, static_cast<int>(f), name), nullptr)
                << p.defs[f].name << ":" << name;
}

TEST(Analysis, VariantsAreOptional) {
    Program p = corpus_program("motivating");
    AnalysisOptions o;
    o.variants = false;
    EXPECT_TRUE(analyze_program(p, o).roots_of(RootRole::ClosureVariant).empty());
    EXPECT_FALSE(analyze_program(p).roots_of(RootRole::ClosureVariant).empty());
}

TEST(Analysis, DeadBinderHasEmptyLiveness) {
    // a is never used after the call, so its stack root derives nothing.
    Program p = corpus_program("length");
    LivenessGrammar g = analyze_program(p);
    const Root* a = g.find_root(RootRole::StackVar, p.main_index, "a");
    ASSERT_NE(a, nullptr);
    EXPECT_TRUE(oracle::derivable_paths(g.grammar, a->nt, 6).empty());
}
