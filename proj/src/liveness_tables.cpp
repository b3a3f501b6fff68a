#include "lgc/liveness_tables.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <omp.h>

namespace lgc {

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<LivenessDfa> build_root_dfas(const NfaBuilder& builder, const std::vector<int>& roots,
                                         const DfaEmbedding& embed, Parallelism par, int workers) {
    std::vector<LivenessDfa> out(roots.size());
    const long n = static_cast<long>(roots.size());
    if (par == Parallelism::Serial) {
        for (long i = 0; i < n; ++i) out[i] = finalize(builder.build(roots[i], embed));
        return out;
    }
    const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
    for (long i = 0; i < n; ++i) out[i] = finalize(builder.build(roots[i], embed));
    return out;
}

DfaId LivenessTables::intern(const LivenessDfa& d) {
    if (dfas.empty()) {
        dfas.push_back(LivenessDfa::all());
        dfas.push_back(LivenessDfa::none());
        by_bytes_[dfas[0].serialize()] = kDfaAll;
        by_bytes_[dfas[1].serialize()] = kDfaNone;
    }
    // Every empty language maps to the canonical one.
    if (d.empty()) return kDfaNone;
    auto [it, fresh] = by_bytes_.emplace(d.serialize(), static_cast<DfaId>(dfas.size()));
    if (fresh) dfas.push_back(d);
    return it->second;
}

DfaId LivenessTables::dfa_of_root(int nt) const {
    auto it = root_dfa.find(nt);
    if (it == root_dfa.end())
        throw InternalError("no automaton for <" + grammar.grammar.name(nt) + ">");
    return it->second;
}

namespace {

std::vector<int> roots_to_build(const LivenessGrammar& lg, bool relative) {
    std::vector<int> out;
    for (const auto& r : lg.roots) {
        if (r.role == RootRole::SummaryDemand) continue;
        if (r.relative() && !relative) continue;
        out.push_back(r.nt);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void apply_mutation(LivenessGrammar& lg, const GrammarMutation& m) {
    const int nt = lg.grammar.find(m.nonterminal);
    if (nt < 0) throw Error("mutation: no nonterminal <" + m.nonterminal + ">");
    if (m.production >= lg.grammar.rules(nt).size())
        throw Error("mutation: <" + m.nonterminal + "> has " +
                    std::to_string(lg.grammar.rules(nt).size()) + " productions");
    lg.grammar.remove(nt, m.production);
}

void build_tails(LivenessTables& t, const NfaBuilder& builder, const SccInfo& scc) {
    const LivenessGrammar& lg = t.grammar;
    t.tail_dfa[lg.s_all] = t.intern(LivenessDfa::all());
    std::vector<int> sigmas = lg.sigma;
    // Tarjan numbers components callee-first, so callers' summaries finish earlier.
    std::sort(sigmas.begin(), sigmas.end(),
              [&](int a, int b) { return scc.component[a] < scc.component[b]; });
    for (int nt : sigmas) {
        DfaEmbedding embed;
        for (const auto& [k, id] : t.tail_dfa)
            if (scc.component[k] != scc.component[nt]) embed[k] = &t.dfas[id];
        // Pointers into t.dfas stay valid only until the next intern; copy first.
        LivenessDfa d = finalize(builder.build(nt, embed));
        t.tail_dfa[nt] = t.intern(d);
    }
}

}  // namespace

void LivenessTables::index_roots(const Program& p) {
    ProgramIndex index(p);
    entry.assign(p.defs.size(), {});
    after_if.assign(p.psi_count + 1, {});
    frame_if.assign(p.psi_count + 1, {});
    frame_return.assign(p.psi_count + 1, {});
    closure.assign(p.pi_count + 1, {});
    refinements.assign(p.psi_count + 1, {});
    for (int pi = 1; pi <= p.pi_count; ++pi) {
        const Expr* e = index.by_pi[pi];
        if (e->kind == ExprKind::Let) closure[pi].assign(e->rhs.args.size(), kDfaAll);
    }
    for (const auto& r : grammar.roots) {
        auto id = [&]() { return dfa_of_root(r.nt); };
        switch (r.role) {
        case RootRole::GcEntry: entry.at(r.fun).push_back({r.slot, id()}); break;
        case RootRole::GcAfterIf: after_if.at(r.psi)[r.branch].push_back({r.slot, id()}); break;
        case RootRole::FrameIf: frame_if.at(r.psi).push_back({r.slot, id()}); break;
        case RootRole::FrameReturn: frame_return.at(r.psi).push_back({r.slot, id()}); break;
        case RootRole::ClosureVar: closure.at(r.pi).at(r.arg) = id(); break;
        case RootRole::ClosureVariant: {
            auto& list = refinements.at(r.psi)[r.branch];
            auto it = std::find_if(list.begin(), list.end(),
                                   [&](const Refinement& x) { return x.pi == r.pi; });
            if (it == list.end()) {
                const Expr* let = index.by_pi.at(r.pi);
                list.push_back({r.pi, let->var.slot, std::vector<DfaId>(let->rhs.args.size(), kDfaAll)});
                it = list.end() - 1;
            }
            it->dfas.at(r.arg) = id();
            break;
        }
        case RootRole::RelPoint: rel_point[{r.pi, r.var}] = r.nt; break;
        case RootRole::RelLetVar: rel_let[r.pi] = r.nt; break;
        case RootRole::RelRef: rel_ref[{r.pi, r.arg}] = r.nt; break;
        default: break;
        }
    }
}

namespace {

void fill_stats(LivenessTables& t, double seconds) {
    t.stats.nonterminals = static_cast<size_t>(t.grammar.grammar.size());
    t.stats.productions = t.grammar.grammar.production_count();
    t.stats.roots = t.grammar.roots.size();
    t.stats.distinct_dfas = t.dfas.size();
    t.stats.dfa_states = 0;
    t.stats.dfa_transitions = 0;
    for (const auto& d : t.dfas) {
        for (int s = 0; s < d.size(); ++s) {
            if (!d.live[s]) continue;
            ++t.stats.dfa_states;
            for (int b = 0; b < 2; ++b) t.stats.dfa_transitions += d.live[d.next[s][b]] ? 1 : 0;
        }
    }
    t.stats.build_seconds = seconds;
}

LivenessTables prepare(const Program& p, const TableOptions& opts) {
    LivenessTables t;
    t.grammar = analyze_program(p, opts.analysis);
    if (opts.mutation) apply_mutation(t.grammar, *opts.mutation);
    t.strongly_regular = mohri_nederhof(t.grammar.grammar);
    t.intern(LivenessDfa::all());
    return t;
}

}  // namespace

LivenessTables LivenessTables::build(const Program& p, const TableOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    LivenessTables t = prepare(p, opts);
    NfaBuilder builder(t.strongly_regular);
    SccInfo scc(t.strongly_regular);
    build_tails(t, builder, scc);

    DfaEmbedding embed;
    for (const auto& [nt, id] : t.tail_dfa) embed[nt] = &t.dfas[id];
    const std::vector<int> roots = roots_to_build(t.grammar, opts.relative_dfas);
    auto built = build_root_dfas(builder, roots, embed, opts.parallelism, opts.workers);
    for (size_t i = 0; i < roots.size(); ++i) t.root_dfa[roots[i]] = t.intern(built[i]);
    for (int f = 0; f < static_cast<int>(p.defs.size()); ++f)
        t.root_dfa[t.grammar.sigma[f]] = t.tail_dfa.at(t.grammar.sigma[f]);

    t.index_roots(p);
    fill_stats(t, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return t;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

bool get_u32(const std::string& in, size_t& pos, std::uint32_t& v) {
    if (pos + 4 > in.size()) return false;
    v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += 4;
    return true;
}

}  // namespace

std::string LivenessTables::serialize_automata() const {
    std::string out = "LGCT";
    put_u32(out, kCacheFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(root_dfa.size()));
    for (const auto& [nt, id] : root_dfa) {
        put_u32(out, static_cast<std::uint32_t>(nt));
        put_u32(out, id);
    }
    put_u32(out, static_cast<std::uint32_t>(tail_dfa.size()));
    for (const auto& [nt, id] : tail_dfa) {
        put_u32(out, static_cast<std::uint32_t>(nt));
        put_u32(out, id);
    }
    put_u32(out, static_cast<std::uint32_t>(dfas.size()));
    for (const auto& d : dfas) {
        std::string bytes = d.serialize();
        put_u32(out, static_cast<std::uint32_t>(bytes.size()));
        out += bytes;
    }
    return out;
}

bool LivenessTables::load_automata(const std::string& bytes) {
    if (bytes.compare(0, 4, "LGCT") != 0) return false;
    size_t pos = 4;
    std::uint32_t version, n;
    if (!get_u32(bytes, pos, version) || version != kCacheFormatVersion) return false;
    std::map<int, DfaId> roots, tails;
    for (auto* m : {&roots, &tails}) {
        if (!get_u32(bytes, pos, n)) return false;
        for (std::uint32_t i = 0; i < n; ++i) {
            std::uint32_t nt, id;
            if (!get_u32(bytes, pos, nt) || !get_u32(bytes, pos, id)) return false;
            if (static_cast<int>(nt) >= grammar.grammar.size()) return false;
            (*m)[static_cast<int>(nt)] = id;
        }
    }
    if (!get_u32(bytes, pos, n)) return false;
    std::vector<LivenessDfa> loaded;
    for (std::uint32_t i = 0; i < n; ++i) {
        std::uint32_t len;
        if (!get_u32(bytes, pos, len) || pos + len > bytes.size()) return false;
        try {
            loaded.push_back(LivenessDfa::deserialize(bytes.substr(pos, len)));
        } catch (const Error&) {
            return false;
        }
        pos += len;
    }
    for (const auto* m : {&roots, &tails})
        for (const auto& [nt, id] : *m)
            if (id >= loaded.size()) return false;
    dfas = std::move(loaded);
    by_bytes_.clear();
    for (size_t i = 0; i < dfas.size(); ++i) by_bytes_.emplace(dfas[i].serialize(), static_cast<DfaId>(i));
    root_dfa = std::move(roots);
    tail_dfa = std::move(tails);
    return true;
}

LivenessTables LivenessTables::build_cached(const Program& p, const std::string& program_text,
                                            const TableOptions& opts, const std::string& cache_dir) {
    std::ostringstream key;
    key << program_text << "\n#v" << kCacheFormatVersion << " main="
        << (opts.analysis.main_demand == MainDemand::All ? "all" : "whnf")
        << " variants=" << opts.analysis.variants << " relative=" << opts.relative_dfas;
    if (opts.mutation) key << " mutate=" << opts.mutation->nonterminal << "#" << opts.mutation->production;
    char name[32];
    std::snprintf(name, sizeof name, "%016llx.lgct", static_cast<unsigned long long>(fnv1a(key.str())));
    const std::filesystem::path path = std::filesystem::path(cache_dir) / name;

    const auto t0 = std::chrono::steady_clock::now();
    if (std::filesystem::exists(path)) {
        std::ifstream in(path, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        LivenessTables t = prepare(p, opts);
        if (t.load_automata(ss.str()) && t.root_dfa.size() == roots_to_build(t.grammar, opts.relative_dfas).size() + p.defs.size()) {
            t.index_roots(p);
            fill_stats(t, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            t.stats.from_cache = true;
            return t;
        }
    }
    LivenessTables t = build(p, opts);
    std::error_code ec;
    std::filesystem::create_directories(cache_dir, ec);
    std::ofstream out(path, std::ios::binary);
    if (out) out << t.serialize_automata();
    return t;
}

}  // namespace lgc
