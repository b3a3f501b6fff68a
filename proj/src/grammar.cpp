#include <algorithm>
#include <sstream>

#include "lgc/grammar.hpp"

namespace lgc {

const char* terminal_text(Terminal t) {
    switch (t) {
    case Terminal::Zero: return "0";
    case Terminal::One: return "1";
    case Terminal::BarZero: return "~0";
    case Terminal::BarOne: return "~1";
    case Terminal::Two: return "2";
    case Terminal::End: return "$";
    }
    return "?";
}

std::optional<SymString> normalize(const SymString& s) {
    SymString out;
    out.reserve(s.size());
    for (const Symbol& c : s) {
        out.push_back(c);
        while (out.size() >= 2) {
            const Symbol a = out[out.size() - 2];
            const Symbol b = out.back();
            if (a.nonterminal || b.nonterminal) break;
            const Terminal ta = a.terminal();
            const Terminal tb = b.terminal();
            if ((ta == Terminal::BarZero && tb == Terminal::Zero) ||
                (ta == Terminal::BarOne && tb == Terminal::One)) {
                out.resize(out.size() - 2);
            } else if (ta == Terminal::BarZero || ta == Terminal::BarOne) {
                if (tb == Terminal::BarZero || tb == Terminal::BarOne) break;
                return std::nullopt;
            } else if (ta == Terminal::Two && tb == Terminal::End) {
                out.resize(out.size() - 2);
                out.push_back(Symbol::t(Terminal::End));
            } else if (ta == Terminal::Two &&
                       (tb == Terminal::Zero || tb == Terminal::One || tb == Terminal::Two)) {
                out.pop_back();
            } else {
                break;
            }
        }
    }
    return out;
}

StringSet concat(const StringSet& prefixes, const StringSet& suffixes) {
    StringSet out;
    for (const auto& p : prefixes) {
        for (const auto& s : suffixes) {
            SymString w = p;
            w.insert(w.end(), s.begin(), s.end());
            if (auto n = normalize(w)) out.insert(std::move(*n));
        }
    }
    return out;
}

int Grammar::add_nonterminal(const std::string& name) {
    int id = static_cast<int>(names_.size());
    auto [it, fresh] = index_.emplace(name, id);
    if (!fresh) return it->second;
    names_.push_back(name);
    rules_.emplace_back();
    seen_.emplace_back();
    return id;
}

int Grammar::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

int Grammar::intern(const std::string& name) { return add_nonterminal(name); }

void Grammar::add(int lhs, const SymString& rhs) {
    if (seen_.at(lhs).insert(rhs).second) rules_[lhs].push_back(rhs);
}

void Grammar::remove(int lhs, size_t index) {
    auto& r = rules_.at(lhs);
    seen_.at(lhs).erase(r.at(index));
    r.erase(r.begin() + static_cast<std::ptrdiff_t>(index));
}

size_t Grammar::production_count() const {
    size_t n = 0;
    for (const auto& r : rules_) n += r.size();
    return n;
}

std::vector<int> Grammar::reachable(const std::vector<int>& roots) const {
    std::vector<char> seen(names_.size(), 0);
    std::vector<int> order;
    std::vector<int> work(roots.rbegin(), roots.rend());
    while (!work.empty()) {
        int n = work.back();
        work.pop_back();
        if (seen[n]) continue;
        seen[n] = 1;
        order.push_back(n);
        for (const auto& rhs : rules_[n])
            for (const Symbol& s : rhs)
                if (s.nonterminal && !seen[s.id]) work.push_back(s.id);
    }
    return order;
}

std::string Grammar::symbol_text(const Symbol& s) const {
    if (s.nonterminal) return "<" + names_.at(s.id) + ">";
    return terminal_text(s.terminal());
}

std::string Grammar::production_text(int lhs, const SymString& rhs) const {
    std::string out = "<" + names_.at(lhs) + "> ->";
    for (const Symbol& s : rhs) out += " " + symbol_text(s);
    return out;
}

const char* role_name(RootRole r) {
    switch (r) {
    case RootRole::DemandTransformer: return "demand";
    case RootRole::SummaryDemand: return "summary";
    case RootRole::StackVar: return "stack";
    case RootRole::ClosureVar: return "closure";
    case RootRole::ClosureVariant: return "variant";
    case RootRole::GcEntry: return "entry";
    case RootRole::GcAfterIf: return "after-if";
    case RootRole::FrameIf: return "frame-if";
    case RootRole::FrameReturn: return "frame-return";
    case RootRole::RelPoint: return "rel-point";
    case RootRole::RelLetVar: return "rel-let";
    case RootRole::RelRef: return "rel-ref";
    }
    return "?";
}

std::string LivenessGrammar::to_text() const {
    std::ostringstream os;
    for (int n = 0; n < grammar.size(); ++n)
        for (const auto& rhs : grammar.rules(n)) os << grammar.production_text(n, rhs) << '\n';
    os << "# roots\n";
    for (const auto& r : roots) os << "# " << role_name(r.role) << " <" << grammar.name(r.nt) << ">\n";
    return os.str();
}

SymString LivenessGrammar::tail(int fun, int main_index) const {
    if (fun != main_index) return {Symbol::nt(sigma.at(fun))};
    if (main_whnf) return {};
    return {Symbol::nt(s_all)};
}

const Root* LivenessGrammar::find_root(RootRole role, int fun, const std::string& var) const {
    for (const auto& r : roots) {
        if (r.role != role || (fun >= 0 && r.fun != fun)) continue;
        if (var.empty() || r.var == var) return &r;
    }
    return nullptr;
}

std::vector<const Root*> LivenessGrammar::roots_of(RootRole role) const {
    std::vector<const Root*> out;
    for (const auto& r : roots)
        if (r.role == role) out.push_back(&r);
    return out;
}

}  // namespace lgc
