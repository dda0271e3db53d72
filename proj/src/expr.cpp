#include "diffsets/expr.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

namespace diffsets {

namespace {

// Sort factors/terms, merge like terms, drop zeros, trim unused variables.
// Does not relabel variables.
Expression normalize(Expression e) {
    for (auto& t : e.terms) std::sort(t.factors.begin(), t.factors.end());
    std::sort(e.terms.begin(), e.terms.end(),
              [](const Term& a, const Term& b) { return a.factors < b.factors; });
    std::vector<Term> merged;
    for (auto& t : e.terms) {
        if (t.factors.empty()) { e.constant += t.coeff; continue; }
        if (!merged.empty() && merged.back().factors == t.factors)
            merged.back().coeff += t.coeff;
        else
            merged.push_back(std::move(t));
    }
    std::erase_if(merged, [](const Term& t) { return t.coeff == 0; });
    e.terms = std::move(merged);

    // drop variables that occur nowhere
    int nv = static_cast<int>(e.linear.size());
    std::vector<bool> used(nv, false);
    for (const auto& t : e.terms)
        for (const auto& a : t.factors) used[a.var] = true;
    for (int v = 0; v < nv; ++v)
        if (e.linear[v].lambda != 0 || e.linear[v].mu != 0) used[v] = true;
    std::vector<int> remap(nv, -1);
    int next = 0;
    for (int v = 0; v < nv; ++v)
        if (used[v]) remap[v] = next++;
    if (next != nv) {
        std::vector<LinEntry> lin(next);
        for (int v = 0; v < nv; ++v)
            if (remap[v] >= 0) lin[remap[v]] = e.linear[v];
        for (auto& t : e.terms)
            for (auto& a : t.factors) a.var = remap[a.var];
        e.linear = std::move(lin);
        for (auto& t : e.terms) std::sort(t.factors.begin(), t.factors.end());
        std::sort(e.terms.begin(), e.terms.end(),
                  [](const Term& a, const Term& b) { return a.factors < b.factors; });
    }
    return e;
}

Expression apply_perm(const Expression& e, const std::vector<int>& perm) {
    Expression out = e;
    for (auto& t : out.terms)
        for (auto& a : t.factors) a.var = perm[a.var];
    for (int v = 0; v < e.num_vars(); ++v) out.linear[perm[v]] = e.linear[v];
    return out;
}

void check_invariants(const Expression& e) {
    for (const auto& t : e.terms) {
        if (t.factors.empty()) throw precondition_error("term without factors");
        if (t.factors.size() > 2) {
            for (const auto& a : t.factors)
                if (a.var != t.factors.front().var)
                    throw precondition_error(
                        "terms of degree > 2 must involve a single variable");
        }
    }
    if (e.has_quadratic()) {
        std::vector<bool> quad(e.num_vars(), false);
        for (const auto& t : e.terms)
            for (const auto& a : t.factors) quad[a.var] = true;
        for (int v = 0; v < e.num_vars(); ++v)
            if (!quad[v] && (e.linear[v].lambda != 0 || e.linear[v].mu != 0))
                throw precondition_error(
                    "variable occurs only linearly; apply its affine cancellation first");
    }
}

}  // namespace

i64 Expression::max_coefficient_magnitude() const {
    i64 m = std::abs(constant);
    for (const auto& t : terms) {
        m = std::max(m, std::abs(t.coeff));
        for (const auto& a : t.factors) m = std::max({m, std::abs(a.scale), std::abs(a.shift)});
    }
    for (const auto& le : linear) m = std::max({m, std::abs(le.lambda), std::abs(le.mu)});
    return m;
}

Expression canonicalize(const Expression& e) {
    Expression base = normalize(e);
    check_invariants(base);
    int nv = base.num_vars();
    if (nv > 8) throw precondition_error("too many variables to canonicalize");
    if (nv <= 1) return base;
    std::vector<int> perm(nv);
    std::iota(perm.begin(), perm.end(), 0);
    Expression best = base;
    do {
        Expression cand = normalize(apply_perm(base, perm));
        if (cand < best) best = cand;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

std::vector<Expression> enumerate_expressions(int l, int k) {
    if (l < 0 || k < 0 || l + k < 1) throw precondition_error("need l >= 0, k >= 0, l+k >= 1");
    int slots = 2 * l + k;
    // restricted growth strings = set partitions of the slots into variables
    std::vector<int> rgs(slots, 0);
    std::set<Expression> seen;

    auto emit = [&](const std::vector<int>& assign) {
        int nv = *std::max_element(assign.begin(), assign.end()) + 1;
        for (unsigned mask = 0; mask < (1u << slots); ++mask) {
            Expression e;
            e.linear.resize(nv);
            for (int i = 0; i < l; ++i) {
                Atom a{assign[2 * i], 1, (mask >> (2 * i)) & 1 ? 1 : 0};
                Atom b{assign[2 * i + 1], 1, (mask >> (2 * i + 1)) & 1 ? 1 : 0};
                e.terms.push_back(Term{1, {a, b}});
            }
            for (int j = 0; j < k; ++j) {
                int v = assign[2 * l + j];
                e.linear[v].lambda += 1;
                e.linear[v].mu += (mask >> (2 * l + j)) & 1;
            }
            e = normalize(std::move(e));
            if (e.has_quadratic()) {
                // affine cancellation: drop variables that appear only linearly
                std::vector<bool> quad(e.num_vars(), false);
                for (const auto& t : e.terms)
                    for (const auto& a : t.factors) quad[a.var] = true;
                bool changed = false;
                for (int v = 0; v < e.num_vars(); ++v)
                    if (!quad[v]) { e.linear[v] = {0, 0}; changed = true; }
                if (changed) e = normalize(std::move(e));
            }
            seen.insert(std::move(e));
        }
    };

    // iterate restricted growth strings
    while (true) {
        emit(rgs);
        int i = slots - 1;
        for (; i > 0; --i) {
            int maxprev = *std::max_element(rgs.begin(), rgs.begin() + i);
            if (rgs[i] <= maxprev) { ++rgs[i]; break; }
            rgs[i] = 0;
        }
        if (i == 0) break;
    }

    std::set<Expression> canon;
    for (const auto& e : seen) canon.insert(canonicalize(e));
    std::vector<Expression> out(canon.begin(), canon.end());
    std::stable_sort(out.begin(), out.end(), [](const Expression& a, const Expression& b) {
        return a.num_vars() < b.num_vars();
    });
    return out;
}

int QuadGraph::isolated_vertices() const {
    std::vector<bool> touched(num_vars, false);
    for (auto [a, b] : edges) touched[a] = touched[b] = true;
    int count = 0;
    for (int v = 0; v < num_vars; ++v)
        if (!touched[v]) ++count;
    return count;
}

bool QuadGraph::has_cycle_or_multiedge() const {
    std::set<std::pair<int, int>> simple;
    for (auto e : edges)
        if (!simple.insert(e).second) return true;
    // union-find cycle check on the simple edges
    std::vector<int> parent(num_vars);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (auto [a, b] : simple) {
        int ra = find(a), rb = find(b);
        if (ra == rb) return true;
        parent[ra] = rb;
    }
    return false;
}

QuadGraph build_graph(const Expression& e) {
    QuadGraph g;
    g.num_vars = e.num_vars();
    g.samevar_quad.assign(e.num_vars(), 0);
    for (const auto& t : e.terms) {
        if (t.factors.size() != 2) continue;
        if (t.coeff < 0) throw precondition_error("graph needs positive term multiplicities");
        int a = t.factors[0].var, b = t.factors[1].var;
        if (a == b) {
            g.samevar_quad[a] += static_cast<int>(t.coeff);
        } else {
            for (i64 m = 0; m < t.coeff; ++m) g.edges.emplace_back(std::min(a, b), std::max(a, b));
        }
    }
    std::sort(g.edges.begin(), g.edges.end());
    return g;
}

// --- parser ----------------------------------------------------------------

namespace {

struct Token {
    enum Kind { Name, Int, Plus, Minus, Star, Caret, LParen, RParen, End } kind;
    std::string text;
    i64 value = 0;
    std::size_t pos = 0;
};

std::vector<Token> tokenize(const std::string& s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            out.push_back({Token::Int, s.substr(i, j - i), std::stoll(s.substr(i, j - i)), i});
            i = j;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
                ++j;
            out.push_back({Token::Name, s.substr(i, j - i), 0, i});
            i = j;
            continue;
        }
        Token::Kind k;
        switch (c) {
            case '+': k = Token::Plus; break;
            case '-': k = Token::Minus; break;
            case '*': k = Token::Star; break;
            case '^': k = Token::Caret; break;
            case '(': k = Token::LParen; break;
            case ')': k = Token::RParen; break;
            default: throw ParseError(std::string("unexpected character '") + c + "'", i);
        }
        out.push_back({k, std::string(1, c), 0, i});
        ++i;
    }
    out.push_back({Token::End, "", 0, s.size()});
    return out;
}

// A parsed multiplicand: either a pure constant or u*map(var) + s*var.
struct LinForm {
    bool is_const = true;
    i64 c = 0;  // constant (only when is_const)
    int var = -1;
    i64 u = 0, s = 0;
};

class Parser {
public:
    explicit Parser(const std::string& text) : toks_(tokenize(text)) {}

    Expression run() {
        Expression e = parse_sum();
        expect(Token::End, "trailing input");
        e.linear.resize(var_names_.size());
        for (auto& [v, le] : linear_acc_) e.linear[v] = le;
        return canonicalize(e);
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    void advance() { ++pos_; }
    bool accept(Token::Kind k) {
        if (cur().kind == k) { advance(); return true; }
        return false;
    }
    void expect(Token::Kind k, const char* what) {
        if (!accept(k)) throw ParseError(std::string("expected ") + what, cur().pos);
    }

    int var_id(const std::string& name, std::size_t at) {
        for (std::size_t i = 0; i < var_names_.size(); ++i)
            if (var_names_[i] == name) return static_cast<int>(i);
        if (map_names_.count(name))
            throw ParseError("'" + name + "' already used as a map name", at);
        var_names_.push_back(name);
        return static_cast<int>(var_names_.size()) - 1;
    }

    Expression parse_sum() {
        Expression e;
        bool neg = accept(Token::Minus);
        parse_summand(e, neg ? -1 : 1);
        while (cur().kind == Token::Plus || cur().kind == Token::Minus) {
            bool minus = cur().kind == Token::Minus;
            advance();
            parse_summand(e, minus ? -1 : 1);
        }
        return e;
    }

    void parse_summand(Expression& e, i64 sign) {
        i64 coeff = sign;
        std::vector<LinForm> factors;
        while (true) {
            LinForm f = parse_factor();
            int reps = 1;
            if (accept(Token::Caret)) {
                if (cur().kind != Token::Int || cur().value < 1 || cur().value > 8)
                    throw ParseError("exponent must be an integer in [1,8]", cur().pos);
                reps = static_cast<int>(cur().value);
                advance();
            }
            for (int r = 0; r < reps; ++r) {
                if (f.is_const) { coeff *= f.c; }
                else factors.push_back(f);
            }
            if (!accept(Token::Star)) break;
        }
        if (coeff == 0) return;
        if (factors.empty()) {
            e.constant += coeff;
        } else if (factors.size() == 1) {
            const auto& f = factors[0];
            linear_acc_[f.var].lambda += coeff * f.u;
            linear_acc_[f.var].mu += coeff * f.s;
        } else {
            Term t;
            t.coeff = coeff;
            for (const auto& f : factors) t.factors.push_back(Atom{f.var, f.u, f.s});
            e.terms.push_back(std::move(t));
        }
    }

    // factor := INT | atomish | '(' lin-combination ')'
    LinForm parse_factor() {
        if (cur().kind == Token::Int) {
            LinForm f;
            f.c = cur().value;
            advance();
            return f;
        }
        if (cur().kind == Token::Name) return parse_atomish(1);
        if (accept(Token::LParen)) {
            LinForm acc = parse_linsum();
            expect(Token::RParen, "')'");
            return acc;
        }
        throw ParseError("expected a factor", cur().pos);
    }

    LinForm parse_linsum() {
        i64 sign = accept(Token::Minus) ? -1 : 1;
        LinForm acc = parse_linterm(sign);
        while (cur().kind == Token::Plus || cur().kind == Token::Minus) {
            i64 s2 = cur().kind == Token::Minus ? -1 : 1;
            advance();
            LinForm t = parse_linterm(s2);
            acc = add_linforms(acc, t, cur().pos);
        }
        return acc;
    }

    LinForm parse_linterm(i64 sign) {
        i64 coeff = sign;
        if (cur().kind == Token::Int) {
            coeff *= cur().value;
            advance();
            if (!accept(Token::Star)) {
                LinForm f;
                f.c = coeff;
                return f;
            }
        }
        if (cur().kind != Token::Name)
            throw ParseError("expected map(var) or var", cur().pos);
        return parse_atomish(coeff);
    }

    LinForm parse_atomish(i64 coeff) {
        std::string name = cur().text;
        std::size_t at = cur().pos;
        advance();
        LinForm f;
        f.is_const = false;
        if (accept(Token::LParen)) {
            if (cur().kind != Token::Name) throw ParseError("expected variable name", cur().pos);
            std::string vname = cur().text;
            std::size_t vat = cur().pos;
            advance();
            expect(Token::RParen, "')'");
            int v = var_id(vname, vat);
            auto [it, inserted] = map_names_.try_emplace(name, v);
            if (!inserted && it->second != v)
                throw ParseError("map '" + name + "' applied to two different variables", at);
            for (const auto& vn : var_names_)
                if (vn == name) throw ParseError("'" + name + "' already used as a variable", at);
            f.var = v;
            f.u = coeff;
        } else {
            int v = var_id(name, at);
            f.var = v;
            f.s = coeff;
        }
        return f;
    }

    static LinForm add_linforms(const LinForm& a, const LinForm& b, std::size_t at) {
        if (a.is_const || b.is_const)
            throw ParseError("constants are not allowed inside product factors", at);
        if (a.var != b.var)
            throw ParseError("a product factor must involve a single variable", at);
        LinForm f = a;
        f.u += b.u;
        f.s += b.s;
        return f;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::vector<std::string> var_names_;
    std::map<std::string, int> map_names_;  // map name -> var id
    std::map<int, LinEntry> linear_acc_;
};

const char* kVarNames[8] = {"x", "y", "z", "w", "v", "u", "s", "t"};
const char* kMapNames[8] = {"a", "b", "c", "d", "e", "f", "g", "h"};

std::string print_atom(const Atom& a) {
    std::string m = std::string(kMapNames[a.var]) + "(" + kVarNames[a.var] + ")";
    if (a.scale == 1 && a.shift == 0) return m;
    std::string out = "(";
    if (a.scale == 1) out += m;
    else if (a.scale == -1) out += "-" + m;
    else out += std::to_string(a.scale) + "*" + m;
    if (a.shift != 0) {
        if (a.shift > 0) out += "+";
        if (a.shift == 1) out += std::string(kVarNames[a.var]);
        else if (a.shift == -1) out += "-" + std::string(kVarNames[a.var]);
        else out += std::to_string(a.shift) + "*" + kVarNames[a.var];
    }
    out += ")";
    return out;
}

void append_signed(std::string& out, i64 coeff, const std::string& body) {
    if (out.empty()) {
        if (coeff == -1) out += "-";
        else if (coeff != 1) out += std::to_string(coeff) + "*";
    } else {
        out += coeff < 0 ? " - " : " + ";
        i64 m = std::abs(coeff);
        if (m != 1) out += std::to_string(m) + "*";
    }
    out += body;
}

}  // namespace

Expression parse_expression(const std::string& text) { return Parser(text).run(); }

std::string print_expression(const Expression& e) {
    if (e.num_vars() > 8) throw precondition_error("too many variables to print");
    std::string out;
    for (const auto& t : e.terms) {
        std::string body;
        std::size_t i = 0;
        while (i < t.factors.size()) {
            std::size_t j = i;
            while (j < t.factors.size() && t.factors[j] == t.factors[i]) ++j;
            if (!body.empty()) body += "*";
            body += print_atom(t.factors[i]);
            if (j - i > 1) body += "^" + std::to_string(j - i);
            i = j;
        }
        append_signed(out, t.coeff, body);
    }
    for (int v = 0; v < e.num_vars(); ++v) {
        const auto& le = e.linear[v];
        if (le.lambda != 0)
            append_signed(out, le.lambda, std::string(kMapNames[v]) + "(" + kVarNames[v] + ")");
        if (le.mu != 0) append_signed(out, le.mu, kVarNames[v]);
    }
    if (e.constant != 0) {
        if (out.empty()) out = std::to_string(e.constant);
        else out += (e.constant < 0 ? " - " : " + ") + std::to_string(std::abs(e.constant));
    }
    if (out.empty()) out = "0";
    return out;
}

}  // namespace diffsets
