#include "diffsets/classify.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace diffsets {

const char* to_string(CaseTag tag) {
    switch (tag) {
        case CaseTag::SINGLE_VAR: return "SINGLE_VAR";
        case CaseTag::AFFINE: return "AFFINE";
        case CaseTag::BASIC_IDENT: return "BASIC_IDENT";
        case CaseTag::ACYCLIC_IDENT: return "ACYCLIC_IDENT";
        case CaseTag::SPLIT_SINGLE_VARS: return "SPLIT_SINGLE_VARS";
        case CaseTag::THREE_CYCLE_CLOSED: return "THREE_CYCLE_CLOSED";
        case CaseTag::THREE_CYCLE_DEGENERATE: return "THREE_CYCLE_DEGENERATE";
        case CaseTag::THREE_CYCLE_FIVE_PRIME: return "THREE_CYCLE_FIVE_PRIME";
        case CaseTag::REPEATED_EDGE_PLUS_POLY: return "REPEATED_EDGE_PLUS_POLY";
        case CaseTag::PROB_TWO_VAR: return "PROB_TWO_VAR";
        case CaseTag::FINAL_PQ_SIMPLE: return "FINAL_PQ_SIMPLE";
        case CaseTag::FINAL_PQ_PROB: return "FINAL_PQ_PROB";
        case CaseTag::UNSUPPORTED: return "UNSUPPORTED";
    }
    return "?";
}

namespace {

i64 gcd_i64(i64 a, i64 b) { return std::gcd(std::abs(a), std::abs(b)); }

// primitive direction of (u, s) with positive leading entry; d * prim == (u, s)
std::pair<std::pair<i64, i64>, i64> primitive(i64 u, i64 s) {
    i64 g = gcd_i64(u, s);
    if (g == 0) return {{0, 0}, 0};
    i64 pu = u / g, ps = s / g;
    i64 sign = (pu != 0 ? pu : ps) < 0 ? -1 : 1;
    return {{pu * sign, ps * sign}, g * sign};
}

bool parallel(const Atom& a, const Atom& b) { return a.scale * b.shift == b.scale * a.shift; }

// Combine parallel factors of products on the same variable pair until no
// pair of products shares a parallel side.
std::vector<QuadProduct> factor_products(std::vector<QuadProduct> products) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < products.size() && !changed; ++i) {
            for (std::size_t j = i + 1; j < products.size() && !changed; ++j) {
                auto& pi = products[i];
                auto& pj = products[j];
                if (pi.a.var != pj.a.var || pi.b.var != pj.b.var) continue;
                for (int side = 0; side < 2 && !changed; ++side) {
                    Atom& ai = side ? pi.b : pi.a;
                    Atom& aj = side ? pj.b : pj.a;
                    Atom& bi = side ? pi.a : pi.b;
                    Atom& bj = side ? pj.a : pj.b;
                    if (!parallel(ai, aj)) continue;
                    auto [prim, di] = primitive(ai.scale, ai.shift);
                    auto [prim_j, dj] = primitive(aj.scale, aj.shift);
                    (void)prim_j;
                    Atom merged{bi.var, pi.coeff * di * bi.scale + pj.coeff * dj * bj.scale,
                                pi.coeff * di * bi.shift + pj.coeff * dj * bj.shift};
                    Atom base{ai.var, prim.first, prim.second};
                    QuadProduct combined{1, base, merged};
                    if (combined.a.var > combined.b.var) std::swap(combined.a, combined.b);
                    std::vector<QuadProduct> next;
                    for (std::size_t t = 0; t < products.size(); ++t)
                        if (t != i && t != j) next.push_back(products[t]);
                    if (!(merged.scale == 0 && merged.shift == 0)) next.push_back(combined);
                    products = std::move(next);
                    changed = true;
                }
            }
        }
    }
    return products;
}

ClassifyResult unsupported(std::string why) {
    ClassifyResult r;
    r.tag = CaseTag::UNSUPPORTED;
    r.detail = std::move(why);
    return r;
}

bool acyclic_simple(int nv, const std::vector<std::pair<int, int>>& pairs) {
    std::vector<int> parent(static_cast<std::size_t>(nv));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x)
            x = parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        return x;
    };
    for (auto [a, b] : pairs) {
        int ra = find(a), rb = find(b);
        if (ra == rb) return false;
        parent[static_cast<std::size_t>(ra)] = rb;
    }
    return true;
}

}  // namespace

ClassifyResult classify(const Expression& e) {
    const int nv = e.num_vars();
    ClassifyResult r;

    if (nv == 0) {
        r.tag = CaseTag::SPLIT_SINGLE_VARS;
        r.detail = "constant expression";
        return r;
    }

    if (nv == 1) {
        bool has_map = e.linear[0].lambda != 0;
        for (const auto& t : e.terms)
            for (const auto& a : t.factors) has_map |= a.scale != 0;
        if (!has_map) return unsupported("single variable with no map freedom");
        r.tag = CaseTag::SINGLE_VAR;
        r.roles = {0};
        r.detail = "single-variable polynomial avoidance";
        return r;
    }

    for (const auto& t : e.terms) {
        if (t.degree() > 2)
            return unsupported("multi-variable expressions are limited to degree 2");
        if (t.degree() == 2 && t.factors[0].var != t.factors[1].var)
            for (const auto& a : t.factors)
                if (a.scale == 0) return unsupported("mixed product with a map-free factor");
    }

    std::vector<QuadProduct> raw;
    for (const auto& t : e.terms) {
        if (t.degree() != 2) continue;
        if (t.factors[0].var == t.factors[1].var) {
            r.samevar.push_back(t);
        } else {
            QuadProduct p{t.coeff, t.factors[0], t.factors[1]};
            if (p.a.var > p.b.var) std::swap(p.a, p.b);
            raw.push_back(p);
        }
    }
    r.products = factor_products(std::move(raw));
    for (const auto& p : r.products)
        if (p.a.scale == 0 || p.b.scale == 0)
            return unsupported("factored product lost its map on one side");

    std::set<int> samevar_vars;
    for (const auto& t : r.samevar) samevar_vars.insert(t.factors[0].var);

    if (r.products.empty()) {
        r.tag = CaseTag::SPLIT_SINGLE_VARS;
        r.roles.resize(static_cast<std::size_t>(nv));
        std::iota(r.roles.begin(), r.roles.end(), 0);
        r.detail = "separable sum of single-variable blocks";
        return r;
    }

    std::map<std::pair<int, int>, std::vector<std::size_t>> by_pair;
    for (std::size_t i = 0; i < r.products.size(); ++i)
        by_pair[{r.products[i].a.var, r.products[i].b.var}].push_back(i);
    std::vector<std::pair<int, int>> pairs;
    bool multi = false;
    for (auto& [pr, idx] : by_pair) {
        pairs.push_back(pr);
        multi |= idx.size() > 1;
    }

    if (!multi && acyclic_simple(nv, pairs)) {
        if (r.products.size() == 1 && nv == 2 && r.samevar.empty()) {
            r.tag = CaseTag::BASIC_IDENT;
            r.roles = {r.products[0].a.var, r.products[0].b.var};
            r.detail = "single mixed product: identification across two primes";
            return r;
        }
        r.tag = CaseTag::ACYCLIC_IDENT;
        r.roles.resize(static_cast<std::size_t>(nv));
        std::iota(r.roles.begin(), r.roles.end(), 0);
        r.detail = "acyclic quadratic graph: traversal cancellation + identification";
        return r;
    }

    if (nv == 2) {
        if (r.samevar.empty()) {
            r.tag = CaseTag::AFFINE;
            r.roles = {r.products[0].a.var, r.products[0].b.var};
            r.detail = "repeated edge on two variables: affine maps solution";
            return r;
        }
        if (samevar_vars.size() != 1)
            return unsupported("two-variable case with squares on both variables");
        int x = *samevar_vars.begin();
        int y = 1 - x;
        for (const auto& p : r.products)
            if (p.a.scale == 0 || p.b.scale == 0)
                return unsupported("probabilistic case needs maps on both sides");
        r.tag = CaseTag::PROB_TWO_VAR;
        r.roles = {x, y};
        r.detail = "repeated edge plus same-variable square: probabilistic evasion";
        return r;
    }

    if (nv == 3) {
        std::vector<std::pair<std::pair<int, int>, std::size_t>> counts;
        for (auto& [pr, idx] : by_pair) counts.emplace_back(pr, idx.size());

        if (by_pair.size() == 1) {
            auto pr = counts[0].first;
            if (counts[0].second != 2)
                return unsupported("unexpected multiplicity on the repeated edge");
            int z = 3 - pr.first - pr.second;
            if (!samevar_vars.count(z))
                return unsupported("isolated variable without a quadratic term");
            r.tag = CaseTag::REPEATED_EDGE_PLUS_POLY;
            r.roles = {pr.first, pr.second, z};
            r.detail = "repeated edge plus isolated square: affine block + small values";
            return r;
        }

        if (by_pair.size() == 2) {
            std::pair<int, int> dbl{-1, -1}, sgl{-1, -1};
            for (auto& [pr, cnt] : counts)
                (cnt == 2 ? dbl : sgl) = pr;
            if (dbl.first < 0 || sgl.first < 0)
                return unsupported("unexpected two-pair multiplicities");
            int shared =
                (sgl.first == dbl.first || sgl.second == dbl.first) ? dbl.first : dbl.second;
            if (sgl.first != shared && sgl.second != shared)
                return unsupported("double and single edges do not share a variable");
            if (!r.samevar.empty())
                return unsupported("repeated edge plus edge plus square exceeds the budget");
            int x = shared;
            int y = dbl.first == x ? dbl.second : dbl.first;
            int z = sgl.first == x ? sgl.second : sgl.first;
            auto at = [&](const QuadProduct& p, int v) { return p.a.var == v ? p.a : p.b; };
            QuadProduct p1 = r.products[by_pair[dbl][0]];
            QuadProduct p2 = r.products[by_pair[dbl][1]];
            QuadProduct p3 = r.products[by_pair[sgl][0]];
            for (const QuadProduct* p : {&p1, &p2, &p3}) {
                int other = p == &p3 ? z : y;
                if (at(*p, x).scale != 1 || at(*p, other).scale != 1 || p->coeff != 1)
                    return unsupported("scaled atoms outside the standard three-variable form");
            }
            i64 c1 = at(p1, x).shift, c2 = at(p1, y).shift;
            i64 c3 = at(p2, x).shift, c4 = at(p2, y).shift;
            i64 c5 = at(p3, x).shift, c6 = at(p3, z).shift;
            if (c5 == c3) {
                std::swap(c1, c3);
                std::swap(c2, c4);
            }
            if (c5 != c1)
                return unsupported("edge shift matches neither repeated-edge shift");
            ClassifyResult::FinalForm ff;
            ff.c1 = c3 - c1;
            ff.c2 = c4 - c2;
            if ((ff.c1 != 1 && ff.c1 != -1) || (ff.c2 != 1 && ff.c2 != -1))
                return unsupported("repeated edge is factorizable after all");
            ff.sa = c1;
            ff.sb = c2;
            ff.sg = c6;
            const auto& lx = e.linear[static_cast<std::size_t>(x)];
            const auto& ly = e.linear[static_cast<std::size_t>(y)];
            const auto& lz = e.linear[static_cast<std::size_t>(z)];
            ff.lambda = {lx.lambda, ly.lambda, lz.lambda};
            ff.mu = {lx.mu - lx.lambda * c1, ly.mu - ly.lambda * c2, lz.mu - lz.lambda * c6};
            r.roles = {x, y, z};
            r.final_form = ff;
            i64 gate = ff.c2 * ff.mu[1] - ff.lambda[1] + ff.lambda[2];
            if (gate != 0) {
                r.tag = CaseTag::FINAL_PQ_SIMPLE;
                r.detail = "repeated edge plus edge: constant-map solution";
            } else {
                r.tag = CaseTag::FINAL_PQ_PROB;
                r.detail = "repeated edge plus edge: probabilistic two-prime evasion";
            }
            return r;
        }

        if (by_pair.size() == 3) {
            if (!r.samevar.empty()) return unsupported("3-cycle plus square exceeds the budget");
            int x = 0, y = 1, z = 2;
            auto find_product = [&](int a, int b) -> const QuadProduct* {
                auto it = by_pair.find({std::min(a, b), std::max(a, b)});
                return it == by_pair.end() ? nullptr : &r.products[it->second[0]];
            };
            const QuadProduct* pxy = find_product(x, y);
            const QuadProduct* pyz = find_product(y, z);
            const QuadProduct* pzx = find_product(z, x);
            if (!pxy || !pyz || !pzx) return unsupported("malformed 3-cycle");
            auto at = [&](const QuadProduct& p, int v) { return p.a.var == v ? p.a : p.b; };
            for (const QuadProduct* p : {pxy, pyz, pzx})
                if (p->coeff != 1 || p->a.scale != 1 || p->b.scale != 1)
                    return unsupported("scaled atoms on a 3-cycle");
            std::array<i64, 6> c = {at(*pxy, x).shift, at(*pxy, y).shift,
                                    at(*pyz, y).shift, at(*pyz, z).shift,
                                    at(*pzx, z).shift, at(*pzx, x).shift};
            std::array<int, 3> role = {x, y, z};
            if (c[0] != c[5] && c[1] != c[2] && c[3] != c[4]) {
                r.tag = CaseTag::THREE_CYCLE_CLOSED;
                r.cycle_shifts = c;
                r.roles = {role[0], role[1], role[2]};
                r.detail = "3-cycle with no factorization: closed-form affine maps";
                return r;
            }
            for (int rot = 0; rot < 3 && c[0] != c[5]; ++rot) {
                c = {c[2], c[3], c[4], c[5], c[0], c[1]};
                role = {role[1], role[2], role[0]};
            }
            if (c[0] != c[5]) return unsupported("3-cycle orientation failed");
            r.cycle_shifts = c;
            r.roles = {role[0], role[1], role[2]};
            if ((c[2] - c[1]) * (c[3] - c[4]) == 0) {
                r.tag = CaseTag::THREE_CYCLE_DEGENERATE;
                r.detail = "factorizable 3-cycle: three-prime identification";
            } else {
                r.tag = CaseTag::THREE_CYCLE_FIVE_PRIME;
                r.detail =
                    "factorizable 3-cycle with a surviving product: five-prime cancellation";
            }
            return r;
        }
        return unsupported("unrecognized three-variable structure");
    }

    if (nv == 4) {
        std::pair<int, int> dbl{-1, -1}, sgl{-1, -1};
        for (auto& [pr, idx] : by_pair)
            (idx.size() == 2 ? dbl : sgl) = pr;
        if (dbl.first >= 0 && sgl.first >= 0 && by_pair.size() == 2 && r.samevar.empty() &&
            dbl.first != sgl.first && dbl.first != sgl.second && dbl.second != sgl.first &&
            dbl.second != sgl.second) {
            r.tag = CaseTag::AFFINE;
            r.roles = {dbl.first, dbl.second};
            r.residual_edge = r.products[by_pair[sgl][0]];
            r.detail = "repeated edge block made constant; leftover edge by identification";
            return r;
        }
        return unsupported("unrecognized four-variable structure");
    }

    return unsupported("expressions with this shape fall outside the case analysis");
}

}  // namespace diffsets
