#include "doctest.h"

#include <algorithm>
#include <set>

#include "diffsets/expr.hpp"
#include "diffsets/rng.hpp"

using namespace diffsets;

namespace {

// Independent enumeration oracle: assign every slot a variable id directly
// (all functions slots -> [0, slots)), not via restricted growth strings.
// Raw forms are deduplicated structurally before the canonicalization pass.
std::set<Expression> oracle_enumerate(int l, int k) {
    int slots = 2 * l + k;
    std::set<Expression> raw;
    std::vector<int> assign(static_cast<std::size_t>(slots), 0);
    u64 total = 1;
    for (int i = 0; i < slots; ++i) total *= static_cast<u64>(slots);
    for (u64 code = 0; code < total; ++code) {
        u64 c = code;
        for (int i = 0; i < slots; ++i) {
            assign[static_cast<std::size_t>(i)] = static_cast<int>(c % static_cast<u64>(slots));
            c /= static_cast<u64>(slots);
        }
        for (unsigned mask = 0; mask < (1u << slots); ++mask) {
            Expression e;
            e.linear.resize(static_cast<std::size_t>(slots));
            for (int i = 0; i < l; ++i) {
                Atom a{assign[static_cast<std::size_t>(2 * i)], 1,
                       (mask >> (2 * i)) & 1 ? 1 : 0};
                Atom b{assign[static_cast<std::size_t>(2 * i + 1)], 1,
                       (mask >> (2 * i + 1)) & 1 ? 1 : 0};
                if (b < a) std::swap(a, b);
                e.terms.push_back(Term{1, {a, b}});
            }
            std::sort(e.terms.begin(), e.terms.end());
            for (int j = 0; j < k; ++j) {
                int v = assign[static_cast<std::size_t>(2 * l + j)];
                e.linear[static_cast<std::size_t>(v)].lambda += 1;
                e.linear[static_cast<std::size_t>(v)].mu += (mask >> (2 * l + j)) & 1;
            }
            if (!e.terms.empty()) {
                std::vector<bool> quad(e.linear.size(), false);
                for (const auto& t : e.terms)
                    for (const auto& a : t.factors) quad[static_cast<std::size_t>(a.var)] = true;
                for (std::size_t v = 0; v < e.linear.size(); ++v)
                    if (!quad[v]) e.linear[v] = {0, 0};
            }
            raw.insert(std::move(e));
        }
    }
    std::set<Expression> out;
    for (const auto& e : raw) out.insert(canonicalize(e));
    return out;
}

Expression random_expression(SeededRng& rng) {
    int nv = 1 + static_cast<int>(rng.below(3));
    Expression e;
    e.linear.resize(static_cast<std::size_t>(nv));
    int nterms = static_cast<int>(rng.below(3));
    std::vector<bool> quad(static_cast<std::size_t>(nv), false);
    for (int t = 0; t < nterms; ++t) {
        Atom a{static_cast<int>(rng.below(nv)), 1, rng.below(2)};
        Atom b{static_cast<int>(rng.below(nv)), 1, rng.below(2)};
        e.terms.push_back(Term{1 + rng.below(3), {a, b}});
        quad[static_cast<std::size_t>(a.var)] = quad[static_cast<std::size_t>(b.var)] = true;
    }
    for (int v = 0; v < nv; ++v) {
        if (nterms > 0 && !quad[static_cast<std::size_t>(v)]) continue;
        e.linear[static_cast<std::size_t>(v)] = {rng.below(4), rng.below(3)};
    }
    return e;
}

}  // namespace

TEST_CASE("enumeration counts match the spec examples") {
    CHECK(enumerate_expressions(0, 1).size() == 2);
    CHECK(enumerate_expressions(0, 2).size() == 6);
    CHECK(enumerate_expressions(1, 0).size() == 6);
}

TEST_CASE("enumeration agrees with the independent oracle") {
    for (auto [l, k] :
         {std::pair{0, 1}, {0, 2}, {0, 3}, {1, 0}, {1, 1}, {2, 0}, {1, 2}, {2, 2}, {3, 0}}) {
        auto fast = enumerate_expressions(l, k);
        auto oracle = oracle_enumerate(l, k);
        CHECK(fast.size() == oracle.size());
        for (const auto& e : fast) CHECK(oracle.count(e) == 1);
    }
}

TEST_CASE("enumeration output is sorted by variable count and duplicate-free") {
    auto list = enumerate_expressions(2, 1);
    for (std::size_t i = 1; i < list.size(); ++i) {
        CHECK(list[i - 1].num_vars() <= list[i].num_vars());
        CHECK(list[i - 1] != list[i]);
    }
}

TEST_CASE("canonicalize merges, drops zeros, and relabels") {
    Expression e;
    e.linear.resize(2);
    e.terms.push_back(Term{1, {Atom{1, 1, 0}, Atom{0, 1, 0}}});
    e.terms.push_back(Term{1, {Atom{0, 1, 0}, Atom{1, 1, 0}}});
    Expression c = canonicalize(e);
    REQUIRE(c.terms.size() == 1);
    CHECK(c.terms[0].coeff == 2);

    Expression z;
    z.linear.resize(2);
    z.terms.push_back(Term{0, {Atom{0, 1, 0}, Atom{1, 1, 0}}});
    z.linear[0] = {1, 0};
    Expression cz = canonicalize(z);
    CHECK(cz.terms.empty());
    CHECK(cz.num_vars() == 1);
    CHECK(cz.linear[0].lambda == 1);
}

TEST_CASE("canonicalize is idempotent and renaming-invariant") {
    SeededRng rng(20240811);
    for (int trial = 0; trial < 1000; ++trial) {
        Expression e = random_expression(rng);
        Expression c1 = canonicalize(e);
        CHECK(canonicalize(c1) == c1);
        int nv = e.num_vars();
        std::vector<int> perm(static_cast<std::size_t>(nv));
        for (int i = 0; i < nv; ++i) perm[static_cast<std::size_t>(i)] = i;
        for (int i = nv - 1; i > 0; --i)
            std::swap(perm[static_cast<std::size_t>(i)],
                      perm[static_cast<std::size_t>(rng.below(i + 1))]);
        Expression p = e;
        for (auto& t : p.terms)
            for (auto& a : t.factors) a.var = perm[static_cast<std::size_t>(a.var)];
        std::vector<LinEntry> lin(static_cast<std::size_t>(nv));
        for (int v = 0; v < nv; ++v)
            lin[static_cast<std::size_t>(perm[static_cast<std::size_t>(v)])] =
                e.linear[static_cast<std::size_t>(v)];
        p.linear = lin;
        CHECK(canonicalize(p) == c1);
    }
}

TEST_CASE("linear-only variables are rejected when a quadratic part exists") {
    Expression e;
    e.linear.resize(2);
    e.terms.push_back(Term{1, {Atom{0, 1, 0}, Atom{0, 1, 1}}});
    e.linear[1] = {1, 1};
    CHECK_THROWS_AS(canonicalize(e), precondition_error);
}

TEST_CASE("graph construction") {
    auto parse_graph = [](const std::string& s) { return build_graph(parse_expression(s)); };
    QuadGraph g1 = parse_graph("a(x)*b(y)");
    CHECK(g1.edges.size() == 1);
    CHECK_FALSE(g1.has_cycle_or_multiedge());

    QuadGraph g2 = parse_graph("a(x)*b(y) + (a(x)+x)*(b(y)+y) + c(z)^2");
    CHECK(g2.edges.size() == 2);
    CHECK(g2.edges[0] == g2.edges[1]);
    CHECK(g2.has_cycle_or_multiedge());
    CHECK(g2.isolated_vertices() == 1);
    i64 samevar_total = 0;
    for (int v : g2.samevar_quad) samevar_total += v;
    CHECK(samevar_total == 1);

    QuadGraph g3 = parse_graph("a(x)*b(y) + b(y)*c(z) + c(z)*a(x)");
    CHECK(g3.edges.size() == 3);
    CHECK(g3.has_cycle_or_multiedge());

    // edge count + same-variable count = total quadratic multiplicity
    Expression e = parse_expression("2*a(x)*b(y) + a(x)^2");
    QuadGraph g4 = build_graph(e);
    i64 total = 0;
    for (const auto& t : e.terms)
        if (t.degree() == 2) total += t.coeff;
    CHECK(static_cast<i64>(g4.edges.size()) + g4.samevar_quad[0] == total);
}

TEST_CASE("parser round trips with printer on canonical forms") {
    SeededRng rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        Expression e = canonicalize(random_expression(rng));
        std::string text = print_expression(e);
        INFO(text);
        CHECK(parse_expression(text) == e);
    }
}

TEST_CASE("parser rejects malformed input with a position") {
    try {
        parse_expression("a(x)*b(y) + )");
        FAIL("expected a parse error");
    } catch (const ParseError& pe) {
        CHECK(pe.offset == 12);
    }
    CHECK_THROWS_AS(parse_expression("a(x) + a(y)"), ParseError);
    CHECK_THROWS_AS(parse_expression("(a(x)+1)*b(y)"), ParseError);
    CHECK_THROWS_AS(parse_expression("x(x)*b(y)"), ParseError);
}

TEST_CASE("parser handles the documented syntax") {
    Expression e = parse_expression("(a(x)+x)*(b(y)) + 2*a(x) + 3*x");
    CHECK(e.num_vars() == 2);
    CHECK(e.terms.size() == 1);
    Expression p = parse_expression("a(x)^2 + a(x) + x");
    CHECK(p.num_vars() == 1);
    CHECK(p.terms.size() == 1);
    CHECK(p.terms[0].degree() == 2);
}
