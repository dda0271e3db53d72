#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diffsets/common.hpp"

namespace diffsets {

// scale*alpha_v(x_v) + shift*x_v. Enumerated atoms have scale 1 and shift in
// {0,1}; factoring rewrites may widen both to small integers.
struct Atom {
    int var = 0;
    i64 scale = 1;
    i64 shift = 0;

    friend auto operator<=>(const Atom&, const Atom&) = default;
};

// coeff * product of factors. Mixed products have exactly two factors on
// distinct variables; higher-degree factor lists must share one variable.
struct Term {
    i64 coeff = 1;
    std::vector<Atom> factors;

    int degree() const { return static_cast<int>(factors.size()); }
    friend auto operator<=>(const Term&, const Term&) = default;
};

// lambda*alpha_v(x_v) + mu*x_v
struct LinEntry {
    i64 lambda = 0;
    i64 mu = 0;
    friend auto operator<=>(const LinEntry&, const LinEntry&) = default;
};

struct Expression {
    std::vector<Term> terms;
    std::vector<LinEntry> linear;  // indexed by variable id
    i64 constant = 0;

    int num_vars() const { return static_cast<int>(linear.size()); }
    bool has_quadratic() const { return !terms.empty(); }
    i64 max_coefficient_magnitude() const;

    friend auto operator<=>(const Expression&, const Expression&) = default;
};

// Canonical form: factors sorted inside terms, like terms merged, zero terms
// dropped, variables relabeled to the lexicographically least presentation.
// Idempotent and invariant under variable renaming.
Expression canonicalize(const Expression& e);

// Complete duplicate-free list of canonical expressions arising from l
// quadratic summands and k linear summands (affine-cancellation-reduced, so
// linear-only variables are dropped whenever a quadratic part is present).
// Sorted ascending by number of distinct variables, then lexicographically.
std::vector<Expression> enumerate_expressions(int l, int k);

// Multigraph on the variables with one edge per mixed quadratic term
// occurrence (term coefficients count as multiplicity).
struct QuadGraph {
    int num_vars = 0;
    std::vector<std::pair<int, int>> edges;   // expanded with multiplicity, i < j
    std::vector<int> samevar_quad;            // per var: same-variable quadratic multiplicity
    int isolated_vertices() const;            // no incident edge (may still carry samevar terms)
    bool has_cycle_or_multiedge() const;
};

QuadGraph build_graph(const Expression& e);

// --- textual syntax -------------------------------------------------------
// terms of the paper's language, e.g.  (a(x)+x)*(b(y)) + 2*a(x) + 3*x
// Maps bind to their variable one-to-one; powers allowed via ^.

struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(std::string msg, std::size_t at)
        : std::runtime_error(std::move(msg)), offset(at) {}
};

Expression parse_expression(const std::string& text);
std::string print_expression(const Expression& e);

}  // namespace diffsets
