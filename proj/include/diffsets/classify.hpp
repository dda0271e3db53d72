#pragma once

#include <array>
#include <optional>

#include "diffsets/expr.hpp"

namespace diffsets {

enum class CaseTag {
    SINGLE_VAR,
    AFFINE,
    BASIC_IDENT,
    ACYCLIC_IDENT,
    SPLIT_SINGLE_VARS,
    THREE_CYCLE_CLOSED,
    THREE_CYCLE_DEGENERATE,
    THREE_CYCLE_FIVE_PRIME,
    REPEATED_EDGE_PLUS_POLY,
    PROB_TWO_VAR,
    FINAL_PQ_SIMPLE,
    FINAL_PQ_PROB,
    UNSUPPORTED,
};

const char* to_string(CaseTag tag);

// A mixed quadratic product coeff * A * B after combining parallel factors.
struct QuadProduct {
    i64 coeff = 1;
    Atom a, b;  // a.var != b.var
};

// Classification output. The factored structure plus the role assignment is
// the (invertible) normalization record: every constructor derives its maps
// for substituted atoms u*alpha+s*x and pulls them back to the original maps.
struct ClassifyResult {
    CaseTag tag = CaseTag::UNSUPPORTED;
    std::string detail;

    std::vector<QuadProduct> products;  // factored mixed products
    std::vector<Term> samevar;          // same-variable quadratic terms

    // role -> original variable id; meaning depends on the tag
    std::vector<int> roles;

    // THREE_CYCLE_*: shifts in the cyclic pairing
    // (x+c1)(y+c2), (y+c3)(z+c4), (z+c5)(x+c6) after orientation
    std::array<i64, 6> cycle_shifts{};

    // FINAL_PQ_*: normalized coefficients of the standard form
    // A*B + (A+c1*x)(B+c2*y) + A*G + l1*A + m1*x + l2*B + m2*y + l3*G + m3*z
    struct FinalForm {
        i64 c1 = 0, c2 = 0;
        std::array<i64, 3> lambda{};
        std::array<i64, 3> mu{};
        // map substitutions A = alpha + sa*x, B = beta + sb*y, G = gamma + sg*z
        i64 sa = 0, sb = 0, sg = 0;
    };
    std::optional<FinalForm> final_form;

    // AFFINE with a leftover single edge on two further variables
    std::optional<QuadProduct> residual_edge;
};

// The paper's case analysis for expressions arising from l <= 3 quadratic
// summands: factorize parallel products first, then dispatch on the shape of
// the quadratic graph, then on coefficient conditions.
ClassifyResult classify(const Expression& e);

}  // namespace diffsets
