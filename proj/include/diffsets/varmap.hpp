#pragma once

#include <map>
#include <set>
#include <variant>
#include <vector>

#include "diffsets/residue.hpp"

namespace diffsets {

// Rule components; a VarMap's value at its target coordinate is the sum of
// its component values mod the target prime. Components read only coordinates
// of the map's own variable.

struct RcConst {
    i64 value = 0;  // reduced mod target
};

// outer * mod_{p_src, p_target}( poly(x_src) mod p_src ).
// src == target makes the mod a no-op, covering plain affine-in-own-coordinate
// rules; deg >= 2 covers leftover same-variable quadratics.
struct RcPolyCoord {
    std::size_t src = 0;
    std::vector<i64> poly;  // coefficients, constant first
    i64 outer = 1;
};

// outer * pi_target( sum_i w_i * iota(x_{c_i}) ); integer weights, the
// cross-modulus cancellation rules used by the closing maps.
struct RcLiftSum {
    std::vector<std::pair<std::size_t, i64>> weights;
    i64 outer = 1;
};

struct RcTable {
    std::size_t src = 0;
    std::vector<i64> values;  // size = p_src, reduced mod target
};

struct RcTable2 {
    std::size_t src0 = 0, src1 = 0;
    std::vector<i64> values;  // size p_src0 * p_src1, row-major on src0
};

// Map value defined by a deterministic scan over candidate values t of the
// target coordinate's residues: either the first t whose polynomial value
// avoids a forbidden set, or the t minimizing |centered_lift(P(t))|.
// Coefficients are themselves rule sums, so the map needs no table storage
// and its footprint is the union of the coefficient reads.
struct RcPolySearch;

using RuleComponent = std::variant<RcConst, RcPolyCoord, RcLiftSum, RcTable, RcTable2,
                                   std::shared_ptr<RcPolySearch>>;

struct RuleSum {
    std::vector<RuleComponent> parts;
};

struct RcPolySearch {
    enum class Mode { AvoidSet, MinCentered };
    Mode mode = Mode::MinCentered;
    int degree = 1;
    std::vector<RuleSum> coeffs;   // index j in [0, degree]: rule for c_j(x)
    std::vector<i64> forbidden;    // AvoidSet mode: sorted forbidden values
    i64 outer = 1;                 // applied after the search
};

// One formal map alpha_v restricted to one target coordinate.
struct VarMap {
    std::size_t target = 0;
    RuleSum rule;

    static VarMap zero(std::size_t target) { return VarMap{target, {}}; }
    static VarMap constant(std::size_t target, i64 v) {
        return VarMap{target, {{RcConst{v}}}};
    }
    // a*x_target + b on the own coordinate
    static VarMap affine(std::size_t target, i64 a, i64 b) {
        return VarMap{target, {{RcPolyCoord{target, {b, a}, 1}}}};
    }
};

// Full constructed map for one variable: one VarMap per coordinate.
struct ConstructedMap {
    std::vector<VarMap> coords;
};

using MapSet = std::map<int, ConstructedMap>;  // variable id -> map

i64 eval_rule_sum(const RuleSum& rule, std::size_t target, const Modulus& mod,
                  const std::vector<i64>& x);
i64 eval_varmap(const VarMap& vm, const Modulus& mod, const std::vector<i64>& x);
inline i64 eval_varmap(const VarMap& vm, const Modulus& mod, const RingElem& x) {
    return eval_varmap(vm, mod, x.residues());
}

// Coordinates of the map's variable that the rule may read.
std::set<std::size_t> rule_reads(const RuleSum& rule);

// Derived quantities recorded while evaluating searches (tests inspect them).
struct SearchStats {
    i64 max_abs_centered = 0;
};

// Like eval but also runs the search bookkeeping (max achieved |centered|).
i64 eval_varmap_tracked(const VarMap& vm, const Modulus& mod, const std::vector<i64>& x,
                        SearchStats* stats);
// Single-component evaluation hook for plan-folded references.
i64 eval_rule_component(const RuleComponent& comp, std::size_t target, const Modulus& mod,
                        const std::vector<i64>& x);

// Pull a constructed map for A(x) = u*alpha(x) + s*x back to alpha:
// alpha = u^{-1}(A - s*x), applied per coordinate.
ConstructedMap pull_back(const ConstructedMap& a_map, i64 u, i64 s, const Modulus& mod);

// Deterministic centered small-value scan: returns (argmin t, achieved value
// poly(t) as residue). Ties broken by smaller t. Throws when the non-constant
// coefficients are all zero.
std::pair<i64, i64> small_value_search(const std::vector<i64>& poly, i64 p);

}  // namespace diffsets
