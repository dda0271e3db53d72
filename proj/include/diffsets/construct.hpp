#pragma once

#include <optional>

#include "diffsets/certificate.hpp"
#include "diffsets/classify.hpp"
#include "diffsets/evalplan.hpp"
#include "diffsets/rng.hpp"

#include "json.hpp"

namespace diffsets {

using json = nlohmann::ordered_json;

struct Construction {
    Expression expression;
    ModulusPtr modulus;
    MapSet maps;
    Certificate certificate;
    json meta;  // measured vs claimed figures, route notes, rng spec
};

struct ConstructConfig {
    std::vector<i64> primes;          // explicit primes (used when non-empty)
    i64 window_lo = 100, window_hi = 1000;
    double epsilon = 0.5;             // density target where one applies
    i64 small_value_constant = 4;     // C_d in the small-value assertion
    i64 basic_ident_constant = 15;    // K in the identification bound
    i64 five_prime_c1 = 4;            // |t - uv| <= c1 * sqrt(p4)
    i64 five_prime_c2 = 4;            // |carry| <= c2 * log(p3)
    i64 measure_budget = 1000000;     // exact search-window measurement cap
    RngSpec rng;
    RetryPolicy retry;
};

// --- primitive operations ----------------------------------------------------

// First candidate value v = 0, 1, ... such that
// c_d(x) v^d + ... + c_1(x) v + c_0(x) avoids F, for every x with a nonzero
// non-constant coefficient; returns the filled table as a map rule.
VarMap choose_alpha_avoiding(i64 p, int d, const std::vector<std::vector<i64>>& coeff_tables,
                             const std::vector<i64>& forbidden, std::size_t target_coord = 0);

struct AffineSolution {
    i64 a, b, c, d;
};

// Affine maps alpha = a x + b, beta = c y + d making
//   alpha*beta + (alpha + nu1 x)(beta + nu2 y)
//   + lambda1 alpha + mu1 x + lambda2 beta + mu2 y
// constant on Z_p^2.
AffineSolution affine_solve(i64 nu1, i64 nu2, i64 lambda1, i64 lambda2, i64 mu1, i64 mu2,
                            i64 p);

// General form: sum_k m_k (u_k alpha + v_k x)(w_k beta + s_k y) + linear part.
struct AffineProduct {
    i64 m, u, v, w, s;
};
AffineSolution affine_solve_general(const std::vector<AffineProduct>& products, i64 lambda1,
                                    i64 mu1, i64 lambda2, i64 mu2, i64 p);

// Identification of coordinates across two primes p <= q for
// lambda0*alpha*beta + lambda1*alpha + mu1*x + lambda2*beta + mu2*y.
Construction basic_ident(i64 lambda0, i64 lambda1, i64 mu1, i64 lambda2, i64 mu2, i64 p, i64 q,
                         const ConstructConfig& config = {});

// Single-variable construction over t window primes with image fraction
// below epsilon.
Construction single_var_construct(const Expression& e, double epsilon, i64 window_lo,
                                  i64 window_hi, const ConstructConfig& config = {});

// --- strong identification ---------------------------------------------------

// Per-coordinate input: the free map's polynomial structure plus the affine
// or quadratic leftovers every variable contributes to every coordinate.
struct StrongIdentInput {
    ModulusPtr modulus;  // all primes within a factor-2 window
    // coordinate -> variable owning the free map there (-1: none)
    std::vector<int> diag_var;
    std::vector<i64> lead_unit;  // invertible leading coefficient, per coordinate
    std::vector<int> degree;     // polynomial degree in the free map, per coordinate
    // g[i][k]: coefficient of alpha^k (1 <= k < degree[i]) as a polynomial in
    // x_{diag,i}; g[i] has degree[i]-1 entries (may be empty polys)
    std::vector<std::vector<std::vector<i64>>> g;
    // f[v][j]: polynomial in x_{v,j} evaluated mod p_j (empty = zero)
    std::map<int, std::vector<std::vector<i64>>> f;
    i64 measure_budget = 1000000;
    i64 small_value_constant = 4;
};

struct StrongIdentResult {
    std::map<int, VarMap> diag_maps;  // variable -> its own-coordinate map
    std::optional<Certificate> certificate;
    std::vector<i64> windows;         // measured |centered| window per coordinate
    json meta;
};

StrongIdentResult strong_ident(const StrongIdentInput& input);

// --- dispatcher ----------------------------------------------------------------

// Classified-expression constructors; every returned Construction carries maps
// for the original expression variables (transform pullbacks applied).
Construction construct_expression(const Expression& e, const ClassifyResult& cls,
                                  const ConstructConfig& config);

// Convenience: classify + construct.
Construction construct_auto(const Expression& e, const ConstructConfig& config);

// Individual handlers (exposed for focused tests).
Construction construct_single_var(const Expression& e, const ConstructConfig& config);
Construction construct_split_single_vars(const Expression& e, const ConstructConfig& config);
Construction construct_basic_ident(const Expression& e, const ClassifyResult& cls,
                                   const ConstructConfig& config);
Construction construct_affine(const Expression& e, const ClassifyResult& cls,
                              const ConstructConfig& config);
Construction construct_acyclic(const Expression& e, const ClassifyResult& cls,
                               const ConstructConfig& config);
Construction construct_repeated_edge_poly(const Expression& e, const ClassifyResult& cls,
                                          const ConstructConfig& config);
Construction construct_three_cycle_closed(const Expression& e, const ClassifyResult& cls,
                                          const ConstructConfig& config);
Construction construct_three_cycle_degenerate(const Expression& e, const ClassifyResult& cls,
                                              const ConstructConfig& config);
Construction construct_three_cycle_five_prime(const Expression& e, const ClassifyResult& cls,
                                              const ConstructConfig& config);

// helpers shared with the randomized constructors
std::vector<i64> pick_window_primes(std::size_t count, i64 min_exclusive, i64 window_lo,
                                    i64 window_hi);
ConstructedMap affine_everywhere(const ModulusPtr& mod, i64 a, i64 b);
ConstructedMap zero_everywhere(const ModulusPtr& mod);

// Symbolic single-coordinate reduction: substitute fixed affine maps
// alpha_v = k x_v + b for every variable except the free one, collect the
// free map's polynomial structure, per-variable leftover polynomials and any
// surviving bilinear terms (the caller decides whether those are legal).
struct FixedAffine {
    i64 k = 0, b = 0;
};
struct ReducedCoordinate {
    int free_var = -1;
    i64 alpha_sq = 0;
    std::vector<i64> alpha_lin;                 // poly in x_{free} multiplying alpha
    std::map<int, std::vector<i64>> leftover;   // var -> poly in x_v
    std::vector<std::tuple<int, int, i64>> cross;
};
ReducedCoordinate reduce_with_fixed_maps(const Expression& e, std::size_t coord, i64 p,
                                         const std::map<int, FixedAffine>& assigned,
                                         int free_var);

}  // namespace diffsets
