#include <algorithm>
#include <cmath>

#include "diffsets/construct.hpp"

namespace diffsets {

namespace {

bool poly_is_zero(const std::vector<i64>& poly) {
    for (i64 c : poly)
        if (c != 0) return false;
    return true;
}

bool poly_is_nonconstant(const std::vector<i64>& poly) {
    for (std::size_t j = 1; j < poly.size(); ++j)
        if (poly[j] != 0) return true;
    return false;
}

// add {pi_q(v) : v in [lo, hi] steps of `step`} into the fold target
void fold_shift_range(std::vector<char>& acc, i64 q, i64 step, i64 lo, i64 hi) {
    std::vector<char> next(static_cast<std::size_t>(q), 0);
    for (i64 k = lo; k <= hi; ++k) {
        i64 s = floor_mod(k * step, q);
        for (i64 t = 0; t < q; ++t)
            if (acc[static_cast<std::size_t>(t)]) next[static_cast<std::size_t>(add_mod(t, s, q))] = 1;
    }
    acc.swap(next);
}

void fold_set(std::vector<char>& acc, i64 q, const std::vector<i64>& shifts) {
    std::vector<char> next(static_cast<std::size_t>(q), 0);
    for (i64 s : shifts)
        for (i64 t = 0; t < q; ++t)
            if (acc[static_cast<std::size_t>(t)])
                next[static_cast<std::size_t>(add_mod(t, floor_mod(s, q), q))] = 1;
    acc.swap(next);
}

}  // namespace

StrongIdentResult strong_ident(const StrongIdentInput& input) {
    const Modulus& mod = *input.modulus;
    const std::size_t n = mod.size();
    i64 pmin = mod.prime(0), pmax = mod.prime(0);
    std::size_t qstar = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (mod.prime(i) < pmin) { pmin = mod.prime(i); qstar = i; }
        pmax = std::max(pmax, mod.prime(i));
    }
    if (2 * pmin <= pmax)
        throw precondition_error("identification primes must fit one dyadic window");

    StrongIdentResult result;
    result.windows.assign(n, 0);
    i64 q = pmin;

    // vars with leftovers must own a free coordinate
    for (const auto& [v, polys] : input.f) {
        bool has_any = false;
        for (const auto& poly : polys) has_any |= !poly_is_zero(poly);
        if (!has_any) continue;
        bool owns = false;
        for (std::size_t i = 0; i < n; ++i) owns |= input.diag_var[i] == v;
        if (!owns)
            throw precondition_error("variable " + std::to_string(v) +
                                     " leaves residues but has no free coordinate");
    }

    // build and measure the diagonal maps
    for (std::size_t i = 0; i < n; ++i) {
        int v = input.diag_var[i];
        if (v < 0) continue;
        i64 p = mod.prime(i);
        int d = input.degree[i];
        i64 lead = floor_mod(input.lead_unit[i], p);
        if (lead == 0) throw precondition_error("leading unit vanishes mod its prime");

        auto search = std::make_shared<RcPolySearch>();
        search->mode = RcPolySearch::Mode::MinCentered;
        search->degree = d;
        search->coeffs.resize(static_cast<std::size_t>(d) + 1);
        search->coeffs[static_cast<std::size_t>(d)].parts.push_back(RcConst{lead});
        for (int k = 1; k < d; ++k) {
            const auto& gpoly = input.g[i][static_cast<std::size_t>(k - 1)];
            if (!poly_is_zero(gpoly))
                search->coeffs[static_cast<std::size_t>(k)].parts.push_back(
                    RcPolyCoord{i, gpoly, 1});
        }
        auto fit = input.f.find(v);
        if (fit != input.f.end()) {
            for (std::size_t j = 0; j < n; ++j) {
                const auto& fpoly = fit->second[j];
                if (!poly_is_zero(fpoly))
                    search->coeffs[0].parts.push_back(RcPolyCoord{j, fpoly, 1});
            }
        }

        VarMap vm;
        vm.target = i;
        vm.rule.parts.push_back(search);

        // measured search window: exact when the read domain is affordable
        i64 window = 0;
        if (d > 1) {
            std::set<std::size_t> reads;
            for (const auto& cr : search->coeffs)
                for (auto rd : rule_reads(cr)) reads.insert(rd);
            BigInt domain = 1;
            for (auto rd : reads) domain *= mod.prime(rd);
            if (domain <= input.measure_budget) {
                std::vector<std::size_t> axes(reads.begin(), reads.end());
                std::vector<i64> x(n, 0);
                u64 total = static_cast<u64>(domain);
                SearchStats stats;
                for (u64 idx = 0; idx < total; ++idx) {
                    u64 rest = idx;
                    for (auto ax : axes) {
                        x[ax] = static_cast<i64>(rest % static_cast<u64>(mod.prime(ax)));
                        rest /= static_cast<u64>(mod.prime(ax));
                    }
                    eval_varmap_tracked(vm, mod, x, &stats);
                }
                window = stats.max_abs_centered;
            } else {
                double bound = static_cast<double>(input.small_value_constant) *
                               std::pow(static_cast<double>(p), 1.0 - std::pow(2.0, -d));
                window = std::min<i64>(static_cast<i64>(bound) + 1, (p - 1) / 2);
                result.meta["assumed_window_coordinates"].push_back(i);
            }
        }
        result.windows[i] = window;
        result.diag_maps.emplace(v, std::move(vm));
    }

    // exact allowed set over Z_qstar:
    //   sum_i mod_{p_i, q}(v_i) = pi_q( sum_v u_v - sum_i c_i p_i ),
    //   u_v = iota(w_v) + p_v e_v with the measured window on w_v.
    std::vector<char> allowed(static_cast<std::size_t>(q), 0);
    allowed[0] = 1;
    json range_notes = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        int v = input.diag_var[i];
        if (v < 0) continue;
        i64 p = mod.prime(i);
        // lift values of the centered window
        std::vector<i64> lifts;
        lifts.push_back(0);
        for (i64 w = 1; w <= result.windows[i]; ++w) {
            lifts.push_back(w);
            lifts.push_back(p - w);
        }
        fold_set(allowed, q, lifts);
        // u range: iota(poly value) + per-source f lifts
        i64 u_max = p - 1;
        auto fit = input.f.find(v);
        if (fit != input.f.end())
            for (std::size_t j = 0; j < n; ++j)
                if (!poly_is_zero(fit->second[j])) u_max += mod.prime(j) - 1;
        i64 e_max = u_max / p;
        fold_shift_range(allowed, q, p, 0, e_max);
        range_notes.push_back({{"coordinate", i},
                               {"window", result.windows[i]},
                               {"carry_max", e_max}});
    }
    for (std::size_t i = 0; i < n; ++i) {
        // split carries of the coordinate value sum
        i64 terms = input.diag_var[i] >= 0 ? 1 : 0;
        for (const auto& [v, polys] : input.f)
            if (!poly_is_zero(polys[i])) ++terms;
        if (terms > 1) fold_shift_range(allowed, q, -mod.prime(i), 0, terms - 1);
    }

    i64 allowed_count = 0;
    for (char c : allowed) allowed_count += c;
    BigInt claimed = allowed_count;
    for (std::size_t i = 0; i < n; ++i)
        if (i != qstar) claimed *= mod.prime(i);

    CertLinearFunctional lf;
    lf.target = qstar;
    lf.weights.assign(n, 1);
    lf.allowed_res.assign(allowed.begin(), allowed.end());
    lf.claimed = claimed;
    result.certificate = Certificate::linear_functional(input.modulus, std::move(lf));
    result.meta["allowed_size"] = allowed_count;
    result.meta["reference_prime"] = q;
    result.meta["ranges"] = std::move(range_notes);
    return result;
}

}  // namespace diffsets
