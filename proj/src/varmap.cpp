#include "diffsets/varmap.hpp"

#include <algorithm>
#include <cmath>

namespace diffsets {

namespace {

i64 eval_poly_mod(const std::vector<i64>& poly, i64 x, i64 p) {
    i64 acc = 0;
    for (auto it = poly.rbegin(); it != poly.rend(); ++it)
        acc = floor_mod(mul_mod(acc, x, p) + floor_mod(*it, p), p);
    return acc;
}

struct ComponentEval {
    std::size_t target;
    const Modulus& mod;
    const std::vector<i64>& x;
    SearchStats* stats;

    i64 pt() const { return mod.prime(target); }

    i64 operator()(const RcConst& c) const { return floor_mod(c.value, pt()); }

    i64 operator()(const RcPolyCoord& c) const {
        i64 p_src = mod.prime(c.src);
        i64 inner = eval_poly_mod(c.poly, x[c.src], p_src);
        return mul_mod(floor_mod(c.outer, pt()), floor_mod(inner, pt()), pt());
    }

    i64 operator()(const RcLiftSum& c) const {
        i64 acc = 0;
        for (auto [coord, w] : c.weights) {
            i64 piece = mul_mod(floor_mod(w, pt()), floor_mod(x[coord], pt()), pt());
            acc = add_mod(acc, piece, pt());
        }
        return mul_mod(floor_mod(c.outer, pt()), acc, pt());
    }

    i64 operator()(const RcTable& c) const {
        return c.values[static_cast<std::size_t>(x[c.src])];
    }

    i64 operator()(const RcTable2& c) const {
        i64 p1 = mod.prime(c.src1);
        return c.values[static_cast<std::size_t>(x[c.src0] * p1 + x[c.src1])];
    }

    i64 operator()(const std::shared_ptr<RcPolySearch>& sp) const {
        const RcPolySearch& s = *sp;
        i64 p = pt();
        std::vector<i64> poly(static_cast<std::size_t>(s.degree) + 1, 0);
        for (std::size_t j = 0; j < poly.size(); ++j)
            poly[j] = eval_rule_sum(s.coeffs[j], target, mod, x);
        i64 t;
        if (s.mode == RcPolySearch::Mode::AvoidSet) {
            bool any_nonconst = false;
            for (std::size_t j = 1; j < poly.size(); ++j) any_nonconst |= poly[j] != 0;
            t = 0;
            if (any_nonconst) {
                while (std::binary_search(s.forbidden.begin(), s.forbidden.end(),
                                          eval_poly_mod(poly, t, p)))
                    ++t;
            }
        } else {
            auto [arg, val] = small_value_search(poly, p);
            t = arg;
            if (stats)
                stats->max_abs_centered =
                    std::max(stats->max_abs_centered, std::abs(centered_lift(val, p)));
        }
        return mul_mod(floor_mod(s.outer, p), t, p);
    }
};

struct ComponentReads {
    std::set<std::size_t>& out;

    void operator()(const RcConst&) const {}
    void operator()(const RcPolyCoord& c) const {
        bool nontrivial = false;
        for (std::size_t j = 1; j < c.poly.size(); ++j) nontrivial |= c.poly[j] != 0;
        if (nontrivial) out.insert(c.src);
    }
    void operator()(const RcLiftSum& c) const {
        for (auto [coord, w] : c.weights)
            if (w != 0) out.insert(coord);
    }
    void operator()(const RcTable& c) const { out.insert(c.src); }
    void operator()(const RcTable2& c) const {
        out.insert(c.src0);
        out.insert(c.src1);
    }
    void operator()(const std::shared_ptr<RcPolySearch>& s) const {
        for (const auto& cr : s->coeffs) {
            auto reads = rule_reads(cr);
            out.insert(reads.begin(), reads.end());
        }
    }
};

}  // namespace

std::pair<i64, i64> small_value_search(const std::vector<i64>& poly, i64 p) {
    bool any_nonconst = false;
    for (std::size_t j = 1; j < poly.size(); ++j) any_nonconst |= floor_mod(poly[j], p) != 0;
    if (poly.size() > 1 && !any_nonconst)
        throw precondition_error("small-value search needs a non-constant polynomial");
    i64 best_t = 0, best_val = eval_poly_mod(poly, 0, p);
    i64 best_abs = std::abs(centered_lift(best_val, p));
    for (i64 t = 1; t < p && best_abs > 0; ++t) {
        i64 v = eval_poly_mod(poly, t, p);
        i64 a = std::abs(centered_lift(v, p));
        if (a < best_abs) {
            best_abs = a;
            best_t = t;
            best_val = v;
        }
    }
    return {best_t, best_val};
}

i64 eval_rule_sum(const RuleSum& rule, std::size_t target, const Modulus& mod,
                  const std::vector<i64>& x) {
    i64 p = mod.prime(target);
    i64 acc = 0;
    ComponentEval ev{target, mod, x, nullptr};
    for (const auto& part : rule.parts) acc = add_mod(acc, std::visit(ev, part), p);
    return acc;
}

i64 eval_varmap(const VarMap& vm, const Modulus& mod, const std::vector<i64>& x) {
    return eval_rule_sum(vm.rule, vm.target, mod, x);
}

i64 eval_rule_component(const RuleComponent& comp, std::size_t target, const Modulus& mod,
                        const std::vector<i64>& x) {
    ComponentEval ev{target, mod, x, nullptr};
    return std::visit(ev, comp);
}

i64 eval_varmap_tracked(const VarMap& vm, const Modulus& mod, const std::vector<i64>& x,
                        SearchStats* stats) {
    i64 p = mod.prime(vm.target);
    i64 acc = 0;
    ComponentEval ev{vm.target, mod, x, stats};
    for (const auto& part : vm.rule.parts) acc = add_mod(acc, std::visit(ev, part), p);
    return acc;
}

std::set<std::size_t> rule_reads(const RuleSum& rule) {
    std::set<std::size_t> out;
    ComponentReads cr{out};
    for (const auto& part : rule.parts) std::visit(cr, part);
    return out;
}

ConstructedMap pull_back(const ConstructedMap& a_map, i64 u, i64 s, const Modulus& mod) {
    if (u == 1 && s == 0) return a_map;
    ConstructedMap out;
    out.coords.reserve(a_map.coords.size());
    for (std::size_t c = 0; c < a_map.coords.size(); ++c) {
        i64 p = mod.prime(c);
        i64 uinv = inverse_mod(floor_mod(u, p), p);
        VarMap vm;
        vm.target = c;
        for (RuleComponent part : a_map.coords[c].rule.parts) {
            std::visit(
                [&](auto& comp) {
                    using T = std::decay_t<decltype(comp)>;
                    if constexpr (std::is_same_v<T, RcConst>) {
                        comp.value = mul_mod(uinv, floor_mod(comp.value, p), p);
                    } else if constexpr (std::is_same_v<T, RcPolyCoord> ||
                                         std::is_same_v<T, RcLiftSum>) {
                        comp.outer = mul_mod(uinv, floor_mod(comp.outer, p), p);
                    } else if constexpr (std::is_same_v<T, RcTable>) {
                        for (auto& v : comp.values) v = mul_mod(uinv, v, p);
                    } else if constexpr (std::is_same_v<T, RcTable2>) {
                        for (auto& v : comp.values) v = mul_mod(uinv, v, p);
                    } else {
                        // shared search node: wrap with scaled outer
                        auto copy = std::make_shared<RcPolySearch>(*comp);
                        copy->outer = mul_mod(uinv, floor_mod(copy->outer, p), p);
                        comp = copy;
                    }
                },
                part);
            vm.rule.parts.push_back(std::move(part));
        }
        if (s != 0)
            vm.rule.parts.push_back(
                RcPolyCoord{c, {0, floor_mod(-s, p)}, uinv});
        out.coords.push_back(std::move(vm));
    }
    return out;
}

}  // namespace diffsets
