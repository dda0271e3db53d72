#include "diffsets/evalplan.hpp"

#include <algorithm>

namespace diffsets {

namespace {

const ConstructedMap& map_for(const MapSet& maps, int var) {
    auto it = maps.find(var);
    if (it == maps.end())
        throw precondition_error("no constructed map for variable " + std::to_string(var));
    return it->second;
}

// nullopt unless every component of the rule is a constant
std::optional<i64> rule_constant(const RuleSum& rule, i64 p) {
    i64 acc = 0;
    for (const auto& part : rule.parts) {
        const auto* c = std::get_if<RcConst>(&part);
        if (!c) return std::nullopt;
        acc = add_mod(acc, floor_mod(c->value, p), p);
    }
    return acc;
}

}  // namespace

i64 evaluate_naive_coord(const Expression& e, const MapSet& maps, const Modulus& mod,
                         std::size_t coord, const Point& point) {
    i64 p = mod.prime(coord);
    std::vector<i64> mapval(static_cast<std::size_t>(e.num_vars()));
    for (int v = 0; v < e.num_vars(); ++v) {
        const auto& cm = map_for(maps, v);
        mapval[static_cast<std::size_t>(v)] =
            eval_varmap(cm.coords[coord], mod, point[static_cast<std::size_t>(v)]);
    }
    auto atom_value = [&](const Atom& a) {
        i64 m = mul_mod(floor_mod(a.scale, p), mapval[static_cast<std::size_t>(a.var)], p);
        i64 s = mul_mod(floor_mod(a.shift, p),
                        point[static_cast<std::size_t>(a.var)][coord], p);
        return add_mod(m, s, p);
    };
    i64 acc = floor_mod(e.constant, p);
    for (const auto& t : e.terms) {
        i64 prod = floor_mod(t.coeff, p);
        for (const auto& a : t.factors) prod = mul_mod(prod, atom_value(a), p);
        acc = add_mod(acc, prod, p);
    }
    for (int v = 0; v < e.num_vars(); ++v) {
        const auto& le = e.linear[static_cast<std::size_t>(v)];
        if (le.lambda != 0)
            acc = add_mod(acc,
                          mul_mod(floor_mod(le.lambda, p), mapval[static_cast<std::size_t>(v)], p),
                          p);
        if (le.mu != 0)
            acc = add_mod(
                acc,
                mul_mod(floor_mod(le.mu, p), point[static_cast<std::size_t>(v)][coord], p), p);
    }
    return acc;
}

RingElem evaluate_naive(const Expression& e, const MapSet& maps, const ModulusPtr& mod,
                        const std::vector<RingElem>& point) {
    Point raw;
    raw.reserve(point.size());
    for (const auto& pe : point) {
        if (!(*pe.modulus() == *mod)) throw precondition_error("point modulus mismatch");
        raw.push_back(pe.residues());
    }
    std::vector<i64> out(mod->size());
    for (std::size_t c = 0; c < mod->size(); ++c)
        out[c] = evaluate_naive_coord(e, maps, *mod, c, raw);
    return RingElem(mod, std::move(out));
}

EvalPlan::EvalPlan(const Expression& e, const MapSet& maps, ModulusPtr mod)
    : modulus_(std::move(mod)), num_vars_(e.num_vars()) {
    const Modulus& m = *modulus_;
    coords_.resize(m.size());
    for (std::size_t c = 0; c < m.size(); ++c) {
        i64 p = m.prime(c);
        CoordPlan& plan = coords_[c];
        std::map<int, i64> linear;
        std::map<std::tuple<int, std::size_t, std::vector<i64>>, i64> modreads;

        // multiplier * (rule value) folded into the ledgers
        auto fold_rule = [&](int var, const RuleSum& rule, i64 mult) {
            for (const auto& part : rule.parts) {
                if (const auto* rc = std::get_if<RcConst>(&part)) {
                    plan.const_acc = add_mod(plan.const_acc,
                                             mul_mod(mult, floor_mod(rc->value, p), p), p);
                } else if (const auto* pc = std::get_if<RcPolyCoord>(&part)) {
                    i64 outer = mul_mod(mult, floor_mod(pc->outer, p), p);
                    if (outer == 0) continue;
                    bool own = pc->src == c;
                    bool affine = pc->poly.size() <= 2;
                    if (own && affine) {
                        if (pc->poly.size() >= 1)
                            plan.const_acc = add_mod(
                                plan.const_acc, mul_mod(outer, floor_mod(pc->poly[0], p), p), p);
                        if (pc->poly.size() == 2)
                            linear[var] = add_mod(linear[var],
                                                  mul_mod(outer, floor_mod(pc->poly[1], p), p), p);
                    } else {
                        std::vector<i64> key = pc->poly;
                        i64 ps = m.prime(pc->src);
                        for (auto& cf : key) cf = floor_mod(cf, ps);
                        auto idx = std::make_tuple(var, pc->src, std::move(key));
                        modreads[idx] = add_mod(modreads[idx], outer, p);
                    }
                } else if (const auto* ls = std::get_if<RcLiftSum>(&part)) {
                    i64 outer = mul_mod(mult, floor_mod(ls->outer, p), p);
                    if (outer == 0) continue;
                    for (auto [coord, w] : ls->weights) {
                        i64 coeff = mul_mod(outer, floor_mod(w, p), p);
                        if (coeff == 0) continue;
                        if (coord == c) {
                            linear[var] = add_mod(linear[var], coeff, p);
                        } else {
                            auto idx = std::make_tuple(var, coord, std::vector<i64>{0, 1});
                            modreads[idx] = add_mod(modreads[idx], coeff, p);
                        }
                    }
                } else {
                    plan.opaques.push_back(Opaque{var, part, mult});
                }
            }
        };

        // expression constant and linear part
        plan.const_acc = floor_mod(e.constant, p);
        for (int v = 0; v < e.num_vars(); ++v) {
            const auto& le = e.linear[static_cast<std::size_t>(v)];
            if (le.lambda != 0)
                fold_rule(v, map_for(maps, v).coords[c].rule, floor_mod(le.lambda, p));
            if (le.mu != 0) linear[v] = add_mod(linear[v], floor_mod(le.mu, p), p);
        }

        // quadratic (and higher single-variable) terms
        for (const auto& t : e.terms) {
            i64 coeff = floor_mod(t.coeff, p);
            std::vector<const Atom*> open;
            i64 const_prod = 1;
            bool zero = coeff == 0;
            for (const auto& a : t.factors) {
                const auto& rule = map_for(maps, a.var).coords[c].rule;
                auto kappa = rule_constant(rule, p);
                if (kappa && floor_mod(a.shift, p) == 0) {
                    i64 av = mul_mod(floor_mod(a.scale, p), *kappa, p);
                    if (av == 0) { zero = true; break; }
                    const_prod = mul_mod(const_prod, av, p);
                } else {
                    open.push_back(&a);
                }
            }
            if (zero) continue;
            i64 scaled = mul_mod(coeff, const_prod, p);
            if (open.empty()) {
                plan.const_acc = add_mod(plan.const_acc, scaled, p);
            } else if (open.size() == 1) {
                const Atom& a = *open.front();
                i64 u = mul_mod(scaled, floor_mod(a.scale, p), p);
                if (u != 0) fold_rule(a.var, map_for(maps, a.var).coords[c].rule, u);
                i64 s = mul_mod(scaled, floor_mod(a.shift, p), p);
                if (s != 0) linear[a.var] = add_mod(linear[a.var], s, p);
            } else {
                Product prod;
                prod.coeff = scaled;
                for (const Atom* a : open)
                    prod.factors.push_back(ProdFactor{*a, &map_for(maps, a->var)});
                plan.products.push_back(std::move(prod));
            }
        }

        for (auto& [v, coeff] : linear)
            if (coeff != 0) plan.linear.emplace_back(v, coeff);
        for (auto& [key, coeff] : modreads)
            if (coeff != 0)
                plan.modreads.push_back(
                    ModRead{std::get<0>(key), std::get<1>(key), std::get<2>(key), coeff});

        // footprint
        std::set<std::pair<int, std::size_t>> reads;
        for (auto& [v, coeff] : plan.linear) reads.emplace(v, c);
        for (auto& mr : plan.modreads) reads.emplace(mr.var, mr.src);
        for (auto& op : plan.opaques) {
            RuleSum wrap;
            wrap.parts.push_back(op.comp);
            for (auto rd : rule_reads(wrap)) reads.emplace(op.var, rd);
        }
        for (auto& prod : plan.products) {
            for (auto& f : prod.factors) {
                if (floor_mod(f.atom.shift, p) != 0) reads.emplace(f.atom.var, c);
                for (auto rd : rule_reads(f.map->coords[c].rule)) reads.emplace(f.atom.var, rd);
            }
        }
        plan.reads.assign(reads.begin(), reads.end());
    }
}

i64 EvalPlan::eval_coord(std::size_t c, const Point& point) const {
    const Modulus& m = *modulus_;
    i64 p = m.prime(c);
    const CoordPlan& plan = coords_[c];
    i64 acc = plan.const_acc;
    for (auto [v, coeff] : plan.linear)
        acc = add_mod(acc, mul_mod(coeff, point[static_cast<std::size_t>(v)][c], p), p);
    for (const auto& mr : plan.modreads) {
        i64 ps = m.prime(mr.src);
        i64 inner = 0;
        for (auto it = mr.poly.rbegin(); it != mr.poly.rend(); ++it)
            inner = floor_mod(mul_mod(inner, point[static_cast<std::size_t>(mr.var)][mr.src], ps) +
                                  *it,
                              ps);
        acc = add_mod(acc, mul_mod(mr.coeff, floor_mod(inner, p), p), p);
    }
    for (const auto& op : plan.opaques) {
        i64 v = eval_rule_component(op.comp, c, m, point[static_cast<std::size_t>(op.var)]);
        acc = add_mod(acc, mul_mod(op.coeff, v, p), p);
    }
    for (const auto& prod : plan.products) {
        i64 pv = prod.coeff;
        for (const auto& f : prod.factors) {
            i64 mv = eval_varmap(f.map->coords[c], m, point[static_cast<std::size_t>(f.atom.var)]);
            i64 av = add_mod(mul_mod(floor_mod(f.atom.scale, p), mv, p),
                             mul_mod(floor_mod(f.atom.shift, p),
                                     point[static_cast<std::size_t>(f.atom.var)][c], p),
                             p);
            pv = mul_mod(pv, av, p);
        }
        acc = add_mod(acc, pv, p);
    }
    return acc;
}

RingElem EvalPlan::eval(const std::vector<RingElem>& point) const {
    Point raw;
    raw.reserve(point.size());
    for (const auto& pe : point) raw.push_back(pe.residues());
    std::vector<i64> out(modulus_->size());
    for (std::size_t c = 0; c < modulus_->size(); ++c) out[c] = eval_coord(c, raw);
    return RingElem(modulus_, std::move(out));
}

std::vector<std::set<std::size_t>> EvalPlan::footprint_per_var() const {
    std::vector<std::set<std::size_t>> out(static_cast<std::size_t>(num_vars_));
    for (const auto& plan : coords_)
        for (auto [v, coord] : plan.reads) out[static_cast<std::size_t>(v)].insert(coord);
    return out;
}

std::vector<std::vector<std::pair<int, std::size_t>>> dependency_footprint(
    const Expression& e, const MapSet& maps, const ModulusPtr& mod) {
    EvalPlan plan(e, maps, mod);
    std::vector<std::vector<std::pair<int, std::size_t>>> out;
    out.reserve(mod->size());
    for (const auto& cp : plan.coords()) out.push_back(cp.reads);
    return out;
}

}  // namespace diffsets
