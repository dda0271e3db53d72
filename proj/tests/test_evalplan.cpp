#include "doctest.h"

#include "diffsets/evalplan.hpp"
#include "diffsets/rng.hpp"

using namespace diffsets;

namespace {

std::vector<RingElem> random_point(const ModulusPtr& m, int nvars, SeededRng& rng) {
    std::vector<RingElem> out;
    for (int v = 0; v < nvars; ++v) {
        std::vector<i64> r(m->size());
        for (std::size_t c = 0; c < m->size(); ++c) r[c] = rng.below(m->prime(c));
        out.emplace_back(m, std::move(r));
    }
    return out;
}

ConstructedMap zero_map(const ModulusPtr& m) {
    ConstructedMap cm;
    for (std::size_t c = 0; c < m->size(); ++c) cm.coords.push_back(VarMap::zero(c));
    return cm;
}

}  // namespace

TEST_CASE("plan evaluation matches the naive evaluator") {
    auto m = make_modulus({5, 7, 11});
    Expression e = parse_expression("a(x)*b(y) + (a(x)+x)*(b(y)+y) + 2*a(x) + x + b(y) + 3*y");
    SeededRng rng(99);
    MapSet maps;
    // structured maps covering every component kind
    ConstructedMap ax, by;
    for (std::size_t c = 0; c < 3; ++c) {
        VarMap vm;
        vm.target = c;
        vm.rule.parts.push_back(RcConst{static_cast<i64>(c + 1)});
        vm.rule.parts.push_back(RcPolyCoord{(c + 1) % 3, {1, 2, 1}, 3});
        vm.rule.parts.push_back(RcLiftSum{{{0, 5}, {2, -3}}, 1});
        ax.coords.push_back(vm);

        VarMap wm;
        wm.target = c;
        std::vector<i64> table(static_cast<std::size_t>(m->prime(c)));
        for (auto& t : table) t = rng.below(m->prime(c));
        wm.rule.parts.push_back(RcTable{c, std::move(table)});
        wm.rule.parts.push_back(RcPolyCoord{c, {0, 4}, 1});
        by.coords.push_back(wm);
    }
    maps[0] = ax;
    maps[1] = by;

    EvalPlan plan(e, maps, m);
    for (int trial = 0; trial < 200; ++trial) {
        auto point = random_point(m, 2, rng);
        CHECK(plan.eval(point) == evaluate_naive(e, maps, m, point));
    }
}

TEST_CASE("evaluate spot values") {
    auto m = make_modulus({7});
    // alpha = negation makes a(x)+x identically zero
    Expression e = parse_expression("a(x) + x");
    MapSet maps;
    maps[0] = ConstructedMap{{VarMap::affine(0, -1, 0)}};
    for (i64 x = 0; x < 7; ++x) {
        RingElem xe(m, {x});
        CHECK(evaluate_naive(e, maps, m, {xe}).residue(0) == 0);
    }

    Expression prod = parse_expression("a(x)*b(y)");
    MapSet pm;
    pm[0] = zero_map(m);
    pm[1] = ConstructedMap{{VarMap::affine(0, 3, 1)}};
    SeededRng rng(5);
    for (int t = 0; t < 20; ++t) {
        RingElem xe(m, {rng.below(7)}), ye(m, {rng.below(7)});
        CHECK(evaluate_naive(prod, pm, m, {xe, ye}).residue(0) == 0);
    }
}

TEST_CASE("modulus mismatch is an error") {
    auto m = make_modulus({5, 7});
    auto m2 = make_modulus({5, 11});
    Expression e = parse_expression("a(x) + x");
    MapSet maps;
    maps[0] = zero_map(m);
    RingElem x(m2, {1, 1});
    CHECK_THROWS_AS(evaluate_naive(e, maps, m, {x}), precondition_error);
}

TEST_CASE("footprint drops cancelled linear reads") {
    // Hand-built identification maps: coordinate 0 reads x0 and y1 only,
    // coordinate 1 reads x0 and y1 only, exactly like the two-prime
    // identification construction.
    auto m = make_modulus({5, 7});
    i64 l1 = 1, m1 = 1, l2 = 1, m2 = 1;
    Expression e = parse_expression("a(x)*b(y) + a(x) + x + b(y) + y");

    MapSet maps;
    ConstructedMap alpha, beta;
    // alpha: zero at coord 0; at coord 1: -(m2*mod(x0) + m1*x1) / l1
    alpha.coords.push_back(VarMap::zero(0));
    {
        VarMap vm;
        vm.target = 1;
        i64 inv = inverse_mod(l1, 7);
        vm.rule.parts.push_back(RcPolyCoord{0, {0, m2}, floor_mod(-inv, 7)});
        vm.rule.parts.push_back(RcPolyCoord{1, {0, m1}, floor_mod(-inv, 7)});
        beta.coords.push_back(VarMap::zero(1));  // placeholder, replaced below
        alpha.coords.push_back(vm);
    }
    beta.coords.clear();
    {
        VarMap vm;
        vm.target = 0;
        i64 inv = inverse_mod(l2, 5);
        vm.rule.parts.push_back(RcPolyCoord{1, {0, m1}, floor_mod(-inv, 5)});
        vm.rule.parts.push_back(RcPolyCoord{0, {0, m2}, floor_mod(-inv, 5)});
        beta.coords.push_back(vm);
        beta.coords.push_back(VarMap::zero(1));
    }
    maps[0] = alpha;
    maps[1] = beta;

    EvalPlan plan(e, maps, m);
    auto fp = plan.footprint_per_var();
    CHECK(fp[0] == std::set<std::size_t>{0});
    CHECK(fp[1] == std::set<std::size_t>{1});

    // the reduced reads stay sound: plan eval equals naive eval
    SeededRng rng(17);
    for (int t = 0; t < 100; ++t) {
        auto point = random_point(m, 2, rng);
        CHECK(plan.eval(point) == evaluate_naive(e, maps, m, point));
    }
}
