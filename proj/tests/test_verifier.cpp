#include "doctest.h"

#include "diffsets/verifier.hpp"

using namespace diffsets;

namespace {

std::vector<i64> naive_difference(const std::vector<i64>& a, i64 q) {
    std::vector<char> hit(static_cast<std::size_t>(q), 0);
    for (i64 x : a)
        for (i64 y : a) hit[static_cast<std::size_t>(floor_mod(x - y, q))] = 1;
    std::vector<i64> out;
    for (i64 v = 0; v < q; ++v)
        if (hit[static_cast<std::size_t>(v)]) out.push_back(v);
    return out;
}

std::vector<i64> naive_lsqk(const std::vector<i64>& a, i64 q, int l, int k) {
    std::vector<i64> acc{0};
    auto fold = [&](auto&& values) {
        std::vector<char> hit(static_cast<std::size_t>(q), 0);
        for (i64 s : acc)
            for (i64 v : values) hit[static_cast<std::size_t>(add_mod(s, v, q))] = 1;
        acc.clear();
        for (i64 v = 0; v < q; ++v)
            if (hit[static_cast<std::size_t>(v)]) acc.push_back(v);
    };
    std::vector<i64> prods;
    {
        std::vector<char> hit(static_cast<std::size_t>(q), 0);
        for (i64 x : a)
            for (i64 y : a) hit[static_cast<std::size_t>(mul_mod(x, y, q))] = 1;
        for (i64 v = 0; v < q; ++v)
            if (hit[static_cast<std::size_t>(v)]) prods.push_back(v);
    }
    for (int i = 0; i < l; ++i) fold(prods);
    for (int i = 0; i < k; ++i) fold(a);
    return acc;
}

}  // namespace

TEST_CASE("sumset engine basics") {
    SetZq a = SetZq::from_elements(5, {0, 1});
    CHECK(difference_set(a).elements() == std::vector<i64>{0, 1, 4});
    CHECK(sumset(a, a).elements() == std::vector<i64>{0, 1, 2});
    SetZq b = SetZq::from_elements(7, {1, 2});
    CHECK(product_set(b).elements() == std::vector<i64>{1, 2, 4});
    SetZq full(11);
    for (i64 v = 0; v < 11; ++v) full.add(v);
    for (int k = 1; k <= 3; ++k) CHECK(l_sq_plus_k(full, 0, k).full());
    CHECK(verify_cover_explicit(full));
    CHECK_FALSE(verify_cover_explicit(SetZq::from_elements(5, {0})));
    CHECK(verify_cover_explicit(SetZq::from_elements(5, {0, 1, 2, 3, 4})));
}

TEST_CASE("sumset engine matches naive loops on random sets") {
    SeededRng rng(123);
    for (int trial = 0; trial < 1000; ++trial) {
        i64 q = 2 + rng.below(999);
        i64 size = 1 + rng.below(std::min<i64>(q, 50));
        std::vector<i64> elems;
        for (i64 i = 0; i < size; ++i) elems.push_back(rng.below(q));
        SetZq a = SetZq::from_elements(q, elems);
        auto sorted = a.elements();

        CHECK(difference_set(a).elements() == naive_difference(sorted, q));
        int l = static_cast<int>(rng.below(3));
        int k = static_cast<int>(rng.below(3));
        if (l + k == 0) k = 1;
        CHECK(l_sq_plus_k(a, l, k).elements() == naive_lsqk(sorted, q, l, k));
    }
}

TEST_CASE("image enumeration with certificates") {
    auto m = make_modulus({7});
    Expression e = parse_expression("a(x) + x");
    MapSet maps;
    maps[0] = ConstructedMap{{VarMap::affine(0, -1, 0)}};

    auto cert = Certificate::singleton(m, RingElem::zero(m));
    auto report = image_exhaustive(e, maps, m, &cert);
    CHECK(report.image_size == 1);
    CHECK(report.violations == 0);
    CHECK(report.pass);

    // deliberately corrupted map: violations appear with a witness
    MapSet bad;
    bad[0] = ConstructedMap{{VarMap::affine(0, -1, 1)}};
    auto bad_report = image_exhaustive(e, bad, m, &cert);
    CHECK(bad_report.violations > 0);
    CHECK(bad_report.violation_witness.has_value());
    CHECK_FALSE(bad_report.pass);
}

TEST_CASE("footprint-reduced enumeration equals full-domain enumeration") {
    // maps whose footprint analysis prunes reads; compare against a full
    // odometer over the whole domain
    auto m = make_modulus({5, 7});
    Expression e = parse_expression("a(x)*b(y) + a(x) + x + b(y) + y");
    MapSet maps;
    ConstructedMap alpha, beta;
    alpha.coords.push_back(VarMap::zero(0));
    {
        VarMap vm;
        vm.target = 1;
        vm.rule.parts.push_back(RcPolyCoord{0, {0, 1}, floor_mod(-1, 7)});
        vm.rule.parts.push_back(RcPolyCoord{1, {0, 1}, floor_mod(-1, 7)});
        alpha.coords.push_back(vm);
    }
    {
        VarMap vm;
        vm.target = 0;
        vm.rule.parts.push_back(RcPolyCoord{1, {0, 1}, floor_mod(-1, 5)});
        vm.rule.parts.push_back(RcPolyCoord{0, {0, 1}, floor_mod(-1, 5)});
        beta.coords.push_back(vm);
        beta.coords.push_back(VarMap::zero(1));
    }
    maps[0] = alpha;
    maps[1] = beta;

    auto report = image_exhaustive(e, maps, m);
    CHECK(report.domain_size == 35);  // reduced from 35^2

    std::set<std::vector<i64>> full_image;
    for (i64 x0 = 0; x0 < 5; ++x0)
        for (i64 x1 = 0; x1 < 7; ++x1)
            for (i64 y0 = 0; y0 < 5; ++y0)
                for (i64 y1 = 0; y1 < 7; ++y1) {
                    std::vector<RingElem> point{RingElem(m, {x0, x1}), RingElem(m, {y0, y1})};
                    full_image.insert(evaluate_naive(e, maps, m, point).residues());
                }
    CHECK(report.image_size == BigInt(full_image.size()));
}

TEST_CASE("parallel and sequential enumeration agree") {
    auto m = make_modulus({101, 103});
    Expression e = parse_expression("a(x)*b(y) + x + y");
    MapSet maps;
    maps[0] = ConstructedMap{{VarMap::affine(0, 2, 1), VarMap::affine(1, 3, 4)}};
    maps[1] = ConstructedMap{{VarMap::affine(0, 5, 6), VarMap::affine(1, 7, 8)}};
    VerifyBudget seq;
    seq.threads = 1;
    VerifyBudget par;
    par.threads = 4;
    auto r1 = image_exhaustive(e, maps, m, nullptr, seq);
    auto r2 = image_exhaustive(e, maps, m, nullptr, par);
    CHECK(r1.image_size == r2.image_size);
    CHECK(r1.domain_size == r2.domain_size);
}

TEST_CASE("budget exceeded instructs sampled mode") {
    auto m = make_modulus({101, 103});
    Expression e = parse_expression("a(x)*b(y) + x + y");
    MapSet maps;
    maps[0] = ConstructedMap{{VarMap::affine(0, 2, 1), VarMap::affine(1, 3, 4)}};
    maps[1] = ConstructedMap{{VarMap::affine(0, 5, 6), VarMap::affine(1, 7, 8)}};
    VerifyBudget tiny;
    tiny.max_points = 100;
    CHECK_THROWS_AS(image_exhaustive(e, maps, m, nullptr, tiny), budget_exceeded_error);
}

TEST_CASE("sampled mode re-checks exhaustively verified builds") {
    auto m = make_modulus({7});
    Expression e = parse_expression("a(x) + x");
    MapSet maps;
    maps[0] = ConstructedMap{{VarMap::affine(0, -1, 0)}};
    auto cert = Certificate::singleton(m, RingElem::zero(m));
    SeededRng rng(42);
    auto report = image_sampled(e, maps, m, cert, 500, rng);
    CHECK(report.violations == 0);
    CHECK(report.pass);
}

TEST_CASE("certificate kinds: passing and failing fixtures") {
    auto m = make_modulus({5, 7});
    RingElem good(m, {1, 2});
    RingElem other(m, {2, 2});

    auto exact = Certificate::singleton(m, good);
    CHECK(exact.check(good));
    CHECK_FALSE(exact.check(other));
    CHECK(exact.claimed_size() == 1);

    auto interval = Certificate::interval(m, CertInterval{0, -2, 2});
    CHECK(interval.check(RingElem::from_integer(m, -2)));
    CHECK(interval.check(RingElem::from_integer(m, 2)));
    CHECK_FALSE(interval.check(RingElem::from_integer(m, 3)));
    CHECK(interval.claimed_size() == 5);

    CertPerCoordinate pc;
    pc.allowed = {{0, 1}, {2, 3}};
    auto per = Certificate::per_coordinate(m, pc);
    CHECK(per.check(good));
    CHECK_FALSE(per.check(other));
    CHECK(per.claimed_size() == 4);

    CertLinearFunctional lf;
    lf.weights = {1, 1};
    lf.allowed_int = {3};
    lf.claimed = 5;
    auto fun = Certificate::linear_functional(m, lf);
    CHECK(fun.check(good));       // 1 + 2 = 3
    CHECK_FALSE(fun.check(other));  // 2 + 2 = 4
    CHECK(fun.claimed_size() == 5);

    CertLinearFunctional rf;
    rf.target = 0;
    rf.weights = {1, 1};
    rf.allowed_res = std::vector<char>(5, 0);
    rf.allowed_res[3] = 1;
    rf.claimed = 7;
    auto resfun = Certificate::linear_functional(m, rf);
    CHECK(resfun.check(good));      // (1 + 2) mod 5 = 3
    CHECK_FALSE(resfun.check(other));

    CertAvoidedValues av;
    av.avoided.insert(other.residues());
    auto avoid = Certificate::avoided_values(m, av);
    CHECK(avoid.check(good));
    CHECK_FALSE(avoid.check(other));
    CHECK(avoid.claimed_size() == 35 - 1);

    auto sub = std::make_shared<Certificate>(
        Certificate::singleton(make_modulus({5}), RingElem(make_modulus({5}), {1})));
    CertBlockProduct bp;
    bp.blocks.emplace_back(std::vector<std::size_t>{0}, sub);
    auto block = Certificate::block_product(m, bp);
    CHECK(block.check(good));
    CHECK_FALSE(block.check(other));

    auto size_only = Certificate::size_bound_only(m, 10);
    CHECK(size_only.check(good));
    CHECK(size_only.claimed_size() == 10);
}

TEST_CASE("density accounting") {
    auto m = make_modulus({5, 7});
    std::vector<Certificate> certs{Certificate::singleton(m, RingElem::zero(m))};
    CHECK(density_from_certificates(certs) == BigRat(1, 35));
}

TEST_CASE("minimum image experiment at (2,3)") {
    auto res = min_image_experiment(2, 3);
    CHECK(res.minimum >= 2);
    CHECK(res.maximum_checked == 6);
    CHECK_THROWS_AS(min_image_experiment(3, 5), precondition_error);
}
