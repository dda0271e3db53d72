#include "doctest.h"

#include "diffsets/primes.hpp"
#include "diffsets/residue.hpp"

using namespace diffsets;

TEST_CASE("project and lift basics") {
    CHECK(project(12, 5) == 2);
    CHECK(project(-1, 7) == 6);
    CHECK(project(0, 11) == 0);
    CHECK(lift(project(3, 5)) == 3);
    CHECK(lift(project(0, 7)) == 0);
    CHECK(lift(project(6, 7)) == 6);
    CHECK(centered_lift(6, 7) == -1);
    CHECK(centered_lift(3, 7) == 3);
    CHECK(centered_lift(0, 5) == 0);
}

TEST_CASE("mod_between basics") {
    CHECK(mod_between(3, 5, 7) == 3);
    CHECK(mod_between(6, 7, 5) == 1);
    // carry identity: with p=5, p'=7, x=3, y=4
    i64 carry = mod_between(3, 5, 7) + mod_between(4, 5, 7) - mod_between(project(3 + 4, 5), 5, 7);
    CHECK(carry == project(5, 7));
}

TEST_CASE("lift/project carry identities exhaustively for small primes") {
    auto primes = primes_in_window(2, 48);
    for (i64 p : primes) {
        for (i64 z = -2 * p * p; z <= 2 * p * p; ++z) {
            i64 lp = lift(project(z, p));
            CHECK((lp - z) % p == 0);
            if (z >= 0) CHECK(lp <= z);
        }
        for (i64 x = 0; x < p; ++x)
            for (i64 y = 0; y < p; ++y) {
                i64 v = lift(x) + lift(y) - lift(project(x + y, p));
                CHECK((v == 0 || v == p));
            }
    }
}

TEST_CASE("double-mod composition identity") {
    auto primes = primes_in_window(2, 48);
    for (i64 p1 : primes)
        for (i64 p2 : primes)
            for (i64 p3 : primes) {
                if (p1 == p2 || p2 == p3 || p1 == p3) continue;
                i64 t = (p3 + p2 - 1) / p2;  // ceil(p3/p2), so p3 < (t+1)p2
                for (i64 x = 0; x < p3; ++x) {
                    i64 lhs = mod_between(mod_between(x, p3, p2), p2, p1);
                    i64 rhs = mod_between(x, p3, p1);
                    i64 diff = floor_mod(lhs - rhs, p1);
                    bool ok = false;
                    for (i64 k = 0; k <= t && !ok; ++k)
                        ok = diff == floor_mod(-k * project(p2, p1), p1);
                    CHECK(ok);
                }
            }
}

TEST_CASE("modulus validation") {
    CHECK_THROWS_AS(Modulus({4}), precondition_error);
    CHECK_THROWS_AS(Modulus({5, 5}), precondition_error);
    CHECK_THROWS_AS(Modulus({2, 3}), precondition_error);  // primes must be >= 3
    CHECK_THROWS_AS(Modulus({5, 7}, 6), precondition_error);
    Modulus m({5, 7, 11});
    CHECK(m.product() == 385);
}

TEST_CASE("ring arithmetic in Z_35") {
    auto m = make_modulus({5, 7});
    RingElem a(m, {2, 3});
    RingElem b(m, {3, 5});
    CHECK((a * b).residues() == std::vector<i64>{1, 1});
    RingElem one(m, {1, 1});
    CHECK(one.inverse() == one);
    RingElem bad(m, {0, 3});
    CHECK_THROWS_AS(bad.inverse(), non_invertible_error);
    try {
        bad.inverse();
    } catch (const non_invertible_error& e) {
        CHECK(e.coordinate == 0);
    }
    auto m2 = make_modulus({5, 11});
    RingElem c(m2, {1, 1});
    CHECK_THROWS_AS(a.add(c), precondition_error);
}

TEST_CASE("crt round trip for products of small primes") {
    auto primes = primes_in_window(2, 48);
    for (std::size_t i = 0; i < primes.size(); ++i)
        for (std::size_t j = i + 1; j < primes.size(); j += 3)
            for (std::size_t k = j + 1; k < primes.size(); k += 5) {
                auto m = make_modulus({primes[i], primes[j], primes[k]});
                i64 q = primes[i] * primes[j] * primes[k];
                for (i64 z = 0; z < q; z += 97) {
                    RingElem e = RingElem::from_integer(m, z);
                    // reconstruct by CRT and compare
                    i64 rec = 0;
                    i64 qq = q;
                    for (std::size_t c = 0; c < 3; ++c) {
                        i64 p = m->prime(c);
                        i64 others = qq / p;
                        i64 inv = inverse_mod(floor_mod(others, p), p);
                        rec = floor_mod(rec + e.residue(c) * others % qq * inv % qq, qq);
                    }
                    CHECK(rec == z);
                }
            }
}

TEST_CASE("primality utilities") {
    CHECK(is_prime(2));
    CHECK(is_prime(499));
    CHECK_FALSE(is_prime(1));
    CHECK_FALSE(is_prime(1001));
    CHECK(primes_in_window(100, 200).size() == 21);
    CHECK(next_prime_above(31) == 37);
}
