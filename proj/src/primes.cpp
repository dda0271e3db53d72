#include "diffsets/primes.hpp"

namespace diffsets {

namespace {

i64 mulmod_u(u64 a, u64 b, u64 m) {
    return static_cast<i64>((static_cast<unsigned __int128>(a) * b) % m);
}

u64 powmod_u(u64 base, u64 exp, u64 m) {
    u64 result = 1;
    base %= m;
    while (exp > 0) {
        if (exp & 1) result = static_cast<u64>(mulmod_u(result, base, m));
        base = static_cast<u64>(mulmod_u(base, base, m));
        exp >>= 1;
    }
    return result;
}

}  // namespace

bool is_prime(i64 n) {
    if (n < 2) return false;
    for (i64 p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (n % p == 0) return n == p;
    }
    u64 d = static_cast<u64>(n - 1);
    int r = 0;
    while ((d & 1) == 0) { d >>= 1; ++r; }
    // Sufficient witness set for all n < 3.3 * 10^24.
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = powmod_u(a, d, static_cast<u64>(n));
        if (x == 1 || x == static_cast<u64>(n - 1)) continue;
        bool composite = true;
        for (int i = 0; i < r - 1; ++i) {
            x = static_cast<u64>(mulmod_u(x, x, static_cast<u64>(n)));
            if (x == static_cast<u64>(n - 1)) { composite = false; break; }
        }
        if (composite) return false;
    }
    return true;
}

std::vector<i64> primes_in_window(i64 lo, i64 hi) {
    std::vector<i64> out;
    for (i64 n = lo + 1; n < hi; ++n)
        if (is_prime(n)) out.push_back(n);
    return out;
}

std::vector<i64> primes_above(i64 floor, std::size_t count) {
    std::vector<i64> out;
    i64 n = floor;
    while (out.size() < count) {
        ++n;
        if (is_prime(n)) out.push_back(n);
    }
    return out;
}

i64 next_prime_above(i64 floor) {
    i64 n = floor;
    while (!is_prime(++n)) {}
    return n;
}

std::vector<i64> sieve_primes(i64 limit) {
    std::vector<bool> composite(static_cast<std::size_t>(limit) + 1, false);
    std::vector<i64> out;
    for (i64 i = 2; i <= limit; ++i) {
        if (!composite[static_cast<std::size_t>(i)]) {
            out.push_back(i);
            for (i64 j = i * i; j <= limit; j += i)
                composite[static_cast<std::size_t>(j)] = true;
        }
    }
    return out;
}

}  // namespace diffsets
