#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace diffsets {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// Error raised when an operation's stated precondition is violated.
struct precondition_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when inverting a ring element with a zero coordinate; carries the
// offending coordinate index.
struct non_invertible_error : std::domain_error {
    std::size_t coordinate;
    explicit non_invertible_error(std::size_t coord)
        : std::domain_error("element not invertible at coordinate " + std::to_string(coord)),
          coordinate(coord) {}
};

// Raised when an enumeration/verification domain exceeds the configured budget.
struct budget_exceeded_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline i64 floor_mod(i64 z, i64 m) {
    i64 r = z % m;
    return r < 0 ? r + m : r;
}

// a*b mod m for 0 <= a,b < m < 2^31 fits in i64; guard larger inputs through
// 128-bit intermediates anyway.
inline i64 mul_mod(i64 a, i64 b, i64 m) {
    return static_cast<i64>((static_cast<__int128>(a) * b) % m);
}

inline i64 add_mod(i64 a, i64 b, i64 m) {
    i64 s = a + b;
    return s >= m ? s - m : s;
}

inline i64 sub_mod(i64 a, i64 b, i64 m) {
    i64 s = a - b;
    return s < 0 ? s + m : s;
}

// Extended Euclid; returns g = gcd(a, m). On g == 1 *inv is a^{-1} mod m.
inline i64 inverse_mod_checked(i64 a, i64 m, i64* inv) {
    i64 old_r = floor_mod(a, m), r = m;
    i64 old_s = 1, s = 0;
    while (r != 0) {
        i64 q = old_r / r;
        i64 t = old_r - q * r; old_r = r; r = t;
        t = old_s - q * s; old_s = s; s = t;
    }
    if (inv) *inv = floor_mod(old_s, m);
    return old_r;
}

inline i64 inverse_mod(i64 a, i64 m) {
    i64 inv = 0;
    if (inverse_mod_checked(a, m, &inv) != 1)
        throw non_invertible_error(0);
    return inv;
}

inline i64 pow_mod(i64 base, i64 exp, i64 m) {
    i64 result = 1;
    base = floor_mod(base, m);
    while (exp > 0) {
        if (exp & 1) result = mul_mod(result, base, m);
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    return result;
}

}  // namespace diffsets
