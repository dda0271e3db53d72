#pragma once

#include <vector>

#include "diffsets/common.hpp"

namespace diffsets {

// Deterministic Miller-Rabin, valid for all 64-bit inputs.
bool is_prime(i64 n);

// Primes in (lo, hi), ascending. Exclusive bounds to match window notation.
std::vector<i64> primes_in_window(i64 lo, i64 hi);

// First `count` primes strictly greater than `floor`, ascending.
std::vector<i64> primes_above(i64 floor, std::size_t count);

i64 next_prime_above(i64 floor);

// Simple sieve, for bulk prime harvesting (assembler-scale needs ~10^6 primes).
std::vector<i64> sieve_primes(i64 limit);

}  // namespace diffsets
