#pragma once

#include <random>
#include <string>

#include "diffsets/common.hpp"

namespace diffsets {

// Seed + generator tag. mt19937_64's output stream is fully pinned by the
// standard, so identical specs reproduce constructions bit-for-bit anywhere.
struct RngSpec {
    u64 seed = 0;
    std::string algorithm = "mt19937_64/rejection";
};

struct RetryPolicy {
    int max_retries = 64;  // attempts; reseed rule is seed + attempt index
};

class SeededRng {
public:
    explicit SeededRng(u64 seed) : engine_(seed) {}
    explicit SeededRng(const RngSpec& spec) : engine_(spec.seed) {}

    u64 next() { return engine_(); }

    // Uniform in [0, n) by rejection; avoids distribution objects whose output
    // is implementation-defined.
    i64 below(i64 n) {
        u64 un = static_cast<u64>(n);
        u64 limit = ~u64{0} - (~u64{0} % un);
        u64 v;
        do { v = engine_(); } while (v >= limit);
        return static_cast<i64>(v % un);
    }

    // Uniform on [0, n) \ {excluded}.
    i64 below_excluding(i64 n, i64 excluded) {
        i64 v = below(n - 1);
        return v >= excluded ? v + 1 : v;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace diffsets
