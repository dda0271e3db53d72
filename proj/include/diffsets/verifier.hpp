#pragma once

#include <optional>
#include <string>

#include "diffsets/certificate.hpp"
#include "diffsets/evalplan.hpp"
#include "diffsets/rng.hpp"

namespace diffsets {

struct ImageReport {
    std::string mode;  // "exhaustive" | "sampled"
    BigInt domain_size = 0;
    BigInt image_size = 0;       // exact in exhaustive mode
    i64 violations = 0;          // certificate violations observed
    std::optional<std::vector<i64>> violation_witness;  // packed sample point residues
    BigInt claimed_size = 0;
    double wall_seconds = 0;
    bool pass = true;
};

struct VerifyBudget {
    BigInt max_points = 100000000;  // reduced-footprint enumeration cap
    int threads = 0;                // 0 = hardware choice
};

// Exact image size over the reduced footprint; output coordinates that share
// no reads are enumerated independently and the image size is the product of
// the class image sizes. Optionally checks every value against a certificate
// (joint enumeration enforced when the certificate is not separable).
ImageReport image_exhaustive(const Expression& e, const MapSet& maps, const ModulusPtr& mod,
                             const Certificate* cert = nullptr, VerifyBudget budget = {});

// Falsification only: N uniform samples, each checked against the certificate.
ImageReport image_sampled(const Expression& e, const MapSet& maps, const ModulusPtr& mod,
                          const Certificate& cert, i64 samples, SeededRng& rng);

// --- explicit subsets of Z_q (q a plain machine modulus) --------------------

class SetZq {
public:
    explicit SetZq(i64 q);
    i64 q() const { return q_; }
    void add(i64 x) { bits_[static_cast<std::size_t>(x >> 6)] |= u64{1} << (x & 63); }
    bool contains(i64 x) const {
        return (bits_[static_cast<std::size_t>(x >> 6)] >> (x & 63)) & 1;
    }
    i64 count() const;
    bool full() const { return count() == q_; }
    std::vector<i64> elements() const;

    static SetZq from_elements(i64 q, const std::vector<i64>& elems);

private:
    i64 q_;
    std::vector<u64> bits_;
};

SetZq difference_set(const SetZq& a);
SetZq sumset(const SetZq& a, const SetZq& b);
SetZq iterated_sumset(const SetZq& start, const SetZq& a, int k);  // start + k-fold a
SetZq product_set(const SetZq& a);
// {a1*a2 + ... + a_{2l-1}a_{2l} + b_1 + ... + b_k}
SetZq l_sq_plus_k(const SetZq& a, int l, int k);

bool verify_cover_explicit(const SetZq& a);

// Exact union-bound density accounting from a family of certificates over a
// common modulus: sum of claimed_size_i / q, exact rational.
BigRat density_from_certificates(const std::vector<Certificate>& certs);

// Exact minimum of |Im(alpha(x)*beta(y) + x + y)| over all map pairs on
// Z_{p*q}; feasible only for p*q <= 6.
struct MinImageResult {
    i64 minimum = 0;
    i64 maximum_checked = 0;   // image size with constant maps (upper witness)
    BigInt pairs_considered = 0;
};
MinImageResult min_image_experiment(i64 p, i64 q);

}  // namespace diffsets
