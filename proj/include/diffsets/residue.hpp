#pragma once

#include <memory>
#include <vector>

#include "diffsets/common.hpp"

namespace diffsets {

// An odd prime modulus coordinate. Primality is checked at construction.
class Prime {
public:
    explicit Prime(i64 value);
    i64 value() const { return value_; }
    friend bool operator==(const Prime&, const Prime&) = default;

private:
    i64 value_;
};

// pi_p: Z -> Z_p, floored reduction so negative integers reduce correctly.
inline i64 project(i64 z, i64 p) { return floor_mod(z, p); }
inline i64 project(i64 z, const Prime& p) { return floor_mod(z, p.value()); }

// iota_p: Z_p -> Z, the representative in [0, p). Residues are stored
// canonically, so this is the identity on the stored value.
inline i64 lift(i64 x) { return x; }

// Representative in (-p/2, p/2].
inline i64 centered_lift(i64 x, i64 p) { return 2 * x > p ? x - p : x; }

// mod_{p,p'} = pi_{p'} . iota_p.
inline i64 mod_between(i64 x, i64 /*p_from*/, i64 p_to) { return floor_mod(x, p_to); }

// An ordered list of distinct odd primes; Z_q is always the direct sum of the
// coordinate rings. q itself is computed lazily (staged builds have ~10^5
// coordinates and the product is only ever reported, never computed with).
class Modulus {
public:
    // max_declared_coefficient: the largest |coefficient| of the construction
    // this modulus serves; every prime must exceed it.
    explicit Modulus(std::vector<i64> primes, i64 max_declared_coefficient = 0);

    std::size_t size() const { return primes_.size(); }
    i64 prime(std::size_t i) const { return primes_[i]; }
    const std::vector<i64>& primes() const { return primes_; }

    BigInt product() const;
    double bit_size() const;

    friend bool operator==(const Modulus& a, const Modulus& b) { return a.primes_ == b.primes_; }

private:
    std::vector<i64> primes_;
};

using ModulusPtr = std::shared_ptr<const Modulus>;

ModulusPtr make_modulus(std::vector<i64> primes, i64 max_declared_coefficient = 0);

// One residue per prime coordinate, each reduced into [0, p_i).
class RingElem {
public:
    RingElem(ModulusPtr modulus, std::vector<i64> residues);

    static RingElem zero(ModulusPtr modulus);
    static RingElem from_integer(ModulusPtr modulus, i64 z);

    const ModulusPtr& modulus() const { return modulus_; }
    std::size_t size() const { return residues_.size(); }
    i64 residue(std::size_t i) const { return residues_[i]; }
    const std::vector<i64>& residues() const { return residues_; }

    RingElem add(const RingElem& other) const;
    RingElem sub(const RingElem& other) const;
    RingElem mul(const RingElem& other) const;
    RingElem neg() const;
    // Coordinatewise inverse via extended Euclid; throws non_invertible_error
    // naming the first zero coordinate.
    RingElem inverse() const;

    friend bool operator==(const RingElem& a, const RingElem& b) {
        return *a.modulus_ == *b.modulus_ && a.residues_ == b.residues_;
    }

private:
    void check_same_modulus(const RingElem& other) const;

    ModulusPtr modulus_;
    std::vector<i64> residues_;
};

RingElem operator+(const RingElem& a, const RingElem& b);
RingElem operator-(const RingElem& a, const RingElem& b);
RingElem operator*(const RingElem& a, const RingElem& b);

}  // namespace diffsets
