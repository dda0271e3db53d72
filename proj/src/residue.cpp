#include "diffsets/residue.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "diffsets/primes.hpp"

namespace diffsets {

Prime::Prime(i64 value) : value_(value) {
    if (value < 3) throw precondition_error("prime coordinate must be >= 3");
    if (!is_prime(value)) throw precondition_error("not prime: " + std::to_string(value));
}

Modulus::Modulus(std::vector<i64> primes, i64 max_declared_coefficient)
    : primes_(std::move(primes)) {
    if (primes_.empty()) throw precondition_error("modulus needs at least one prime");
    std::unordered_set<i64> seen;
    for (i64 p : primes_) {
        Prime check(p);
        if (!seen.insert(p).second)
            throw precondition_error("duplicate prime in modulus: " + std::to_string(p));
        if (p <= max_declared_coefficient)
            throw precondition_error("prime " + std::to_string(p) +
                                     " does not exceed declared coefficient magnitude " +
                                     std::to_string(max_declared_coefficient));
    }
}

BigInt Modulus::product() const {
    // Balanced tree product; staged builds have hundreds of thousands of primes.
    std::vector<BigInt> layer(primes_.begin(), primes_.end());
    while (layer.size() > 1) {
        std::vector<BigInt> next;
        next.reserve((layer.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < layer.size(); i += 2)
            next.push_back(layer[i] * layer[i + 1]);
        if (layer.size() % 2) next.push_back(layer.back());
        layer.swap(next);
    }
    return layer.front();
}

double Modulus::bit_size() const {
    double bits = 0;
    for (i64 p : primes_) bits += std::log2(static_cast<double>(p));
    return bits;
}

ModulusPtr make_modulus(std::vector<i64> primes, i64 max_declared_coefficient) {
    return std::make_shared<const Modulus>(std::move(primes), max_declared_coefficient);
}

RingElem::RingElem(ModulusPtr modulus, std::vector<i64> residues)
    : modulus_(std::move(modulus)), residues_(std::move(residues)) {
    if (residues_.size() != modulus_->size())
        throw precondition_error("residue count does not match modulus");
    for (std::size_t i = 0; i < residues_.size(); ++i)
        if (residues_[i] < 0 || residues_[i] >= modulus_->prime(i))
            throw precondition_error("residue not reduced at coordinate " + std::to_string(i));
}

RingElem RingElem::zero(ModulusPtr modulus) {
    std::vector<i64> r(modulus->size(), 0);
    return RingElem(std::move(modulus), std::move(r));
}

RingElem RingElem::from_integer(ModulusPtr modulus, i64 z) {
    std::vector<i64> r(modulus->size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = project(z, modulus->prime(i));
    return RingElem(std::move(modulus), std::move(r));
}

void RingElem::check_same_modulus(const RingElem& other) const {
    if (!(*modulus_ == *other.modulus_))
        throw precondition_error("mixed-modulus ring operation");
}

RingElem RingElem::add(const RingElem& other) const {
    check_same_modulus(other);
    std::vector<i64> r(residues_.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = add_mod(residues_[i], other.residues_[i], modulus_->prime(i));
    return RingElem(modulus_, std::move(r));
}

RingElem RingElem::sub(const RingElem& other) const {
    check_same_modulus(other);
    std::vector<i64> r(residues_.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = sub_mod(residues_[i], other.residues_[i], modulus_->prime(i));
    return RingElem(modulus_, std::move(r));
}

RingElem RingElem::mul(const RingElem& other) const {
    check_same_modulus(other);
    std::vector<i64> r(residues_.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = mul_mod(residues_[i], other.residues_[i], modulus_->prime(i));
    return RingElem(modulus_, std::move(r));
}

RingElem RingElem::neg() const {
    std::vector<i64> r(residues_.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = residues_[i] == 0 ? 0 : modulus_->prime(i) - residues_[i];
    return RingElem(modulus_, std::move(r));
}

RingElem RingElem::inverse() const {
    std::vector<i64> r(residues_.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (residues_[i] == 0) throw non_invertible_error(i);
        r[i] = inverse_mod(residues_[i], modulus_->prime(i));
    }
    return RingElem(modulus_, std::move(r));
}

RingElem operator+(const RingElem& a, const RingElem& b) { return a.add(b); }
RingElem operator-(const RingElem& a, const RingElem& b) { return a.sub(b); }
RingElem operator*(const RingElem& a, const RingElem& b) { return a.mul(b); }

}  // namespace diffsets
