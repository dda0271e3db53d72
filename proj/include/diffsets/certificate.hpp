#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "diffsets/residue.hpp"

namespace diffsets {

// Machine-checkable superset description of an expression's image together
// with a claimed size bound. check() decides membership of an attained value
// in O(#coordinates) (plus tiny set lookups).
class Certificate;

struct CertExactValues {
    std::set<std::vector<i64>> values;
};

// { from_integer(offset + j) : lo <= j <= hi }
struct CertInterval {
    i64 offset = 0;
    i64 lo = 0, hi = 0;
};

struct CertPerCoordinate {
    std::vector<std::set<i64>> allowed;  // one set per coordinate
};

// Integer mode (target == npos): t = sum_i iota(w_i * v_i) must lie in
// allowed_int. Residue mode: t = sum_i mod_{p_i, p_target}(w_i * v_i) must lie
// in the allowed_res bitset over Z_{p_target}.
struct CertLinearFunctional {
    static constexpr std::size_t kInteger = static_cast<std::size_t>(-1);
    std::size_t target = kInteger;
    std::vector<i64> weights;
    std::vector<i64> offsets;  // subtracted per coordinate before weighting
    std::set<i64> allowed_int;
    std::vector<char> allowed_res;
    BigInt claimed = 0;
};

struct CertAvoidedValues {
    std::set<std::vector<i64>> avoided;
};

struct CertBlockProduct {
    // coordinate blocks with a sub-certificate each (checked on the projection)
    std::vector<std::pair<std::vector<std::size_t>, std::shared_ptr<const Certificate>>> blocks;
};

struct CertSizeBoundOnly {
    BigInt bound = 0;
};

class Certificate {
public:
    enum class Kind {
        ExactValueSet,
        IntervalValueSet,
        PerCoordinateSet,
        LinearFunctionalMembership,
        AvoidedValues,
        BlockProduct,
        SizeBoundOnly,
    };

    static Certificate exact_values(ModulusPtr m, CertExactValues data);
    static Certificate singleton(ModulusPtr m, const RingElem& value);
    static Certificate interval(ModulusPtr m, CertInterval data);
    static Certificate per_coordinate(ModulusPtr m, CertPerCoordinate data);
    static Certificate linear_functional(ModulusPtr m, CertLinearFunctional data);
    static Certificate avoided_values(ModulusPtr m, CertAvoidedValues data);
    static Certificate block_product(ModulusPtr m, CertBlockProduct data);
    static Certificate size_bound_only(ModulusPtr m, BigInt bound);

    Kind kind() const { return kind_; }
    const ModulusPtr& modulus() const { return modulus_; }
    // true when `value` is consistent with the certificate; for AvoidedValues
    // a hit on an avoided value is the violation.
    bool check(const RingElem& value) const;
    BigInt claimed_size() const;
    // PerCoordinateSet claims factor across coordinates, so exhaustive checks
    // may verify each independence class separately.
    bool separable_per_coordinate() const { return kind_ == Kind::PerCoordinateSet; }
    bool check_coordinate(std::size_t coord, i64 value) const;

    const CertExactValues* exact() const { return exact_.get(); }
    const CertInterval* interval_data() const { return interval_.get(); }
    const CertPerCoordinate* per_coord() const { return per_coord_.get(); }
    const CertLinearFunctional* functional() const { return functional_.get(); }
    const CertAvoidedValues* avoided() const { return avoided_.get(); }
    const CertBlockProduct* blocks() const { return blocks_.get(); }
    const CertSizeBoundOnly* size_only() const { return size_only_.get(); }

private:
    Certificate(Kind k, ModulusPtr m) : kind_(k), modulus_(std::move(m)) {}

    Kind kind_;
    ModulusPtr modulus_;
    std::shared_ptr<const CertExactValues> exact_;
    std::shared_ptr<const CertInterval> interval_;
    std::shared_ptr<const CertPerCoordinate> per_coord_;
    std::shared_ptr<const CertLinearFunctional> functional_;
    std::shared_ptr<const CertAvoidedValues> avoided_;
    std::shared_ptr<const CertBlockProduct> blocks_;
    std::shared_ptr<const CertSizeBoundOnly> size_only_;
};

}  // namespace diffsets
