#include "diffsets/certificate.hpp"

#include <algorithm>

namespace diffsets {

Certificate Certificate::exact_values(ModulusPtr m, CertExactValues data) {
    Certificate c(Kind::ExactValueSet, std::move(m));
    c.exact_ = std::make_shared<CertExactValues>(std::move(data));
    return c;
}

Certificate Certificate::singleton(ModulusPtr m, const RingElem& value) {
    CertExactValues ev;
    ev.values.insert(value.residues());
    return exact_values(std::move(m), std::move(ev));
}

Certificate Certificate::interval(ModulusPtr m, CertInterval data) {
    if (data.lo > data.hi) throw precondition_error("empty certificate interval");
    Certificate c(Kind::IntervalValueSet, std::move(m));
    c.interval_ = std::make_shared<CertInterval>(data);
    return c;
}

Certificate Certificate::per_coordinate(ModulusPtr m, CertPerCoordinate data) {
    if (data.allowed.size() != m->size())
        throw precondition_error("per-coordinate certificate shape mismatch");
    Certificate c(Kind::PerCoordinateSet, std::move(m));
    c.per_coord_ = std::make_shared<CertPerCoordinate>(std::move(data));
    return c;
}

Certificate Certificate::linear_functional(ModulusPtr m, CertLinearFunctional data) {
    if (data.weights.size() != m->size())
        throw precondition_error("functional certificate weight count mismatch");
    Certificate c(Kind::LinearFunctionalMembership, std::move(m));
    c.functional_ = std::make_shared<CertLinearFunctional>(std::move(data));
    return c;
}

Certificate Certificate::avoided_values(ModulusPtr m, CertAvoidedValues data) {
    Certificate c(Kind::AvoidedValues, std::move(m));
    c.avoided_ = std::make_shared<CertAvoidedValues>(std::move(data));
    return c;
}

Certificate Certificate::block_product(ModulusPtr m, CertBlockProduct data) {
    Certificate c(Kind::BlockProduct, std::move(m));
    c.blocks_ = std::make_shared<CertBlockProduct>(std::move(data));
    return c;
}

Certificate Certificate::size_bound_only(ModulusPtr m, BigInt bound) {
    Certificate c(Kind::SizeBoundOnly, std::move(m));
    c.size_only_ = std::make_shared<CertSizeBoundOnly>(CertSizeBoundOnly{std::move(bound)});
    return c;
}

bool Certificate::check(const RingElem& value) const {
    const Modulus& mod = *modulus_;
    switch (kind_) {
        case Kind::ExactValueSet:
            return exact_->values.count(value.residues()) > 0;
        case Kind::IntervalValueSet: {
            const auto& iv = *interval_;
            // candidate integers j with offset + j matching coordinate 0
            i64 p0 = mod.prime(0);
            i64 r0 = sub_mod(value.residue(0), floor_mod(iv.offset, p0), p0);
            i64 j0 = iv.lo + floor_mod(r0 - floor_mod(iv.lo, p0), p0);
            for (i64 j = j0; j <= iv.hi; j += p0) {
                bool ok = true;
                for (std::size_t c = 1; c < mod.size() && ok; ++c)
                    ok = value.residue(c) == floor_mod(iv.offset + j, mod.prime(c));
                if (ok) return true;
            }
            return false;
        }
        case Kind::PerCoordinateSet: {
            for (std::size_t c = 0; c < mod.size(); ++c)
                if (!per_coord_->allowed[c].count(value.residue(c))) return false;
            return true;
        }
        case Kind::LinearFunctionalMembership: {
            const auto& f = *functional_;
            auto shifted = [&](std::size_t c) {
                i64 v = value.residue(c);
                if (!f.offsets.empty()) v = sub_mod(v, floor_mod(f.offsets[c], mod.prime(c)),
                                                    mod.prime(c));
                return mul_mod(floor_mod(f.weights[c], mod.prime(c)), v, mod.prime(c));
            };
            if (f.target == CertLinearFunctional::kInteger) {
                i64 t = 0;
                for (std::size_t c = 0; c < mod.size(); ++c) t += lift(shifted(c));
                return f.allowed_int.count(t) > 0;
            }
            i64 q = mod.prime(f.target);
            i64 t = 0;
            for (std::size_t c = 0; c < mod.size(); ++c)
                t = add_mod(t, floor_mod(lift(shifted(c)), q), q);
            return f.allowed_res[static_cast<std::size_t>(t)] != 0;
        }
        case Kind::AvoidedValues:
            return avoided_->avoided.count(value.residues()) == 0;
        case Kind::BlockProduct: {
            for (const auto& [coords, sub] : blocks_->blocks) {
                std::vector<i64> proj;
                proj.reserve(coords.size());
                for (auto c : coords) proj.push_back(value.residue(c));
                RingElem sub_value(sub->modulus(), std::move(proj));
                if (!sub->check(sub_value)) return false;
            }
            return true;
        }
        case Kind::SizeBoundOnly:
            return true;
    }
    return false;
}

bool Certificate::check_coordinate(std::size_t coord, i64 value) const {
    if (kind_ != Kind::PerCoordinateSet)
        throw precondition_error("per-coordinate check on a non-separable certificate");
    return per_coord_->allowed[coord].count(value) > 0;
}

BigInt Certificate::claimed_size() const {
    const Modulus& mod = *modulus_;
    switch (kind_) {
        case Kind::ExactValueSet:
            return BigInt(exact_->values.size());
        case Kind::IntervalValueSet: {
            BigInt span = interval_->hi - interval_->lo + 1;
            BigInt q = mod.product();
            return span < q ? span : q;
        }
        case Kind::PerCoordinateSet: {
            BigInt total = 1;
            for (const auto& s : per_coord_->allowed) total *= BigInt(s.size());
            return total;
        }
        case Kind::LinearFunctionalMembership:
            return functional_->claimed;
        case Kind::AvoidedValues:
            return mod.product() - BigInt(avoided_->avoided.size());
        case Kind::BlockProduct: {
            BigInt total = 1;
            for (const auto& [coords, sub] : blocks_->blocks) total *= sub->claimed_size();
            return total;
        }
        case Kind::SizeBoundOnly:
            return size_only_->bound;
    }
    return 0;
}

}  // namespace diffsets
