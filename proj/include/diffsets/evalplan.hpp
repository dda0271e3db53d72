#pragma once

#include "diffsets/expr.hpp"
#include "diffsets/varmap.hpp"

namespace diffsets {

// point[v] = residues of variable v's value (one entry per coordinate)
using Point = std::vector<std::vector<i64>>;

// Direct reference evaluator; kept independent of the plan below so the two
// can be checked against each other.
RingElem evaluate_naive(const Expression& e, const MapSet& maps, const ModulusPtr& mod,
                        const std::vector<RingElem>& point);
i64 evaluate_naive_coord(const Expression& e, const MapSet& maps, const Modulus& mod,
                         std::size_t coord, const Point& point);

// Precompiled per-coordinate evaluation with symbolic folding: constant maps
// propagate through products, own-coordinate linear contributions and repeated
// cross-modulus reads accumulate and cancel. The footprint derived from the
// surviving entries is a sound over-approximation of what evaluation reads.
class EvalPlan {
public:
    struct ModRead {
        int var;
        std::size_t src;
        std::vector<i64> poly;
        i64 coeff;  // mod target prime
    };
    struct Opaque {
        int var;
        RuleComponent comp;
        i64 coeff;
    };
    struct ProdFactor {
        Atom atom;
        const ConstructedMap* map;
    };
    struct Product {
        i64 coeff;
        std::vector<ProdFactor> factors;
    };
    struct CoordPlan {
        i64 const_acc = 0;
        std::vector<std::pair<int, i64>> linear;  // (var, coeff) on x_{v, coord}
        std::vector<ModRead> modreads;
        std::vector<Opaque> opaques;
        std::vector<Product> products;
        std::vector<std::pair<int, std::size_t>> reads;  // (var, coord), sorted
    };

    EvalPlan(const Expression& e, const MapSet& maps, ModulusPtr mod);

    const ModulusPtr& modulus() const { return modulus_; }
    const std::vector<CoordPlan>& coords() const { return coords_; }
    int num_vars() const { return num_vars_; }

    i64 eval_coord(std::size_t c, const Point& point) const;
    RingElem eval(const std::vector<RingElem>& point) const;

    // (var, coord) pairs read when evaluating output coordinate c.
    const std::vector<std::pair<int, std::size_t>>& coord_reads(std::size_t c) const {
        return coords_[c].reads;
    }
    // union over all output coordinates, per variable
    std::vector<std::set<std::size_t>> footprint_per_var() const;

private:
    ModulusPtr modulus_;
    int num_vars_;
    std::vector<CoordPlan> coords_;
};

// Spec-level footprint query: per output coordinate, the (variable,
// coordinate) pairs evaluation may read.
std::vector<std::vector<std::pair<int, std::size_t>>> dependency_footprint(
    const Expression& e, const MapSet& maps, const ModulusPtr& mod);

}  // namespace diffsets
