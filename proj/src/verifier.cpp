#include "diffsets/verifier.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "diffsets/primes.hpp"

namespace diffsets {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct ReadAxis {
    int var;
    std::size_t coord;
    i64 prime;
};

// Odometer decode of index -> assignment along the read axes.
void decode_point(u64 index, const std::vector<ReadAxis>& axes, Point& point) {
    for (const auto& ax : axes) {
        point[static_cast<std::size_t>(ax.var)][ax.coord] =
            static_cast<i64>(index % static_cast<u64>(ax.prime));
        index /= static_cast<u64>(ax.prime);
    }
}

struct ClassResult {
    BigInt image_size = 0;
    i64 violations = 0;
    std::optional<std::vector<i64>> witness;
};

std::vector<i64> flatten_point(const Point& point) {
    std::vector<i64> out;
    for (const auto& v : point) out.insert(out.end(), v.begin(), v.end());
    return out;
}

}  // namespace

ImageReport image_exhaustive(const Expression& e, const MapSet& maps, const ModulusPtr& mod,
                             const Certificate* cert, VerifyBudget budget) {
    auto t0 = Clock::now();
    EvalPlan plan(e, maps, mod);
    const std::size_t ncoords = mod->size();

    bool joint = cert != nullptr && !cert->separable_per_coordinate();

    // group output coordinates into classes of shared reads
    std::vector<std::size_t> parent(ncoords);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto unite = [&](std::size_t a, std::size_t b) { parent[find(a)] = find(b); };
    {
        std::map<std::pair<int, std::size_t>, std::size_t> owner;
        for (std::size_t c = 0; c < ncoords; ++c)
            for (auto rd : plan.coord_reads(c)) {
                auto [it, inserted] = owner.try_emplace(rd, c);
                if (!inserted) unite(c, it->second);
            }
    }
    if (joint)
        for (std::size_t c = 1; c < ncoords; ++c) unite(0, c);

    std::map<std::size_t, std::vector<std::size_t>> classes;  // root -> coords
    for (std::size_t c = 0; c < ncoords; ++c)
        if (!plan.coord_reads(c).empty() || joint) classes[find(c)].push_back(c);

    ImageReport report;
    report.mode = "exhaustive";
    if (cert) report.claimed_size = cert->claimed_size();
    report.image_size = 1;

    BigInt total_cost = 0;
    struct PreparedClass {
        std::vector<std::size_t> coords;
        std::vector<ReadAxis> axes;
        u64 domain;
    };
    std::vector<PreparedClass> prepared;
    for (auto& [root, coords] : classes) {
        std::set<std::pair<int, std::size_t>> reads;
        for (auto c : coords)
            for (auto rd : plan.coord_reads(c)) reads.insert(rd);
        PreparedClass pc;
        pc.coords = coords;
        BigInt domain = 1;
        for (auto [v, coord] : reads) {
            pc.axes.push_back(ReadAxis{v, coord, mod->prime(coord)});
            domain *= mod->prime(coord);
        }
        total_cost += domain;
        if (total_cost > budget.max_points)
            throw budget_exceeded_error(
                "reduced footprint exceeds exhaustive budget; use sampled mode");
        pc.domain = static_cast<u64>(domain);
        prepared.push_back(std::move(pc));
    }
    report.domain_size = total_cost == 0 ? BigInt(1) : total_cost;

    int threads = budget.threads > 0
                      ? budget.threads
                      : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    for (const auto& pc : prepared) {
        // can class values be packed into u64 keys?
        bool packable = true;
        {
            unsigned __int128 prod = 1;
            for (auto c : pc.coords) {
                prod *= static_cast<u64>(mod->prime(c));
                if (prod > static_cast<unsigned __int128>(~u64{0})) { packable = false; break; }
            }
        }
        int nthreads = pc.domain > 4096 ? threads : 1;
        std::vector<ClassResult> partial(static_cast<std::size_t>(nthreads));
        std::vector<std::unordered_set<u64>> packed_sets(static_cast<std::size_t>(nthreads));
        std::vector<std::set<std::vector<i64>>> vector_sets(static_cast<std::size_t>(nthreads));

        auto worker = [&](int tid) {
            u64 begin = pc.domain * static_cast<u64>(tid) / static_cast<u64>(nthreads);
            u64 end = pc.domain * (static_cast<u64>(tid) + 1) / static_cast<u64>(nthreads);
            Point point(static_cast<std::size_t>(plan.num_vars()));
            for (auto& pv : point) pv.assign(mod->size(), 0);
            std::vector<i64> values(pc.coords.size());
            ClassResult& res = partial[static_cast<std::size_t>(tid)];
            for (u64 idx = begin; idx < end; ++idx) {
                decode_point(idx, pc.axes, point);
                for (std::size_t j = 0; j < pc.coords.size(); ++j)
                    values[j] = plan.eval_coord(pc.coords[j], point);
                if (packable) {
                    u64 key = 0;
                    for (std::size_t j = pc.coords.size(); j-- > 0;)
                        key = key * static_cast<u64>(mod->prime(pc.coords[j])) +
                              static_cast<u64>(values[j]);
                    packed_sets[static_cast<std::size_t>(tid)].insert(key);
                } else {
                    vector_sets[static_cast<std::size_t>(tid)].insert(values);
                }
                if (cert) {
                    bool ok;
                    if (joint) {
                        RingElem full(mod, std::vector<i64>(values));
                        ok = cert->check(full);
                    } else {
                        ok = true;
                        for (std::size_t j = 0; j < pc.coords.size() && ok; ++j)
                            ok = cert->check_coordinate(pc.coords[j], values[j]);
                    }
                    if (!ok) {
                        ++res.violations;
                        if (!res.witness) res.witness = flatten_point(point);
                    }
                }
            }
        };
        if (nthreads == 1) {
            worker(0);
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
            for (auto& th : pool) th.join();
        }

        BigInt class_size;
        if (packable) {
            std::unordered_set<u64> merged;
            for (auto& s : packed_sets) merged.insert(s.begin(), s.end());
            class_size = BigInt(merged.size());
        } else {
            std::set<std::vector<i64>> merged;
            for (auto& s : vector_sets) merged.insert(s.begin(), s.end());
            class_size = BigInt(merged.size());
        }
        report.image_size *= class_size;
        for (auto& res : partial) {
            report.violations += res.violations;
            if (res.witness && !report.violation_witness) report.violation_witness = res.witness;
        }
    }

    report.pass = report.violations == 0;
    report.wall_seconds = seconds_since(t0);
    return report;
}

ImageReport image_sampled(const Expression& e, const MapSet& maps, const ModulusPtr& mod,
                          const Certificate& cert, i64 samples, SeededRng& rng) {
    auto t0 = Clock::now();
    EvalPlan plan(e, maps, mod);
    ImageReport report;
    report.mode = "sampled";
    report.domain_size = samples;
    report.claimed_size = cert.claimed_size();
    Point point(static_cast<std::size_t>(plan.num_vars()));
    for (auto& pv : point) pv.assign(mod->size(), 0);
    std::vector<i64> values(mod->size());
    for (i64 s = 0; s < samples; ++s) {
        for (auto& pv : point)
            for (std::size_t c = 0; c < mod->size(); ++c) pv[c] = rng.below(mod->prime(c));
        for (std::size_t c = 0; c < mod->size(); ++c) values[c] = plan.eval_coord(c, point);
        RingElem value(mod, std::vector<i64>(values));
        if (!cert.check(value)) {
            ++report.violations;
            if (!report.violation_witness) report.violation_witness = flatten_point(point);
        }
    }
    report.pass = report.violations == 0;
    report.wall_seconds = seconds_since(t0);
    return report;
}

// --- SetZq ------------------------------------------------------------------

SetZq::SetZq(i64 q) : q_(q) {
    if (q < 1) throw precondition_error("modulus must be positive");
    bits_.assign(static_cast<std::size_t>((q + 63) / 64), 0);
}

i64 SetZq::count() const {
    i64 total = 0;
    for (u64 w : bits_) total += __builtin_popcountll(w);
    return total;
}

std::vector<i64> SetZq::elements() const {
    std::vector<i64> out;
    for (i64 x = 0; x < q_; ++x)
        if (contains(x)) out.push_back(x);
    return out;
}

SetZq SetZq::from_elements(i64 q, const std::vector<i64>& elems) {
    SetZq s(q);
    for (i64 e : elems) s.add(floor_mod(e, q));
    return s;
}

namespace {

// b shifted cyclically by s, OR'd into out
void or_rotated(SetZq& out, const SetZq& b, i64 s) {
    for (i64 x = 0; x < b.q(); ++x)
        if (b.contains(x)) out.add(add_mod(x, s, b.q()));
}

}  // namespace

SetZq sumset(const SetZq& a, const SetZq& b) {
    if (a.q() != b.q()) throw precondition_error("sumset over mixed moduli");
    SetZq out(a.q());
    for (i64 x = 0; x < a.q(); ++x)
        if (a.contains(x)) or_rotated(out, b, x);
    return out;
}

SetZq difference_set(const SetZq& a) {
    SetZq neg(a.q());
    for (i64 x = 0; x < a.q(); ++x)
        if (a.contains(x)) neg.add(x == 0 ? 0 : a.q() - x);
    return sumset(a, neg);
}

SetZq iterated_sumset(const SetZq& start, const SetZq& a, int k) {
    SetZq out = start;
    for (int i = 0; i < k; ++i) out = sumset(out, a);
    return out;
}

SetZq product_set(const SetZq& a) {
    SetZq out(a.q());
    auto elems = a.elements();
    for (i64 x : elems)
        for (i64 y : elems) out.add(mul_mod(x, y, a.q()));
    return out;
}

SetZq l_sq_plus_k(const SetZq& a, int l, int k) {
    if (l < 0 || k < 0 || l + k < 1) throw precondition_error("need l+k >= 1");
    if (l == 0) return iterated_sumset(a, a, k - 1);
    SetZq p = product_set(a);
    SetZq out = iterated_sumset(p, p, l - 1);
    return iterated_sumset(out, a, k);
}

bool verify_cover_explicit(const SetZq& a) { return difference_set(a).full(); }

BigRat density_from_certificates(const std::vector<Certificate>& certs) {
    if (certs.empty()) return BigRat(0);
    BigInt q = certs.front().modulus()->product();
    BigInt total = 0;
    for (const auto& c : certs) {
        if (!(*c.modulus() == *certs.front().modulus()))
            throw precondition_error("density accounting needs a common modulus");
        total += c.claimed_size();
    }
    BigRat bound(total, q);
    return bound > BigRat(1) ? BigRat(1) : bound;
}

MinImageResult min_image_experiment(i64 p, i64 q) {
    if (!is_prime(p) || !is_prime(q) || p == q)
        throw precondition_error("p, q must be distinct primes");
    i64 n = p * q;
    if (n > 6) throw precondition_error("experiment gated to p*q <= 6");
    MinImageResult result;
    result.pairs_considered = boost::multiprecision::pow(BigInt(n), static_cast<unsigned>(2 * n));

    u64 all_mask = (u64{1} << n) - 1;
    auto rot = [&](u64 m, i64 s) {
        return ((m << s) | (m >> (n - s))) & all_mask;
    };

    // signature = column sets S_v = {alpha(x)*v + x}; the best beta choice only
    // depends on these, so alphas with equal signatures are pruned
    std::unordered_map<std::string, bool> seen;
    i64 best = n;
    std::vector<i64> alpha(static_cast<std::size_t>(n), 0);
    u64 total_alphas = 1;
    for (i64 i = 0; i < n; ++i) total_alphas *= static_cast<u64>(n);
    for (u64 code = 0; code < total_alphas; ++code) {
        u64 c = code;
        for (i64 i = 0; i < n; ++i) {
            alpha[static_cast<std::size_t>(i)] = static_cast<i64>(c % static_cast<u64>(n));
            c /= static_cast<u64>(n);
        }
        std::vector<u64> cols(static_cast<std::size_t>(n), 0);
        for (i64 v = 0; v < n; ++v) {
            u64 m = 0;
            for (i64 x = 0; x < n; ++x)
                m |= u64{1} << floor_mod(alpha[static_cast<std::size_t>(x)] * v + x, n);
            cols[static_cast<std::size_t>(v)] = m;
        }
        std::vector<u64> sig = cols;
        std::sort(sig.begin(), sig.end());
        std::string key(reinterpret_cast<const char*>(sig.data()), sig.size() * sizeof(u64));
        auto [it, inserted] = seen.try_emplace(key, true);
        if (!inserted) continue;

        // DP over y: reachable accumulated masks
        std::vector<char> reach(static_cast<std::size_t>(all_mask) + 1, 0);
        std::vector<char> next(static_cast<std::size_t>(all_mask) + 1, 0);
        reach[0] = 1;
        for (i64 y = 0; y < n; ++y) {
            std::fill(next.begin(), next.end(), 0);
            for (u64 m = 0; m <= all_mask; ++m) {
                if (!reach[m]) continue;
                for (i64 v = 0; v < n; ++v) next[m | rot(cols[static_cast<std::size_t>(v)], y)] = 1;
            }
            reach.swap(next);
        }
        for (u64 m = 0; m <= all_mask; ++m)
            if (reach[m]) best = std::min<i64>(best, __builtin_popcountll(m));
    }
    result.minimum = best;

    // constant maps witness the full-image upper end
    u64 m = 0;
    for (i64 x = 0; x < n; ++x)
        for (i64 y = 0; y < n; ++y) m |= u64{1} << floor_mod(x + y, n);
    result.maximum_checked = __builtin_popcountll(m);
    return result;
}

}  // namespace diffsets
