#include "mediatop/fast_som.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "mediatop/error.hpp"
#include "mediatop/parallel.hpp"
#include "median_internal.hpp"

namespace mediatop {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = static_cast<std::size_t>(-1);
}  // namespace

ReceptiveFields ReceptiveFields::from_owner(std::span<const std::size_t> owner, std::size_t k) {
    ReceptiveFields f;
    f.owner.assign(owner.begin(), owner.end());
    f.offsets.assign(k + 1, 0);
    for (std::size_t c : owner) {
        if (c >= k) fail(ErrorKind::range, "receptive field owner out of range");
        ++f.offsets[c + 1];
    }
    for (std::size_t c = 0; c < k; ++c) f.offsets[c + 1] += f.offsets[c];
    f.members.resize(owner.size());
    std::vector<std::uint32_t> fill(f.offsets.begin(), f.offsets.end() - 1);
    for (std::size_t i = 0; i < owner.size(); ++i) f.members[fill[owner[i]]++] = static_cast<std::uint32_t>(i);
    return f;
}

ReceptiveFields receptive_fields(const MedianContext& ctx, const MedianPrototypes& protos,
                                 const Lattice& lattice, double sigma, const SupervisionConfig& sup,
                                 const LabelSet* labels) {
    const auto a = detail::som_assign(ctx, protos, lattice, sigma, sup, labels);
    return ReceptiveFields::from_owner(a.star, protos.size());
}

BlockSums block_sums(const MedianContext& ctx, const ReceptiveFields& fields) {
    BlockSums b;
    b.k = fields.classes();
    b.n = ctx.size();
    const std::size_t k = b.k;
    const std::size_t n = b.n;
    b.sums.assign(n * k, 0.0);
    b.class_min.assign(k * k, kInf);
    b.field_sizes.resize(k);
    for (std::size_t c = 0; c < k; ++c) b.field_sizes[c] = fields.class_size(c);

    // One pass per class m over its members l: S(., l) and minS(., m) are
    // written by the worker owning m only.
    parallel_for(k, [&](std::size_t m) {
        double* mins = b.class_min.data();
        for (std::uint32_t l : fields.members_of(m)) {
            const double* col = ctx.col(l);
            double* out = b.sums.data() + static_cast<std::size_t>(l) * k;
            for (std::size_t c = 0; c < k; ++c) {
                double s = 0.0;
                for (std::uint32_t i : fields.members_of(c)) s += col[i];
                out[c] = s;
                double& slot = mins[c * k + m];
                if (s < slot) slot = s;
            }
        }
    });
    return b;
}

CanonicalWeights CanonicalWeights::make(const Lattice& lattice, double sigma) {
    CanonicalWeights w;
    w.k = lattice.size();
    w.order.resize(w.k * w.k);
    w.weight.resize(w.k * w.k);
    for (std::size_t j = 0; j < w.k; ++j) {
        const auto& ord = lattice.neighbor_order(j);
        for (std::size_t r = 0; r < w.k; ++r) {
            w.order[j * w.k + r] = static_cast<std::uint32_t>(ord[r]);
            w.weight[j * w.k + r] = neighborhood_weight(lattice.nd(ord[r], j), sigma);
        }
    }
    return w;
}

double CanonicalWeights::criterion(std::size_t j, const double* srow) const {
    const std::uint32_t* ord = order.data() + j * k;
    const double* hw = weight.data() + j * k;
    double s = 0.0;
    for (std::size_t r = 0; r < k; ++r) s += hw[r] * srow[ord[r]];
    return s;
}

std::vector<std::size_t> block_prototype_update(const BlockSums& sums, const Lattice& lattice,
                                                double sigma) {
    const auto w = CanonicalWeights::make(lattice, sigma);
    std::vector<std::size_t> out(sums.k);
    parallel_for(sums.k, [&](std::size_t j) {
        std::size_t best = 0;
        double best_v = kInf;
        for (std::size_t l = 0; l < sums.n; ++l) {
            const double v = w.criterion(j, sums.sums.data() + l * sums.k);
            if (v < best_v) {
                best_v = v;
                best = l;
            }
        }
        out[j] = best;
    });
    return out;
}

BoundTable bnb_bounds(const BlockSums& sums, const CanonicalWeights& weights, ThetaMode mode) {
    BoundTable t;
    t.mode = mode;
    t.k = sums.k;
    const std::size_t k = sums.k;
    t.eta.assign(k * k, kInf);
    parallel_for(k, [&](std::size_t j) {
        const std::uint32_t* ord = weights.order.data() + j * k;
        const double* hw = weights.weight.data() + j * k;
        for (std::size_t m = 0; m < k; ++m) {
            if (sums.field_sizes[m] == 0) continue;
            if (mode == ThetaMode::self) {
                // ord[0] == j since nd(j, j) = 0 is the unique minimum
                t.eta[j * k + m] = hw[0] * sums.min_s(j, m);
            } else {
                // Same order as the criterion, so eta never exceeds it in floating point.
                double s = 0.0;
                for (std::size_t r = 0; r < k; ++r) s += hw[r] * sums.min_s(ord[r], m);
                t.eta[j * k + m] = s;
            }
        }
    });
    return t;
}

namespace {

struct Incumbent {
    std::size_t index = kNone;
    double value = kInf;

    void offer(std::size_t l, double v) {
        if (index == kNone || v < value || (v == value && l < index)) {
            index = l;
            value = v;
        }
    }
};

void scan_class(std::size_t j, std::span<const std::uint32_t> members, const BlockSums& sums,
                const CanonicalWeights& weights, bool early_stop, const std::vector<char>* excluded,
                Incumbent& best, SearchCounters& c) {
    const std::size_t k = sums.k;
    const std::uint32_t* ord = weights.order.data() + j * k;
    const double* hw = weights.weight.data() + j * k;
    for (std::uint32_t l : members) {
        if (excluded && (*excluded)[l]) continue;
        ++c.candidates_evaluated;
        const double* srow = sums.sums.data() + static_cast<std::size_t>(l) * k;
        double s = 0.0;
        bool abandoned = false;
        if (early_stop && best.index != kNone) {
            for (std::size_t r = 0; r < k; ++r) {
                s += hw[r] * srow[ord[r]];
                if (s > best.value) {
                    abandoned = true;
                    c.terms_summed += r + 1;
                    break;
                }
            }
            if (!abandoned) c.terms_summed += k;
        } else {
            for (std::size_t r = 0; r < k; ++r) s += hw[r] * srow[ord[r]];
            c.terms_summed += k;
        }
        if (abandoned) {
            ++c.partial_sums_abandoned;
            continue;
        }
        best.offer(l, s);
    }
}

}  // namespace

std::size_t bnb_search_one(std::size_t j, const BlockSums& sums, const BoundTable& bounds,
                           const ReceptiveFields& fields, const CanonicalWeights& weights,
                           bool early_stop, const std::vector<char>* excluded,
                           SearchCounters* counters) {
    const std::size_t k = sums.k;
    SearchCounters local;
    Incumbent best;

    // Start in C*_j, or the nearest nonempty class on the lattice.
    const std::uint32_t* ord = weights.order.data() + j * k;
    std::size_t first = kNone;
    for (std::size_t r = 0; r < k; ++r) {
        if (fields.class_size(ord[r]) > 0) {
            first = ord[r];
            break;
        }
    }
    if (first == kNone) fail(ErrorKind::invariant, "no nonempty receptive field");
    scan_class(j, fields.members_of(first), sums, weights, early_stop, excluded, best, local);

    std::vector<std::pair<double, std::uint32_t>> rest;
    rest.reserve(k);
    for (std::size_t m = 0; m < k; ++m) {
        if (m == first || fields.class_size(m) == 0) continue;
        rest.emplace_back(bounds.bound(m, j), static_cast<std::uint32_t>(m));
    }
    std::sort(rest.begin(), rest.end());
    for (std::size_t p = 0; p < rest.size(); ++p) {
        // Strict comparison: a class whose bound equals the incumbent may
        // still hold a tie with a lower index.
        if (best.index != kNone && rest[p].first > best.value) {
            local.classes_pruned += rest.size() - p;
            break;
        }
        scan_class(j, fields.members_of(rest[p].second), sums, weights, early_stop, excluded, best, local);
    }
    if (counters) *counters += local;
    if (best.index == kNone) fail(ErrorKind::invariant, "branch and bound found no candidate");
    return best.index;
}

std::vector<std::size_t> bnb_prototype_search(const BlockSums& sums, const BoundTable& bounds,
                                              const ReceptiveFields& fields,
                                              const CanonicalWeights& weights, bool early_stop,
                                              SearchCounters* counters) {
    std::vector<std::size_t> out(sums.k);
    std::vector<SearchCounters> per(sums.k);
    parallel_for(sums.k, [&](std::size_t j) {
        out[j] = bnb_search_one(j, sums, bounds, fields, weights, early_stop, nullptr, &per[j]);
    });
    if (counters) {
        for (const auto& c : per) *counters += c;
    }
    return out;
}

std::vector<double> naive_som_criteria(const MedianContext& ctx, const ReceptiveFields& fields,
                                       const CanonicalWeights& weights) {
    const std::size_t n = ctx.size();
    const std::size_t k = fields.classes();
    std::vector<double> crit(k * n);
    parallel_for(k, [&](std::size_t j) {
        const std::uint32_t* ord = weights.order.data() + j * k;
        const double* hw = weights.weight.data() + j * k;
        for (std::size_t l = 0; l < n; ++l) {
            const double* col = ctx.col(l);
            double s = 0.0;
            for (std::size_t r = 0; r < k; ++r) {
                double part = 0.0;
                for (std::uint32_t i : fields.members_of(ord[r])) part += col[i];
                s += hw[r] * part;
            }
            crit[j * n + l] = s;
        }
    });
    return crit;
}

}  // namespace mediatop
