#ifndef MEDIATOP_FAST_NG_HPP
#define MEDIATOP_FAST_NG_HPP

// Early-stopping prototype search for median NG.
//
// The reference value of the criterion for prototype j and candidate l is
// the factorized sum
//
//     crit(j, l) = sum_{k=0}^{K-1} h(k) * sum_{i in R^j_k} m_i d(i, l)
//
// with classes visited in increasing k and members in ascending index. The
// naive engine accumulates per-class sums in the same order, so all engines
// return identical values for candidates they finish.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mediatop/median.hpp"

namespace mediatop {

/// R^j_k = {i : rk(x^i, w^j) = k}, for every j, as CSR blocks.
struct RankPartition {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<std::uint32_t> offsets;  // K x (K + 1)
    std::vector<std::uint32_t> members;  // K x N

    std::span<const std::uint32_t> members_of(std::size_t j, std::size_t rank) const {
        const std::uint32_t* off = offsets.data() + j * (k + 1);
        return {members.data() + j * n + off[rank], off[rank + 1] - off[rank]};
    }
    /// All points of prototype j ordered by rank then index.
    std::span<const std::uint32_t> by_rank(std::size_t j) const { return {members.data() + j * n, n}; }
};

/// O(N K) construction from an N x K rank table whose rows are permutations.
RankPartition rank_partition(std::span<const std::uint32_t> ranks, std::size_t n, std::size_t k);

enum class Grain { fine, coarse };

struct FactorizedValue {
    double value = 0.0;
    bool stopped = false;
};

/// Everything the NG search needs for one epoch, read-only.
struct NgSearchInput {
    const MedianContext* ctx = nullptr;
    const std::uint32_t* ranks = nullptr;  // N x K
    const RankPartition* partition = nullptr;
    std::span<const double> h;             // h(k), k = 0..K-1
    std::span<const double> weights;       // multiplicities, empty = 1
    std::size_t k = 0;
};

/// Factorized criterion; with budget q the class loop stops as soon as the
/// partial sum exceeds q (after every class for coarse grain, after every
/// element for fine grain). Classes with h(k) == 0 contribute nothing and
/// are skipped.
FactorizedValue factorized_criterion(std::size_t l, std::size_t j, const NgSearchInput& in,
                                     double budget, Grain grain,
                                     SearchCounters* counters = nullptr);

/// Reference criterion value computed the naive way (one pass over all i).
double naive_ng_criterion(std::size_t l, std::size_t j, const NgSearchInput& in,
                          std::vector<double>& scratch);

enum class CandidateOrder { natural, field_distance, rank };

/// Candidate visiting order for prototype j. field_distance concatenates the
/// plain receptive fields C_j, C_{j2}, ... by nondecreasing d(w^j, w^{ji});
/// rank lists points by increasing rank k_lj. Ascending index within groups.
std::vector<std::uint32_t> order_candidates(std::size_t j, CandidateOrder mode,
                                            std::span<const std::size_t> loc,
                                            const MedianContext& ctx,
                                            std::span<const std::size_t> winner,
                                            const RankPartition& partition);

struct TieBreak {
    TiePolicy policy = TiePolicy::lowest_index;
    std::span<const std::uint64_t> keys;  // random policy only

    /// Does a candidate (value, l) beat the incumbent (best, best_l)?
    bool better(double value, std::size_t l, double best, std::size_t best_l) const {
        if (best_l == static_cast<std::size_t>(-1)) return true;
        if (value != best) return value < best;
        switch (policy) {
            case TiePolicy::lowest_index: return l < best_l;
            case TiePolicy::random: return keys[l] < keys[best_l];
            case TiePolicy::scan_order: return false;
        }
        return false;
    }
};

struct NgSearchResult {
    std::size_t index = static_cast<std::size_t>(-1);
    double value = 0.0;
};

/// Early-stopping argmin for prototype j over the given candidate order.
/// natural_inner sums points in index order (the unordered variants);
/// otherwise the inner loop walks R^j classes with the given grain.
NgSearchResult ng_prototype_search(std::size_t j, std::span<const std::uint32_t> ordering,
                                   const NgSearchInput& in, bool natural_inner, Grain grain,
                                   const TieBreak& ties, const std::vector<char>* excluded,
                                   SearchCounters* counters = nullptr);

/// Engine configuration for one of the NG implementations.
struct NgEngine {
    CandidateOrder order;
    bool natural_inner;
    Grain grain;
};
NgEngine ng_engine(NgImpl impl);

}  // namespace mediatop

#endif  // MEDIATOP_FAST_NG_HPP
