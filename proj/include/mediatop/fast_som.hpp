#ifndef MEDIATOP_FAST_SOM_HPP
#define MEDIATOP_FAST_SOM_HPP

// Exact accelerated prototype search for median SOM.
//
// Every engine here evaluates the criterion
//
//     crit(j, l) = sum_k h(nd(k, j)) * S(k, l),   S(k, l) = sum_{i in C*_k} d(i, l)
//
// in one fixed floating-point order: S(k, l) sums the members of C*_k in
// ascending index, and the outer sum visits k by increasing nd(k, j) (ties
// by k). Because every engine uses that order, naive, block-summed and
// branch-and-bound searches agree bit for bit, and partial sums taken in the
// same order are valid lower bounds of the final value.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mediatop/median.hpp"

namespace mediatop {

/// Partition of {0..N-1} into K classes stored as CSR; members ascend.
struct ReceptiveFields {
    std::vector<std::size_t> owner;       // class of each point
    std::vector<std::uint32_t> offsets;   // K + 1
    std::vector<std::uint32_t> members;   // N

    std::size_t classes() const { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::size_t class_size(std::size_t k) const { return offsets[k + 1] - offsets[k]; }
    std::span<const std::uint32_t> members_of(std::size_t k) const {
        return {members.data() + offsets[k], class_size(k)};
    }

    static ReceptiveFields from_owner(std::span<const std::size_t> owner, std::size_t k);
};

/// C*_j = {i : I*(x^i) = j}, with I* evaluated on blended distances.
ReceptiveFields receptive_fields(const MedianContext& ctx, const MedianPrototypes& protos,
                                 const Lattice& lattice, double sigma,
                                 const SupervisionConfig& sup = {}, const LabelSet* labels = nullptr);

/// Block sums and the per-class minima needed by the bounds, filled in one pass.
struct BlockSums {
    std::size_t k = 0;
    std::size_t n = 0;
    std::vector<double> sums;        // N x K: sums[l * K + k] = S(k, l)
    std::vector<double> class_min;   // K x K: class_min[k * K + m] = min_{l in C*_m} S(k, l)
    std::vector<std::size_t> field_sizes;

    double S(std::size_t kk, std::size_t l) const { return sums[l * k + kk]; }
    double min_s(std::size_t kk, std::size_t m) const { return class_min[kk * k + m]; }
};

BlockSums block_sums(const MedianContext& ctx, const ReceptiveFields& fields);

/// Neighborhood weights per prototype in canonical summation order.
struct CanonicalWeights {
    std::size_t k = 0;
    std::vector<std::uint32_t> order;  // K x K: order[j*K + r] = r-th neuron by nd(., j)
    std::vector<double> weight;        // K x K: h(nd(order[j*K + r], j))

    static CanonicalWeights make(const Lattice& lattice, double sigma);
    /// crit(j, l) from a row of block sums (srow[k] = S(k, l)).
    double criterion(std::size_t j, const double* srow) const;
};

/// argmin_l crit(j, l) for every j, ties by lowest index; O(N K^2).
std::vector<std::size_t> block_prototype_update(const BlockSums& sums, const Lattice& lattice,
                                                double sigma);

enum class ThetaMode { self, full };

/// eta(m, j, Theta) for every (j, m); +inf for empty classes.
struct BoundTable {
    ThetaMode mode = ThetaMode::full;
    std::size_t k = 0;
    std::vector<double> eta;  // K x K: eta[j * K + m]

    double bound(std::size_t m, std::size_t j) const { return eta[j * k + m]; }
};

BoundTable bnb_bounds(const BlockSums& sums, const CanonicalWeights& weights, ThetaMode mode);

/// Branch and bound over receptive-field classes. `excluded` (optional)
/// removes candidates, as needed by collision prevention.
std::size_t bnb_search_one(std::size_t j, const BlockSums& sums, const BoundTable& bounds,
                           const ReceptiveFields& fields, const CanonicalWeights& weights,
                           bool early_stop, const std::vector<char>* excluded,
                           SearchCounters* counters);

std::vector<std::size_t> bnb_prototype_search(const BlockSums& sums, const BoundTable& bounds,
                                              const ReceptiveFields& fields,
                                              const CanonicalWeights& weights, bool early_stop,
                                              SearchCounters* counters = nullptr);

/// Reference O(N^2 K) search: recomputes every class sum per prototype.
/// Returns the full K x N criterion table (crit[j * N + l]).
std::vector<double> naive_som_criteria(const MedianContext& ctx, const ReceptiveFields& fields,
                                       const CanonicalWeights& weights);

}  // namespace mediatop

#endif  // MEDIATOP_FAST_SOM_HPP
