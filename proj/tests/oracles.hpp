#ifndef MEDIATOP_TESTS_ORACLES_HPP
#define MEDIATOP_TESTS_ORACLES_HPP

// Independent reference computations used by the tests. Everything here is
// written the slow, obvious way and shares no code with the library beyond
// the plain data types.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "mediatop/dissimilarity.hpp"
#include "mediatop/matrix.hpp"

namespace oracle {

using mediatop::DenseDissimilarity;
using mediatop::Matrix;

/// n points uniform in [0,1]^dim, as a matrix.
Matrix random_points(std::size_t n, std::size_t dim, std::uint64_t seed);

/// Gaussian blobs around `centers` random centers.
Matrix blob_points(std::size_t n, std::size_t dim, std::size_t centers, double spread, std::uint64_t seed);

/// Squared Euclidean dissimilarity computed with a plain double loop.
DenseDissimilarity sq_euclid(const Matrix& points);

/// Symmetric matrix with zero diagonal and i.i.d. entries in (0, 1]; no
/// metric structure at all.
DenseDissimilarity random_symmetric(std::size_t n, std::uint64_t seed);

/// exp(-t / sigma).
double h(double t, double sigma);

/// argmin_l sum_i w_i d(i, l), lowest index on ties.
std::size_t weighted_median(const DenseDissimilarity& d, const std::vector<double>& w);

/// Minimal edit cost by exhaustive recursion over all edit operations
/// (exponential; for sequences of length <= 6).
double edit_distance_bruteforce(const std::vector<double>& a, const std::vector<double>& b, double indel);

/// Cost sum_i min_j d(i, loc_j) over every K-subset; returns the minimum.
double best_kmedoid_cost(const DenseDissimilarity& d, std::size_t k);

/// Ranks of the values (0 = smallest) with index tie-break, via full sort.
std::vector<std::size_t> ranks_by_sort(const std::vector<double>& values);

/// sum_i h_sigma(rank of prototype j for point i) * w_i * d(i, l), evaluated
/// by recomputing every rank from scratch.
double ng_criterion(const DenseDissimilarity& d, const std::vector<std::size_t>& loc, std::size_t j,
                    std::size_t l, double sigma, const std::vector<double>& w);

}  // namespace oracle

#endif
