#ifndef MEDIATOP_EUCLID_BATCH_HPP
#define MEDIATOP_EUCLID_BATCH_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mediatop/matrix.hpp"
#include "mediatop/neighborhood.hpp"

namespace mediatop {

/// Assignment bookkeeping for N points and K prototypes.
struct AssignmentState {
    std::vector<std::size_t> winner;      // plain winner I(x^i)
    std::vector<std::uint32_t> ranks;     // N x K row-major, empty unless NG
    std::vector<std::size_t> som_winner;  // I*(x^i), empty unless SOM

    std::uint32_t rank(std::size_t i, std::size_t j, std::size_t k) const { return ranks[i * k + j]; }
};

struct QuantizationError {
    double half = 0.0;  // (1/2) sum_i d(x^i, w^winner(i))
    double norm = 0.0;  // half / N
};

/// Result of a batch run in vector space.
struct EuclideanRun {
    Matrix prototypes;            // K x M
    AssignmentState state;        // assignment of the returned prototypes
    std::vector<double> history;  // cost at each epoch's assignment step
    std::size_t epochs_run = 0;
    bool converged = false;
};

/// Index of the closest prototype; lowest index on ties.
std::size_t winner_index(std::span<const double> x, const Matrix& prototypes);

/// Dense ranks of `distances` with index tie-break; rank 0 is the minimum.
void rank_distances(std::span<const double> distances, std::span<std::uint32_t> ranks);

std::vector<std::uint32_t> compute_ranks(std::span<const double> x, const Matrix& prototypes);

QuantizationError quantization_error(const Matrix& points, const Matrix& prototypes,
                                     std::span<const std::size_t> winner);

/// Neighborhood-averaged winner argmin_i sum_l h(nd(i,l)) d(x, w^l).
std::size_t som_winner(std::span<const double> x, const Matrix& prototypes, const Lattice& lattice,
                       double sigma);

/// K prototypes sampled without replacement from the points.
Matrix initial_prototypes(const Matrix& points, std::size_t k, std::uint64_t seed);

EuclideanRun batch_kmeans(const Matrix& points, std::size_t k, std::size_t epochs, std::uint64_t seed);
EuclideanRun batch_kmeans(const Matrix& points, Matrix init, std::size_t epochs);

EuclideanRun batch_ng(const Matrix& points, std::size_t k, const AnnealingSchedule& schedule,
                      std::uint64_t seed);
EuclideanRun batch_ng(const Matrix& points, Matrix init, const AnnealingSchedule& schedule);

EuclideanRun batch_som(const Matrix& points, const Lattice& lattice,
                       const AnnealingSchedule& schedule, std::uint64_t seed);
EuclideanRun batch_som(const Matrix& points, const Lattice& lattice, Matrix init,
                       const AnnealingSchedule& schedule);

}  // namespace mediatop

#endif  // MEDIATOP_EUCLID_BATCH_HPP
