#ifndef MEDIATOP_MEDIAN_INTERNAL_HPP
#define MEDIATOP_MEDIAN_INTERNAL_HPP

#include <vector>

#include "mediatop/median.hpp"

namespace mediatop::detail {

/// N x K distances used for assignment: d_beta when supervision is active
/// and ranks are blended, plain d otherwise.
Matrix assignment_distances(const MedianContext& ctx, const MedianPrototypes& protos,
                            const SupervisionConfig& sup, const LabelSet* labels);

/// N x K blended distances d_beta (plain d when supervision is inactive).
Matrix blended_distances(const MedianContext& ctx, const MedianPrototypes& protos,
                         const SupervisionConfig& sup, const LabelSet* labels);

struct SomAssignment {
    std::vector<std::size_t> star;    // I*
    std::vector<std::size_t> winner;  // plain argmin of the assignment distances
    double cost = 0.0;                // half SOM cost
};

SomAssignment som_assign(const MedianContext& ctx, const MedianPrototypes& protos,
                         const Lattice& lattice, double sigma, const SupervisionConfig& sup,
                         const LabelSet* labels);

}  // namespace mediatop::detail

#endif  // MEDIATOP_MEDIAN_INTERNAL_HPP
