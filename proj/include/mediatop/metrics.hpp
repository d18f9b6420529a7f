#ifndef MEDIATOP_METRICS_HPP
#define MEDIATOP_METRICS_HPP

#include <span>

namespace mediatop {

inline constexpr double kDefaultIndelCost = 4.5;

double squared_euclidean(std::span<const double> x, std::span<const double> y);

/// 1 - cos(x, y); both vectors need a nonzero norm.
double cosine_dissimilarity(std::span<const double> x, std::span<const double> y);

/// Edit distance where substituting u by v costs |u - v| and every
/// insertion or deletion costs indel_cost.
double weighted_edit_distance(std::span<const double> a, std::span<const double> b,
                              double indel_cost = kDefaultIndelCost);

}  // namespace mediatop

#endif  // MEDIATOP_METRICS_HPP
