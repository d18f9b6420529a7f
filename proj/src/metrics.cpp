#include "mediatop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mediatop/error.hpp"

namespace mediatop {

double squared_euclidean(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) fail(ErrorKind::shape, "squared_euclidean: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

double cosine_dissimilarity(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) fail(ErrorKind::shape, "cosine_dissimilarity: length mismatch");
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * y[i];
        nx += x[i] * x[i];
        ny += y[i] * y[i];
    }
    if (nx == 0.0 || ny == 0.0) fail(ErrorKind::domain, "cosine_dissimilarity: zero-norm vector");
    const double c = dot / (std::sqrt(nx) * std::sqrt(ny));
    // Rounding can push |c| slightly past 1.
    return std::clamp(1.0 - c, 0.0, 2.0);
}

double weighted_edit_distance(std::span<const double> a, std::span<const double> b,
                              double indel_cost) {
    if (a.empty() || b.empty()) fail(ErrorKind::domain, "weighted_edit_distance: empty sequence");
    if (!(indel_cost > 0.0)) fail(ErrorKind::domain, "weighted_edit_distance: indel cost must be positive");
    // Single-row DP over b; prev[j] = cost(a[0..i), b[0..j)).
    std::vector<double> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<double>(j) * indel_cost;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<double>(i) * indel_cost;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const double sub = prev[j - 1] + std::abs(a[i - 1] - b[j - 1]);
            const double del = prev[j] + indel_cost;
            const double ins = cur[j - 1] + indel_cost;
            cur[j] = std::min({sub, del, ins});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace mediatop
