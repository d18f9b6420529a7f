#include "mediatop/neighborhood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mediatop/error.hpp"

namespace mediatop {

double neighborhood_weight(double t, double sigma) {
    if (!(sigma > 0.0)) fail(ErrorKind::domain, "neighborhood range must be positive");
    if (t < 0.0) fail(ErrorKind::domain, "neighborhood argument must be nonnegative");
    return std::exp(-t / sigma);
}

void AnnealingSchedule::validate() const {
    if (!(sigma_end > 0.0) || !(sigma_start >= sigma_end)) {
        fail(ErrorKind::config, "schedule needs sigma_start >= sigma_end > 0");
    }
    if (epochs < 1) fail(ErrorKind::config, "schedule needs at least one epoch");
}

double sigma_at(const AnnealingSchedule& schedule, std::size_t epoch) {
    if (epoch >= schedule.epochs) {
        fail(ErrorKind::range, "epoch " + std::to_string(epoch) + " outside schedule of " +
                                   std::to_string(schedule.epochs));
    }
    if (schedule.epochs == 1 || schedule.constant()) return schedule.sigma_start;
    if (epoch == schedule.epochs - 1) return schedule.sigma_end;
    const double frac = static_cast<double>(epoch) / static_cast<double>(schedule.epochs - 1);
    return schedule.sigma_start * std::pow(schedule.sigma_end / schedule.sigma_start, frac);
}

Lattice::Lattice(LatticeShape shape, std::size_t rows, std::size_t cols, Matrix nd)
    : shape_(shape), rows_(rows), cols_(cols), nd_(std::move(nd)) {
    const std::size_t k = nd_.rows();
    order_.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        auto& ord = order_[j];
        ord.resize(k);
        std::iota(ord.begin(), ord.end(), std::size_t{0});
        std::stable_sort(ord.begin(), ord.end(),
                         [&](std::size_t a, std::size_t b) { return nd_(j, a) < nd_(j, b); });
    }
}

Lattice Lattice::rectangular(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) fail(ErrorKind::config, "lattice needs at least one neuron");
    const std::size_t k = rows * cols;
    Matrix nd(k, k);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            const double dr = static_cast<double>(a / cols) - static_cast<double>(b / cols);
            const double dc = static_cast<double>(a % cols) - static_cast<double>(b % cols);
            nd(a, b) = std::sqrt(dr * dr + dc * dc);
        }
    }
    return Lattice(LatticeShape::rectangular, rows, cols, std::move(nd));
}

Lattice Lattice::hexagonal(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) fail(ErrorKind::config, "lattice needs at least one neuron");
    const std::size_t k = rows * cols;
    std::vector<double> x(k), y(k);
    for (std::size_t a = 0; a < k; ++a) {
        const std::size_t r = a / cols;
        x[a] = static_cast<double>(a % cols) + (r % 2 == 1 ? 0.5 : 0.0);
        y[a] = static_cast<double>(r) * std::sqrt(3.0) / 2.0;
    }
    Matrix nd(k, k);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            nd(a, b) = std::hypot(x[a] - x[b], y[a] - y[b]);
        }
    }
    return Lattice(LatticeShape::hexagonal, rows, cols, std::move(nd));
}

Lattice Lattice::from_table(Matrix distances) {
    const std::size_t k = distances.rows();
    if (k == 0 || distances.cols() != k) fail(ErrorKind::config, "lattice table must be square and nonempty");
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            const double v = distances(a, b);
            if (a == b ? v != 0.0 : !(v > 0.0)) {
                fail(ErrorKind::config, "lattice table needs zero diagonal and positive off-diagonal");
            }
            if (v != distances(b, a)) fail(ErrorKind::config, "lattice table must be symmetric");
        }
    }
    return Lattice(LatticeShape::explicit_table, 1, k, std::move(distances));
}

double Lattice::diameter() const {
    const auto& v = nd_.values();
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

std::string Lattice::describe() const {
    switch (shape_) {
        case LatticeShape::rectangular:
            return "rectangular " + std::to_string(rows_) + "x" + std::to_string(cols_);
        case LatticeShape::hexagonal:
            return "hexagonal " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                   " (offset rows, euclidean nd)";
        case LatticeShape::explicit_table:
            return "table " + std::to_string(size());
    }
    return "?";
}

}  // namespace mediatop
