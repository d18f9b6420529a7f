#ifndef MEDIATOP_NEIGHBORHOOD_HPP
#define MEDIATOP_NEIGHBORHOOD_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "mediatop/matrix.hpp"

namespace mediatop {

/// h_sigma(t) = exp(-t / sigma).
double neighborhood_weight(double t, double sigma);

/// Exponential decay from sigma_start to sigma_end over `epochs` epochs.
struct AnnealingSchedule {
    double sigma_start = 1.0;
    double sigma_end = 0.01;
    std::size_t epochs = 100;

    void validate() const;
    bool constant() const { return sigma_start == sigma_end; }
};

double sigma_at(const AnnealingSchedule& schedule, std::size_t epoch);

enum class LatticeShape { rectangular, hexagonal, explicit_table };

/// Neuron layout of a SOM. nd(j, l) is the Euclidean distance between grid
/// positions; hexagonal grids offset odd rows by half a cell and use a row
/// pitch of sqrt(3)/2.
class Lattice {
public:
    static Lattice rectangular(std::size_t rows, std::size_t cols);
    static Lattice hexagonal(std::size_t rows, std::size_t cols);
    static Lattice chain(std::size_t k) { return rectangular(1, k); }
    static Lattice from_table(Matrix distances);

    std::size_t size() const { return nd_.rows(); }
    LatticeShape shape() const { return shape_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double nd(std::size_t j, std::size_t l) const { return nd_(j, l); }
    double diameter() const;

    /// Neurons ordered by increasing nd(j, .), ties by index; starts with j.
    const std::vector<std::size_t>& neighbor_order(std::size_t j) const { return order_[j]; }

    std::string describe() const;

private:
    Lattice(LatticeShape shape, std::size_t rows, std::size_t cols, Matrix nd);

    LatticeShape shape_;
    std::size_t rows_;
    std::size_t cols_;
    Matrix nd_;
    std::vector<std::vector<std::size_t>> order_;
};

}  // namespace mediatop

#endif  // MEDIATOP_NEIGHBORHOOD_HPP
