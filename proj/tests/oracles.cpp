#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace oracle {

Matrix random_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix m(n, dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < dim; ++c) m(i, c) = u(gen);
    return m;
}

Matrix blob_points(std::size_t n, std::size_t dim, std::size_t centers, double spread, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::normal_distribution<double> g(0.0, spread);
    Matrix c(centers, dim);
    for (std::size_t k = 0; k < centers; ++k)
        for (std::size_t x = 0; x < dim; ++x) c(k, x) = u(gen);
    Matrix m(n, dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t x = 0; x < dim; ++x) m(i, x) = c(i % centers, x) + g(gen);
    return m;
}

DenseDissimilarity sq_euclid(const Matrix& p) {
    const std::size_t n = p.rows();
    Matrix d(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < p.cols(); ++c) s += (p(i, c) - p(j, c)) * (p(i, c) - p(j, c));
            d(i, j) = s;
        }
    }
    return DenseDissimilarity(std::move(d), true);
}

DenseDissimilarity random_symmetric(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix d(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 1.0 - u(gen);
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return DenseDissimilarity(std::move(d), true);
}

double h(double t, double sigma) { return std::exp(-t / sigma); }

std::size_t weighted_median(const DenseDissimilarity& d, const std::vector<double>& w) {
    const std::size_t n = d.size();
    std::size_t best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < n; ++l) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += (w.empty() ? 1.0 : w[i]) * d(i, l);
        if (s < best_v) {
            best_v = s;
            best = l;
        }
    }
    return best;
}

double edit_distance_bruteforce(const std::vector<double>& a, const std::vector<double>& b, double indel) {
    std::function<double(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t j) -> double {
        if (i == a.size()) return indel * static_cast<double>(b.size() - j);
        if (j == b.size()) return indel * static_cast<double>(a.size() - i);
        const double sub = std::abs(a[i] - b[j]) + rec(i + 1, j + 1);
        const double del = indel + rec(i + 1, j);
        const double ins = indel + rec(i, j + 1);
        return std::min({sub, del, ins});
    };
    return rec(0, 0);
}

double best_kmedoid_cost(const DenseDissimilarity& d, std::size_t k) {
    const std::size_t n = d.size();
    std::vector<char> pick(n, 0);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), 1);
    double best = std::numeric_limits<double>::infinity();
    // prev_permutation over a sorted-descending mask enumerates all subsets
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double m = std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < n; ++l)
                if (pick[l]) m = std::min(m, d(i, l));
            cost += m;
        }
        best = std::min(best, cost);
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return best;
}

std::vector<std::size_t> ranks_by_sort(const std::vector<double>& values) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return values[a] < values[b] || (values[a] == values[b] && a < b);
    });
    std::vector<std::size_t> r(values.size());
    for (std::size_t p = 0; p < idx.size(); ++p) r[idx[p]] = p;
    return r;
}

double ng_criterion(const DenseDissimilarity& d, const std::vector<std::size_t>& loc, std::size_t j,
                    std::size_t l, double sigma, const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        std::vector<double> dist(loc.size());
        for (std::size_t q = 0; q < loc.size(); ++q) dist[q] = d(i, loc[q]);
        const auto r = ranks_by_sort(dist);
        s += h(static_cast<double>(r[j]), sigma) * (w.empty() ? 1.0 : w[i]) * d(i, l);
    }
    return s;
}

}  // namespace oracle
