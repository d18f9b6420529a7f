#include "mediatop/euclid_batch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mediatop/error.hpp"
#include "mediatop/metrics.hpp"
#include "mediatop/parallel.hpp"
#include "mediatop/random.hpp"

namespace mediatop {

std::size_t winner_index(std::span<const double> x, const Matrix& prototypes) {
    if (prototypes.rows() == 0) fail(ErrorKind::config, "winner_index: empty prototype set");
    std::size_t best = 0;
    double best_d = squared_euclidean(x, prototypes.row(0));
    for (std::size_t j = 1; j < prototypes.rows(); ++j) {
        const double d = squared_euclidean(x, prototypes.row(j));
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

void rank_distances(std::span<const double> distances, std::span<std::uint32_t> ranks) {
    const std::size_t k = distances.size();
    // Insertion sort of indices: K is small and the result must be stable.
    std::uint32_t order[1024];
    std::vector<std::uint32_t> heap_order;
    std::uint32_t* ord = order;
    if (k > 1024) {
        heap_order.resize(k);
        ord = heap_order.data();
    }
    for (std::size_t a = 0; a < k; ++a) {
        std::size_t pos = a;
        const double v = distances[a];
        while (pos > 0 && distances[ord[pos - 1]] > v) {
            ord[pos] = ord[pos - 1];
            --pos;
        }
        ord[pos] = static_cast<std::uint32_t>(a);
    }
    for (std::size_t r = 0; r < k; ++r) ranks[ord[r]] = static_cast<std::uint32_t>(r);
}

std::vector<std::uint32_t> compute_ranks(std::span<const double> x, const Matrix& prototypes) {
    std::vector<double> d(prototypes.rows());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = squared_euclidean(x, prototypes.row(j));
    std::vector<std::uint32_t> r(d.size());
    rank_distances(d, r);
    return r;
}

QuantizationError quantization_error(const Matrix& points, const Matrix& prototypes,
                                     std::span<const std::size_t> winner) {
    QuantizationError e;
    double s = 0.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
        s += squared_euclidean(points.row(i), prototypes.row(winner[i]));
    }
    e.half = 0.5 * s;
    e.norm = points.rows() ? e.half / static_cast<double>(points.rows()) : 0.0;
    return e;
}

namespace {

std::size_t som_winner_from_distances(std::span<const double> d, const Lattice& lattice, double sigma,
                                      double* cost_out = nullptr) {
    const std::size_t k = d.size();
    std::size_t best = 0;
    double best_v = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        double v = 0.0;
        for (std::size_t l = 0; l < k; ++l) v += neighborhood_weight(lattice.nd(j, l), sigma) * d[l];
        if (j == 0 || v < best_v) {
            best_v = v;
            best = j;
        }
    }
    if (cost_out) *cost_out = best_v;
    return best;
}

void check_run_inputs(const Matrix& points, const Matrix& init) {
    if (init.rows() == 0) fail(ErrorKind::config, "need at least one prototype");
    if (init.rows() > points.rows()) fail(ErrorKind::config, "K exceeds the number of points");
    if (init.cols() != points.cols()) fail(ErrorKind::shape, "prototype dimension does not match data");
}

Matrix distance_table(const Matrix& points, const Matrix& protos) {
    Matrix d(points.rows(), protos.rows());
    parallel_for(points.rows(), [&](std::size_t i) {
        for (std::size_t j = 0; j < protos.rows(); ++j) d(i, j) = squared_euclidean(points.row(i), protos.row(j));
    });
    return d;
}

std::vector<std::size_t> winners_of(const Matrix& dist) {
    std::vector<std::size_t> w(dist.rows());
    for (std::size_t i = 0; i < dist.rows(); ++i) {
        const auto row = dist.row(i);
        w[i] = static_cast<std::size_t>(std::min_element(row.begin(), row.end()) - row.begin());
    }
    return w;
}

/// w^j = sum_i coef(i, j) x^i / sum_i coef(i, j); rows with zero mass keep their value.
template <class Coef>
void weighted_means(const Matrix& points, Matrix& protos, Coef&& coef) {
    const std::size_t k = protos.rows();
    const std::size_t m = points.cols();
    parallel_for(k, [&](std::size_t j) {
        std::vector<double> acc(m, 0.0);
        double mass = 0.0;
        for (std::size_t i = 0; i < points.rows(); ++i) {
            const double c = coef(i, j);
            if (c == 0.0) continue;
            mass += c;
            const auto x = points.row(i);
            for (std::size_t f = 0; f < m; ++f) acc[f] += c * x[f];
        }
        if (mass > 0.0) {
            auto w = protos.row(j);
            for (std::size_t f = 0; f < m; ++f) w[f] = acc[f] / mass;
        }
    });
}

}  // namespace

std::size_t som_winner(std::span<const double> x, const Matrix& prototypes, const Lattice& lattice,
                       double sigma) {
    if (prototypes.rows() != lattice.size()) fail(ErrorKind::shape, "lattice size does not match K");
    std::vector<double> d(prototypes.rows());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = squared_euclidean(x, prototypes.row(j));
    return som_winner_from_distances(d, lattice, sigma);
}

Matrix initial_prototypes(const Matrix& points, std::size_t k, std::uint64_t seed) {
    if (k == 0) fail(ErrorKind::config, "need at least one prototype");
    if (k > points.rows()) fail(ErrorKind::config, "K exceeds the number of points");
    Rng rng(seed);
    const auto idx = rng.sample_without_replacement(points.rows(), k);
    Matrix w(k, points.cols());
    for (std::size_t j = 0; j < k; ++j) {
        const auto src = points.row(idx[j]);
        std::copy(src.begin(), src.end(), w.row(j).begin());
    }
    return w;
}

EuclideanRun batch_kmeans(const Matrix& points, std::size_t k, std::size_t epochs, std::uint64_t seed) {
    return batch_kmeans(points, initial_prototypes(points, k, seed), epochs);
}

EuclideanRun batch_kmeans(const Matrix& points, Matrix init, std::size_t epochs) {
    check_run_inputs(points, init);
    EuclideanRun run;
    run.prototypes = std::move(init);
    const std::size_t n = points.rows();
    const std::size_t k = run.prototypes.rows();
    std::vector<std::size_t> prev;
    for (std::size_t t = 0; t < epochs; ++t) {
        const Matrix dist = distance_table(points, run.prototypes);
        auto win = winners_of(dist);
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i) cost += dist(i, win[i]);
        run.history.push_back(0.5 * cost);
        if (t > 0 && win == prev) {
            run.converged = true;
            break;
        }
        weighted_means(points, run.prototypes,
                       [&](std::size_t i, std::size_t j) { return win[i] == j ? 1.0 : 0.0; });
        // Re-seed empty clusters at the points farthest from their winner.
        std::vector<std::size_t> count(k, 0);
        for (auto w : win) ++count[w];
        std::vector<char> used(n, 0);
        for (std::size_t j = 0; j < k; ++j) {
            if (count[j] != 0) continue;
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (used[i]) continue;
                if (far == n || dist(i, win[i]) > dist(far, win[far])) far = i;
            }
            used[far] = 1;
            const auto src = points.row(far);
            std::copy(src.begin(), src.end(), run.prototypes.row(j).begin());
        }
        prev = std::move(win);
        ++run.epochs_run;
    }
    run.state.winner = winners_of(distance_table(points, run.prototypes));
    return run;
}

EuclideanRun batch_ng(const Matrix& points, std::size_t k, const AnnealingSchedule& schedule,
                      std::uint64_t seed) {
    return batch_ng(points, initial_prototypes(points, k, seed), schedule);
}

EuclideanRun batch_ng(const Matrix& points, Matrix init, const AnnealingSchedule& schedule) {
    check_run_inputs(points, init);
    schedule.validate();
    EuclideanRun run;
    run.prototypes = std::move(init);
    const std::size_t n = points.rows();
    const std::size_t k = run.prototypes.rows();
    std::vector<std::uint32_t> ranks(n * k), prev;
    double prev_sigma = 0.0;
    for (std::size_t t = 0; t < schedule.epochs; ++t) {
        const double sigma = sigma_at(schedule, t);
        const Matrix dist = distance_table(points, run.prototypes);
        parallel_for(n, [&](std::size_t i) {
            rank_distances(dist.row(i), std::span<std::uint32_t>(ranks.data() + i * k, k));
        });
        std::vector<double> h(k);
        for (std::size_t r = 0; r < k; ++r) h[r] = neighborhood_weight(static_cast<double>(r), sigma);
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < k; ++j) cost += h[ranks[i * k + j]] * dist(i, j);
        }
        run.history.push_back(0.5 * cost);
        if (t > 0 && ranks == prev && sigma == prev_sigma && sigma == schedule.sigma_end) {
            run.converged = true;
            break;
        }
        weighted_means(points, run.prototypes,
                       [&](std::size_t i, std::size_t j) { return h[ranks[i * k + j]]; });
        prev = ranks;
        prev_sigma = sigma;
        ++run.epochs_run;
    }
    const Matrix dist = distance_table(points, run.prototypes);
    run.state.winner = winners_of(dist);
    run.state.ranks.resize(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        rank_distances(dist.row(i), std::span<std::uint32_t>(run.state.ranks.data() + i * k, k));
    }
    return run;
}

EuclideanRun batch_som(const Matrix& points, const Lattice& lattice,
                       const AnnealingSchedule& schedule, std::uint64_t seed) {
    return batch_som(points, lattice, initial_prototypes(points, lattice.size(), seed), schedule);
}

EuclideanRun batch_som(const Matrix& points, const Lattice& lattice, Matrix init,
                       const AnnealingSchedule& schedule) {
    check_run_inputs(points, init);
    schedule.validate();
    if (init.rows() != lattice.size()) fail(ErrorKind::shape, "lattice size does not match K");
    EuclideanRun run;
    run.prototypes = std::move(init);
    const std::size_t n = points.rows();
    const std::size_t k = run.prototypes.rows();
    std::vector<std::size_t> star(n), prev;
    std::vector<double> point_cost(n);
    double prev_sigma = 0.0;
    for (std::size_t t = 0; t < schedule.epochs; ++t) {
        const double sigma = sigma_at(schedule, t);
        const Matrix dist = distance_table(points, run.prototypes);
        parallel_for(n, [&](std::size_t i) {
            star[i] = som_winner_from_distances(dist.row(i), lattice, sigma, &point_cost[i]);
        });
        run.history.push_back(0.5 * std::accumulate(point_cost.begin(), point_cost.end(), 0.0));
        if (t > 0 && star == prev && sigma == prev_sigma && sigma == schedule.sigma_end) {
            run.converged = true;
            break;
        }
        Matrix h(k, k);
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) h(a, b) = neighborhood_weight(lattice.nd(a, b), sigma);
        }
        weighted_means(points, run.prototypes,
                       [&](std::size_t i, std::size_t j) { return h(star[i], j); });
        prev = star;
        prev_sigma = sigma;
        ++run.epochs_run;
    }
    const double sigma = schedule.epochs ? sigma_at(schedule, schedule.epochs - 1) : schedule.sigma_end;
    const Matrix dist = distance_table(points, run.prototypes);
    run.state.winner = winners_of(dist);
    run.state.som_winner.resize(n);
    for (std::size_t i = 0; i < n; ++i) run.state.som_winner[i] = som_winner_from_distances(dist.row(i), lattice, sigma);
    return run;
}

}  // namespace mediatop
