// Randomized property suites. They are linked into the property test binary
// and into the acceptance binary, which runs them in-process.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mediatop/euclid_batch.hpp"
#include "mediatop/fast_som.hpp"
#include "mediatop/median.hpp"
#include "mediatop/metrics.hpp"
#include "mediatop/patch.hpp"
#include "mediatop/random.hpp"
#include "oracles.hpp"

using namespace mediatop;

namespace {

bool is_permutation_row(const std::uint32_t* row, std::size_t k) {
    std::vector<char> seen(k, 0);
    for (std::size_t j = 0; j < k; ++j) {
        if (row[j] >= k || seen[row[j]]) return false;
        seen[row[j]] = 1;
    }
    return true;
}

DenseDissimilarity instance(std::uint64_t seed, std::size_t n) {
    // alternate between metric data with cluster structure and unstructured matrices
    if (seed % 2 == 0) return oracle::sq_euclid(oracle::blob_points(n, 3, 2 + seed % 7, 1.0, seed));
    return oracle::random_symmetric(n, seed);
}

DenseDissimilarity integer_instance(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 1.0 + static_cast<double>(rng.below(60));
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return DenseDissimilarity(std::move(m), true);
}

LabelSet random_labels(std::size_t n, std::size_t classes, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> c(n);
    for (auto& v : c) v = rng.below(5) == 0 ? -1 : static_cast<int>(rng.below(classes));
    std::vector<std::string> names;
    for (std::size_t i = 0; i < classes; ++i) names.push_back(std::to_string(i));
    return LabelSet::from_classes(c, names);
}

std::vector<double> random_sequence(Rng& rng, std::size_t max_len) {
    std::vector<double> s(1 + rng.below(max_len));
    for (auto& v : s) v = static_cast<double>(rng.below(9)) - 4.0 + 0.5 * static_cast<double>(rng.below(2));
    return s;
}

}  // namespace

TEST_SUITE("rank-permutation") {

TEST_CASE("median NG rank rows are permutations led by the winner") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t n = 30 + 7 * seed;
        const std::size_t k = 2 + seed % 9;
        const auto d = instance(seed, n);
        const MedianContext ctx(d);
        MedianPrototypes p;
        p.loc = Rng(seed).sample_without_replacement(n, k);
        const auto r = median_ng_epoch(ctx, p, 1.0, {}, nullptr);
        const auto w = median_winners(d, p.loc);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(is_permutation_row(r.ranks.data() + i * k, k));
            CHECK(r.ranks[i * k + w[i]] == 0);
        }
    }
}

TEST_CASE("ties between equal distances keep rows permutations") {
    // duplicated points give exactly equal distances to several prototypes
    Matrix pts(12, 1);
    for (std::size_t i = 0; i < 12; ++i) pts(i, 0) = static_cast<double>(i / 3);
    const auto d = oracle::sq_euclid(pts);
    const MedianContext ctx(d);
    MedianPrototypes p;
    p.loc = {0, 1, 2, 6};
    const auto r = median_ng_epoch(ctx, p, 2.0, {}, nullptr);
    for (std::size_t i = 0; i < 12; ++i) CHECK(is_permutation_row(r.ranks.data() + i * 4, 4));
}

TEST_CASE("batch NG rank rows are permutations") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto pts = oracle::blob_points(80, 2, 4, 0.7, seed);
        const auto run = batch_ng(pts, 3 + seed % 5, {2, 0.1, 15}, seed);
        const std::size_t k = run.prototypes.rows();
        for (std::size_t i = 0; i < 80; ++i) {
            CHECK(is_permutation_row(run.state.ranks.data() + i * k, k));
            CHECK(run.state.ranks[i * k + run.state.winner[i]] == 0);
        }
    }
}

}  // TEST_SUITE

TEST_SUITE("cost-descent") {

// The descent argument needs the argmin update; an epoch where collision
// prevention moved a prototype off its argmin is excluded from the check.
template <class Epoch>
void check_descent(const Epoch& epoch, MedianPrototypes p, std::size_t rounds, std::size_t& checked) {
    double prev = std::numeric_limits<double>::infinity();
    bool prev_clean = false;
    for (std::size_t t = 0; t < rounds; ++t) {
        const EpochResult r = epoch(p);
        if (prev_clean) {
            CHECK(r.cost <= prev * (1 + 1e-12));
            ++checked;
        }
        prev = r.cost;
        prev_clean = r.collisions == 0;
        p = r.prototypes;
    }
}

TEST_CASE("median NG at fixed sigma") {
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
        const std::size_t n = 40 + 10 * seed;
        const std::size_t k = 2 + seed % 8;
        const auto d = instance(seed, n);
        const MedianContext ctx(d);
        const double sigma = 0.3 + 0.4 * static_cast<double>(seed % 5);
        MedianPrototypes p;
        p.loc = Rng(seed).sample_without_replacement(n, k);
        check_descent([&](const MedianPrototypes& q) { return median_ng_epoch(ctx, q, sigma, {}, nullptr); }, p, 15,
                      checked);

        const auto labels = random_labels(n, 3, seed);
        SupervisionConfig sup{true, 0.3, true};
        MedianPrototypes s = initial_median_prototypes(n, k, seed, &labels, sup);
        check_descent([&](const MedianPrototypes& q) { return median_ng_epoch(ctx, q, sigma, sup, &labels); }, s, 15,
                      checked);
    }
    CHECK(checked > 300);
}

TEST_CASE("median SOM at fixed sigma") {
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const std::size_t n = 40 + 15 * seed;
        const auto lat = seed % 2 ? Lattice::rectangular(3, 3) : Lattice::hexagonal(2, 3);
        const std::size_t k = lat.size();
        const auto d = instance(seed, n);
        const MedianContext ctx(d);
        const double sigma = 0.2 + 0.3 * static_cast<double>(seed % 4);
        MedianPrototypes p;
        p.loc = Rng(seed).sample_without_replacement(n, k);
        check_descent([&](const MedianPrototypes& q) { return median_som_epoch(ctx, q, lat, sigma, {}, nullptr); }, p,
                      15, checked);
    }
    CHECK(checked > 100);
}

TEST_CASE("k-medoids and batch vector algorithms") {
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const std::size_t n = 60 + 20 * seed;
        const auto pts = oracle::blob_points(n, 2, 5, 1.0, seed);
        const auto d = oracle::sq_euclid(pts);
        const MedianContext ctx(d);
        MedianPrototypes p;
        p.loc = Rng(seed).sample_without_replacement(n, 6);
        check_descent([&](const MedianPrototypes& q) { return kmedoids_epoch(ctx, q, {}, nullptr); }, p, 15, checked);

        for (const auto& run : {batch_kmeans(pts, 6, 40, seed), batch_ng(pts, 6, {1.0, 1.0, 40}, seed),
                                batch_som(pts, Lattice::rectangular(2, 3), {0.7, 0.7, 40}, seed)}) {
            for (std::size_t t = 1; t < run.history.size(); ++t) CHECK(run.history[t] <= run.history[t - 1] * (1 + 1e-12));
        }
    }
    CHECK(checked > 50);
}

}  // TEST_SUITE

TEST_SUITE("finite-convergence") {

TEST_CASE("median algorithms reach a fixed point at constant sigma") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const std::size_t n = 50 + 37 * seed;  // up to 457
        const auto d = instance(seed, n);
        MedianConfig c;
        c.k = 4 + seed % 6;
        c.schedule = {0.5 + 0.2 * static_cast<double>(seed % 3), 0.5 + 0.2 * static_cast<double>(seed % 3), 500};
        c.seed = seed;
        const auto ng = train_median(d, MedianAlgorithm::median_ng, c);
        CHECK(ng.converged);
        CHECK(ng.epochs_run <= 500);
        const auto km = train_median(d, MedianAlgorithm::kmedoids, c);
        CHECK(km.converged);
        c.k = 6;
        c.lattice = Lattice::rectangular(2, 3);
        const auto som = train_median(d, MedianAlgorithm::median_som, c);
        CHECK(som.converged);
    }
}

TEST_CASE("batch vector algorithms reach a fixed point at constant sigma") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto pts = oracle::blob_points(100 + 25 * seed, 3, 5, 1.0, seed);
        CHECK(batch_kmeans(pts, 5, 500, seed).converged);
        CHECK(batch_ng(pts, 5, {0.8, 0.8, 500}, seed).converged);
        CHECK(batch_som(pts, Lattice::chain(5), {0.8, 0.8, 500}, seed).converged);
    }
}

}  // TEST_SUITE

TEST_SUITE("bound-soundness") {

TEST_CASE("lower bounds never exceed the best candidate of their class") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t n = 40 + 8 * seed;  // up to 192
        const auto d = instance(seed, n);
        const MedianContext ctx(d);
        const auto lat = seed % 3 == 0 ? Lattice::hexagonal(3, 3) : Lattice::rectangular(2 + seed % 3, 3);
        const std::size_t k = lat.size();
        MedianPrototypes p;
        p.loc = Rng(seed).sample_without_replacement(n, k);
        const double sigma = 0.1 + 0.35 * static_cast<double>(seed % 6);
        const auto fields = receptive_fields(ctx, p, lat, sigma);
        const auto sums = block_sums(ctx, fields);
        const auto w = CanonicalWeights::make(lat, sigma);
        const auto table = naive_som_criteria(ctx, fields, w);
        for (auto mode : {ThetaMode::self, ThetaMode::full}) {
            const auto b = bnb_bounds(sums, w, mode);
            for (std::size_t j = 0; j < k; ++j) {
                for (std::size_t m = 0; m < k; ++m) {
                    double best = std::numeric_limits<double>::infinity();
                    for (std::uint32_t l : fields.members_of(m)) best = std::min(best, table[j * n + l]);
                    CHECK(b.bound(m, j) <= best);
                }
            }
        }
        const auto self = bnb_bounds(sums, w, ThetaMode::self);
        const auto full = bnb_bounds(sums, w, ThetaMode::full);
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t m = 0; m < k; ++m) CHECK(full.bound(m, j) >= self.bound(m, j));
    }
}

}  // TEST_SUITE

TEST_SUITE("multiplicity-duplication") {

TEST_CASE("a point with multiplicity c trains like c copies") {
    std::size_t compared = 0;
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        Rng rng(seed);
        const std::size_t n = 10 + rng.below(16);
        const std::size_t k = 2 + rng.below(3);
        const auto d = integer_instance(n, seed);
        std::vector<double> m(n, 1.0);
        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        for (int t = 0; t < 3; ++t) {
            const std::size_t i = rng.below(n);
            const std::size_t extra = 1 + rng.below(3);
            m[i] += static_cast<double>(extra);
            rows.insert(rows.end(), extra, i);
        }
        Matrix dup(rows.size(), rows.size());
        for (std::size_t a = 0; a < rows.size(); ++a)
            for (std::size_t b = 0; b < rows.size(); ++b) dup(a, b) = d(rows[a], rows[b]);
        const DenseDissimilarity dd(dup, true);

        ExtendedPatch ext;
        ext.dissim = d.values();
        ext.multiplicity = m;
        ext.origin = std::vector<std::size_t>(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n));
        const AnnealingSchedule s{static_cast<double>(k), 0.05, 25};
        const auto init = Rng(seed + 99).sample_without_replacement(n, k);
        const auto w = weighted_median_ng(ext, k, s, 0, {}, nullptr, init);
        MedianConfig c;
        c.k = k;
        c.schedule = s;
        c.init = init;
        c.record_trajectory = true;
        const auto r = train_median(dd, MedianAlgorithm::median_ng, c);

        // Collision prevention may hand a prototype a copy of a claimed point
        // in the duplicated layout, which has no counterpart with weights.
        std::size_t collisions = 0;
        for (const auto& h : w.model.history) collisions += h.collisions;
        for (const auto& h : r.history) collisions += h.collisions;
        if (collisions > 0) continue;
        ++compared;
        CHECK(w.prototypes.loc == r.prototypes.loc);
        REQUIRE(w.model.history.size() == r.history.size());
        for (std::size_t t = 0; t < r.history.size(); ++t)
            CHECK(w.model.history[t].cost == doctest::Approx(r.history[t].cost).epsilon(1e-12));
        double total = 0;
        for (double x : w.totals) total += x;
        CHECK(total == static_cast<double>(rows.size()));
    }
    CHECK(compared >= 20);
}

TEST_CASE("weighted generalized median") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t n = 8 + seed;
        const auto d = oracle::random_symmetric(n, seed);
        Rng rng(seed);
        std::vector<double> m(n);
        for (auto& v : m) v = 1.0 + static_cast<double>(rng.below(6));
        ExtendedPatch ext;
        ext.dissim = d.values();
        ext.multiplicity = m;
        ext.origin.resize(n);
        std::iota(ext.origin.begin(), ext.origin.end(), std::size_t{0});
        const auto r = weighted_median_ng(ext, 1, {1, 1, 3}, seed);
        CHECK(r.prototypes.loc[0] == oracle::weighted_median(d, m));
    }
}

}  // TEST_SUITE

TEST_SUITE("single-patch") {

TEST_CASE("one patch is plain median NG, bit for bit") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const std::size_t n = 30 + 20 * seed;
        const auto d = instance(seed, n);
        const std::size_t k = 2 + seed % 7;
        const AnnealingSchedule s{static_cast<double>(k) / 2, 0.01, 40};
        PatchOptions o;
        MedianConfig c;
        c.k = k;
        c.schedule = s;
        c.seed = seed;
        const LabelSet labels = random_labels(n, 3, seed);
        const bool sup = seed % 2 == 1;
        if (sup) {
            o.supervision = {true, 0.4, true};
            c.supervision = o.supervision;
        }
        const auto p = patch_median_ng(d, k, 1, s, seed, o, sup ? &labels : nullptr);
        const auto plain = train_median(d, MedianAlgorithm::median_ng, c, sup ? &labels : nullptr);
        CHECK(p.prototypes.loc == plain.prototypes.loc);
        CHECK(p.prototypes.labels == plain.prototypes.labels);
        const auto w = median_winners(d, plain.prototypes.loc);
        std::vector<double> mass(k, 0.0);
        for (std::size_t i = 0; i < n; ++i) mass[w[i]] += 1.0;
        CHECK(p.multiplicity == mass);
    }
}

}  // TEST_SUITE

TEST_SUITE("edit-distance") {

TEST_CASE("symmetry and identity") {
    Rng rng(2024);
    for (int t = 0; t < 400; ++t) {
        const auto a = random_sequence(rng, 12);
        const auto b = random_sequence(rng, 12);
        const double indel = 0.5 + static_cast<double>(rng.below(10));
        CHECK(weighted_edit_distance(a, b, indel) == weighted_edit_distance(b, a, indel));
        CHECK(weighted_edit_distance(a, a, indel) == 0.0);
        if (a != b) CHECK(weighted_edit_distance(a, b, indel) > 0.0);
    }
}

TEST_CASE("small cases match exhaustive enumeration") {
    Rng rng(7);
    for (int t = 0; t < 300; ++t) {
        const auto a = random_sequence(rng, 5);
        const auto b = random_sequence(rng, 5);
        const double indel = t % 3 == 0 ? kDefaultIndelCost : 0.5 + static_cast<double>(rng.below(6));
        CHECK(weighted_edit_distance(a, b, indel) == doctest::Approx(oracle::edit_distance_bruteforce(a, b, indel)));
    }
}

}  // TEST_SUITE
