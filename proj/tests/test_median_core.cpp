#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mediatop/error.hpp"
#include "mediatop/median.hpp"
#include "oracles.hpp"

using namespace mediatop;

namespace {

DenseDissimilarity line_sq(const std::vector<double>& x) {
    Matrix m(x.size(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) m(i, j) = (x[i] - x[j]) * (x[i] - x[j]);
    return DenseDissimilarity(std::move(m), true);
}

MedianConfig constant_config(std::size_t k, double sigma, std::size_t epochs, std::uint64_t seed) {
    MedianConfig c;
    c.k = k;
    c.schedule = {sigma, sigma, epochs};
    c.seed = seed;
    return c;
}

double ng_cost(const DenseDissimilarity& d, const std::vector<std::size_t>& loc, double sigma) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        std::vector<double> dist(loc.size());
        for (std::size_t j = 0; j < loc.size(); ++j) dist[j] = d(i, loc[j]);
        const auto r = oracle::ranks_by_sort(dist);
        for (std::size_t j = 0; j < loc.size(); ++j) s += oracle::h(static_cast<double>(r[j]), sigma) * dist[j];
    }
    return s / 2;
}

double plain_cost(const DenseDissimilarity& d, const std::vector<std::size_t>& loc) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double m = d(i, loc[0]);
        for (std::size_t l : loc) m = std::min(m, d(i, l));
        s += m;
    }
    return s / 2;
}

LabelSet classes(std::vector<int> c, std::size_t d) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < d; ++i) names.push_back("c" + std::to_string(i));
    return LabelSet::from_classes(c, names);
}

}  // namespace

TEST_SUITE("median-core") {

TEST_CASE("blended distance") {
    const std::vector<double> y{1, 0}, Y{0, 1};
    CHECK(blended_distance(3.0, y.data(), Y, 1.0) == 3.0);
    CHECK(blended_distance(2.0, y.data(), Y, 0.5) == 2.0);
    CHECK(blended_distance(2.0, y.data(), y, 0.25) == 0.5);
    CHECK(blended_distance(2.0, nullptr, Y, 0.25) == 0.5);
    CHECK_THROWS_AS(blended_distance(2.0, y.data(), Y, 0.0), Error);
    SupervisionConfig s;
    s.beta = 1.5;
    CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("enum names round trip") {
    for (auto i : {SomImpl::naive, SomImpl::block, SomImpl::bnb_self, SomImpl::bnb_full, SomImpl::bnb_full_early})
        CHECK(som_impl_from_string(to_string(i)) == i);
    for (auto i : {NgImpl::naive, NgImpl::early_none, NgImpl::early_candidate, NgImpl::early_fine, NgImpl::early_coarse})
        CHECK(ng_impl_from_string(to_string(i)) == i);
    for (auto t : {TiePolicy::lowest_index, TiePolicy::random, TiePolicy::scan_order})
        CHECK(tie_policy_from_string(to_string(t)) == t);
    CHECK_THROWS_AS(som_impl_from_string("fast"), Error);
}

TEST_CASE("median NG on two pairs") {
    const auto d = line_sq({0, 1, 10, 11});
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto m = train_median(d, MedianAlgorithm::median_ng, constant_config(2, 1e-6, 50, seed));
        auto loc = m.prototypes.loc;
        std::sort(loc.begin(), loc.end());
        CHECK(loc == std::vector<std::size_t>{0, 2});
        CHECK(m.final_cost == doctest::Approx(1.0));
        CHECK(m.converged);
    }
    const auto all = train_median(d, MedianAlgorithm::median_ng, constant_config(4, 1e-6, 50, 1));
    CHECK(all.final_cost == 0.0);
    std::set<std::size_t> distinct(all.prototypes.loc.begin(), all.prototypes.loc.end());
    CHECK(distinct.size() == 4);
}

TEST_CASE("median SOM examples") {
    const auto d = line_sq({0, 1, 10, 11});
    auto c = constant_config(2, 1e-6, 50, 3);
    c.lattice = Lattice::chain(2);
    const auto m = train_median(d, MedianAlgorithm::median_som, c);
    auto loc = m.prototypes.loc;
    std::sort(loc.begin(), loc.end());
    CHECK(loc == std::vector<std::size_t>{0, 2});

    const auto r = oracle::random_symmetric(30, 8);
    const MedianContext ctx(r);
    MedianPrototypes one;
    one.loc = {5};
    const auto e = median_som_epoch(ctx, one, Lattice::chain(1), 1.0, {}, nullptr);
    CHECK(e.prototypes.loc[0] == oracle::weighted_median(r, {}));

    // small sigma: same step as K-medoids on separated clusters
    const auto blobs = oracle::sq_euclid(oracle::blob_points(60, 2, 4, 0.3, 4));
    const MedianContext bctx(blobs);
    MedianPrototypes p;
    p.loc = {0, 1, 2, 3};
    for (int step = 0; step < 4; ++step) {
        const auto som = median_som_epoch(bctx, p, Lattice::rectangular(2, 2), 1e-9, {}, nullptr);
        const auto km = kmedoids_epoch(bctx, p, {}, nullptr);
        CHECK(som.prototypes.loc == km.prototypes.loc);
        p = km.prototypes;
    }
}

TEST_CASE("k-medoids") {
    const auto d = line_sq({0, 1, 10, 11});
    const auto m = train_median(d, MedianAlgorithm::kmedoids, constant_config(2, 1, 50, 2));
    auto loc = m.prototypes.loc;
    std::sort(loc.begin(), loc.end());
    CHECK(loc == std::vector<std::size_t>{0, 2});
    CHECK(train_median(d, MedianAlgorithm::kmedoids, constant_config(4, 1, 10, 0)).final_cost == 0.0);
    CHECK_THROWS_AS(train_median(d, MedianAlgorithm::kmedoids, constant_config(5, 1, 10, 0)), Error);
}

TEST_CASE("collision resolution") {
    const std::vector<std::vector<double>> none{{0, 1, 2}, {2, 1, 0}};
    CHECK(resolve_collisions(none) == std::vector<std::size_t>{0, 2});

    std::vector<std::vector<double>> both(2, std::vector<double>(8, 10.0));
    both[0][4] = 0;
    both[1][4] = 0;
    both[1][7] = 1;
    CHECK(resolve_collisions(both) == std::vector<std::size_t>{4, 7});

    std::vector<std::vector<double>> full(5, std::vector<double>(5, 1.0));
    auto loc = resolve_collisions(full);
    std::sort(loc.begin(), loc.end());
    CHECK(loc == std::vector<std::size_t>{0, 1, 2, 3, 4});

    std::size_t count = 0;
    const std::vector<std::size_t> choices{3, 3, 3};
    const auto r = resolve_collisions(choices, 5,
                                      [](std::size_t, const std::vector<char>& claimed) {
                                          for (std::size_t l = 0; l < claimed.size(); ++l)
                                              if (!claimed[l]) return l;
                                          return std::size_t{0};
                                      },
                                      &count);
    CHECK(r == std::vector<std::size_t>{3, 0, 1});
    CHECK(count == 2);
}

TEST_CASE("posterior labels") {
    const auto d = line_sq({0, 1, 2, 50});
    const std::vector<std::size_t> loc{0, 3};
    const std::vector<std::size_t> winner{0, 0, 0, 1};
    CHECK(posterior_label(d, loc, winner, classes({0, 0, 1, 1}, 2))[0] == 0);
    CHECK(posterior_label(d, loc, winner, classes({1, 0, 1, 0}, 2))[0] == 1);
    // tie between classes 0 and 1 goes to class 0
    CHECK(posterior_label(d, loc, winner, classes({1, 0, -1, 0}, 2))[0] == 0);
    // prototype 1's field has no labeled point: the nearest labeled point decides
    CHECK(posterior_label(d, loc, winner, classes({0, 0, 1, -1}, 2))[1] == 1);
    CHECK_THROWS_AS(posterior_label(d, loc, winner, classes({-1, -1, -1, -1}, 2)), Error);

    Matrix Y(2, 3, std::vector<double>{0.2, 0.5, 0.3, 0, 0, 0});
    const std::vector<int> fb{2, 1};
    CHECK(crisp_prototype_labels(Y, fb) == std::vector<int>{1, 1});
}

TEST_CASE("epoch budget zero returns the initialization") {
    const auto d = oracle::random_symmetric(20, 1);
    auto c = constant_config(3, 1, 0, 9);
    const auto m = train_median(d, MedianAlgorithm::median_ng, c);
    CHECK(m.prototypes.loc == initial_median_prototypes(20, 3, 9, nullptr, {}).loc);
    CHECK(m.epochs_run == 0);
}

TEST_CASE("supervised training") {
    const auto pts = oracle::blob_points(60, 2, 3, 0.8, 44);
    const auto d = oracle::sq_euclid(pts);
    std::vector<int> cls(60);
    for (std::size_t i = 0; i < 60; ++i) cls[i] = i % 7 == 0 ? -1 : static_cast<int>(i % 3);
    const auto labels = classes(cls, 3);
    MedianConfig c;
    c.k = 6;
    c.schedule = {3, 0.01, 40};
    c.seed = 4;
    c.supervision.enabled = true;
    c.supervision.beta = 0.1;
    const auto m = train_median(d, MedianAlgorithm::median_ng, c, &labels);
    REQUIRE(m.prototypes.labels.rows() == 6);
    for (std::size_t j = 0; j < 6; ++j) {
        double s = 0;
        for (std::size_t x = 0; x < 3; ++x) {
            CHECK(m.prototypes.labels(j, x) >= 0.0);
            CHECK(m.prototypes.labels(j, x) <= 1.0);
            s += m.prototypes.labels(j, x);
        }
        CHECK(s <= 1.0 + 1e-12);
    }

    // beta = 1 leaves the trajectory untouched
    c.supervision.beta = 1.0;
    c.record_trajectory = true;
    const auto neutral = train_median(d, MedianAlgorithm::median_ng, c, &labels);
    auto plain_cfg = c;
    plain_cfg.supervision.enabled = false;
    const auto plain = train_median(d, MedianAlgorithm::median_ng, plain_cfg);
    CHECK(neutral.trajectory == plain.trajectory);

    CHECK_THROWS_AS(train_median(d, MedianAlgorithm::median_ng, c), Error);
}

TEST_CASE("small sigma NG step matches K-medoids cost") {
    const auto d = oracle::sq_euclid(oracle::random_points(40, 2, 71));
    const MedianContext ctx(d);
    MedianPrototypes p;
    p.loc = {3, 17, 25};
    for (int step = 0; step < 3; ++step) {
        const auto ng = median_ng_epoch(ctx, p, 1e-9, {}, nullptr);
        const auto km = kmedoids_epoch(ctx, p, {}, nullptr);
        CHECK(ng.cost == doctest::Approx(km.cost).epsilon(1e-9));
        p = km.prototypes;
    }
}

TEST_CASE("fixed points against exhaustive enumeration") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const std::size_t n = 6 + seed % 7;
        const std::size_t k = 1 + seed % 3;
        const auto d = oracle::random_symmetric(n, 100 + seed);
        const auto m = train_median(d, MedianAlgorithm::median_ng, constant_config(k, 1e-9, 500, seed));
        REQUIRE(m.converged);
        const double cost = plain_cost(d, m.prototypes.loc);
        CHECK(cost == doctest::Approx(m.final_cost));
        CHECK(cost >= oracle::best_kmedoid_cost(d, k) / 2 - 1e-12);
        // each prototype is the best free point for its own receptive field
        const auto w = median_winners(d, m.prototypes.loc);
        for (std::size_t j = 0; j < k; ++j) {
            auto field_cost = [&](std::size_t l) {
                double s = 0;
                for (std::size_t i = 0; i < n; ++i)
                    if (w[i] == j) s += d(i, l);
                return s;
            };
            const double own = field_cost(m.prototypes.loc[j]);
            for (std::size_t l = 0; l < n; ++l) {
                if (std::find(m.prototypes.loc.begin(), m.prototypes.loc.end(), l) != m.prototypes.loc.end()) continue;
                CHECK(field_cost(l) >= own);
            }
        }
        // the placement is one of the fixed points found by enumerating every placement
        std::vector<char> pick(n, 0);
        std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), 1);
        bool found = false;
        const MedianContext ctx(d);
        auto sorted_loc = m.prototypes.loc;
        std::sort(sorted_loc.begin(), sorted_loc.end());
        do {
            MedianPrototypes p;
            for (std::size_t l = 0; l < n; ++l)
                if (pick[l]) p.loc.push_back(l);
            if (p.loc != sorted_loc) continue;
            p.loc = m.prototypes.loc;
            found = median_ng_epoch(ctx, p, 1e-9, {}, nullptr).prototypes.loc == p.loc;
        } while (!found && std::prev_permutation(pick.begin(), pick.end()));
        CHECK(found);
    }
}

TEST_CASE("epoch cost matches a direct evaluation") {
    const auto d = oracle::random_symmetric(25, 3);
    const MedianContext ctx(d);
    MedianPrototypes p;
    p.loc = {1, 4, 9, 16};
    const auto r = median_ng_epoch(ctx, p, 1.7, {}, nullptr);
    CHECK(r.cost == doctest::Approx(ng_cost(d, p.loc, 1.7)).epsilon(1e-12));
    for (std::size_t j = 0; j < 4; ++j) {
        std::size_t best = 0;
        double bv = oracle::ng_criterion(d, p.loc, j, 0, 1.7, {});
        for (std::size_t l = 1; l < 25; ++l) {
            const double v = oracle::ng_criterion(d, p.loc, j, l, 1.7, {});
            if (v < bv - 1e-12) {
                bv = v;
                best = l;
            }
        }
        CHECK(r.chosen[j] == best);
    }
}

TEST_CASE("asymmetric input is accepted") {
    auto m = oracle::random_symmetric(15, 5).values();
    m(2, 7) += 0.3;
    const DenseDissimilarity d(m, false);
    const auto model = train_median(d, MedianAlgorithm::median_ng, constant_config(3, 1, 30, 1));
    CHECK(model.prototypes.loc.size() == 3);
}

TEST_CASE("winners and quantization error") {
    const auto d = line_sq({0, 1, 10, 11});
    const std::vector<std::size_t> loc{1, 2};
    const auto w = median_winners(d, loc);
    CHECK(w == std::vector<std::size_t>{0, 0, 1, 1});
    CHECK(median_quantization_error(d, loc, w) == 1.0);
}

}  // TEST_SUITE
