#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "mediatop/dataset.hpp"
#include "mediatop/dissimilarity.hpp"
#include "mediatop/error.hpp"
#include "mediatop/io.hpp"
#include "mediatop/metrics.hpp"
#include "mediatop/neighborhood.hpp"
#include "mediatop/parallel.hpp"
#include "mediatop/random.hpp"
#include "oracles.hpp"

using namespace mediatop;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::invariant;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "mediatop_unit";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_SUITE("core-data") {

TEST_CASE("neighborhood weight") {
    CHECK(neighborhood_weight(0, 2.0) == 1.0);
    CHECK(neighborhood_weight(1, 1.0) == doctest::Approx(0.36787944117).epsilon(1e-10));
    CHECK(neighborhood_weight(3, 1.5) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(kind_of([] { neighborhood_weight(1, 0.0); }) == ErrorKind::domain);
    CHECK(kind_of([] { neighborhood_weight(1, -1.0); }) == ErrorKind::domain);
    for (double s : {0.1, 1.0, 7.5}) {
        double prev = neighborhood_weight(0, s);
        for (int t = 1; t < 20; ++t) {
            const double w = neighborhood_weight(t, s);
            CHECK(w < prev);
            prev = w;
        }
    }
}

TEST_CASE("sigma schedule") {
    CHECK(sigma_at({4, 4, 10}, 5) == 4.0);
    CHECK(sigma_at({8, 0.5, 5}, 4) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(sigma_at({8, 0.5, 5}, 2) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(sigma_at({8, 0.5, 5}, 0) == 8.0);
    CHECK(sigma_at({3, 1, 1}, 0) == 3.0);
    CHECK(kind_of([] { sigma_at({8, 0.5, 5}, 5); }) == ErrorKind::range);
    CHECK(kind_of([] { AnnealingSchedule{0.5, 8, 5}.validate(); }) == ErrorKind::config);
    AnnealingSchedule s{10, 0.01, 50};
    for (std::size_t t = 1; t < 50; ++t) CHECK(sigma_at(s, t) <= sigma_at(s, t - 1));
}

TEST_CASE("squared euclidean") {
    const std::vector<double> a{1, 2}, b{0, 0}, c{3, 4}, x{1, -1, 2}, y{2, 1, 0};
    CHECK(squared_euclidean(a, a) == 0);
    CHECK(squared_euclidean(b, c) == 25);
    CHECK(squared_euclidean(x, y) == 9);
    CHECK(kind_of([&] { squared_euclidean(a, x); }) == ErrorKind::shape);
}

TEST_CASE("cosine dissimilarity") {
    const std::vector<double> a{1, 0}, b{2, 0}, c{0, 5}, d{1, 1}, e{-1, -1}, z{0, 0};
    CHECK(cosine_dissimilarity(a, b) == doctest::Approx(0.0));
    CHECK(cosine_dissimilarity(a, c) == doctest::Approx(1.0));
    CHECK(cosine_dissimilarity(d, e) == doctest::Approx(2.0));
    CHECK(kind_of([&] { cosine_dissimilarity(a, z); }) == ErrorKind::domain);
}

TEST_CASE("weighted edit distance") {
    const std::vector<double> a{3, 1, 2}, b{3}, c{5}, d{1, 2}, e{1};
    CHECK(weighted_edit_distance(a, a, 4.5) == 0);
    CHECK(weighted_edit_distance(b, c, 4.5) == 2);
    CHECK(weighted_edit_distance(d, e, 4.5) == 4.5);
    CHECK(weighted_edit_distance(d, e) == 4.5);
    // substitution more expensive than two indels
    const std::vector<double> f{0}, g{20};
    CHECK(weighted_edit_distance(f, g, 4.5) == 9.0);
}

TEST_CASE("z-score standardization") {
    VectorDataset v;
    v.points = Matrix(2, 2, std::vector<double>{2, 5, 4, 5});
    const auto z = zscore_standardize(v);
    CHECK(z.points(0, 0) == doctest::Approx(-1.0));
    CHECK(z.points(1, 0) == doctest::Approx(1.0));
    CHECK(z.points(0, 1) == 0.0);
    CHECK(z.points(1, 1) == 0.0);

    VectorDataset w;
    w.points = oracle::random_points(40, 3, 5);
    const auto z1 = zscore_standardize(w);
    const auto z2 = zscore_standardize(z1);
    for (std::size_t c = 0; c < 3; ++c) {
        double mean = 0, sq = 0;
        for (std::size_t i = 0; i < 40; ++i) mean += z1.points(i, c);
        mean /= 40;
        for (std::size_t i = 0; i < 40; ++i) sq += (z1.points(i, c) - mean) * (z1.points(i, c) - mean);
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::sqrt(sq / 40) == doctest::Approx(1.0).epsilon(1e-9));
    }
    for (std::size_t i = 0; i < 40 * 3; ++i) CHECK(std::abs(z1.points.values()[i] - z2.points.values()[i]) < 1e-9);

    const auto zs = zscore_standardize(w, StdConvention::sample);
    double sq = 0;
    for (std::size_t i = 0; i < 40; ++i) sq += zs.points(i, 0) * zs.points(i, 0);
    CHECK(std::sqrt(sq / 39) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("materialized dissimilarities") {
    VectorDataset same;
    same.points = Matrix(3, 2, 1.5);
    const auto z = materialize_dissimilarity(same, Metric::squared_euclidean);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(z(i, j) == 0.0);

    VectorDataset two;
    two.points = Matrix(2, 2, std::vector<double>{0, 0, 3, 4});
    CHECK(materialize_dissimilarity(two, Metric::squared_euclidean)(0, 1) == 25.0);
    CHECK(materialize_dissimilarity(two, Metric::squared_euclidean).symmetric());

    SequenceDataset seq;
    seq.sequences = {{1, 2}, {1}};
    const auto e = materialize_dissimilarity(seq, 4.5);
    CHECK(e(0, 1) == 4.5);
    CHECK(e(1, 0) == 4.5);

    CHECK(kind_of([&] { materialize_dissimilarity(two, Metric::edit); }) == ErrorKind::config);

    VectorDataset many;
    many.points = oracle::random_points(120, 4, 9);
    const auto m = materialize_dissimilarity(many, Metric::cosine);
    CHECK_NOTHROW(validate_dissimilarity(m));
    const auto oracle_d = oracle::sq_euclid(many.points);
    const auto sq = materialize_dissimilarity(many, Metric::squared_euclidean);
    for (std::size_t i = 0; i < 120; ++i)
        for (std::size_t j = 0; j < 120; ++j) CHECK(sq(i, j) == doctest::Approx(oracle_d(i, j)).epsilon(1e-12));
}

TEST_CASE("dissimilarity validation") {
    Matrix bad(3, 3, 1.0);
    CHECK(kind_of([&] { validate_dissimilarity(DenseDissimilarity(bad, false)); }) == ErrorKind::data);
    Matrix asym(2, 2, std::vector<double>{0, 1, 2, 0});
    CHECK_NOTHROW(validate_dissimilarity(DenseDissimilarity(asym, false)));
    CHECK(kind_of([&] { validate_dissimilarity(DenseDissimilarity(asym, true)); }) == ErrorKind::data);
    Matrix neg(2, 2, std::vector<double>{0, -1, -1, 0});
    CHECK(kind_of([&] { validate_dissimilarity(DenseDissimilarity(neg, true)); }) == ErrorKind::data);
}

TEST_CASE("lattices") {
    const auto r = Lattice::rectangular(2, 3);
    CHECK(r.size() == 6);
    CHECK(r.nd(0, 5) == doctest::Approx(std::sqrt(5.0)));
    CHECK(r.nd(2, 2) == 0);
    for (std::size_t j = 0; j < 6; ++j) {
        CHECK(r.neighbor_order(j).front() == j);
        for (std::size_t l = 0; l < 6; ++l) {
            CHECK(r.nd(j, l) == r.nd(l, j));
            if (j != l) CHECK(r.nd(j, l) > 0);
        }
    }
    const auto h = Lattice::hexagonal(3, 3);
    // odd rows shift by half a cell: neighbors in the next row are at distance 1
    CHECK(h.nd(0, 3) == doctest::Approx(1.0));
    CHECK(h.nd(1, 3) == doctest::Approx(1.0));
    CHECK(Lattice::chain(4).diameter() == 3.0);
    CHECK(kind_of([] { Lattice::from_table(Matrix(2, 2, std::vector<double>{0, 1, 2, 0})); }) == ErrorKind::config);
}

TEST_CASE("seeded generator") {
    Rng a(17), b(17);
    CHECK(a.permutation(50) == b.permutation(50));
    auto s = Rng(3).sample_without_replacement(20, 20);
    std::sort(s.begin(), s.end());
    for (std::size_t i = 0; i < 20; ++i) CHECK(s[i] == i);
    CHECK(Rng::derive(1, 2) != Rng::derive(1, 3));
    CHECK(Rng::derive(1, 2) == Rng::derive(1, 2));
    Rng c(5);
    for (int i = 0; i < 1000; ++i) CHECK(c.below(7) < 7);
}

TEST_CASE("parallel loop covers every index once") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) {
        hits[i] += 1;
        parallel_for(3, [](std::size_t) {});
    });
    for (int v : hits) CHECK(v == 1);
}

TEST_CASE("file formats") {
    const auto vec = scratch("v.csv");
    std::ofstream(vec) << "1.0,2.0,a\n3 4 b\n5,6,?\n";
    const auto v = read_vectors(vec.string(), true);
    CHECK(v.size() == 3);
    CHECK(v.points(1, 1) == 4.0);
    REQUIRE(v.labels);
    CHECK(v.labels->crisp(0) == 0);
    CHECK(v.labels->crisp(1) == 1);
    CHECK(v.labels->crisp(2) == -1);

    const auto ragged = scratch("r.csv");
    std::ofstream(ragged) << "1,2\n3\n";
    CHECK(kind_of([&] { read_vectors(ragged.string(), false); }) == ErrorKind::data);
    CHECK(kind_of([&] { read_vectors(scratch("missing.csv").string(), false); }) == ErrorKind::io);

    const auto seqs = scratch("s.txt");
    std::ofstream(seqs) << "1 2 3\n4\n";
    const auto s = read_sequences(seqs.string());
    CHECK(s.size() == 2);
    CHECK(s.sequences[1] == std::vector<double>{4});

    VectorDataset pts;
    pts.points = oracle::random_points(7, 2, 1);
    const auto d = materialize_dissimilarity(pts, Metric::squared_euclidean);
    const auto bin = scratch("d.dsm");
    const auto txt = scratch("d.txt");
    write_dissimilarity_binary(d, bin.string());
    write_dissimilarity_text(d, txt.string());
    CHECK(is_binary_dissimilarity(bin.string()));
    CHECK_FALSE(is_binary_dissimilarity(txt.string()));
    const auto rb = read_dissimilarity(bin.string(), true);
    const auto rt = read_dissimilarity(txt.string(), true);
    BinaryFileDissimilarity streamed(bin.string(), true);
    CHECK(streamed.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) {
        for (std::size_t j = 0; j < 7; ++j) {
            CHECK(rb(i, j) == d(i, j));
            CHECK(rt(i, j) == d(i, j));
            CHECK(streamed(i, j) == d(i, j));
        }
    }
}

TEST_CASE("counting source") {
    const auto d = oracle::random_symmetric(10, 2);
    CountingDissimilarity c(d, true);
    (void)c(1, 2);
    const std::vector<std::size_t> rows{0, 1}, cols{3, 4, 5};
    std::vector<double> out(6);
    c.fill_block(rows, cols, out.data());
    CHECK(c.accesses() == 7);
    CHECK(c.reads(1, 2) == 1);
    CHECK(c.reads(0, 5) == 1);
    CHECK(c.reads(5, 0) == 0);
    CHECK(out[5] == d(1, 5));
}

}  // TEST_SUITE
