#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "adrl/data.hpp"
#include "adrl/dataset_io.hpp"
#include "adrl/error.hpp"
#include "adrl/labelgraph.hpp"
#include "oracles.hpp"

using namespace adrl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("adrl_test_data_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

MultiViewDataset small_synth(std::size_t n, std::uint64_t seed) {
    SyntheticSpec s;
    s.n = n;
    s.seed = seed;
    return generate_synthetic(s);
}

std::size_t column_ones(const Matrix& m, std::size_t c) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < m.rows(); ++i) k += m(i, c) == 1.0;
    return k;
}

}  // namespace

TEST_CASE("missingness at fmr 0.9 keeps one view per sample") {
    const MultiViewDataset ds = small_synth(1000, 3);
    for (std::uint64_t seed : {0u, 1u, 2u, 17u, 123u}) {
        const MultiViewDataset m = apply_missingness(ds, {0.9, 0.5, seed});
        for (std::size_t i = 0; i < 1000; ++i) {
            double have = 0;
            for (std::size_t v = 0; v < 2; ++v) have += m.view_mask(i, v);
            REQUIRE(have >= 1.0);
        }
        const MultiViewDataset again = apply_missingness(ds, {0.9, 0.5, seed});
        CHECK(again.view_mask == m.view_mask);
        CHECK(again.label_mask == m.label_mask);
        for (std::size_t v = 0; v < 2; ++v) CHECK(again.views[v] == m.views[v]);
    }
    CHECK(apply_missingness(ds, {0.9, 0.5, 1}).view_mask !=
          apply_missingness(ds, {0.9, 0.5, 2}).view_mask);
}

TEST_CASE("missingness counts and zeroed rows") {
    const MultiViewDataset ds = split_dataset(small_synth(400, 4), {7, 1, 2}, 4);
    const MultiViewDataset m = apply_missingness(ds, {0.3, 0.5, 9});
    for (std::size_t v = 0; v < 2; ++v) {
        CHECK(400 - column_ones(m.view_mask, v) == 120);
        for (std::size_t i = 0; i < 400; ++i) {
            if (m.view_mask(i, v) == 1.0) {
                CHECK(m.views[v].row(i)[0] == ds.views[v].row(i)[0]);
            } else {
                for (double x : m.views[v].row(i)) CHECK(x == 0.0);
            }
        }
    }
    for (std::size_t c = 0; c < ds.num_labels(); ++c) {
        std::size_t pos = 0, neg = 0, hidden_pos = 0, hidden_neg = 0;
        for (std::size_t i = 0; i < 400; ++i) {
            if (ds.split[i] == Split::test) {
                CHECK(m.label_mask(i, c) == 1.0);
                continue;
            }
            const bool p = ds.labels(i, c) == 1.0;
            (p ? pos : neg) += 1;
            if (m.label_mask(i, c) == 0.0) (p ? hidden_pos : hidden_neg) += 1;
        }
        CHECK(hidden_pos == pos / 2);
        CHECK(hidden_neg == neg / 2);
    }
}

TEST_CASE("missingness rejects bad ratios") {
    const MultiViewDataset ds = small_synth(20, 0);
    CHECK_THROWS_WITH_AS(apply_missingness(ds, {1.0, 0.0, 0}), "fmr must be < 1", ConfigError);
    CHECK_THROWS_AS(apply_missingness(ds, {0.1, 1.0, 0}), ConfigError);
    CHECK_THROWS_AS(apply_missingness(ds, {-0.1, 0.0, 0}), ConfigError);
    const MultiViewDataset once = apply_missingness(ds, {0.5, 0.5, 0});
    CHECK_THROWS_AS(apply_missingness(once, {0.5, 0.5, 0}), ConfigError);
}

TEST_CASE("split 7:1:2 sizes and determinism") {
    const MultiViewDataset ds = small_synth(1000, 1);
    const MultiViewDataset s = split_dataset(ds, {7, 1, 2}, 5);
    CHECK(s.rows_in(Split::train).size() == 700);
    CHECK(s.rows_in(Split::val).size() == 100);
    CHECK(s.rows_in(Split::test).size() == 200);
    CHECK(split_dataset(ds, {7, 1, 2}, 5).split == s.split);
    CHECK(split_dataset(ds, {7, 1, 2}, 6).split != s.split);
    CHECK_THROWS_AS(split_dataset(small_synth(5, 0), {7, 1, 2}, 0), ConfigError);
    CHECK_THROWS_AS(split_dataset(ds, {0, 0, 0}, 0), ConfigError);
    const MultiViewDataset two = split_dataset(ds, {8, 0, 2}, 1);
    CHECK(two.rows_in(Split::val).empty());
    CHECK(two.rows_in(Split::test).size() == 200);
}

TEST_CASE("validate rejects malformed datasets") {
    MultiViewDataset ds = small_synth(10, 0);
    CHECK_NOTHROW(ds.validate());
    MultiViewDataset bad = ds;
    bad.labels(0, 0) = 0.5;
    CHECK_THROWS_WITH_AS(bad.validate(), "labels must be binary", ConfigError);
    bad = ds;
    bad.view_mask(3, 0) = 0.0;
    bad.view_mask(3, 1) = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ds;
    bad.views[1] = Matrix(9, bad.views[1].cols());
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ds;
    bad.views[0](0, 0) = NAN;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("synthetic generator") {
    SyntheticSpec spec;
    spec.n = 2000;
    spec.seed = 11;
    const MultiViewDataset ds = generate_synthetic(spec);
    CHECK(ds.num_views() == 2);
    CHECK(ds.num_labels() == 6);
    for (std::size_t v = 0; v < 2; ++v) CHECK(ds.views[v].cols() == synthetic_view_dim(spec, v));
    CHECK(generate_synthetic(spec).views[1] == ds.views[1]);
    spec.seed = 12;
    CHECK(generate_synthetic(spec).labels != ds.labels);

    // Every label is present but not everywhere, and paired labels co-occur.
    for (std::size_t c = 0; c < 6; ++c) {
        const std::size_t k = column_ones(ds.labels, c);
        CHECK(k > 100);
        CHECK(k < 1900);
    }
    const auto rows = ds.rows_in(Split::train);
    const Matrix q = cooccurrence(ds.labels, ds.label_mask, rows);
    double best = 0.0;
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            if (i != j) best = std::max(best, q(i, j));
    CHECK(best > 0.3);
    for (std::size_t c = 0; c + 1 < 6; c += 2) CHECK(q(c, c + 1) > 0.3);
}

TEST_CASE("matrix and dataset files round-trip") {
    const fs::path dir = scratch("io");
    adrl::RngStream rng(1, 1);
    const Matrix m = oracle::random_matrix(7, 3, rng);
    write_matrix(dir / "m.mvml", m);
    CHECK(read_matrix(dir / "m.mvml") == m);
    CHECK(fs::file_size(dir / "m.mvml") == 16 + 7 * 3 * 8);

    {
        std::ofstream os(dir / "bad.mvml", std::ios::binary);
        os << "XXXX0000000000000000";
    }
    CHECK_THROWS_AS(read_matrix(dir / "bad.mvml"), ConfigError);

    const MultiViewDataset ds =
        apply_missingness(split_dataset(small_synth(60, 2), {7, 1, 2}, 2), {0.4, 0.3, 2});
    write_dataset(ds, dir / "ds");
    const MultiViewDataset back = load_dataset(dir / "ds");
    CHECK(back.labels == ds.labels);
    CHECK(back.view_mask == ds.view_mask);
    CHECK(back.label_mask == ds.label_mask);
    CHECK(back.split == ds.split);
    for (std::size_t v = 0; v < 2; ++v) CHECK(back.views[v] == ds.views[v]);
    CHECK(load_dataset(dir / "ds" / "manifest.json").labels == ds.labels);
    fs::remove_all(dir);
}

TEST_CASE("csv import") {
    const fs::path dir = scratch("csv");
    {
        std::ofstream os(dir / "a.csv");
        os << "f1,f2,f3\n1,2,3.5\n-4,5e-1,6\n";
    }
    const Matrix m = import_csv(dir / "a.csv");
    CHECK(m == Matrix{{1, 2, 3.5}, {-4, 0.5, 6}});
    {
        std::ofstream os(dir / "b.csv");
        os << "1,2\n3,oops\n";
    }
    CHECK_THROWS_AS(import_csv(dir / "b.csv"), ConfigError);
    fs::remove_all(dir);
}
