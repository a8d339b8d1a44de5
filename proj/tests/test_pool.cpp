#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "ncal/acquisition.hpp"
#include "ncal/kernels.hpp"
#include "ncal/pool.hpp"

using namespace ncal;

namespace {

FeatureMatrix matrix_from(std::size_t dim, const std::vector<std::vector<double>>& rows) {
    std::vector<SampleId> ids;
    std::vector<double> data;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        ids.push_back(static_cast<SampleId>(r));
        data.insert(data.end(), rows[r].begin(), rows[r].end());
    }
    return FeatureMatrix::create(dim, std::move(ids), std::move(data));
}

bool partition_holds(const PoolState& pool, std::size_t universe_size) {
    std::set<SampleId> seen = pool.unlabeled;
    std::size_t total = pool.unlabeled.size();
    for (const auto& [cls, ids] : pool.labeled) {
        for (SampleId id : ids) {
            if (!seen.insert(id).second) return false;  // overlap
        }
        total += ids.size();
    }
    return total == universe_size && seen.size() == universe_size;
}

}  // namespace

TEST_CASE("feature matrix validates shape, finiteness and id uniqueness") {
    CHECK_NOTHROW(matrix_from(2, {{1.0, 2.0}, {3.0, 4.0}}));

    CHECK_THROWS_AS(FeatureMatrix::create(2, {0, 1}, {1.0, 2.0, 3.0}), Error);
    try {
        FeatureMatrix::create(2, {0}, {1.0, std::nan("")});
        FAIL("expected NonFiniteValue");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonFiniteValue);
    }
    try {
        FeatureMatrix::create(1, {7, 7}, {1.0, 2.0});
        FAIL("expected IndexMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IndexMismatch);
    }
}

TEST_CASE("class stats: means, unit means and mean sum") {
    // class 0 = {(1,0),(3,0)} -> mean (2,0), unit mean (1,0)
    FeatureMatrix features = matrix_from(2, {{1, 0}, {3, 0}, {0, 2}});
    PoolState pool = PoolState::create(2, features.ids());
    pool.apply_label(0, 0);
    pool.apply_label(1, 0);
    pool.apply_label(2, 1);

    ClassStats stats = compute_class_stats(features, pool);
    CHECK(stats.counts == std::vector<std::size_t>{2, 1});
    CHECK(stats.mean(0)[0] == doctest::Approx(2.0));
    CHECK(stats.mean(0)[1] == doctest::Approx(0.0));
    CHECK(stats.unit_mean(0)[0] == doctest::Approx(1.0));
    CHECK(stats.present == std::vector<int>{0, 1});

    // unit means sum: (1,0) + (0,1)
    CHECK(stats.m_sum[0] == doctest::Approx(1.0));
    CHECK(stats.m_sum[1] == doctest::Approx(1.0));
}

TEST_CASE("class stats match a direct per-coordinate averaging oracle") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::size_t d = 4, per_class = 5;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < 3 * per_class; ++i) {
        std::vector<double> row(d);
        for (double& x : row) x = g(rng);
        rows.push_back(row);
    }
    FeatureMatrix features = matrix_from(d, rows);
    PoolState pool = PoolState::create(3, features.ids());
    for (std::size_t i = 0; i < rows.size(); ++i)
        pool.apply_label(static_cast<SampleId>(i), static_cast<int>(i / per_class));

    ClassStats stats = compute_class_stats(features, pool);
    for (int cls = 0; cls < 3; ++cls) {
        for (std::size_t j = 0; j < d; ++j) {
            double sum = 0.0;
            for (std::size_t i = 0; i < per_class; ++i)
                sum += rows[static_cast<std::size_t>(cls) * per_class + i][j];
            CHECK(stats.mean(cls)[j] == doctest::Approx(sum / per_class).epsilon(1e-9));
        }
        double norm = std::sqrt(kern::nrm2sq(stats.unit_mean(cls).data(), d));
        CHECK(std::fabs(norm - 1.0) < 1e-9);
    }

    // pure function: recomputation is bitwise identical
    ClassStats again = compute_class_stats(features, pool);
    CHECK(stats.means == again.means);
    CHECK(stats.unit_means == again.unit_means);
    CHECK(stats.m_sum == again.m_sum);
}

TEST_CASE("class stats error paths") {
    FeatureMatrix features = matrix_from(2, {{0, 0}, {1, 1}});
    PoolState pool = PoolState::create(2, features.ids());
    pool.apply_label(0, 0);
    pool.apply_label(1, 1);
    try {
        compute_class_stats(features, pool);
        FAIL("expected ZeroNormMean");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroNormMean);
    }

    // labeled id missing from the matrix
    std::vector<SampleId> universe = {0, 1, 9};
    PoolState pool2 = PoolState::create(2, universe);
    pool2.apply_label(9, 0);
    try {
        compute_class_stats(features, pool2);
        FAIL("expected MissingSample");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingSample);
    }
}

TEST_CASE("apply_label moves samples and guards invalid moves") {
    std::vector<SampleId> universe = {0, 1, 2, 3};
    PoolState pool = PoolState::create(3, universe);
    CHECK(pool.unlabeled.size() == 4);

    pool.apply_label(2, 1);
    CHECK(pool.unlabeled.size() == 3);
    CHECK(pool.labeled[1].count(2) == 1);
    CHECK(partition_holds(pool, 4));

    try {
        pool.apply_label(2, 0);
        FAIL("expected AlreadyLabeled");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AlreadyLabeled);
    }
    try {
        pool.apply_label(0, 3);
        FAIL("expected UnknownClass");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownClass);
    }
    try {
        pool.apply_label(42, 0);
        FAIL("expected MissingSample");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingSample);
    }

    // labeling everything empties the unlabeled set, partition intact
    pool.apply_label(0, 0);
    pool.apply_label(1, 0);
    pool.apply_label(3, 2);
    CHECK(pool.unlabeled.empty());
    CHECK(partition_holds(pool, 4));
}

TEST_CASE("final partition is independent of labeling order") {
    std::vector<SampleId> universe(100);
    std::vector<int> classes(100);
    for (int i = 0; i < 100; ++i) {
        universe[static_cast<std::size_t>(i)] = i;
        classes[static_cast<std::size_t>(i)] = i % 5;
    }

    PoolState reference = PoolState::create(5, universe);
    for (int i = 0; i < 100; ++i) reference.apply_label(i, classes[static_cast<std::size_t>(i)]);

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<int> order(100);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        PoolState pool = PoolState::create(5, universe);
        for (int i : order) pool.apply_label(i, classes[static_cast<std::size_t>(i)]);
        CHECK(pool.labeled == reference.labeled);
        CHECK(pool.unlabeled.empty());
    }
}

TEST_CASE("incremental mean update agrees with full recomputation") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 2.0);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 9; ++i) {
        std::vector<double> row(3);
        for (double& x : row) x = g(rng);
        rows.push_back(row);
    }
    FeatureMatrix features = matrix_from(3, rows);
    PoolState pool = PoolState::create(2, features.ids());
    for (int i = 0; i < 8; ++i) pool.apply_label(i, i % 2);

    ClassStats before = compute_class_stats(features, pool);
    std::vector<double> predicted = updated_class_mean(before, 0, features.row(8));

    pool.apply_label(8, 0);
    ClassStats after = compute_class_stats(features, pool);
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(predicted[j] == doctest::Approx(after.mean(0)[j]).epsilon(1e-9));
}
