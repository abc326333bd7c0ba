#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>

#include "margen/data_support.hpp"

using namespace margen;

TEST_CASE("unit circle with identity embedding") {
    auto ds = DataSupport::make_circles(4, {1.0}, 2, -1);
    REQUIRE(ds.size() == 4);
    CHECK((ds.point(0) - Eigen::Vector2d(1, 0)).norm() < 1e-12);
    CHECK((ds.point(1) - Eigen::Vector2d(0, 1)).norm() < 1e-12);
    CHECK((ds.point(2) - Eigen::Vector2d(-1, 0)).norm() < 1e-12);
    CHECK((ds.point(3) - Eigen::Vector2d(0, -1)).norm() < 1e-12);
}

TEST_CASE("embedding is an isometry") {
    auto ds = DataSupport::make_circles(16, {0.5, 1.0}, 32, 3);
    REQUIRE(ds.intrinsic_meta().has_value());
    const auto& meta = *ds.intrinsic_meta();

    Eigen::MatrixXd gram = meta.projection.transpose() * meta.projection;
    CHECK((gram - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-10);

    for (int i = 0; i < ds.size(); ++i) {
        // projecting down and re-embedding reproduces the point
        Eigen::VectorXd xi = ds.point(i);
        CHECK((meta.projection * (meta.projection.transpose() * xi) - xi).norm() < 1e-10);
        for (int j = i + 1; j < ds.size(); ++j) {
            const double d_emb = (ds.point(i) - ds.point(j)).norm();
            const double d_src = (meta.source2d.row(i) - meta.source2d.row(j)).norm();
            CHECK(d_emb == doctest::Approx(d_src).epsilon(1e-10));
        }
    }
}

TEST_CASE("circle norms survive embedding into high dimension") {
    auto ds = DataSupport::make_circles(64, {0.5, 1.0}, 128, 7);
    REQUIRE(ds.size() == 128);
    REQUIRE(ds.dim() == 128);
    for (int i = 0; i < ds.size(); ++i) {
        const double r = ds.point(i).norm();
        CHECK(std::min(std::abs(r - 0.5), std::abs(r - 1.0)) < 1e-10);
    }
}

TEST_CASE("determinism per seed") {
    auto a = DataSupport::make_circles(32, {1.0}, 16, 42);
    auto b = DataSupport::make_circles(32, {1.0}, 16, 42);
    auto c = DataSupport::make_circles(32, {1.0}, 16, 43);
    CHECK((a.points() - b.points()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.points() - c.points()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("explicit supports and nearest point") {
    Eigen::MatrixXd one(1, 1);
    one << 0.0;
    auto single = DataSupport::make_explicit(one);
    CHECK(single.size() == 1);
    CHECK(single.dim() == 1);

    Eigen::MatrixXd two(2, 1);
    two << -1.0, 1.0;
    auto pair = DataSupport::make_explicit(two);
    Eigen::VectorXd u(1);
    u << 0.9;
    auto np = pair.nearest_point(u);
    CHECK(np.index == 1);
    CHECK(np.distance == doctest::Approx(0.1).epsilon(1e-12));

    u << -1.0;  // exact hit
    np = pair.nearest_point(u);
    CHECK(np.index == 0);
    CHECK(np.distance == 0.0);

    CHECK_THROWS(DataSupport::make_explicit(Eigen::MatrixXd(0, 0)));
    CHECK_THROWS(DataSupport::make_circles(16, {1.0}, 1, 0));
}

TEST_CASE("nearest point through an orthogonal offset in high dimension") {
    auto ds = DataSupport::make_circles(64, {0.5, 1.0}, 128, 7);
    const int j = 17;
    // unit vector orthogonal to the embedded plane
    std::mt19937_64 rng(99);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd raw(128);
    for (int i = 0; i < 128; ++i) raw(i) = gauss(rng);
    Eigen::VectorXd e = ds.orthogonal_residual(raw);
    e /= e.norm();

    Eigen::VectorXd u = ds.point(j) + 0.01 * e;
    auto np = ds.nearest_point(u);
    CHECK(np.index == j);
    CHECK(np.distance == doctest::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("csv round trip") {
    auto ds = DataSupport::make_circles(8, {1.0}, 4, 5);
    const std::string path = "support_roundtrip_test.csv";
    ds.save_csv(path);
    auto back = DataSupport::load_csv(path);
    REQUIRE(back.size() == ds.size());
    REQUIRE(back.dim() == ds.dim());
    CHECK((back.points() - ds.points()).cwiseAbs().maxCoeff() == 0.0);
    std::remove(path.c_str());
}
