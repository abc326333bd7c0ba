#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "margen/fields.hpp"
#include "margen/posterior.hpp"

using namespace margen;

namespace {

DataSupport two_point(int dim) {
    Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(2, dim);
    pts(0, 0) = -1.0;
    pts(1, 0) = 1.0;
    return DataSupport::make_explicit(pts);
}

DataSupport single_point(int dim, double shift = 0.0) {
    Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(1, dim);
    pts(0, 0) = 1.0 + shift;
    return DataSupport::make_explicit(pts);
}

Eigen::VectorXd unit_vec(int dim, int axis) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v(axis) = 1.0;
    return v;
}

double rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
    return (got - want).norm() / (1e-300 + want.norm());
}

}  // namespace

TEST_CASE("conditional denoiser") {
    auto one = single_point(2);
    auto fm = make_schedule("fm");
    std::mt19937 rng(1);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < 16; ++i) {
        Eigen::VectorXd u(2);
        u << gauss(rng), gauss(rng);
        CHECK((conditional_denoiser(one, fm, u, 0.3) - one.point(0)).norm() < 1e-14);
    }

    auto pair = two_point(1);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    for (double t : {0.05, 0.3, 0.9}) {
        CHECK(std::abs(conditional_denoiser(pair, fm, zero, t)(0)) < 1e-14);
    }

    // sharp softmax: exponent gap 2*0.9*0.85/0.01 = 153
    Eigen::VectorXd u(1);
    u << 0.85;
    CHECK(conditional_denoiser(pair, fm, u, 0.1)(0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("conditional target") {
    auto pair = two_point(2);
    auto edm = make_schedule("edm");
    std::mt19937 rng(2);
    std::normal_distribution<double> gauss;
    for (double t : {0.1, 0.5, 1.0}) {
        Eigen::VectorXd u(2);
        u << gauss(rng), gauss(rng);
        CHECK(rel_err(conditional_target(pair, edm, u, t),
                      conditional_denoiser(pair, edm, u, t)) < 1e-14);
    }

    // fm on a single point: f*_t(a x + b eps) = eps - x exactly
    auto one = single_point(3);
    auto fm = make_schedule("fm");
    for (double t : {0.2, 0.6, 0.95}) {
        Eigen::VectorXd eps(3);
        eps << gauss(rng), gauss(rng), gauss(rng);
        const Eigen::VectorXd u = (1.0 - t) * one.point(0) + t * eps;
        CHECK((conditional_target(one, fm, u, t) - (eps - one.point(0))).norm() < 1e-12);
    }

    // eqm vanishes at the data point as t -> t_min
    auto eqm = make_schedule("eqm");
    CHECK(conditional_target(one, eqm, one.point(0), eqm.t_min()).norm() < 1e-12);
}

TEST_CASE("conditional energy gradient matches finite differences of the log likelihood") {
    auto pair = two_point(2);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> box(-2.0, 2.0);
    std::uniform_real_distribution<double> ts(0.02, 1.0);
    for (const char* name : {"fm", "edm", "ddpm", "eqm"}) {
        auto s = make_schedule(name);
        int done = 0;
        while (done < 16) {
            Eigen::VectorXd u(2);
            u << box(rng), box(rng);
            if (pair.nearest_point(u).distance < 0.2) continue;
            const double t = ts(rng);
            const double h = 1e-5 * (1.0 + u.norm());
            Eigen::VectorXd fd(2);
            for (int j = 0; j < 2; ++j) {
                Eigen::VectorXd up = u, dn = u;
                up(j) += h;
                dn(j) -= h;
                fd(j) = -(log_likelihood(pair, s, up, t) - log_likelihood(pair, s, dn, t)) /
                        (2.0 * h);
            }
            CHECK(rel_err(conditional_energy_gradient(pair, s, u, t), fd) < 1e-5);
            ++done;
        }
    }

    // single well at the origin with a = 1: gradient is u / b^2
    Eigen::MatrixXd origin = Eigen::MatrixXd::Zero(1, 2);
    auto ds0 = DataSupport::make_explicit(origin);
    auto edm = make_schedule("edm");
    Eigen::VectorXd u(2);
    u << 0.3, -0.7;
    const double b = edm.b(0.4);
    CHECK(rel_err(conditional_energy_gradient(ds0, edm, u, 0.4), u / (b * b)) < 1e-13);

    // near a well-separated point at small t the gradient collapses
    auto fm = make_schedule("fm");
    const Eigen::VectorXd near = fm.a(0.01) * pair.point(1);
    CHECK(conditional_energy_gradient(pair, fm, near, 0.01).norm() < 1e-10);
}

TEST_CASE("autonomous field basics") {
    auto grid = make_time_grid(1e-4, 512, 512);
    auto edm = make_schedule("edm");
    auto one = single_point(2);
    std::mt19937 rng(4);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < 8; ++i) {
        Eigen::VectorXd u(2);
        u << 2.0 * gauss(rng), 2.0 * gauss(rng);
        CHECK((autonomous_field(one, edm, u, grid) - one.point(0)).norm() < 1e-12);
    }

    auto pair = two_point(1);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    for (const char* name : {"ddpm", "edm", "fm", "eqm"}) {
        auto s = make_schedule(name);
        CHECK(autonomous_field(pair, s, zero, grid).norm() < 1e-14);
    }

    // self-convergence against a double-resolution reference
    auto fm = make_schedule("fm");
    Eigen::VectorXd u(1);
    u << 0.5;
    auto ref_grid = make_time_grid(1e-4, 4096, 4096);
    CHECK((autonomous_field(pair, fm, u, grid) - autonomous_field(pair, fm, u, ref_grid)).norm() <
          1e-6);
}

TEST_CASE("marginal energy symmetry and well structure") {
    auto pair = two_point(3);
    auto grid = make_time_grid(1e-4, 1024, 512);
    auto fm = make_schedule("fm");
    std::mt19937 rng(5);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < 8; ++i) {
        Eigen::VectorXd u(3);
        u << gauss(rng), gauss(rng), gauss(rng);
        CHECK(marginal_energy(pair, fm, u, grid) ==
              doctest::Approx(marginal_energy(pair, fm, -u, grid)).epsilon(1e-10));
    }

    // the well deepens toward the data
    Eigen::VectorXd dir = unit_vec(3, 1);
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {0.3, 0.1, 0.03, 0.01}) {
        const double e = marginal_energy(pair, fm, pair.point(1) + eps * dir, grid);
        CHECK(e < prev);
        prev = e;
    }
}

TEST_CASE("evidence scaling exponent near a single well") {
    // With the uniform prior in t the induced prior over v = b^2 carries a
    // v^(-1/2) factor, so Z(eps) ~ eps^(1-D) and the log-log slope of E vs
    // eps is D - 1 (it would be D - 2 under a prior flat in v).
    const int dim = 5;
    auto one = single_point(dim);
    auto edm1 = make_schedule("edm", {.t_min = 1e-6, .sigma_max = 1.0});
    auto grid = make_time_grid(1e-6, 1024, 1024);
    Eigen::VectorXd dir = unit_vec(dim, 2);
    const double e1 = marginal_energy(one, edm1, one.point(0) + 1e-2 * dir, grid);
    const double e3 = marginal_energy(one, edm1, one.point(0) + 1e-4 * dir, grid);
    const double slope = (e1 - e3) / (std::log(1e-2) - std::log(1e-4));
    CHECK(slope == doctest::Approx(double(dim - 1)).epsilon(0.05));
}

TEST_CASE("marginal energy gradient") {
    auto pair = two_point(3);
    auto grid = make_time_grid(1e-4, 1024, 512);

    // symmetry zero
    for (const char* name : {"fm", "edm"}) {
        auto s = make_schedule(name);
        CHECK(marginal_energy_gradient(pair, s, Eigen::VectorXd::Zero(3), grid).norm() < 1e-12);
    }

    // finite-difference oracle, h = 1e-4 (1 + |u|)
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> box(-2.0, 2.0);
    for (const char* name : {"fm", "edm"}) {
        auto s = make_schedule(name);
        int done = 0;
        while (done < 32) {
            Eigen::VectorXd u(3);
            u << box(rng), box(rng), box(rng);
            if (pair.nearest_point(u).distance < 0.2) continue;
            const double h = 1e-4 * (1.0 + u.norm());
            Eigen::VectorXd fd(3);
            for (int j = 0; j < 3; ++j) {
                Eigen::VectorXd up = u, dn = u;
                up(j) += h;
                dn(j) -= h;
                fd(j) = (marginal_energy(pair, s, up, grid) -
                         marginal_energy(pair, s, dn, grid)) /
                        (2.0 * h);
            }
            CHECK(rel_err(marginal_energy_gradient(pair, s, u, grid), fd) < 1e-4);
            ++done;
        }
    }
}

TEST_CASE("gradient diverges near the manifold while the preconditioned product stays bounded") {
    auto one = single_point(3);
    auto fm = make_schedule("fm");
    auto grid = make_time_grid(1e-4, 1024, 1024);
    Eigen::VectorXd dir = unit_vec(3, 1);

    std::vector<double> eps_list{1e-1, 1e-2, 1e-3};
    std::vector<double> grad_norm, precond;
    for (double eps : eps_list) {
        const Eigen::VectorXd u = one.point(0) + eps * dir;
        auto dec = decompose_field(one, fm, u, grid);
        grad_norm.push_back(dec.marginal_gradient.norm());
        precond.push_back(dec.natural_gradient.norm());
    }
    const double slope = (std::log(grad_norm.back()) - std::log(grad_norm.front())) /
                         (std::log(eps_list.back()) - std::log(eps_list.front()));
    CHECK(slope <= -0.8);

    const double anchor = precond.front();
    for (double p : precond) CHECK(p <= 10.0 * anchor);
}

TEST_CASE("energy aligned decomposition identity") {
    auto grid = make_time_grid(1e-4, 512, 512);
    std::mt19937 rng(7);
    std::normal_distribution<double> gauss;

    auto check_support = [&](const DataSupport& ds, int reps) {
        for (const char* name : {"ddpm", "edm", "fm", "eqm"}) {
            auto s = make_schedule(name);
            for (int i = 0; i < reps; ++i) {
                Eigen::VectorXd u(ds.dim());
                for (int j = 0; j < ds.dim(); ++j) u(j) = 1.5 * gauss(rng);
                auto dec = decompose_field(ds, s, u, grid);
                const Eigen::VectorXd sum =
                    dec.natural_gradient + dec.transport_correction + dec.linear_drift;
                CHECK((dec.total - sum).norm() / (1.0 + dec.total.norm()) <= 1e-8);
            }
        }
    };
    check_support(two_point(1), 256);
    check_support(DataSupport::make_circles(64, {0.5, 1.0}, 8, 7), 48);
}

TEST_CASE("transport correction is negligible in the concentration regimes") {
    auto grid = make_time_grid(1e-4, 1024, 1024);

    // near-manifold, bounded-gain preset
    auto pair = two_point(8);
    auto edm = make_schedule("edm");
    const Eigen::VectorXd u_near = pair.point(1) + 1e-3 * unit_vec(8, 4);
    auto dec = decompose_field(pair, edm, u_near, grid);
    CHECK(dec.transport_correction.norm() / dec.total.norm() <= 0.05);

    // high dimension at matched forward time
    auto circles = DataSupport::make_circles(64, {0.5, 1.0}, 128, 7);
    std::mt19937_64 rng(77);
    std::normal_distribution<double> gauss;
    for (const char* name : {"fm", "ddpm"}) {
        auto s = make_schedule(name);
        Eigen::VectorXd eps(128);
        for (int j = 0; j < 128; ++j) eps(j) = gauss(rng);
        const Eigen::VectorXd u = s.a(0.5) * circles.point(9) + s.b(0.5) * eps;
        auto d = decompose_field(circles, s, u, grid);
        CHECK(d.transport_correction.norm() / d.total.norm() <= 0.1);
    }
}

TEST_CASE("eqm stops at the data while fm keeps a finite transversal velocity") {
    auto pair = two_point(8);
    auto grid = make_time_grid(1e-4, 1024, 1024);
    auto eqm = make_schedule("eqm");
    auto fm = make_schedule("fm");
    Eigen::VectorXd dir = unit_vec(8, 5);

    std::vector<double> fm_norms;
    for (double delta : {1e-2, 1e-3, 1e-4}) {
        const Eigen::VectorXd u = pair.point(1) + delta * dir;
        CHECK(autonomous_field(pair, eqm, u, grid).norm() <= 3.0 * delta + 1e-3);
        fm_norms.push_back(autonomous_field(pair, fm, u, grid).norm());
    }
    for (double n : fm_norms) {
        CHECK(n > 0.5);
        CHECK(n == doctest::Approx(fm_norms.front()).epsilon(0.5));
    }
}

TEST_CASE("ddpm and edm conditional targets stay bounded on the forward cone") {
    auto pair = two_point(4);
    Eigen::VectorXd dir = unit_vec(4, 2);
    for (const char* name : {"ddpm", "edm"}) {
        auto s = make_schedule(name);
        for (double t : {1e-1, 1e-2, 1e-3, 1e-4}) {
            const Eigen::VectorXd u = pair.point(1) + s.b(t) * dir;
            CHECK(conditional_target(pair, s, u, t).norm() <= 3.0);
        }
    }
}
