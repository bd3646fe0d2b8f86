#include <doctest.h>

#include <cmath>
#include <numbers>

#include "myers/criterion.hpp"
#include "myers/errors.hpp"

using namespace myers;
using namespace myers::criterion;
using geometry::ManifoldModel;

namespace {

const expr::ScalarFieldExpr kZero;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

NumericsConfig numerics(int n_paths, double t_max, int resolution) {
    NumericsConfig c;
    c.sampler.dt = 1e-2;
    c.sampler.t_max = t_max;
    c.sampler.n_paths = n_paths;
    c.sampler.record_stride = 10;
    c.sampler.seed = 11;
    c.resolution = resolution;
    return c;
}

}  // namespace

TEST_CASE("check on the unit sphere with h = 0") {
    const MyersReport r = check(ManifoldModel::sphere(), kZero, numerics(200, 10.0, 32));
    CHECK(r.errors.empty());
    CHECK(r.criterion_holds);
    CHECK(r.lambda0 == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(r.mu_top == doctest::Approx(0.5 * r.lambda0).epsilon(1e-15));
    REQUIRE(r.u1_spectral.has_value());
    CHECK(std::fabs(r.u1_spectral->sup - 2.0) < 1e-6);
    CHECK(std::fabs(r.u1_spectral->inf - 2.0) < 1e-6);
    REQUIRE(r.probes.size() == 3);
    for (const auto& p : r.probes) {
        REQUIRE(p.u1_mc.u1_mc.has_value());
        CHECK(*p.u1_mc.u1_mc == doctest::Approx(2.0).epsilon(0.02));
        REQUIRE(p.u1_spectral.has_value());
        CHECK(*p.u1_spectral == doctest::Approx(2.0).epsilon(1e-6));
    }
    CHECK(std::fabs(r.probes[0].ambient[2] - 1.0) < 1e-12);
    CHECK(std::fabs(r.probes[1].ambient[2] + 1.0) < 1e-12);
    REQUIRE(r.decay_fit.has_value());
    CHECK(r.decay_fit->rate == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(r.h_volume == doctest::Approx(4.0 * std::numbers::pi).epsilon(5e-3));
    CHECK(r.negative_rho_fraction == 0.0);
    CHECK(r.consistency);
    CHECK(r.known_pi1_finite == true);
    for (const char* name : {"eq1_eq3", "eq4", "eq5", "feynman_kac", "witten", "bakry"}) {
        const IdentityCheck* c = r.find(name);
        REQUIRE(c != nullptr);
        CHECK_MESSAGE(c->passed, name, ": ", c->detail, " residual ", c->residual);
        CHECK_FALSE(c->skipped);
    }
}

TEST_CASE("check on the flat torus with h = 0") {
    const MyersReport r = check(ManifoldModel::flat_torus(kTwoPi, kTwoPi), kZero, numerics(200, 6.0, 32));
    CHECK(r.errors.empty());
    CHECK_FALSE(r.criterion_holds);
    CHECK(std::fabs(r.lambda0) < 1e-6);
    CHECK_FALSE(r.u1_spectral.has_value());
    REQUIRE(r.probes.size() == 2);
    for (const auto& p : r.probes) {
        CHECK(p.u1_mc.diverged);
        CHECK_FALSE(p.u1_spectral.has_value());
    }
    CHECK(r.consistency);
    CHECK(r.known_pi1_finite == false);
    CHECK(r.consistency_note.find("implies nothing") != std::string::npos);
    const IdentityCheck* b = r.find("bakry");
    REQUIRE(b != nullptr);
    CHECK(b->skipped);
    CHECK(r.find("eq5")->passed);
    CHECK(r.find("feynman_kac")->passed);
}

TEST_CASE("negative curvature-floor fraction for h = a z") {
    // rho^h = 1 + 2 a z, negative on the cap z < -1/(2a) of area fraction (1 - 1/(2a)) / 2.
    const auto sphere = ManifoldModel::sphere();
    NumericsConfig c = numerics(100, 2.0, 32);
    c.run_witten = false;
    c.bakry_pairs = 1;
    const MyersReport r = check(sphere, expr::parse("1.0*z"), c);
    CHECK(r.negative_rho_fraction == doctest::Approx(0.25).epsilon(0.02));
    CHECK(r.find("eq5")->passed);
}

TEST_CASE("decay_rate_fit examples") {
    std::vector<double> t;
    std::vector<sde::Stat> a, b, flat;
    for (int i = 0; i <= 40; ++i) {
        t.push_back(0.25 * i);
        a.push_back({std::exp(-0.5 * t.back()), 0.0});
        b.push_back({0.5 * std::exp(-0.5 * t.back()), 1e-6});
        flat.push_back({1.0, 0.0});
    }
    CHECK(decay_rate_fit(t, {a, b}, 5.0, 10.0) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(std::fabs(decay_rate_fit(t, {flat}, 5.0, 10.0)) < 1e-14);
    std::vector<sde::Stat> noisy = a;
    noisy.back().std_error = noisy.back().mean;
    CHECK_THROWS_AS(decay_rate_fit(t, {noisy}, 5.0, 10.0), InsufficientDecayWindow);
    CHECK_THROWS_AS(decay_rate_fit(t, {a}, 9.0, 10.0), InsufficientDecayWindow);
}

TEST_CASE("Bakry inequality examples") {
    const auto sphere = ManifoldModel::sphere();
    const auto h = expr::parse("0.3*z");
    const auto op = spectral::build_operator(sphere, h, 32);
    const auto eig = spectral::top_eigen(op);
    const double c = spectral::potential_resolvent(op, eig).maxCoeff();

    const BakryResult f_const = bakry_inequality_check(sphere, op, c, expr::parse("2"), expr::parse("z"), 1.0);
    CHECK(std::fabs(f_const.lhs) < 1e-12);
    CHECK(f_const.rhs == 0.0);
    CHECK(f_const.holds);

    const BakryResult g_const = bakry_inequality_check(sphere, op, c, expr::parse("x*z"), expr::parse("1"), 1.0);
    CHECK(std::fabs(g_const.lhs) < 1e-8);
    CHECK(g_const.rhs == 0.0);
    CHECK(g_const.holds);

    const BakryResult generic = bakry_inequality_check(sphere, op, c, expr::parse("cos(x)"), expr::parse("z"), 1.0);
    CHECK(generic.holds);
    CHECK(generic.slack >= 0.0);
    CHECK(generic.rhs > 0.0);

    for (int i = 0; i < 3; ++i) {
        const auto [f, g] = random_test_pair(sphere, 5, i);
        CHECK(bakry_inequality_check(sphere, op, c, f, g, 1.0).holds);
    }
}

TEST_CASE("probe policy and test fields") {
    const auto torus = ManifoldModel::flat_torus(kTwoPi, 4.0);
    const auto p = probe_points(torus, 1, 4);
    REQUIRE(p.size() == 2);
    CHECK(p[1].coords[0] == doctest::Approx(std::numbers::pi));
    CHECK(p[1].coords[1] == doctest::Approx(2.0));

    const auto warped = ManifoldModel::expression_metric(kTwoPi, kTwoPi, expr::parse("1 + 0.3*cos(v)"),
                                                         expr::parse("0"), expr::parse("1"));
    const auto r1 = probe_points(warped, 7, 4);
    const auto r2 = probe_points(warped, 7, 4);
    REQUIRE(r1.size() == 4);
    for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r1[i].coords == r2[i].coords);
    CHECK(probe_points(warped, 8, 4)[0].coords != r1[0].coords);

    const geometry::Vec2 v = probe_direction(warped, r1[0]);
    CHECK(v.dot(warped.metric(r1[0]) * v) == doctest::Approx(1.0).epsilon(1e-12));

    const auto [f1, g1] = random_test_pair(torus, 3, 0);
    const auto [f2, g2] = random_test_pair(torus, 3, 0);
    CHECK(expr::print(f1) == expr::print(f2));
    CHECK(expr::print(f1) != expr::print(g1));

    CHECK_THROWS_AS(check(torus, kZero, numerics(100, 2.0, 8)), ConfigError);
}
