#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "myers/errors.hpp"
#include "myers/geometry.hpp"

using namespace myers;
using namespace myers::geometry;

namespace {

const expr::ScalarFieldExpr kZero;

PointOnManifold random_sphere_point(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    const Vec3 x(n(rng), n(rng), n(rng));
    return ManifoldModel::sphere().from_ambient(x);
}

// min over unit vectors of S(v, v): 360-direction sweep, then golden-section
// refinement inside the best bracket.
double sweep_minimum(const Mat2& s, const Mat2& g) {
    auto q = [&](double th) {
        const Vec2 v(std::cos(th), std::sin(th));
        return v.dot(s * v) / v.dot(g * v);
    };
    int best = 0;
    double best_val = q(0.0);
    for (int k = 1; k < 360; ++k) {
        const double val = q(k * std::numbers::pi / 180.0);
        if (val < best_val) {
            best_val = val;
            best = k;
        }
    }
    double a = (best - 1) * std::numbers::pi / 180.0, b = (best + 1) * std::numbers::pi / 180.0;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    for (int it = 0; it < 80; ++it) {
        if (q(c) < q(d)) b = d;
        else a = c;
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    return std::min(best_val, q(0.5 * (a + b)));
}

double simpson_periodic_exp_cos() {
    // integral_0^{2pi} exp(cos u) du by composite Simpson, 20000 panels
    const int n = 20000;
    const double h = 2.0 * std::numbers::pi / n;
    double s = std::exp(1.0) + std::exp(1.0);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * std::exp(std::cos(i * h));
    return s * h / 3.0;
}

}  // namespace

TEST_CASE("flat torus jet is trivial") {
    const auto m = ManifoldModel::flat_torus(2 * std::numbers::pi, 2 * std::numbers::pi);
    const MetricJet j = metric_jet(m, {0, Vec2(1.0, 2.0)});
    CHECK(j.g.isApprox(Mat2::Identity()));
    for (int k = 0; k < 2; ++k) CHECK(j.christoffel[k].isZero());
    CHECK(ricci(m, {0, Vec2(0.3, 0.1)}).isZero());
    CHECK(m.known_pi1_finite() == false);
}

TEST_CASE("stereographic metric at the chart origin is 4 I") {
    const auto m = ManifoldModel::sphere();
    const MetricJet j = metric_jet(m, {0, Vec2::Zero()});
    CHECK((j.g - 4.0 * Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(m.known_pi1_finite() == true);
}

TEST_CASE("expression metric direct evaluation") {
    const auto m = ManifoldModel::expression_metric(2 * std::numbers::pi, 2 * std::numbers::pi,
                                                    expr::parse("1"), expr::parse("0"),
                                                    expr::parse("sin(u)^2+0.1"));
    const MetricJet j = metric_jet(m, {0, Vec2(std::numbers::pi / 2, 0.4)});
    CHECK(j.g(1, 1) == doctest::Approx(1.1).epsilon(1e-14));
    CHECK(j.g(0, 0) == 1.0);
}

TEST_CASE("metric jet invariants") {
    const auto m = ManifoldModel::expression_metric(
        2 * std::numbers::pi, 2 * std::numbers::pi, expr::parse("2+cos(u)"),
        expr::parse("0.3*sin(u+v)"), expr::parse("1.5+0.5*sin(v)"));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(0.0, 2 * std::numbers::pi);
    for (int i = 0; i < 50; ++i) {
        const MetricJet j = metric_jet(m, {0, Vec2(d(rng), d(rng))});
        CHECK((j.g * j.g_inv - Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-10);
        for (int k = 0; k < 2; ++k) CHECK(j.christoffel[k](0, 1) == j.christoffel[k](1, 0));
    }
}

TEST_CASE("expression metric load-time rejection") {
    CHECK_THROWS_AS(ManifoldModel::expression_metric(1.0, 1.0, expr::parse("1"), expr::parse("2"),
                                                     expr::parse("1")),
                    NonSPDMetric);
    CHECK_THROWS_AS(ManifoldModel::expression_metric(1.0, 1.0, expr::parse("1+u"), expr::parse("0"),
                                                     expr::parse("1")),
                    ConfigError);
    CHECK_THROWS_AS(ManifoldModel::expression_metric(1.0, 1.0, expr::parse("1"), expr::parse("0"),
                                                     expr::parse("z")),
                    ConfigError);
}

TEST_CASE("field vocabulary is validated per model") {
    const auto s = ManifoldModel::sphere();
    const auto t = ManifoldModel::flat_torus(1.0, 1.0);
    CHECK_NOTHROW(s.validate_field(expr::parse("0.3*z"), "h"));
    CHECK_THROWS_AS(s.validate_field(expr::parse("cos(u)"), "h"), ConfigError);
    CHECK_THROWS_AS(t.validate_field(expr::parse("z"), "h"), ConfigError);
}

TEST_CASE("Ricci closed forms") {
    std::mt19937_64 rng(11);
    for (double r : {1.0, 2.0}) {
        const auto m = ManifoldModel::sphere(r);
        for (int i = 0; i < 20; ++i) {
            const PointOnManifold p = random_sphere_point(rng);
            const Mat2 g = m.metric(p);
            const Mat2 ric = ricci(m, p);
            Vec2 v(0.3, -0.8);
            v /= std::sqrt(v.dot(g * v));
            CHECK(v.dot(ric * v) == doctest::Approx(1.0 / (r * r)).epsilon(1e-12));
        }
    }
}

TEST_CASE("finite-difference Ricci of the stereographic metric matches the closed form") {
    const auto m = ManifoldModel::sphere();
    const MetricFn g = m.metric_fn(0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-1.4, 1.4);
    int n = 0;
    while (n < 50) {
        const Vec2 w(d(rng), d(rng));
        if (w.norm() > 1.4) continue;
        ++n;
        const Mat2 fd = fd_ricci(g, w, FdSteps{});
        const Mat2 exact = m.ricci({0, w});
        CHECK((fd - exact).cwiseAbs().maxCoeff() < 1e-4);
    }
}

TEST_CASE("Hessian examples") {
    const auto t = ManifoldModel::flat_torus(2 * std::numbers::pi, 2 * std::numbers::pi);
    CHECK(hessian_h(t, kZero, {0, Vec2(0.4, 0.2)}).isZero());
    const Mat2 hc = hessian_h(t, expr::parse("cos(u)"), {0, Vec2(0.0, 0.0)});
    CHECK(hc(0, 0) == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(std::fabs(hc(0, 1)) < 1e-9);
    CHECK(std::fabs(hc(1, 1)) < 1e-9);
}

TEST_CASE("finite-difference Hess(z) on the unit sphere equals -z g") {
    const auto m = ManifoldModel::sphere();
    const auto z = expr::parse("z");
    std::mt19937_64 rng(17);
    for (int i = 0; i < 50; ++i) {
        const PointOnManifold p = random_sphere_point(rng);
        const Mat2 hess = hessian_h(m, z, p);
        const Mat2 expect = -m.ambient(p)[2] * m.metric(p);
        CHECK((hess - expect).cwiseAbs().maxCoeff() < 1e-7);
    }
    const Mat2 north = hessian_h(m, z, {0, Vec2::Zero()});
    CHECK((north + m.metric({0, Vec2::Zero()})).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("rho_h examples") {
    const auto s = ManifoldModel::sphere();
    const auto t = ManifoldModel::flat_torus(2 * std::numbers::pi, 2 * std::numbers::pi);
    CHECK(rho_h(s, kZero, {0, Vec2(0.2, 0.7)}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rho_h(t, kZero, {0, Vec2(0.2, 0.7)}) == 0.0);
    const auto h = expr::parse("0.3*z");
    CHECK(std::fabs(rho_h(s, h, {0, Vec2::Zero()}) - 1.6) < 1e-8);
    CHECK(std::fabs(rho_h(s, h, {1, Vec2::Zero()}) - 0.4) < 1e-8);
}

TEST_CASE("generalized eigenvalue matches a direct sweep minimisation") {
    std::mt19937_64 rng(23);
    const auto sphere = ManifoldModel::sphere();
    const auto torus = ManifoldModel::flat_torus(2 * std::numbers::pi, 2 * std::numbers::pi);
    const auto em = ManifoldModel::expression_metric(
        2 * std::numbers::pi, 2 * std::numbers::pi, expr::parse("2+cos(u)"),
        expr::parse("0.3*sin(u+v)"), expr::parse("1.5+0.5*sin(v)"));
    struct Case {
        const ManifoldModel* m;
        expr::ScalarFieldExpr h;
    };
    const Case cases[] = {{&sphere, expr::parse("0.3*z+0.2*x*y")},
                          {&torus, expr::parse("0.5*cos(u)+0.2*sin(u+2*v)")},
                          {&em, expr::parse("0.4*sin(u)*cos(v)")}};
    std::uniform_real_distribution<double> d(0.0, 2 * std::numbers::pi);
    for (const auto& c : cases) {
        for (int i = 0; i < 100; ++i) {
            const PointOnManifold p =
                c.m->is_periodic() ? PointOnManifold{0, Vec2(d(rng), d(rng))} : random_sphere_point(rng);
            const CurvaturePack cp = curvature(*c.m, c.h, p);
            const double direct = sweep_minimum(cp.ric - 2.0 * cp.hess_h, c.m->metric(p));
            CHECK(std::fabs(direct - cp.rho_h) < 1e-6);
        }
    }
}

TEST_CASE("rho_h is chart independent on the sphere overlap") {
    const auto m = ManifoldModel::sphere();
    const auto h = expr::parse("0.3*z + 0.25*x^2 - 0.1*y");
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> rad(0.7, 1.4), ang(0.0, 2 * std::numbers::pi);
    for (int i = 0; i < 50; ++i) {
        const double r = rad(rng), a = ang(rng);
        const PointOnManifold p{0, Vec2(r * std::cos(a), r * std::sin(a))};
        const PointOnManifold q = m.to_chart(p, 1);
        CHECK((m.to_chart(q, 0).coords - p.coords).norm() < 1e-10);
        CHECK((m.ambient(p) - m.ambient(q)).norm() < 1e-12);
        CHECK(std::fabs(rho_h(m, h, p) - rho_h(m, h, q)) < 1e-8);
    }
}

TEST_CASE("transition Jacobian pushes the metric consistently") {
    const auto m = ManifoldModel::sphere();
    const PointOnManifold p{0, Vec2(0.9, -0.6)};
    const Mat2 j = m.transition_jacobian(p, 1);
    const PointOnManifold q = m.to_chart(p, 1);
    // g_p = J^T g_q J
    CHECK((j.transpose() * m.metric(q) * j - m.metric(p)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("h-volume") {
    const auto s = ManifoldModel::sphere();
    CHECK(std::fabs(h_volume(s, kZero, 64) / (4 * std::numbers::pi) - 1.0) < 5e-3);
    const auto t = ManifoldModel::flat_torus(2 * std::numbers::pi, 2 * std::numbers::pi);
    CHECK(h_volume(t, kZero, 32) == doctest::Approx(4 * std::numbers::pi * std::numbers::pi).epsilon(1e-12));
    const double oracle = 2 * std::numbers::pi * simpson_periodic_exp_cos();
    // 4 pi^2 I0(1), I0(1) = 1.2660658777520082
    CHECK(oracle == doctest::Approx(4 * std::numbers::pi * std::numbers::pi * 1.2660658777520082).epsilon(1e-12));
    const double vol = h_volume(t, expr::parse("0.5*cos(u)"), 64);
    CHECK(std::fabs(vol / oracle - 1.0) < 5e-3);
}

TEST_CASE("h-volume converges at least quadratically on the torus") {
    const auto t = ManifoldModel::flat_torus(2 * std::numbers::pi, 2 * std::numbers::pi);
    const auto m = ManifoldModel::expression_metric(2 * std::numbers::pi, 2 * std::numbers::pi,
                                                    expr::parse("2+cos(u)"), expr::parse("0"),
                                                    expr::parse("1"));
    for (const ManifoldModel* mm : {&t, &m}) {
        const auto h = expr::parse("0.5*cos(u)*sin(v)");
        const double v32 = h_volume(*mm, h, 32), v64 = h_volume(*mm, h, 64), v128 = h_volume(*mm, h, 128);
        CHECK(std::fabs(v64 - v128) <= std::fabs(v32 - v64) / 4.0 + 1e-11 * v128);
    }
}

TEST_CASE("negative curvature fraction") {
    const auto s = ManifoldModel::sphere();
    CHECK(negative_rho_fraction(s, kZero, 16) == 0.0);
    // rho^h = 1 + 2 a z with a = 1: negative for z < -1/2, a cap of area fraction 1/4
    CHECK(negative_rho_fraction(s, expr::parse("z"), 64) == doctest::Approx(0.25).epsilon(0.03));
}

TEST_CASE("chart boundary is reported") {
    const auto s = ManifoldModel::sphere();
    CHECK_THROWS_AS(ricci(s, {0, Vec2(2.999, 0.0)}), ChartBoundary);
    CHECK_THROWS_AS(s.to_chart({0, Vec2::Zero()}, 1), ChartBoundary);
}
