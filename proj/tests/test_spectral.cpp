#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "myers/errors.hpp"
#include "myers/sde.hpp"
#include "myers/spectral.hpp"

using namespace myers;
using namespace myers::spectral;
using geometry::ManifoldModel;

namespace {

const expr::ScalarFieldExpr kZero;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

ManifoldModel warped_torus() {
    return ManifoldModel::expression_metric(kTwoPi, kTwoPi, expr::parse("2+cos(u)"), expr::parse("0.3*sin(u+v)"),
                                            expr::parse("1.5+0.5*sin(v)"));
}

Vector random_vector(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    Vector v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

void check_operator_invariants(const DiscreteOperator& op) {
    std::mt19937_64 rng(4);
    CHECK(op.apply(Vector::Ones(op.size())).cwiseAbs().maxCoeff() < 1e-10);
    for (int i = 0; i < 5; ++i) {
        const Vector f = random_vector(op.size(), rng), g = random_vector(op.size(), rng);
        const double asym = std::fabs(op.inner(op.apply(f), g) - op.inner(f, op.apply(g)));
        CHECK(asym <= 1e-10 * op.norm(f) * op.norm(g) * std::max(1.0, op.apply(f).cwiseAbs().maxCoeff()));
        CHECK(op.inner(op.apply(f), f) <= 0.0);
    }
}

}  // namespace

TEST_CASE("operator invariants across the catalog") {
    check_operator_invariants(build_operator(ManifoldModel::flat_torus(kTwoPi, kTwoPi), expr::parse("0.5*cos(u)"), 32));
    check_operator_invariants(build_operator(warped_torus(), expr::parse("0.4*cos(v)"), 32));
    check_operator_invariants(build_operator(ManifoldModel::sphere(), expr::parse("0.3*z"), 32));
    CHECK_THROWS_AS(build_operator(ManifoldModel::flat_torus(1.0, 1.0), kZero, 8), ConfigError);
}

TEST_CASE("flat torus Fourier spectrum") {
    const auto op = build_operator(ManifoldModel::flat_torus(kTwoPi, kTwoPi), kZero, 64);
    const Spectrum s = top_eigenpairs(op, Generator::heat, 9);
    CHECK(std::fabs(2.0 * s.values[0]) < 1e-10);
    for (int i = 1; i <= 4; ++i) CHECK(2.0 * s.values[i] == doctest::Approx(-1.0).epsilon(1e-3));
    for (int i = 5; i <= 8; ++i) CHECK(2.0 * s.values[i] == doctest::Approx(-2.0).epsilon(1e-3));
    for (double r : s.residuals) CHECK(r <= 1e-8);
}

TEST_CASE("icosphere spherical-harmonic spectrum") {
    const auto op = build_operator(ManifoldModel::sphere(), kZero, 64);
    REQUIRE(op.meta.level == 5);
    REQUIRE(op.size() == 10242);
    const Spectrum s = top_eigenpairs(op, Generator::heat, 16);
    int idx = 0;
    for (int l = 0; l <= 3; ++l) {
        for (int m = 0; m < 2 * l + 1; ++m, ++idx) {
            const double exact = -l * (l + 1.0);
            CHECK(std::fabs(2.0 * s.values[idx] - exact) <= 0.01 * std::max(1.0, std::fabs(exact)));
        }
    }
}

TEST_CASE("top eigenvalue examples") {
    const auto sphere = ManifoldModel::sphere();
    const EigenResult a = top_eigen(build_operator(sphere, kZero, 32));
    CHECK(a.mu_top == doctest::Approx(-0.5).epsilon(2e-3));
    CHECK(a.lambda0 == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(a.residual <= 1e-8);
    CHECK(a.criterion_holds());

    const EigenResult t = top_eigen(build_operator(ManifoldModel::flat_torus(kTwoPi, kTwoPi), kZero, 32));
    CHECK(std::fabs(t.lambda0) < 1e-10);
    CHECK_FALSE(t.criterion_holds());

    const auto op = build_operator(sphere, expr::parse("0.3*z"), 32);
    const EigenResult b = top_eigen(op);
    CHECK(b.lambda0 > -1.6);
    CHECK(b.lambda0 < -0.4);
    const Vector r = 0.5 * (op.apply(b.eigvec) - op.rho.cwiseProduct(b.eigvec)) - b.mu_top * b.eigvec;
    CHECK(op.norm(r) <= 1e-8 * op.norm(b.eigvec));
    CHECK(op.norm(b.eigvec) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b.eigvec.minCoeff() > 0.0);  // ground state has one sign
}

TEST_CASE("constant shift of rho moves lambda0 by exactly minus the shift") {
    const auto sphere = ManifoldModel::sphere();
    const auto h = expr::parse("0.3*z");
    const double base = top_eigen(build_operator(sphere, h, 32)).lambda0;
    const double shifted = top_eigen(build_operator(sphere, h, 32, 0.25)).lambda0;
    CHECK(std::fabs(shifted - (base - 0.25)) < 1e-8);
}

TEST_CASE("semigroup examples") {
    const auto sphere = ManifoldModel::sphere();
    const auto op = build_operator(sphere, kZero, 64);
    const Vector z = sample_nodes(sphere, op, expr::parse("z"));
    CHECK((semigroup_apply(op, z, 0.0, Generator::heat) - z).norm() == 0.0);
    const Vector one = Vector::Ones(op.size());
    CHECK((semigroup_apply(op, one, 1.5, Generator::heat) - one).cwiseAbs().maxCoeff() < 1e-10);
    const Vector pz = semigroup_apply(op, z, 1.0, Generator::heat);
    CHECK((pz - std::exp(-1.0) * z).cwiseAbs().maxCoeff() <= 0.01 * std::exp(-1.0));
    const Vector p1 = semigroup_apply(op, one, 2.0, Generator::schrodinger);
    CHECK((p1 - std::exp(-1.0) * one).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("semigroup preserves positivity on dense and Krylov paths") {
    const auto h = expr::parse("0.3*z");
    for (int res : {16, 64}) {
        const auto op = build_operator(ManifoldModel::sphere(), h, res);
        Vector bump = Vector::Zero(op.size());
        for (Eigen::Index i = 0; i < op.size(); ++i) bump[i] = op.ambient[i][2] > 0.9 ? 1.0 : 0.0;
        const auto out = semigroup_apply_times(op, bump, {0.01, 0.1, 1.0, 4.0}, Generator::schrodinger);
        for (const Vector& v : out) CHECK(v.minCoeff() >= -1e-10);
    }
}

TEST_CASE("dense and Krylov semigroups agree") {
    const auto torus = ManifoldModel::flat_torus(kTwoPi, kTwoPi);
    const auto h = expr::parse("0.5*cos(u)");
    // 32^2 = 1024 nodes is the largest dense case; 33^2 goes through Krylov.
    const auto small = build_operator(torus, h, 32);
    const auto large = build_operator(torus, h, 33);
    CHECK(small.size() == 1024);
    const Vector fs = sample_nodes(torus, small, expr::parse("cos(u)+sin(v)"));
    const Vector fl = sample_nodes(torus, large, expr::parse("cos(u)+sin(v)"));
    const NodeInterpolator is(torus, small), il(torus, large);
    const Vector ps = semigroup_apply(small, fs, 0.7, Generator::schrodinger);
    const Vector pl = semigroup_apply(large, fl, 0.7, Generator::schrodinger);
    for (double u : {0.0, 1.0, 2.5, 4.0}) {
        const geometry::PointOnManifold p{0, geometry::Vec2(u, 1.0 + u)};
        CHECK(is.value(ps, p) == doctest::Approx(il.value(pl, p)).epsilon(5e-3));
    }
}

TEST_CASE("potential resolvent") {
    const auto sphere = ManifoldModel::sphere();
    const auto op0 = build_operator(sphere, kZero, 64);
    const Vector u0 = potential_resolvent(op0, top_eigen(op0));
    CHECK((u0.array() - 2.0).abs().maxCoeff() < 1e-6);

    const auto op = build_operator(sphere, expr::parse("0.3*z"), 64);
    const Vector u = potential_resolvent(op, top_eigen(op));
    const Vector residual = 0.5 * (op.rho.cwiseProduct(u) - op.apply(u)) - Vector::Ones(op.size());
    CHECK(residual.cwiseAbs().maxCoeff() < 1e-8);
    CHECK(u.minCoeff() > 0.0);

    const auto torus = build_operator(ManifoldModel::flat_torus(kTwoPi, kTwoPi), kZero, 32);
    CHECK_THROWS_AS(potential_resolvent(torus, top_eigen(torus)), CriterionFails);
}

TEST_CASE("Witten conjugation") {
    const auto torus = ManifoldModel::flat_torus(kTwoPi, kTwoPi);
    const WittenReport zero = witten_check(torus, kZero, 32);
    CHECK(zero.max_eigen_deviation == 0.0);
    CHECK(zero.conjugation_residual == 0.0);

    const WittenReport t = witten_check(torus, expr::parse("0.5*cos(u)"), 64);
    CHECK(t.max_eigen_deviation <= 0.01);
    CHECK(t.conjugation_residual <= 0.01);
    const WittenReport s = witten_check(ManifoldModel::sphere(), expr::parse("0.3*z"), 64);
    CHECK(s.max_eigen_deviation <= 0.01);
    CHECK(s.conjugation_residual <= 0.01);
    // Discretization error shrinks under refinement.
    const WittenReport coarse = witten_check(torus, expr::parse("0.5*cos(u)"), 32);
    CHECK(t.conjugation_residual < coarse.conjugation_residual);
}

TEST_CASE("lambda0 converges under grid refinement") {
    struct Case {
        ManifoldModel m;
        expr::ScalarFieldExpr h;
    };
    const Case cases[] = {{ManifoldModel::flat_torus(kTwoPi, kTwoPi), expr::parse("0.5*cos(u)")},
                          {warped_torus(), expr::parse("0.4*cos(v)")}};
    for (const Case& c : cases) {
        const double l64 = top_eigen(build_operator(c.m, c.h, 64)).lambda0;
        const double l128 = top_eigen(build_operator(c.m, c.h, 128)).lambda0;
        CHECK(std::fabs(l128 - l64) < 0.01 * std::fabs(l128));
    }
}

TEST_CASE("Schrodinger semigroup decays at rate mu_top") {
    const auto op = build_operator(ManifoldModel::sphere(), expr::parse("0.3*z"), 64);
    const EigenResult e = top_eigen(op);
    std::vector<double> times, sup;
    for (int i = 0; i <= 20; ++i) times.push_back(5.0 + 0.25 * i);
    const auto out = semigroup_apply_times(op, Vector::Ones(op.size()), times, Generator::schrodinger);
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double y = std::log(out[i].maxCoeff());
        st += times[i];
        sy += y;
        stt += times[i] * times[i];
        sty += times[i] * y;
    }
    const double n = static_cast<double>(times.size());
    const double slope = (n * sty - st * sy) / (n * stt - st * st);
    CHECK(std::fabs(slope - e.mu_top) <= 0.02 * std::fabs(e.mu_top));
}

TEST_CASE("node interpolation reproduces smooth fields") {
    const auto sphere = ManifoldModel::sphere();
    const auto op = build_operator(sphere, kZero, 32);
    const NodeInterpolator interp(sphere, op);
    const Vector z = sample_nodes(sphere, op, expr::parse("z"));
    std::mt19937_64 rng(9);
    std::normal_distribution<double> d;
    for (int i = 0; i < 20; ++i) {
        const auto p = sphere.from_ambient(geometry::Vec3(d(rng), d(rng), d(rng)));
        CHECK(interp.value(z, p) == doctest::Approx(sphere.ambient(p)[2]).epsilon(1e-4));
    }
    const auto torus = ManifoldModel::flat_torus(kTwoPi, kTwoPi);
    const auto top = build_operator(torus, kZero, 64);
    const NodeInterpolator ti(torus, top);
    const Vector c = sample_nodes(torus, top, expr::parse("cos(u)"));
    // Wrapped neighbourhood across u = 0.
    const auto fit = ti.fit(c, {0, geometry::Vec2(0.01, 3.0)});
    CHECK(fit(fit.center.coords) == doctest::Approx(std::cos(0.01)).epsilon(2e-5));
    const auto inner = ti.fit(c, {0, geometry::Vec2(1.0, 3.0)});
    CHECK(inner.gradient(inner.center.coords)[0] == doctest::Approx(-std::sin(1.0)).epsilon(1e-3));
    CHECK(std::fabs(inner.gradient(inner.center.coords)[1]) < 1e-6);
}

TEST_CASE("Monte Carlo and spectral semigroups agree") {
    struct Case {
        ManifoldModel m;
        expr::ScalarFieldExpr h, f;
        geometry::PointOnManifold x0;
        int res;
    };
    const Case cases[] = {
        {ManifoldModel::sphere(), expr::parse("0.3*z"), expr::parse("z"), {0, geometry::Vec2(0.3, 0.2)}, 64},
        {ManifoldModel::flat_torus(kTwoPi, kTwoPi), expr::parse("0.5*cos(u)"), expr::parse("cos(u)"),
         {0, geometry::Vec2(1.0, 2.0)}, 64}};
    for (const Case& c : cases) {
        const auto fine = build_operator(c.m, c.h, c.res);
        const auto coarse = build_operator(c.m, c.h, c.res / 2);
        const std::vector<double> times{0.5, 1.0, 2.0};
        const auto pf = semigroup_apply_times(fine, sample_nodes(c.m, fine, c.f), times, Generator::heat);
        const auto pc = semigroup_apply_times(coarse, sample_nodes(c.m, coarse, c.f), times, Generator::heat);
        const NodeInterpolator inf(c.m, fine), inc(c.m, coarse);

        sde::SamplerConfig cfg;
        cfg.dt = 5e-3;
        cfg.t_max = 2.0;
        cfg.n_paths = 4000;
        cfg.record_stride = 100;
        const auto rec = sde::sample_functionals(c.m, c.h, c.x0, c.f, cfg);
        for (std::size_t k = 0; k < times.size(); ++k) {
            const std::size_t r = static_cast<std::size_t>(std::llround(times[k] / 0.5));
            REQUIRE(rec.times[r] == doctest::Approx(times[k]));
            const double spectral = inf.value(pf[k], c.x0);
            const double mesh_error = std::fabs(spectral - inc.value(pc[k], c.x0));
            CHECK(std::fabs(rec.f[r].mean - spectral) <= 3.0 * rec.f[r].std_error + mesh_error + 1e-3);
        }
    }
}

TEST_CASE("Matrix Market export") {
    SparseMatrix a(2, 3);
    a.insert(0, 0) = 1.5;
    a.insert(1, 2) = -0.25;
    a.makeCompressed();
    std::ostringstream os;
    write_matrix_market(os, a);
    CHECK(os.str() == "%%MatrixMarket matrix coordinate real general\n2 3 2\n1 1 1.5\n2 3 -0.25\n");
}
