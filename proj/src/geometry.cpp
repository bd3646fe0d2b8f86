#include "myers/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "myers/errors.hpp"
#include "myers/mesh.hpp"

namespace myers::geometry {

namespace {

constexpr double kSphereChartRadius = 3.0;
constexpr double kMinMetricEigenvalue = 1e-10;
constexpr double kPeriodicityTol = 1e-9;

double wrap(double x, double period) {
    double r = std::fmod(x, period);
    if (r < 0.0) r += period;
    if (r >= period) r -= period;
    return r;
}

std::string fmt_point(double u, double v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "(%.6g, %.6g)", u, v);
    return buf;
}

Mat2 sphere_metric(const Vec2& w, double r) {
    const double s = w.squaredNorm();
    const double c = 4.0 * r * r / ((1.0 + s) * (1.0 + s));
    return c * Mat2::Identity();
}

MetricJet sphere_jet(const Vec2& w, double r) {
    MetricJet j;
    const double s = w.squaredNorm();
    j.g = sphere_metric(w, r);
    j.g_inv = j.g.inverse();
    j.sqrt_det_g = j.g(0, 0);
    const Vec2 dphi = -2.0 * w / (1.0 + s);
    for (int k = 0; k < 2; ++k) j.dg[k] = 2.0 * dphi[k] * j.g;
    for (int k = 0; k < 2; ++k) {
        Mat2 gk = Mat2::Zero();
        for (int i = 0; i < 2; ++i)
            for (int jj = 0; jj < 2; ++jj)
                gk(i, jj) = (i == k ? dphi[jj] : 0.0) + (jj == k ? dphi[i] : 0.0) -
                            (i == jj ? dphi[k] : 0.0);
        j.christoffel[k] = gk;
    }
    return j;
}

MetricJet flat_jet() {
    MetricJet j;
    j.g = Mat2::Identity();
    j.g_inv = Mat2::Identity();
    j.dg = {Mat2::Zero(), Mat2::Zero()};
    j.christoffel = {Mat2::Zero(), Mat2::Zero()};
    j.sqrt_det_g = 1.0;
    return j;
}

void fill_christoffel(MetricJet& j) {
    for (int k = 0; k < 2; ++k) {
        Mat2 gk = Mat2::Zero();
        for (int i = 0; i < 2; ++i)
            for (int jj = 0; jj < 2; ++jj) {
                double acc = 0.0;
                for (int l = 0; l < 2; ++l)
                    acc += j.g_inv(k, l) * (j.dg[i](jj, l) + j.dg[jj](i, l) - j.dg[l](i, jj));
                gk(i, jj) = 0.5 * acc;
            }
        j.christoffel[k] = gk;
    }
}

struct HessianParts {
    Mat2 hess = Mat2::Zero();
    Vec2 dh = Vec2::Zero();
    double value = 0.0;
};

HessianParts hessian_parts(const ManifoldModel& m, const expr::ScalarFieldExpr& h,
                           const PointOnManifold& x, const MetricJet& jet) {
    HessianParts out;
    if (h.is_constant_zero()) return out;
    const int chart = x.chart;
    const ScalarFn f = [&](const Vec2& w) { return m.field(h, PointOnManifold{chart, w}); };
    out.value = f(x.coords);
    out.dh = fd_gradient(f, x.coords, m.fd().first);
    const Mat2 d2 = fd_second_derivatives(f, x.coords, m.fd().second);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double acc = d2(i, j);
            for (int k = 0; k < 2; ++k) acc -= jet.christoffel[k](i, j) * out.dh[k];
            out.hess(i, j) = acc;
        }
    out.hess = 0.5 * (out.hess + out.hess.transpose()).eval();
    return out;
}

}  // namespace

ManifoldModel ManifoldModel::sphere(double radius) {
    if (!(radius > 0.0)) throw ConfigError("sphere radius must be positive");
    ManifoldModel m;
    m.name_ = "sphere";
    m.kind_ = ManifoldKind::sphere;
    m.radius_ = radius;
    m.charts_ = {Chart{0, Chart::Domain::disk, kSphereChartRadius, kSphereChartRadius},
                 Chart{1, Chart::Domain::disk, kSphereChartRadius, kSphereChartRadius}};
    m.known_pi1_finite_ = true;
    return m;
}

ManifoldModel ManifoldModel::flat_torus(double period_u, double period_v) {
    if (!(period_u > 0.0) || !(period_v > 0.0)) throw ConfigError("torus periods must be positive");
    ManifoldModel m;
    m.name_ = "flat_torus";
    m.kind_ = ManifoldKind::flat_torus;
    m.period_u_ = period_u;
    m.period_v_ = period_v;
    m.charts_ = {Chart{0, Chart::Domain::periodic_rectangle, period_u, period_v}};
    m.known_pi1_finite_ = false;
    return m;
}

ManifoldModel ManifoldModel::expression_metric(double period_u, double period_v,
                                               expr::ScalarFieldExpr g11, expr::ScalarFieldExpr g12,
                                               expr::ScalarFieldExpr g22, FdSteps fd) {
    if (!(period_u > 0.0) || !(period_v > 0.0)) throw ConfigError("metric periods must be positive");
    ManifoldModel m;
    m.name_ = "expression_metric";
    m.kind_ = ManifoldKind::expression_metric;
    m.period_u_ = period_u;
    m.period_v_ = period_v;
    m.charts_ = {Chart{0, Chart::Domain::periodic_rectangle, period_u, period_v}};
    m.metric_exprs_ = {std::move(g11), std::move(g12), std::move(g22)};
    m.fd_ = fd;
    for (const auto& e : m.metric_exprs_)
        if (e.uses_ambient()) throw ConfigError("metric entries may only use the variables u and v");

    constexpr int kCheck = 128;
    for (int i = 0; i < kCheck; ++i)
        for (int j = 0; j < kCheck; ++j) {
            const double u = period_u * (i + 0.5 * (j % 2)) / kCheck;
            const double v = period_v * (j + 0.5 * (i % 2)) / kCheck;
            const Mat2 g = m.metric(PointOnManifold{0, Vec2(u, v)});
            const double lmin = Eigen::SelfAdjointEigenSolver<Mat2>(g, Eigen::EigenvaluesOnly)
                                    .eigenvalues()
                                    .minCoeff();
            if (!(lmin > kMinMetricEigenvalue))
                throw NonSPDMetric("metric is not positive definite at " + fmt_point(u, v),
                                   Error::Category::config);
        }
    constexpr int kEdge = 64;
    for (int i = 0; i < kEdge; ++i) {
        const double t = (i + 0.37) / kEdge;
        const double v = t * period_v, u = t * period_u;
        const Mat2 a = m.metric(PointOnManifold{0, Vec2(0.0, v)});
        const Mat2 b = m.metric(PointOnManifold{0, Vec2(period_u, v)});
        const Mat2 c = m.metric(PointOnManifold{0, Vec2(u, 0.0)});
        const Mat2 d = m.metric(PointOnManifold{0, Vec2(u, period_v)});
        if ((a - b).cwiseAbs().maxCoeff() > kPeriodicityTol)
            throw ConfigError("metric is not periodic in u at " + fmt_point(0.0, v));
        if ((c - d).cwiseAbs().maxCoeff() > kPeriodicityTol)
            throw ConfigError("metric is not periodic in v at " + fmt_point(u, 0.0));
    }
    return m;
}

Mat2 ManifoldModel::metric(const PointOnManifold& p) const {
    switch (kind_) {
        case ManifoldKind::sphere: return sphere_metric(p.coords, radius_);
        case ManifoldKind::flat_torus: return Mat2::Identity();
        case ManifoldKind::expression_metric: {
            const std::array<double, 2> uv{p.coords[0], p.coords[1]};
            const double g11 = expr::eval(metric_exprs_[0], uv);
            const double g12 = expr::eval(metric_exprs_[1], uv);
            const double g22 = expr::eval(metric_exprs_[2], uv);
            Mat2 g;
            g << g11, g12, g12, g22;
            return g;
        }
    }
    return Mat2::Identity();
}

MetricFn ManifoldModel::metric_fn(int chart) const {
    return [this, chart](const Vec2& w) { return metric(PointOnManifold{chart, w}); };
}

MetricJet ManifoldModel::jet(const PointOnManifold& p) const {
    switch (kind_) {
        case ManifoldKind::sphere: return sphere_jet(p.coords, radius_);
        case ManifoldKind::flat_torus: return flat_jet();
        case ManifoldKind::expression_metric: {
            MetricJet j = fd_metric_jet(metric_fn(p.chart), p.coords, fd_.first);
            if (!(j.g.determinant() > 0.0) || !(j.g(0, 0) > 0.0))
                throw NonSPDMetric("metric is not positive definite at " +
                                   fmt_point(p.coords[0], p.coords[1]));
            return j;
        }
    }
    return flat_jet();
}

Mat2 ManifoldModel::ricci(const PointOnManifold& p) const {
    switch (kind_) {
        case ManifoldKind::sphere: return sphere_metric(p.coords, radius_) / (radius_ * radius_);
        case ManifoldKind::flat_torus: return Mat2::Zero();
        case ManifoldKind::expression_metric: return fd_ricci(metric_fn(p.chart), p.coords, fd_);
    }
    return Mat2::Zero();
}

PointOnManifold ManifoldModel::canonical(const PointOnManifold& p, double switch_radius) const {
    if (is_periodic()) return {0, Vec2(wrap(p.coords[0], period_u_), wrap(p.coords[1], period_v_))};
    if (p.coords.norm() > switch_radius) return to_chart(p, 1 - p.chart);
    return p;
}

PointOnManifold ManifoldModel::to_chart(const PointOnManifold& p, int to) const {
    if (to == p.chart) return p;
    if (is_periodic() || to < 0 || to > 1) throw StepOutOfAtlas("no chart " + std::to_string(to));
    const double s = p.coords.squaredNorm();
    if (s < 1e-16)
        throw ChartBoundary("point " + fmt_point(p.coords[0], p.coords[1]) +
                            " is the pole of chart " + std::to_string(to));
    return {to, p.coords / s};
}

Mat2 ManifoldModel::transition_jacobian(const PointOnManifold& p, int to) const {
    if (to == p.chart) return Mat2::Identity();
    const double s = p.coords.squaredNorm();
    if (s < 1e-16) throw ChartBoundary("transition Jacobian at a chart pole");
    return (s * Mat2::Identity() - 2.0 * p.coords * p.coords.transpose()) / (s * s);
}

Vec3 ManifoldModel::ambient(const PointOnManifold& p) const {
    if (is_periodic()) return {p.coords[0], p.coords[1], 0.0};
    const double s = p.coords.squaredNorm();
    const double sign = p.chart == 0 ? 1.0 : -1.0;
    return radius_ * Vec3(2.0 * p.coords[0] / (1.0 + s), 2.0 * p.coords[1] / (1.0 + s),
                          sign * (1.0 - s) / (1.0 + s));
}

PointOnManifold ManifoldModel::from_ambient(const Vec3& x) const {
    if (is_periodic()) return canonical(PointOnManifold{0, Vec2(x[0], x[1])});
    const Vec3 n = x / x.norm();
    if (n[2] >= 0.0) return {0, Vec2(n[0], n[1]) / (1.0 + n[2])};
    return {1, Vec2(n[0], n[1]) / (1.0 - n[2])};
}

std::array<double, expr::kAmbientArity> ManifoldModel::field_coords(const PointOnManifold& p) const {
    const Vec3 a = ambient(p);
    return {p.coords[0], p.coords[1], a[0], a[1], a[2]};
}

void ManifoldModel::validate_field(const expr::ScalarFieldExpr& f, const std::string& what) const {
    if (is_periodic() && f.uses_ambient())
        throw ConfigError(what + ": fields on a periodic rectangle may only use u and v");
    if (!is_periodic() && f.uses_chart())
        throw ConfigError(what + ": fields on the sphere must be written in ambient x, y, z");
}

double ManifoldModel::field(const expr::ScalarFieldExpr& f, const PointOnManifold& p) const {
    if (is_periodic()) {
        const std::array<double, 2> uv{p.coords[0], p.coords[1]};
        return expr::eval(f, uv);
    }
    const auto c = field_coords(p);
    return expr::eval(f, c);
}

double ManifoldModel::field_at_ambient(const expr::ScalarFieldExpr& f, const Vec3& x) const {
    if (is_periodic()) {
        const std::array<double, 2> uv{x[0], x[1]};
        return expr::eval(f, uv);
    }
    const std::array<double, 5> c{0.0, 0.0, x[0], x[1], x[2]};
    return expr::eval(f, c);
}

void ManifoldModel::require_interior(const PointOnManifold& p, double margin) const {
    if (is_periodic()) return;
    if (p.coords.norm() + margin >= kSphereChartRadius)
        throw ChartBoundary("point " + fmt_point(p.coords[0], p.coords[1]) +
                            " too close to the edge of chart " + std::to_string(p.chart));
}

std::string ManifoldModel::describe() const {
    char buf[128];
    switch (kind_) {
        case ManifoldKind::sphere: std::snprintf(buf, sizeof buf, "sphere(r=%.17g)", radius_); break;
        case ManifoldKind::flat_torus:
            std::snprintf(buf, sizeof buf, "flat_torus(Lu=%.17g, Lv=%.17g)", period_u_, period_v_);
            break;
        case ManifoldKind::expression_metric:
            return "expression_metric(g11=" + expr::print(metric_exprs_[0]) +
                   ", g12=" + expr::print(metric_exprs_[1]) + ", g22=" + expr::print(metric_exprs_[2]) +
                   ")";
    }
    return buf;
}

MetricJet fd_metric_jet(const MetricFn& g, const Vec2& x, double step) {
    MetricJet j;
    j.g = g(x);
    j.g = 0.5 * (j.g + j.g.transpose()).eval();
    j.g_inv = j.g.inverse();
    j.sqrt_det_g = std::sqrt(j.g.determinant());
    for (int k = 0; k < 2; ++k) {
        Vec2 e = Vec2::Zero();
        e[k] = step;
        j.dg[k] = (g(x + e) - g(x - e)) / (2.0 * step);
    }
    fill_christoffel(j);
    return j;
}

Mat2 fd_ricci(const MetricFn& g, const Vec2& x, const FdSteps& fd) {
    const MetricJet j0 = fd_metric_jet(g, x, fd.first);
    // dgamma[m][k](i, j) = d_m Gamma^k_ij
    std::array<std::array<Mat2, 2>, 2> dgamma;
    for (int m = 0; m < 2; ++m) {
        Vec2 e = Vec2::Zero();
        e[m] = fd.second;
        const MetricJet jp = fd_metric_jet(g, x + e, fd.first);
        const MetricJet jm = fd_metric_jet(g, x - e, fd.first);
        for (int k = 0; k < 2; ++k)
            dgamma[m][k] = (jp.christoffel[k] - jm.christoffel[k]) / (2.0 * fd.second);
    }
    const auto& G = j0.christoffel;
    Mat2 ric = Mat2::Zero();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double r = 0.0;
            for (int k = 0; k < 2; ++k) {
                r += dgamma[k][k](i, j) - dgamma[j][k](i, k);
                for (int l = 0; l < 2; ++l) r += G[k](k, l) * G[l](i, j) - G[k](j, l) * G[l](i, k);
            }
            ric(i, j) = r;
        }
    return 0.5 * (ric + ric.transpose());
}

// Central differences with one Richardson extrapolation step: (4 D(h) - D(2h)) / 3.
Vec2 fd_gradient(const ScalarFn& f, const Vec2& x, double step) {
    Vec2 out;
    for (int k = 0; k < 2; ++k) {
        Vec2 e = Vec2::Zero();
        e[k] = step;
        const double d1 = (f(x + e) - f(x - e)) / (2.0 * step);
        const double d2 = (f(x + 2.0 * e) - f(x - 2.0 * e)) / (4.0 * step);
        out[k] = (4.0 * d1 - d2) / 3.0;
    }
    return out;
}

Mat2 fd_second_derivatives(const ScalarFn& f, const Vec2& x, double step) {
    const double f0 = f(x);
    auto stencil = [&](double h) {
        const Vec2 eu(h, 0.0), ev(0.0, h);
        const double h2 = h * h;
        Mat2 d;
        d(0, 0) = (f(x + eu) - 2.0 * f0 + f(x - eu)) / h2;
        d(1, 1) = (f(x + ev) - 2.0 * f0 + f(x - ev)) / h2;
        d(0, 1) = d(1, 0) =
            (f(x + eu + ev) - f(x + eu - ev) - f(x - eu + ev) + f(x - eu - ev)) / (4.0 * h2);
        return d;
    };
    return (4.0 * stencil(step) - stencil(2.0 * step)) / 3.0;
}

double smallest_generalized_eigenvalue(const Mat2& s, const Mat2& g) {
    // Reduce to a standard symmetric problem through the Cholesky factor of g.
    const double l11 = std::sqrt(g(0, 0));
    const double l21 = g(1, 0) / l11;
    const double l22 = std::sqrt(g(1, 1) - l21 * l21);
    Mat2 linv;
    linv << 1.0 / l11, 0.0, -l21 / (l11 * l22), 1.0 / l22;
    const Mat2 c = linv * s * linv.transpose();
    const double mean = 0.5 * (c(0, 0) + c(1, 1));
    const double half_diff = 0.5 * (c(0, 0) - c(1, 1));
    const double off = 0.5 * (c(0, 1) + c(1, 0));
    return mean - std::hypot(half_diff, off);
}

MetricJet metric_jet(const ManifoldModel& m, const PointOnManifold& x) {
    m.require_interior(x, 2.0 * m.fd().first);
    return m.jet(x);
}

Mat2 ricci(const ManifoldModel& m, const PointOnManifold& x) {
    m.require_interior(x, 4.0 * m.fd().second);
    return m.ricci(x);
}

Mat2 hessian_h(const ManifoldModel& m, const expr::ScalarFieldExpr& h, const PointOnManifold& x) {
    m.require_interior(x, 4.0 * m.fd().second);
    return hessian_parts(m, h, x, m.jet(x)).hess;
}

CurvaturePack curvature(const ManifoldModel& m, const expr::ScalarFieldExpr& h, const PointOnManifold& x) {
    m.require_interior(x, 4.0 * m.fd().second);
    return curvature(m, h, x, m.jet(x));
}

CurvaturePack curvature(const ManifoldModel& m, const expr::ScalarFieldExpr& h, const PointOnManifold& x,
                        const MetricJet& jet) {
    m.require_interior(x, 4.0 * m.fd().second);
    const HessianParts hp = hessian_parts(m, h, x, jet);
    CurvaturePack c;
    c.ric = m.ricci(x);
    c.hess_h = hp.hess;
    c.dh = hp.dh;
    c.grad_h = jet.g_inv * hp.dh;
    c.h_value = hp.value;
    c.rho_h = smallest_generalized_eigenvalue(c.ric - 2.0 * c.hess_h, jet.g);
    return c;
}

double rho_h(const ManifoldModel& m, const expr::ScalarFieldExpr& h, const PointOnManifold& x) {
    return curvature(m, h, x).rho_h;
}

namespace {

// Calls fn(point, dvol) over the quadrature nodes used for volume integrals.
template <class Fn>
void for_each_quadrature_node(const ManifoldModel& m, int resolution, Fn&& fn) {
    if (resolution < 8) throw ConfigError("quadrature resolution must be at least 8");
    if (m.is_periodic()) {
        const double du = m.period_u() / resolution, dv = m.period_v() / resolution;
        for (int i = 0; i < resolution; ++i)
            for (int j = 0; j < resolution; ++j) {
                const PointOnManifold p{0, Vec2((i + 0.5) * du, (j + 0.5) * dv)};
                const double sqrt_det =
                    m.kind() == ManifoldKind::flat_torus ? 1.0 : std::sqrt(m.metric(p).determinant());
                fn(p, sqrt_det * du * dv);
            }
        return;
    }
    const mesh::TriangleMesh mesh =
        mesh::icosphere(mesh::sphere_level_for_resolution(resolution), m.radius());
    std::vector<double> area(mesh.vertices.size(), 0.0);
    for (const auto& t : mesh.triangles) {
        const double a = mesh::spherical_triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]],
                                                       mesh.vertices[t[2]], m.radius());
        for (int k : t) area[k] += a / 3.0;
    }
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        fn(m.from_ambient(mesh.vertices[i]), area[i]);
}

}  // namespace

double h_volume(const ManifoldModel& m, const expr::ScalarFieldExpr& h, int resolution) {
    double total = 0.0;
    for_each_quadrature_node(m, resolution, [&](const PointOnManifold& p, double dvol) {
        total += std::exp(2.0 * m.field(h, p)) * dvol;
    });
    return total;
}

double negative_rho_fraction(const ManifoldModel& m, const expr::ScalarFieldExpr& h, int resolution) {
    double neg = 0.0, total = 0.0;
    for_each_quadrature_node(m, resolution, [&](const PointOnManifold& p, double dvol) {
        total += dvol;
        if (rho_h(m, h, p) < 0.0) neg += dvol;
    });
    return neg / total;
}

Vec2 exp_map_approx(const ManifoldModel& m, const PointOnManifold& x, const Vec2& v, double eps) {
    const MetricJet j = m.jet(x);
    Vec2 out = x.coords + eps * v;
    for (int k = 0; k < 2; ++k) out[k] -= 0.5 * eps * eps * v.dot(j.christoffel[k] * v);
    return out;
}

}  // namespace myers::geometry
