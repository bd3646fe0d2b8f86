#pragma once

// Manifold catalog and pointwise curvature. Everything is two-dimensional:
// points are chart coordinates, tensors are 2x2 matrices in the coordinate basis.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "myers/expr.hpp"

namespace myers::geometry {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec3 = Eigen::Vector3d;

struct FdSteps {
    double first = 1e-4;   // first derivatives
    double second = 1e-3;  // second derivatives and derivatives of Christoffel symbols
};

enum class ManifoldKind { sphere, flat_torus, expression_metric };

struct Chart {
    enum class Domain { periodic_rectangle, disk };
    int id = 0;
    Domain domain = Domain::periodic_rectangle;
    double extent_u = 0.0;  // rectangle side, or disk radius
    double extent_v = 0.0;
};

struct PointOnManifold {
    int chart = 0;
    Vec2 coords = Vec2::Zero();
};

struct MetricJet {
    Mat2 g;
    Mat2 g_inv;
    std::array<Mat2, 2> dg;           // dg[k](i, j) = d_k g_ij
    std::array<Mat2, 2> christoffel;  // christoffel[k](i, j) = Gamma^k_ij
    double sqrt_det_g = 0.0;
};

struct CurvaturePack {
    Mat2 ric;
    Mat2 hess_h;
    Vec2 grad_h;  // contravariant components (nabla h)^i
    Vec2 dh;      // covariant components d_i h
    double rho_h = 0.0;
    double h_value = 0.0;
};

using MetricFn = std::function<Mat2(const Vec2&)>;
using ScalarFn = std::function<double(const Vec2&)>;

class ManifoldModel {
public:
    static ManifoldModel sphere(double radius = 1.0);
    static ManifoldModel flat_torus(double period_u, double period_v);
    // Periodic rectangle [0,Lu)x[0,Lv) with user metric entries. Validates
    // positivity and periodicity eagerly.
    static ManifoldModel expression_metric(double period_u, double period_v, expr::ScalarFieldExpr g11,
                                           expr::ScalarFieldExpr g12, expr::ScalarFieldExpr g22,
                                           FdSteps fd = {});

    const std::string& name() const noexcept { return name_; }
    ManifoldKind kind() const noexcept { return kind_; }
    static constexpr int dim() noexcept { return 2; }
    const std::vector<Chart>& charts() const noexcept { return charts_; }
    std::optional<bool> known_pi1_finite() const noexcept { return known_pi1_finite_; }
    double radius() const noexcept { return radius_; }
    double period_u() const noexcept { return period_u_; }
    double period_v() const noexcept { return period_v_; }
    bool is_periodic() const noexcept { return kind_ != ManifoldKind::sphere; }
    const FdSteps& fd() const noexcept { return fd_; }
    void set_fd(FdSteps fd) noexcept { fd_ = fd; }
    // Sphere charts switch once |z| exceeds this radius.
    double chart_switch_radius() const noexcept { return 1.5; }

    Mat2 metric(const PointOnManifold& p) const;
    MetricJet jet(const PointOnManifold& p) const;
    Mat2 ricci(const PointOnManifold& p) const;

    // Wrap periodic coordinates into the fundamental rectangle; on the sphere,
    // move to the other chart when |z| > switch_radius.
    PointOnManifold canonical(const PointOnManifold& p, double switch_radius) const;
    PointOnManifold canonical(const PointOnManifold& p) const {
        return canonical(p, chart_switch_radius());
    }
    // Same point expressed in chart `to`. Throws ChartBoundary outside the overlap.
    PointOnManifold to_chart(const PointOnManifold& p, int to) const;
    // Jacobian d(coords in `to`)/d(coords in p.chart) at p.
    Mat2 transition_jacobian(const PointOnManifold& p, int to) const;

    // Embedding (sphere) or the unrolled (u, v, 0) for periodic models.
    Vec3 ambient(const PointOnManifold& p) const;
    PointOnManifold from_ambient(const Vec3& x) const;

    // Variable bindings for field expressions at p: (u, v) or (u, v, x, y, z).
    std::array<double, expr::kAmbientArity> field_coords(const PointOnManifold& p) const;
    // Rejects a field whose variables are meaningless on this model.
    void validate_field(const expr::ScalarFieldExpr& f, const std::string& what) const;
    double field(const expr::ScalarFieldExpr& f, const PointOnManifold& p) const;
    double field_at_ambient(const expr::ScalarFieldExpr& f, const Vec3& x) const;

    // Throws ChartBoundary when the stencil of half-width `margin` leaves the chart.
    void require_interior(const PointOnManifold& p, double margin) const;

    // Metric in a given chart as a plain function of the coordinates.
    MetricFn metric_fn(int chart) const;

    std::string describe() const;

private:
    ManifoldModel() = default;

    std::string name_;
    ManifoldKind kind_ = ManifoldKind::flat_torus;
    std::vector<Chart> charts_;
    std::optional<bool> known_pi1_finite_;
    double radius_ = 1.0;
    double period_u_ = 0.0;
    double period_v_ = 0.0;
    std::array<expr::ScalarFieldExpr, 3> metric_exprs_;
    FdSteps fd_;
};

// Finite-difference apparatus for an arbitrary metric given as a function.
MetricJet fd_metric_jet(const MetricFn& g, const Vec2& x, double step);
Mat2 fd_ricci(const MetricFn& g, const Vec2& x, const FdSteps& fd);
Vec2 fd_gradient(const ScalarFn& f, const Vec2& x, double step);
Mat2 fd_second_derivatives(const ScalarFn& f, const Vec2& x, double step);

// Smallest lambda with (S - lambda g) w = 0, closed form.
double smallest_generalized_eigenvalue(const Mat2& s, const Mat2& g);

MetricJet metric_jet(const ManifoldModel& m, const PointOnManifold& x);
Mat2 ricci(const ManifoldModel& m, const PointOnManifold& x);
Mat2 hessian_h(const ManifoldModel& m, const expr::ScalarFieldExpr& h, const PointOnManifold& x);
double rho_h(const ManifoldModel& m, const expr::ScalarFieldExpr& h, const PointOnManifold& x);
CurvaturePack curvature(const ManifoldModel& m, const expr::ScalarFieldExpr& h, const PointOnManifold& x);
// Same, reusing a jet already computed at x.
CurvaturePack curvature(const ManifoldModel& m, const expr::ScalarFieldExpr& h, const PointOnManifold& x,
                        const MetricJet& jet);

// Integral of exp(2h) dvol.
double h_volume(const ManifoldModel& m, const expr::ScalarFieldExpr& h, int resolution);

// Riemannian volume fraction where rho^h < 0, on the same quadrature as h_volume.
double negative_rho_fraction(const ManifoldModel& m, const expr::ScalarFieldExpr& h, int resolution);

// Second-order approximation of exp_x(eps * v) in the chart of x.
Vec2 exp_map_approx(const ManifoldModel& m, const PointOnManifold& x, const Vec2& v, double eps);

}  // namespace myers::geometry
