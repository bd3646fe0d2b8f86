#include "myers/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>

#include "myers/errors.hpp"
#include "myers/rng.hpp"

namespace myers::spectral {

using geometry::Mat2;
using geometry::ManifoldModel;
using geometry::Vec2;
using geometry::Vec3;
using Triplets = std::vector<Eigen::Triplet<double>>;

Vector DiscreteOperator::apply(const Vector& f) const {
    return (stiffness * f).cwiseQuotient(weights);
}

double DiscreteOperator::inner(const Vector& f, const Vector& g) const {
    return (weights.array() * f.array() * g.array()).sum();
}

double DiscreteOperator::norm(const Vector& f) const { return std::sqrt(inner(f, f)); }

namespace {

// Adds c (e_p - e_q)(e_p - e_q)^T to the energy matrix.
void add_edge(Triplets& t, int p, int q, double c) {
    t.emplace_back(p, p, c);
    t.emplace_back(q, q, c);
    t.emplace_back(p, q, -c);
    t.emplace_back(q, p, -c);
}

// sqrt(det g) e^{2h} g^{-1}: the divergence-form coefficient.
Mat2 flux_coefficient(const ManifoldModel& m, const expr::ScalarFieldExpr& h, const PointOnManifold& p) {
    const Mat2 g = m.metric(p);
    return std::sqrt(g.determinant()) * std::exp(2.0 * m.field(h, p)) * g.inverse();
}

void build_grid(const ManifoldModel& m, const expr::ScalarFieldExpr& h, int res, DiscreteOperator& op,
                Triplets& energy) {
    if (res < 16) throw ConfigError("grid resolution must be at least 16, got " + std::to_string(res));
    const int nu = res, nv = res;
    const double du = m.period_u() / nu, dv = m.period_v() / nv;
    op.meta.kind = OperatorMeta::Kind::periodic_grid;
    op.meta.nu = nu;
    op.meta.nv = nv;
    op.meta.du = du;
    op.meta.dv = dv;
    const int n = nu * nv;
    op.nodes.resize(n);
    op.ambient.resize(n);
    op.weights.resize(n);
    const auto idx = [nu, nv](int i, int j) { return ((i + nu) % nu) * nv + (j + nv) % nv; };
    const auto at = [&](double u, double v) { return PointOnManifold{0, Vec2(u, v)}; };

    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            const int p = idx(i, j);
            op.nodes[p] = at(i * du, j * dv);
            op.ambient[p] = Vec3(i * du, j * dv, 0.0);
            const Mat2 g = m.metric(op.nodes[p]);
            op.weights[p] = std::sqrt(g.determinant()) * std::exp(2.0 * m.field(h, op.nodes[p])) * du * dv;

            const Mat2 a_u = flux_coefficient(m, h, at((i + 0.5) * du, j * dv));
            add_edge(energy, p, idx(i + 1, j), a_u(0, 0) * dv / du);
            const Mat2 a_v = flux_coefficient(m, h, at(i * du, (j + 0.5) * dv));
            add_edge(energy, p, idx(i, j + 1), a_v(1, 1) * du / dv);

            // Cross term 2 a12 f_u f_v over the cell, with cell-averaged differences.
            const double a12 = flux_coefficient(m, h, at((i + 0.5) * du, (j + 0.5) * dv))(0, 1);
            if (a12 == 0.0) continue;
            const int c[4] = {p, idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1)};
            const double alpha[4] = {-0.5 / du, 0.5 / du, -0.5 / du, 0.5 / du};
            const double beta[4] = {-0.5 / dv, -0.5 / dv, 0.5 / dv, 0.5 / dv};
            const double s = a12 * du * dv;
            for (int r = 0; r < 4; ++r)
                for (int q = 0; q < 4; ++q)
                    energy.emplace_back(c[r], c[q], s * (alpha[r] * beta[q] + beta[r] * alpha[q]));
        }
    }
}

double cot(const Vec3& a, const Vec3& b) {
    return a.dot(b) / a.cross(b).norm();
}

void build_icosphere(const ManifoldModel& m, const expr::ScalarFieldExpr& h, int res, DiscreteOperator& op,
                     Triplets& energy) {
    const int level = mesh::sphere_level_for_resolution(res);
    const mesh::TriangleMesh mesh = mesh::icosphere(level, m.radius());
    op.meta.kind = OperatorMeta::Kind::icosphere;
    op.meta.level = level;
    const int n = static_cast<int>(mesh.vertices.size());
    op.nodes.resize(n);
    op.ambient = mesh.vertices;
    Vector area = Vector::Zero(n);

    for (const auto& tri : mesh.triangles) {
        const Vec3& a = mesh.vertices[tri[0]];
        const Vec3& b = mesh.vertices[tri[1]];
        const Vec3& c = mesh.vertices[tri[2]];
        const double third = (b - a).cross(c - a).norm() / 6.0;
        for (int k = 0; k < 3; ++k) area[tri[k]] += third;
        for (int k = 0; k < 3; ++k) {
            const int p = tri[(k + 1) % 3], q = tri[(k + 2) % 3];
            const Vec3& o = mesh.vertices[tri[k]];
            const double w = 0.5 * cot(mesh.vertices[p] - o, mesh.vertices[q] - o);
            if (w < 0.0) ++op.meta.negative_cotan_edges;
            // Each triangle contributes half of the edge's cotangent weight.
            const Vec3 mid = m.radius() * (mesh.vertices[p] + mesh.vertices[q]).normalized();
            add_edge(energy, p, q, w * std::exp(2.0 * m.field_at_ambient(h, mid)));
        }
    }
    op.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        op.nodes[i] = m.from_ambient(mesh.vertices[i]);
        op.weights[i] = std::exp(2.0 * m.field_at_ambient(h, mesh.vertices[i])) * area[i];
    }
}

Vector inv_sqrt(const Vector& w) { return w.cwiseSqrt().cwiseInverse(); }

// W^{-1/2} K W^{-1/2} / 2 - diag(potential) / 2
SparseMatrix symmetric_form(const SparseMatrix& k, const Vector& w, const Vector& potential) {
    const Vector s = inv_sqrt(w);
    SparseMatrix a = s.asDiagonal() * k * s.asDiagonal();
    a *= 0.5;
    SparseMatrix d(k.rows(), k.cols());
    d.setIdentity();
    d = (0.5 * potential).asDiagonal() * d;
    a -= d;
    a.makeCompressed();
    return a;
}

Matrix orthonormal_columns(const Matrix& y) {
    Eigen::HouseholderQR<Matrix> qr(y);
    return qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
}

Matrix seeded_block(Eigen::Index n, Eigen::Index p) {
    rng::Philox4x32 gen(0x5eed, 0);
    Matrix x(n, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < n; ++i) x(i, j) = gen.normal();
    return x;
}

Vector potential_of(const DiscreteOperator& op, Generator gen) {
    return gen == Generator::heat ? Vector::Zero(op.size()) : op.rho;
}

// exp(t A) y for symmetric A whose spectrum lies below `upper`.
class Propagator {
public:
    Propagator(const SparseMatrix& a, double upper) : a_(a), upper_(std::max(upper, 0.0)) {
        if (a.rows() <= kDenseLimit) {
            Eigen::SelfAdjointEigenSolver<Matrix> es{Matrix(a)};
            values_ = es.eigenvalues();
            vectors_ = es.eigenvectors();
            dense_ = true;
        }
    }

    Vector advance(const Vector& y, double t) {
        if (t <= 0.0) return y;
        if (dense_)
            return vectors_ * ((t * values_.array()).exp() * (vectors_.transpose() * y).array()).matrix();
        return advance_sparse(y, t, 0);
    }

private:
    static constexpr Eigen::Index kDenseLimit = 1024;
    static constexpr int kMaxKrylov = 120;
    static constexpr double kTolerance = 1e-13;

    // Shift-and-invert Lanczos on (I - gamma A)^{-1}: convergence does not
    // depend on the norm of A, only on t / gamma.
    Vector advance_sparse(const Vector& y, double t, int depth) {
        const double beta0 = y.norm();
        if (beta0 == 0.0) return y;
        double gamma = t / 10.0;
        if (upper_ > 0.0) gamma = std::min(gamma, 0.5 / upper_);
        SparseMatrix shifted(a_.rows(), a_.cols());
        shifted.setIdentity();
        shifted -= gamma * a_;
        Eigen::SimplicialLDLT<SparseMatrix> solver(shifted);
        if (solver.info() != Eigen::Success) throw NoConvergence("semigroup factorisation", 0.0);

        const Eigen::Index n = y.size();
        const int m_max = static_cast<int>(std::min<Eigen::Index>(kMaxKrylov, n));
        Matrix v(n, m_max + 1);
        std::vector<double> alpha, beta;
        v.col(0) = y / beta0;
        Vector previous;
        double change = std::numeric_limits<double>::infinity();
        for (int j = 0; j < m_max; ++j) {
            Vector w = solver.solve(v.col(j));
            alpha.push_back(v.col(j).dot(w));
            for (int pass = 0; pass < 2; ++pass) w -= v.leftCols(j + 1) * (v.leftCols(j + 1).transpose() * w);
            const double b = w.norm();
            const bool breakdown = b <= 1e-15 * std::fabs(alpha.back());
            const int m = j + 1;
            if (breakdown || m % 4 == 0 || m == m_max) {
                const Vector c = small_exponential(alpha, beta, t, gamma);
                if (previous.size() > 0) {
                    Vector padded = Vector::Zero(m);
                    padded.head(previous.size()) = previous;
                    change = (c - padded).norm();
                }
                previous = c;
                if (breakdown || change <= kTolerance) return beta0 * (v.leftCols(m) * c);
            }
            beta.push_back(b);
            v.col(j + 1) = w / b;
        }
        if (depth > 20) throw NoConvergence("semigroup Krylov iteration", change);
        return advance_sparse(advance_sparse(y, 0.5 * t, depth + 1), 0.5 * t, depth + 1);
    }

    // exp(t (I - T^{-1}) / gamma) e1 for the Lanczos tridiagonal T.
    static Vector small_exponential(const std::vector<double>& alpha, const std::vector<double>& beta, double t,
                                    double gamma) {
        const int m = static_cast<int>(alpha.size());
        Matrix tri = Matrix::Zero(m, m);
        for (int j = 0; j < m; ++j) {
            tri(j, j) = alpha[j];
            if (j + 1 < m) tri(j, j + 1) = tri(j + 1, j) = beta[j];
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(tri);
        const Vector lambda = (1.0 - es.eigenvalues().array().inverse()) / gamma;
        const Vector e1 = es.eigenvectors().row(0).transpose();
        return es.eigenvectors() * ((t * lambda.array()).exp() * e1.array()).matrix();
    }

    const SparseMatrix& a_;
    double upper_;
    bool dense_ = false;
    Vector values_;
    Matrix vectors_;
};

}  // namespace

DiscreteOperator build_operator(const ManifoldModel& m, const expr::ScalarFieldExpr& h, int resolution,
                                double rho_shift) {
    m.validate_field(h, "h");
    DiscreteOperator op;
    Triplets energy;
    if (m.is_periodic())
        build_grid(m, h, resolution, op, energy);
    else
        build_icosphere(m, h, resolution, op, energy);

    const int n = static_cast<int>(op.weights.size());
    SparseMatrix p(n, n);
    p.setFromTriplets(energy.begin(), energy.end());
    op.stiffness = -p;
    op.stiffness.makeCompressed();

    for (int i = 0; i < n; ++i) {
        if (!(op.weights[i] > 0.0))
            throw MeshTooCoarse("non-positive dual weight at node " + std::to_string(i));
    }
    for (int c = 0; c < op.stiffness.outerSize(); ++c) {
        bool any_positive = false;
        for (SparseMatrix::InnerIterator it(op.stiffness, c); it; ++it)
            if (it.row() != it.col() && it.value() > 0.0) any_positive = true;
        if (!any_positive) throw MeshTooCoarse("node " + std::to_string(c) + " has no positive coupling");
    }

    op.rho.resize(n);
    op.h_values.resize(n);
    for (int i = 0; i < n; ++i) {
        op.h_values[i] = m.field(h, op.nodes[i]);
        op.rho[i] = geometry::rho_h(m, h, op.nodes[i]) + rho_shift;
    }
    return op;
}

Spectrum top_eigenpairs(const SparseMatrix& stiffness, const Vector& weights, const Vector& potential, int k,
                        double tol, int max_iterations) {
    const Eigen::Index n = weights.size();
    if (k < 1 || k > n) throw ConfigError("requested " + std::to_string(k) + " eigenpairs of a size-" +
                                          std::to_string(n) + " operator");
    const SparseMatrix a = symmetric_form(stiffness, weights, potential);
    const double sigma = -0.5 * potential.minCoeff() + 1.0;

    SparseMatrix shifted(n, n);
    shifted.setIdentity();
    shifted = sigma * shifted - a;
    Eigen::SimplicialLDLT<SparseMatrix> solver(shifted);
    if (solver.info() != Eigen::Success) throw NoConvergence("shift-invert factorisation", 0.0);

    const Eigen::Index p = std::min<Eigen::Index>(n, 2 * k + 8);
    Matrix x = orthonormal_columns(seeded_block(n, p));
    Spectrum out;
    double worst = 0.0;
    for (int it = 1; it <= max_iterations; ++it) {
        const Matrix y = orthonormal_columns(solver.solve(x));
        const Matrix ay = a * y;
        Eigen::SelfAdjointEigenSolver<Matrix> es(y.transpose() * ay);
        x = y * es.eigenvectors().rowwise().reverse();
        const Vector theta = es.eigenvalues().reverse();
        const Matrix ax = ay * es.eigenvectors().rowwise().reverse();
        worst = 0.0;
        for (int i = 0; i < k; ++i) worst = std::max(worst, (ax.col(i) - theta[i] * x.col(i)).norm());
        if (worst <= tol) {
            out.iterations = it;
            const Vector s = inv_sqrt(weights);
            out.vectors = s.asDiagonal() * x.leftCols(k);
            for (int i = 0; i < k; ++i) {
                out.values.push_back(theta[i]);
                out.residuals.push_back((ax.col(i) - theta[i] * x.col(i)).norm());
            }
            return out;
        }
    }
    throw NoConvergence("top eigenpair iteration", worst);
}

Spectrum top_eigenpairs(const DiscreteOperator& op, Generator gen, int k, double tol, int max_iterations) {
    return top_eigenpairs(op.stiffness, op.weights, potential_of(op, gen), k, tol, max_iterations);
}

EigenResult top_eigen(const DiscreteOperator& op) {
    const Spectrum s = top_eigenpairs(op, Generator::schrodinger, 1);
    EigenResult r;
    r.mu_top = s.values[0];
    r.lambda0 = 2.0 * r.mu_top;
    r.eigvec = s.vectors.col(0);
    if (op.inner(r.eigvec, Vector::Ones(op.size())) < 0.0) r.eigvec = -r.eigvec;
    r.residual = s.residuals[0];
    return r;
}

std::vector<Vector> semigroup_apply_times(const DiscreteOperator& op, const Vector& f,
                                          const std::vector<double>& times, Generator gen) {
    if (f.size() != op.size()) throw ConfigError("node vector has the wrong length");
    const SparseMatrix a = symmetric_form(op.stiffness, op.weights, potential_of(op, gen));
    Propagator prop(a, -0.5 * potential_of(op, gen).minCoeff());
    const Vector root = op.weights.cwiseSqrt();
    Vector y = root.cwiseProduct(f);
    double now = 0.0;
    std::vector<Vector> out;
    out.reserve(times.size());
    for (double t : times) {
        if (!(t >= now)) throw ConfigError("semigroup times must be non-negative and increasing");
        y = prop.advance(y, t - now);
        now = t;
        out.push_back(t == 0.0 ? f : Vector(y.cwiseQuotient(root)));
    }
    return out;
}

Vector semigroup_apply(const DiscreteOperator& op, const Vector& f, double t, Generator gen) {
    return semigroup_apply_times(op, f, {t}, gen).front();
}

Vector potential_resolvent(const DiscreteOperator& op, const EigenResult& eig) {
    if (!(eig.lambda0 < -kCriterionThreshold))
        throw CriterionFails("lambda0 = " + std::to_string(eig.lambda0) +
                             " is not below -1e-6; the potential kernel U1 diverges");
    // W (diag rho - L) = diag(w rho) - K
    SparseMatrix lhs(op.size(), op.size());
    lhs.setIdentity();
    lhs = op.weights.cwiseProduct(op.rho).asDiagonal() * lhs;
    lhs -= op.stiffness;
    Eigen::SimplicialLDLT<SparseMatrix> solver(lhs);
    if (solver.info() != Eigen::Success) throw NoConvergence("resolvent factorisation", 0.0);
    Vector u = solver.solve(2.0 * op.weights);
    if (solver.info() != Eigen::Success) throw NoConvergence("resolvent solve", 0.0);
    return u;
}

Vector sample_nodes(const ManifoldModel& m, const DiscreteOperator& op, const expr::ScalarFieldExpr& f) {
    m.validate_field(f, "f");
    Vector out(op.size());
    for (Eigen::Index i = 0; i < op.size(); ++i) out[i] = m.field(f, op.nodes[i]);
    return out;
}

WittenReport witten_check(const ManifoldModel& m, const expr::ScalarFieldExpr& h, int resolution, int n_eigen) {
    const DiscreteOperator weighted = build_operator(m, h, resolution);
    const DiscreteOperator plain = build_operator(m, expr::ScalarFieldExpr{}, resolution);

    // |dh|^2 + Laplacian of h at the nodes.
    const Eigen::Index n = plain.size();
    Vector potential(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const geometry::CurvaturePack c = geometry::curvature(m, h, plain.nodes[i]);
        const Mat2 g_inv = m.metric(plain.nodes[i]).inverse();
        potential[i] = c.dh.dot(g_inv * c.dh) + (g_inv * c.hess_h).trace();
    }

    WittenReport rep;
    const Spectrum a = top_eigenpairs(weighted, Generator::heat, n_eigen);
    const Spectrum b = top_eigenpairs(plain.stiffness, plain.weights, potential, n_eigen);
    rep.weighted = a.values;
    rep.conjugated = b.values;
    for (int i = 0; i < n_eigen; ++i)
        rep.max_eigen_deviation =
            std::max(rep.max_eigen_deviation, std::fabs(a.values[i] - b.values[i]) / std::max(1.0, std::fabs(a.values[i])));

    // Smooth test function: a few seeded low modes.
    rng::Philox4x32 gen(0x3177e2, 0);
    double coef[6];
    for (double& c : coef) c = gen.uniform() - 0.5;
    Vector f(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec3& x = plain.ambient[i];
        if (m.is_periodic()) {
            const double u = 2.0 * M_PI * x[0] / m.period_u(), v = 2.0 * M_PI * x[1] / m.period_v();
            f[i] = coef[0] * std::cos(u) + coef[1] * std::sin(v) + coef[2] * std::cos(u + v) +
                   coef[3] * std::sin(2.0 * u - v) + coef[4] * std::cos(2.0 * v) + coef[5];
        } else {
            const Vec3 e = x / m.radius();
            f[i] = coef[0] * e[0] + coef[1] * e[1] + coef[2] * e[2] + coef[3] * e[0] * e[1] +
                   coef[4] * (e[2] * e[2] - e[0] * e[0]) + coef[5];
        }
    }
    const Vector lf = weighted.apply(f);
    const Vector eh = weighted.h_values.array().exp();
    const Vector bf = plain.apply(eh.cwiseProduct(f)) - potential.cwiseProduct(eh.cwiseProduct(f));
    const Vector diff = lf - bf.cwiseQuotient(eh);
    rep.conjugation_residual = weighted.norm(diff) / std::max(weighted.norm(lf), 1e-300);
    return rep;
}

NodeInterpolator::NodeInterpolator(const ManifoldModel& m, const DiscreteOperator& op, int neighbours)
    : m_(&m), op_(&op), neighbours_(std::min<int>(neighbours, static_cast<int>(op.size()))) {
    if (neighbours_ < 10) throw ConfigError("interpolation needs at least 10 nodes");
}

namespace {

Eigen::Matrix<double, 10, 1> monomials(const Vec2& d) {
    const double x = d[0], y = d[1];
    Eigen::Matrix<double, 10, 1> r;
    r << 1.0, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y;
    return r;
}

double wrap_offset(double d, double period) { return d - period * std::round(d / period); }

}  // namespace

double NodeInterpolator::LocalFit::operator()(const Vec2& coords) const {
    return coeffs.dot(monomials(coords - center.coords));
}

Vec2 NodeInterpolator::LocalFit::gradient(const Vec2& coords) const {
    const Vec2 d = coords - center.coords;
    const double x = d[0], y = d[1];
    const auto& c = coeffs;
    return Vec2(c[1] + 2 * c[3] * x + c[4] * y + 3 * c[6] * x * x + 2 * c[7] * x * y + c[8] * y * y,
                c[2] + c[4] * x + 2 * c[5] * y + c[7] * x * x + 2 * c[8] * x * y + 3 * c[9] * y * y);
}

NodeInterpolator::LocalFit NodeInterpolator::fit(const Vector& values, const PointOnManifold& at) const {
    const ManifoldModel& m = *m_;
    const DiscreteOperator& op = *op_;
    const PointOnManifold p = m.canonical(at);
    const Eigen::Index n = op.size();

    // Offsets of every node from p in p's chart (periodic) or ambient distance (sphere).
    std::vector<double> dist(n);
    const Vec3 pa = m.ambient(p);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (m.is_periodic()) {
            const double du = wrap_offset(op.nodes[i].coords[0] - p.coords[0], m.period_u());
            const double dv = wrap_offset(op.nodes[i].coords[1] - p.coords[1], m.period_v());
            dist[i] = du * du + dv * dv;
        } else {
            dist[i] = (op.ambient[i] - pa).squaredNorm();
        }
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + neighbours_, order.end(),
                      [&](int a, int b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });

    Matrix design(neighbours_, 10);
    Vector rhs(neighbours_);
    double scale = 0.0;
    std::vector<Vec2> offs(neighbours_);
    for (int r = 0; r < neighbours_; ++r) {
        const int i = order[r];
        Vec2 d;
        if (m.is_periodic()) {
            d = Vec2(wrap_offset(op.nodes[i].coords[0] - p.coords[0], m.period_u()),
                     wrap_offset(op.nodes[i].coords[1] - p.coords[1], m.period_v()));
        } else {
            d = m.to_chart(op.nodes[i], p.chart).coords - p.coords;
        }
        offs[r] = d;
        scale = std::max(scale, d.norm());
    }
    scale = std::max(scale, 1e-300);
    // Weights taper towards the outermost neighbour so the fit favours the closest nodes.
    for (int r = 0; r < neighbours_; ++r) {
        const double q = offs[r].norm() / (1.5 * scale);
        const double w = (1.0 - q * q) * (1.0 - q * q);
        design.row(r) = w * monomials(offs[r] / scale).transpose();
        rhs[r] = w * values[order[r]];
    }
    const Eigen::Matrix<double, 10, 1> c = design.colPivHouseholderQr().solve(rhs);
    LocalFit out;
    out.center = p;
    const double s1 = 1.0 / scale, s2 = s1 * s1, s3 = s2 * s1;
    out.coeffs << c[0], c[1] * s1, c[2] * s1, c[3] * s2, c[4] * s2, c[5] * s2, c[6] * s3, c[7] * s3,
        c[8] * s3, c[9] * s3;
    return out;
}

double NodeInterpolator::value(const Vector& values, const PointOnManifold& at) const {
    const LocalFit f = fit(values, at);
    return f(f.center.coords);
}

void write_matrix_market(std::ostream& os, const SparseMatrix& a) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
    char buf[64];
    for (int c = 0; c < a.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
            std::snprintf(buf, sizeof buf, "%.17g", it.value());
            os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << buf << '\n';
        }
    }
}

}  // namespace myers::spectral
