#pragma once

// Deterministic engine: a discretization of Delta^h that is exactly
// self-adjoint in the exp(2h)-weighted inner product, plus eigen, semigroup
// and resolvent solvers on it.

#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "myers/geometry.hpp"
#include "myers/mesh.hpp"

namespace myers::spectral {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using geometry::PointOnManifold;

// lambda0 below this is "Delta^h - rho^h < 0".
inline constexpr double kCriterionThreshold = 1e-6;

struct OperatorMeta {
    enum class Kind { periodic_grid, icosphere } kind = Kind::periodic_grid;
    int nu = 0, nv = 0;      // grid
    double du = 0, dv = 0;   // grid spacing
    int level = 0;           // icosphere subdivision
    int negative_cotan_edges = 0;
};

// L = W^{-1} K with K symmetric negative semidefinite and K 1 = 0, so L is
// self-adjoint in <f, g>_w = sum_i w_i f_i g_i.
struct DiscreteOperator {
    std::vector<PointOnManifold> nodes;
    std::vector<geometry::Vec3> ambient;  // sphere embedding, or (u, v, 0)
    Vector weights;                       // exp(2h) times local volume
    SparseMatrix stiffness;               // K
    Vector rho;                           // rho^h at the nodes (plus any configured shift)
    Vector h_values;
    OperatorMeta meta;

    Eigen::Index size() const { return weights.size(); }
    Vector apply(const Vector& f) const;  // L f
    double inner(const Vector& f, const Vector& g) const;
    double norm(const Vector& f) const;
};

DiscreteOperator build_operator(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
                                int resolution, double rho_shift = 0.0);

// Which self-adjoint operator a solver acts on: 1/2 L, or 1/2 (L - diag rho).
enum class Generator { heat, schrodinger };

struct EigenResult {
    double mu_top = 0.0;   // sup spec 1/2 (L - rho): FK decay rate
    double lambda0 = 0.0;  // 2 mu_top, top eigenvalue of Delta^h - rho^h
    Vector eigvec;         // w-normalised, non-negative mean
    double residual = 0.0;
    bool criterion_holds() const { return lambda0 < -kCriterionThreshold; }
};

struct Spectrum {
    std::vector<double> values;  // descending
    Matrix vectors;              // columns, w-orthonormal node vectors
    std::vector<double> residuals;
    int iterations = 0;
};

// Top k eigenpairs by shift-invert subspace iteration with Rayleigh-Ritz.
Spectrum top_eigenpairs(const DiscreteOperator& op, Generator gen, int k, double tol = 1e-8,
                        int max_iterations = 10000);
// Same for an arbitrary w-self-adjoint operator W^{-1} K - diag(potential), halved.
Spectrum top_eigenpairs(const SparseMatrix& stiffness, const Vector& weights, const Vector& potential, int k,
                        double tol = 1e-8, int max_iterations = 10000);

EigenResult top_eigen(const DiscreteOperator& op);

// exp(t G) f for G = 1/2 L or 1/2 (L - rho).
Vector semigroup_apply(const DiscreteOperator& op, const Vector& f, double t, Generator gen);
// Same at several increasing times, propagating from one to the next.
std::vector<Vector> semigroup_apply_times(const DiscreteOperator& op, const Vector& f,
                                          const std::vector<double>& times, Generator gen);

// U1 = 2 (rho - L)^{-1} 1; throws CriterionFails unless eig.lambda0 < -1e-6.
Vector potential_resolvent(const DiscreteOperator& op, const EigenResult& eig);

struct WittenReport {
    std::vector<double> weighted;    // top eigenvalues of 1/2 L
    std::vector<double> conjugated;  // top eigenvalues of 1/2 (L0 - |dh|^2 - Laplacian h)
    double max_eigen_deviation = 0.0;  // max_i |a_i - b_i| / max(1, |a_i|)
    double conjugation_residual = 0.0; // |L f - e^{-h} B(e^h f)|_w / |L f|_w for a smooth f
};

WittenReport witten_check(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h, int resolution,
                          int n_eigen = 10);

// Field sampled at the operator's nodes.
Vector sample_nodes(const geometry::ManifoldModel& m, const DiscreteOperator& op,
                    const expr::ScalarFieldExpr& f);

// Smooth local reconstruction of a node field: weighted least-squares cubic in
// the chart of the query point over its nearest nodes.
class NodeInterpolator {
public:
    NodeInterpolator(const geometry::ManifoldModel& m, const DiscreteOperator& op, int neighbours = 20);

    struct LocalFit {
        PointOnManifold center;
        Eigen::Matrix<double, 10, 1> coeffs;  // monomials in (dx, dy) up to degree 3
        double operator()(const geometry::Vec2& coords) const;
        geometry::Vec2 gradient(const geometry::Vec2& coords) const;
    };

    LocalFit fit(const Vector& values, const PointOnManifold& at) const;
    double value(const Vector& values, const PointOnManifold& at) const;

private:
    const geometry::ManifoldModel* m_;
    const DiscreteOperator* op_;
    int neighbours_;
};

void write_matrix_market(std::ostream& os, const SparseMatrix& a);

}  // namespace myers::spectral
