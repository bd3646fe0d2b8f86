#pragma once

// h-Brownian motion (generator 1/2 Delta^h) by Euler-Maruyama in chart
// coordinates, carrying a g-orthonormal frame by discrete parallel transport.

#include <cstdint>
#include <optional>
#include <vector>

#include "myers/geometry.hpp"
#include "myers/rng.hpp"

namespace myers::sde {

using geometry::Mat2;
using geometry::PointOnManifold;
using geometry::Vec2;

struct SamplerConfig {
    double dt = 1e-2;
    double t_max = 1.0;
    std::uint64_t seed = 1;
    int n_paths = 1000;
    // Distance kept between the sphere chart switch radius and the chart edge.
    double chart_switch_margin = 1.5;
    int record_stride = 1;
    int threads = 1;
    // Fraction of paths that may hit a DomainError before the run is refused.
    double max_excluded_fraction = 1e-3;

    void validate() const;
    int n_steps() const;
};

struct PathState {
    PointOnManifold x;
    double t = 0.0;
    Mat2 frame = Mat2::Identity();  // columns: g-orthonormal tangent vectors
    double fk_integral = 0.0;       // trapezoidal integral of rho^h along the path
    Mat2 w_matrix = Mat2::Identity();  // Hessian flow in frame components
    geometry::MetricJet jet;           // at x
    geometry::CurvaturePack curv;      // at x
};

// Gram-Schmidt in the g inner product; keeps the direction of the first column.
Mat2 orthonormalize(const Mat2& frame, const Mat2& g);

Vec2 drift(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h, const PointOnManifold& x);
Vec2 drift(const geometry::MetricJet& jet, const geometry::CurvaturePack& curv);

PathState initial_state(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
                        const PointOnManifold& x0);

// One Euler-Maruyama step with frame transport, chart switching and the
// Feynman-Kac accumulator. w_matrix is copied unchanged; the Hessian flow is
// advanced separately by flows::hessian_flow_step.
PathState step(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h, const PathState& s,
               double dt, double switch_radius, rng::Philox4x32& rng);

// Same step driven by a supplied standard normal pair.
PathState step_with_noise(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
                          const PathState& s, double dt, double switch_radius, const Vec2& xi);

struct Stat {
    double mean = 0.0;
    double std_error = 0.0;
};

struct OneFormProbe {
    expr::ScalarFieldExpr f;  // phi = df
    Vec2 v0;                  // tangent vector at x0, coordinate components
};

struct Observables {
    std::optional<expr::ScalarFieldExpr> f;
    std::optional<OneFormProbe> one_form;
};

// Per recorded time: Monte Carlo mean and standard error of each channel.
struct EnsembleRecord {
    std::vector<double> times;
    std::vector<Stat> f;              // f(x_t)
    std::vector<Stat> fk_weight;      // exp(-1/2 int rho^h)
    std::vector<Stat> fk_f;           // f(x_t) exp(-1/2 int rho^h)
    std::vector<Stat> w_norm;         // |W_t|
    std::vector<Stat> w_minus_fk;     // |W_t| - exp(-1/2 int rho^h), paired per path
    std::vector<Stat> one_form;       // df(W_t v0)
    std::vector<Stat> fk_time_integral;  // int_0^t exp(-1/2 int_0^s rho^h) ds, trapezoid on record times
    int n_paths = 0;
    int n_excluded = 0;
};

EnsembleRecord sample_ensemble(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
                               const PointOnManifold& x0, const Observables& obs,
                               const SamplerConfig& cfg);

// sample_ensemble with a single scalar observable.
EnsembleRecord sample_functionals(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
                                  const PointOnManifold& x0, const std::optional<expr::ScalarFieldExpr>& f,
                                  const SamplerConfig& cfg);

struct TraceRow {
    double t;
    int chart_id;
    double u, v;
    double rho_h;
    double fk_weight;
    double w_norm;
};

// Recorded states of path `path_index` (same substream as in sample_ensemble).
std::vector<TraceRow> trace_path(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
                                 const PointOnManifold& x0, const SamplerConfig& cfg,
                                 std::uint64_t path_index);

}  // namespace myers::sde
