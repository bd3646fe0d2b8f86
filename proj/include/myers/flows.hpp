#pragma once

// Hessian flow along sampled paths and the Feynman-Kac functionals built on it.

#include <optional>
#include <vector>

#include "myers/sde.hpp"

namespace myers::flows {

using geometry::Mat2;
using geometry::Vec2;
using sde::Stat;

// exp of a symmetric 2x2 matrix.
Mat2 sym_expm(const Mat2& a);
// Largest singular value.
double operator_norm(const Mat2& w);

// Generator of the Hessian flow in the frame of s:
// frame^T (-1/2 Ric + Hess h) frame.
Mat2 flow_generator(const sde::PathState& s);

// W at the new state: exp(dt (A(old) + A(new)) / 2) W_old, dt = new.t - old.t. The frame
// transport performed by sde::step realizes the covariant derivative.
Mat2 hessian_flow_step(const sde::PathState& old_state, const sde::PathState& new_state);

double fk_weight(const sde::PathState& s);

struct FlowRecord {
    std::vector<double> times;
    std::vector<Stat> e_w_norm;
    std::vector<Stat> fk_mean;
    std::vector<Stat> w_minus_fk;
    int n_paths = 0;
    int n_excluded = 0;
};

FlowRecord flow_record(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
                       const geometry::PointOnManifold& x0, const sde::SamplerConfig& cfg);

// E df(W_t v0) at t = cfg.t_max.
Stat one_form_action(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
                     const geometry::PointOnManifold& x0, const Vec2& v0, const expr::ScalarFieldExpr& f,
                     const sde::SamplerConfig& cfg);

// df(v) at x, chart components.
double exact_one_form(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& f,
                      const geometry::PointOnManifold& x, const Vec2& v);

struct PotentialEstimate {
    std::optional<double> u1_mc;
    double u1_stderr = 0.0;
    double t_trunc = 0.0;
    double tail_bound = 0.0;
    bool diverged = false;
    double decay_rate_fit = 0.0;
};

// Least-squares slope of log(values) against times over [t_lo, t_hi].
// Throws InsufficientDecayWindow with fewer than 10 samples in the window.
double fit_log_slope(const std::vector<double>& times, const std::vector<double>& values, double t_lo,
                     double t_hi);

PotentialEstimate potential_from_record(const sde::EnsembleRecord& rec, double t_trunc,
                                        std::optional<double> rate_hint);

PotentialEstimate potential_kernel_mc(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
                                      const geometry::PointOnManifold& x0, const sde::SamplerConfig& cfg,
                                      double t_trunc, std::optional<double> rate_hint = std::nullopt);

}  // namespace myers::flows
