#include "myers/flows.hpp"

#include <cmath>

#include "myers/errors.hpp"

namespace myers::flows {

Mat2 sym_expm(const Mat2& a) {
    // (A - mI)^2 = d^2 I for symmetric 2x2 A, so exp(A) = e^m (cosh d I + sinh d / d (A - mI)).
    const double m = 0.5 * (a(0, 0) + a(1, 1));
    const double off = 0.5 * (a(0, 1) + a(1, 0));
    const double d = std::hypot(0.5 * (a(0, 0) - a(1, 1)), off);
    const double shc = d < 1e-8 ? 1.0 + d * d / 6.0 : std::sinh(d) / d;
    Mat2 centered = a;
    centered(0, 1) = centered(1, 0) = off;
    centered.diagonal().array() -= m;
    return std::exp(m) * (std::cosh(d) * Mat2::Identity() + shc * centered);
}

double operator_norm(const Mat2& w) {
    const double a = w(0, 0), b = w(0, 1), c = w(1, 0), d = w(1, 1);
    return 0.5 * (std::hypot(a + d, c - b) + std::hypot(a - d, b + c));
}

Mat2 flow_generator(const sde::PathState& s) {
    const Mat2 bilinear = -0.5 * s.curv.ric + s.curv.hess_h;
    return s.frame.transpose() * bilinear * s.frame;
}

Mat2 hessian_flow_step(const sde::PathState& old_state, const sde::PathState& new_state) {
    const double dt = new_state.t - old_state.t;
    const Mat2 a = 0.5 * (flow_generator(old_state) + flow_generator(new_state));
    return sym_expm(dt * a) * old_state.w_matrix;
}

double fk_weight(const sde::PathState& s) { return std::exp(-0.5 * s.fk_integral); }

FlowRecord flow_record(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
                       const geometry::PointOnManifold& x0, const sde::SamplerConfig& cfg) {
    const sde::EnsembleRecord rec = sde::sample_ensemble(m, h, x0, {}, cfg);
    FlowRecord out;
    out.times = rec.times;
    out.e_w_norm = rec.w_norm;
    out.fk_mean = rec.fk_weight;
    out.w_minus_fk = rec.w_minus_fk;
    out.n_paths = rec.n_paths;
    out.n_excluded = rec.n_excluded;
    return out;
}

double exact_one_form(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& f,
                      const geometry::PointOnManifold& x, const Vec2& v) {
    const int chart = x.chart;
    const geometry::ScalarFn fn = [&](const Vec2& w) {
        return m.field(f, geometry::PointOnManifold{chart, w});
    };
    return geometry::fd_gradient(fn, x.coords, m.fd().first).dot(v);
}

Stat one_form_action(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
                     const geometry::PointOnManifold& x0, const Vec2& v0, const expr::ScalarFieldExpr& f,
                     const sde::SamplerConfig& cfg) {
    sde::Observables obs;
    obs.one_form = sde::OneFormProbe{f, v0};
    return sde::sample_ensemble(m, h, x0, obs, cfg).one_form.back();
}

double fit_log_slope(const std::vector<double>& times, const std::vector<double>& values, double t_lo,
                     double t_hi) {
    const double eps = 1e-9 * std::max(1.0, std::fabs(t_hi));
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_lo - eps || times[i] > t_hi + eps) continue;
        if (!(values[i] > 0.0))
            throw InsufficientDecayWindow("non-positive value at t = " + std::to_string(times[i]));
        const double y = std::log(values[i]);
        st += times[i];
        sy += y;
        stt += times[i] * times[i];
        sty += times[i] * y;
        ++n;
    }
    if (n < 10)
        throw InsufficientDecayWindow("only " + std::to_string(n) + " samples in decay window [" +
                                      std::to_string(t_lo) + ", " + std::to_string(t_hi) + "]");
    const double denom = n * stt - st * st;
    return (n * sty - st * sy) / denom;
}

PotentialEstimate potential_from_record(const sde::EnsembleRecord& rec, double t_trunc,
                                        std::optional<double> rate_hint) {
    PotentialEstimate est;
    est.t_trunc = t_trunc;
    std::vector<double> fk(rec.fk_weight.size());
    for (std::size_t i = 0; i < fk.size(); ++i) fk[i] = rec.fk_weight[i].mean;
    est.decay_rate_fit = fit_log_slope(rec.times, fk, t_trunc * 2.0 / 3.0, t_trunc);
    if (est.decay_rate_fit >= -1e-3) {
        est.diverged = true;
        return est;
    }
    const double rate = rate_hint && *rate_hint < 0.0 ? *rate_hint : est.decay_rate_fit;
    const Stat& partial = rec.fk_time_integral.back();
    const Stat& last = rec.fk_weight.back();
    est.tail_bound = last.mean / -rate;
    est.u1_mc = partial.mean + est.tail_bound;
    est.u1_stderr = std::hypot(partial.std_error, last.std_error / -rate);
    return est;
}

PotentialEstimate potential_kernel_mc(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
                                      const geometry::PointOnManifold& x0, const sde::SamplerConfig& cfg,
                                      double t_trunc, std::optional<double> rate_hint) {
    if (!(t_trunc >= 1.0)) throw ConfigError("t_trunc must be at least 1");
    sde::SamplerConfig c = cfg;
    c.t_max = t_trunc;
    return potential_from_record(sde::sample_ensemble(m, h, x0, {}, c), t_trunc, rate_hint);
}

}  // namespace myers::flows
