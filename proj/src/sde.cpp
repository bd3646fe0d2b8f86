#include "myers/sde.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "myers/errors.hpp"
#include "myers/flows.hpp"

namespace myers::sde {

namespace {

constexpr int kPathsPerBlock = 128;

enum Channel : int { kF, kFk, kFkF, kWNorm, kWMinusFk, kOneForm, kFkInt, kChannels };

double switch_radius_for(const geometry::ManifoldModel& m, const SamplerConfig& cfg) {
    if (m.is_periodic()) return 0.0;
    return m.charts().front().extent_u - cfg.chart_switch_margin;
}

std::vector<int> record_steps(const SamplerConfig& cfg) {
    const int n = cfg.n_steps();
    std::vector<int> out;
    for (int k = 0; k <= n; k += cfg.record_stride) out.push_back(k);
    if (out.back() != n) out.push_back(n);
    return out;
}

// Runs one path and calls visit(record_index, state) at every recorded step.
template <class Visit>
void run_path(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
              const PointOnManifold& x0, const SamplerConfig& cfg, const std::vector<int>& records,
              std::uint64_t path_index, Visit&& visit) {
    rng::Philox4x32 gen(cfg.seed, path_index);
    const double sr = switch_radius_for(m, cfg);
    PathState s = initial_state(m, h, x0);
    std::size_t next = 0;
    if (records[next] == 0) visit(next++, s);
    for (int k = 1; next < records.size(); ++k) {
        PathState n = step(m, h, s, cfg.dt, sr, gen);
        n.w_matrix = flows::hessian_flow_step(s, n);
        s = std::move(n);
        if (records[next] == k) visit(next++, s);
    }
}

// Running mean and sum of squared deviations (Welford), per channel.
struct BlockSums {
    std::vector<double> mean, m2;
    int used = 0;
    int excluded = 0;

    void add(const std::vector<double>& x) {
        ++used;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - mean[i];
            mean[i] += d / used;
            m2[i] += d * (x[i] - mean[i]);
        }
    }

    void merge(const BlockSums& o) {
        if (o.used == 0) return;
        const double na = used, nb = o.used, n = na + nb;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            const double d = o.mean[i] - mean[i];
            mean[i] += d * nb / n;
            m2[i] += o.m2[i] + d * d * na * nb / n;
        }
        used += o.used;
    }
};

}  // namespace

void SamplerConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("sde.dt must be positive");
    if (!(t_max >= dt)) throw ConfigError("sde.t_max must be at least dt");
    if (n_paths < 1) throw ConfigError("sde.n_paths must be at least 1");
    if (record_stride < 1) throw ConfigError("sde.record_stride must be at least 1");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    if (!(chart_switch_margin > 0.0)) throw ConfigError("sde.chart_switch_margin must be positive");
}

int SamplerConfig::n_steps() const { return static_cast<int>(std::llround(t_max / dt)); }

Mat2 orthonormalize(const Mat2& frame, const Mat2& g) {
    Vec2 e1 = frame.col(0);
    e1 /= std::sqrt(e1.dot(g * e1));
    Vec2 e2 = frame.col(1);
    e2 -= e2.dot(g * e1) * e1;
    e2 /= std::sqrt(e2.dot(g * e2));
    Mat2 out;
    out.col(0) = e1;
    out.col(1) = e2;
    return out;
}

Vec2 drift(const geometry::MetricJet& jet, const geometry::CurvaturePack& curv) {
    Vec2 b = curv.grad_h;
    for (int i = 0; i < 2; ++i) b[i] -= 0.5 * (jet.g_inv.cwiseProduct(jet.christoffel[i])).sum();
    return b;
}

Vec2 drift(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h, const PointOnManifold& x) {
    const geometry::MetricJet jet = geometry::metric_jet(m, x);
    return drift(jet, geometry::curvature(m, h, x, jet));
}

PathState initial_state(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
                        const PointOnManifold& x0) {
    PathState s;
    s.x = m.canonical(x0);
    s.jet = geometry::metric_jet(m, s.x);
    s.curv = geometry::curvature(m, h, s.x, s.jet);
    s.frame = orthonormalize(Mat2::Identity(), s.jet.g);
    return s;
}

PathState step_with_noise(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
                          const PathState& s, double dt, double switch_radius, const Vec2& xi) {
    const Vec2 dx = drift(s.jet, s.curv) * dt + s.frame * xi * std::sqrt(dt);
    PointOnManifold p{s.x.chart, s.x.coords + dx};
    if (!p.coords.allFinite()) throw StepOutOfAtlas("non-finite step");
    if (!m.is_periodic() && p.coords.norm() >= m.charts()[p.chart].extent_u)
        throw StepOutOfAtlas("step left chart " + std::to_string(p.chart));

    PathState n;
    n.t = s.t + dt;
    n.w_matrix = s.w_matrix;
    geometry::MetricJet jet;
    if (m.is_periodic()) {
        p = m.canonical(p);
        jet = m.jet(p);
    } else {
        jet = m.jet(p);
    }

    // Parallel transport with Christoffel symbols averaged over the step ends.
    Mat2 frame = s.frame;
    for (int k = 0; k < 2; ++k) {
        const Mat2 gamma = 0.5 * (s.jet.christoffel[k] + jet.christoffel[k]);
        const Vec2 row = gamma.transpose() * dx;  // row_j = sum_i Gamma^k_ij dx^i
        for (int c = 0; c < 2; ++c) frame(k, c) -= row.dot(s.frame.col(c));
    }

    if (!m.is_periodic()) {
        const PointOnManifold q = m.canonical(p, switch_radius);
        if (q.chart != p.chart) {
            frame = m.transition_jacobian(p, q.chart) * frame;
            jet = m.jet(q);
        }
        p = q;
    }
    n.x = p;
    n.jet = jet;
    n.frame = orthonormalize(frame, jet.g);
    n.curv = geometry::curvature(m, h, p, jet);
    n.fk_integral = s.fk_integral + 0.5 * (s.curv.rho_h + n.curv.rho_h) * dt;
    return n;
}

PathState step(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h, const PathState& s,
               double dt, double switch_radius, rng::Philox4x32& rng) {
    const double a = rng.normal();
    const double b = rng.normal();
    return step_with_noise(m, h, s, dt, switch_radius, Vec2(a, b));
}

EnsembleRecord sample_ensemble(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
                               const PointOnManifold& x0, const Observables& obs,
                               const SamplerConfig& cfg) {
    cfg.validate();
    m.validate_field(h, "h");
    if (obs.f) m.validate_field(*obs.f, "observable");
    if (obs.one_form) m.validate_field(obs.one_form->f, "one-form potential");

    const std::vector<int> records = record_steps(cfg);
    const std::size_t n_rec = records.size();
    const std::size_t width = n_rec * kChannels;
    const int n_blocks = (cfg.n_paths + kPathsPerBlock - 1) / kPathsPerBlock;
    std::vector<BlockSums> blocks(static_cast<std::size_t>(n_blocks));

    // Frame components of v0 at the start point (identical for every path).
    Vec2 v_frame = Vec2::Zero();
    if (obs.one_form) {
        const PathState s0 = initial_state(m, h, x0);
        v_frame = s0.frame.transpose() * s0.jet.g * obs.one_form->v0;
    }

    auto run_block = [&](int b) {
        BlockSums& out = blocks[static_cast<std::size_t>(b)];
        out.mean.assign(width, 0.0);
        out.m2.assign(width, 0.0);
        std::vector<double> vals(width, 0.0);
        const int first = b * kPathsPerBlock;
        const int last = std::min(cfg.n_paths, first + kPathsPerBlock);
        for (int p = first; p < last; ++p) {
            double prev_t = 0.0, prev_fk = 1.0, fk_int = 0.0;
            try {
                run_path(m, h, x0, cfg, records, static_cast<std::uint64_t>(p),
                         [&](std::size_t r, const PathState& s) {
                             double* row = vals.data() + r * kChannels;
                             const double fk = flows::fk_weight(s);
                             const double fv = obs.f ? m.field(*obs.f, s.x) : 1.0;
                             const double wn = flows::operator_norm(s.w_matrix);
                             if (r > 0) fk_int += 0.5 * (prev_fk + fk) * (s.t - prev_t);
                             prev_t = s.t;
                             prev_fk = fk;
                             row[kF] = fv;
                             row[kFk] = fk;
                             row[kFkF] = fv * fk;
                             row[kWNorm] = wn;
                             row[kWMinusFk] = wn - fk;
                             row[kFkInt] = fk_int;
                             row[kOneForm] = 0.0;
                             if (obs.one_form) {
                                 const Vec2 xv = s.frame * (s.w_matrix * v_frame);
                                 row[kOneForm] = flows::exact_one_form(m, obs.one_form->f, s.x, xv);
                             }
                         });
            } catch (const DomainError&) {
                ++out.excluded;
                continue;
            }
            out.add(vals);
        }
    };

    const int n_threads = std::min(cfg.threads, n_blocks);
    if (n_threads <= 1) {
        for (int b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> workers;
        for (int t = 0; t < n_threads; ++t)
            workers.emplace_back([&] {
                for (int b = next++; b < n_blocks; b = next++) {
                    try {
                        run_block(b);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        for (auto& w : workers) w.join();
        if (failure) std::rethrow_exception(failure);
    }

    BlockSums total;
    total.mean.assign(width, 0.0);
    total.m2.assign(width, 0.0);
    EnsembleRecord rec;
    for (const BlockSums& b : blocks) {
        total.merge(b);
        rec.n_excluded += b.excluded;
    }
    rec.n_paths = total.used;
    if (rec.n_excluded > cfg.max_excluded_fraction * cfg.n_paths)
        throw ExcessiveExclusions(std::to_string(rec.n_excluded) + " of " + std::to_string(cfg.n_paths) +
                                  " paths hit a domain error");
    if (rec.n_paths == 0) throw ExcessiveExclusions("every path hit a domain error");

    const double n = rec.n_paths;
    auto stat = [&](std::size_t r, int ch) {
        const std::size_t i = r * kChannels + static_cast<std::size_t>(ch);
        const double var = n > 1 ? total.m2[i] / (n - 1.0) : 0.0;
        return Stat{total.mean[i], std::sqrt(var / n)};
    };
    for (std::size_t r = 0; r < n_rec; ++r) {
        rec.times.push_back(records[r] * cfg.dt);
        rec.f.push_back(stat(r, kF));
        rec.fk_weight.push_back(stat(r, kFk));
        rec.fk_f.push_back(stat(r, kFkF));
        rec.w_norm.push_back(stat(r, kWNorm));
        rec.w_minus_fk.push_back(stat(r, kWMinusFk));
        rec.one_form.push_back(stat(r, kOneForm));
        rec.fk_time_integral.push_back(stat(r, kFkInt));
    }
    return rec;
}

EnsembleRecord sample_functionals(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
                                  const PointOnManifold& x0, const std::optional<expr::ScalarFieldExpr>& f,
                                  const SamplerConfig& cfg) {
    Observables obs;
    obs.f = f;
    return sample_ensemble(m, h, x0, obs, cfg);
}

std::vector<TraceRow> trace_path(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h,
                                 const PointOnManifold& x0, const SamplerConfig& cfg,
                                 std::uint64_t path_index) {
    cfg.validate();
    m.validate_field(h, "h");
    std::vector<TraceRow> rows;
    run_path(m, h, x0, cfg, record_steps(cfg), path_index, [&](std::size_t, const PathState& s) {
        rows.push_back({s.t, s.x.chart, s.x.coords[0], s.x.coords[1], s.curv.rho_h, flows::fk_weight(s),
                        flows::operator_norm(s.w_matrix)});
    });
    return rows;
}

}  // namespace myers::sde
