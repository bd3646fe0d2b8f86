#include "myers/criterion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <numbers>

#include <Eigen/LU>

#include "myers/errors.hpp"

namespace myers::criterion {

using geometry::Mat2;
using geometry::ManifoldModel;
using geometry::Vec2;
using sde::Stat;
using spectral::Vector;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Seeds for probe placement and test fields, kept apart from path streams.
constexpr std::uint64_t kProbeSalt = 0x70726f6265ULL;
constexpr std::uint64_t kFieldSalt = 0x6669656c64ULL;

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string category_name(Error::Category c) {
    switch (c) {
        case Error::Category::config: return "config";
        case Error::Category::numerical: return "numerical";
        case Error::Category::validation: return "validation";
    }
    return "numerical";
}

template <class F>
void guarded(MyersReport& r, const std::string& section, F&& body) {
    try {
        body();
    } catch (const Error& e) {
        r.errors.push_back({section, category_name(e.category()), e.what()});
    } catch (const std::exception& e) {
        r.errors.push_back({section, "numerical", e.what()});
    }
}

IdentityCheck pending_check(const std::string& name, double tolerance) {
    IdentityCheck c;
    c.name = name;
    c.residual = kNaN;
    c.tolerance = tolerance;
    c.detail = "evaluation failed; see errors";
    return c;
}

IdentityCheck failed_check(const std::string& name, const std::string& why) {
    IdentityCheck c;
    c.name = name;
    c.residual = kNaN;
    c.detail = why;
    return c;
}

IdentityCheck skipped_check(const std::string& name, const std::string& why) {
    IdentityCheck c;
    c.name = name;
    c.residual = kNaN;
    c.skipped = true;
    c.passed = true;
    c.detail = why;
    return c;
}

// Record index whose time is t (within rounding), or -1.
int record_index(const std::vector<double>& times, double t) {
    for (std::size_t i = 0; i < times.size(); ++i)
        if (std::fabs(times[i] - t) <= 1e-9 * std::max(1.0, t)) return static_cast<int>(i);
    return -1;
}

Vec2 node_gradient(const ManifoldModel& m, const expr::ScalarFieldExpr& f, const PointOnManifold& p) {
    const geometry::ScalarFn fn = [&](const Vec2& c) { return m.field(f, {p.chart, c}); };
    return geometry::fd_gradient(fn, p.coords, m.fd().first);
}

double gradient_norm(const ManifoldModel& m, const Vec2& df, const PointOnManifold& p) {
    return std::sqrt(std::max(0.0, df.dot(m.metric(p).inverse() * df)));
}

struct SpectralPart {
    std::optional<spectral::DiscreteOperator> op;
    std::optional<spectral::EigenResult> eig;
    std::optional<Vector> u1;
    std::vector<SectionError> errors;
};

struct ProbeRun {
    std::optional<sde::EnsembleRecord> rec;
    std::optional<SectionError> error;
};

SpectralPart run_spectral(const ManifoldModel& m, const expr::ScalarFieldExpr& h, const NumericsConfig& cfg) {
    SpectralPart s;
    MyersReport scratch;
    guarded(scratch, "spectral", [&] {
        s.op = spectral::build_operator(m, h, cfg.resolution, cfg.rho_shift);
        s.eig = spectral::top_eigen(*s.op);
    });
    if (s.eig && s.eig->criterion_holds())
        guarded(scratch, "resolvent", [&] { s.u1 = spectral::potential_resolvent(*s.op, *s.eig); });
    s.errors = std::move(scratch.errors);
    return s;
}

}  // namespace

void NumericsConfig::validate() const {
    sampler.validate();
    if (resolution < 16) throw ConfigError("spectral.resolution must be at least 16");
    if (!std::isfinite(rho_shift)) throw ConfigError("rho_shift must be finite");
    if (n_random_probes < 1) throw ConfigError("n_random_probes must be positive");
    if (!(identity_time > 0.0)) throw ConfigError("identity_time must be positive");
    if (!(bakry_time > 0.0)) throw ConfigError("bakry_time must be positive");
    if (bakry_pairs < 0) throw ConfigError("bakry_pairs must be non-negative");
    for (double t : fk_times)
        if (!(t > 0.0)) throw ConfigError("fk_times must be positive");
}

const IdentityCheck* MyersReport::find(const std::string& name) const {
    for (const auto& c : identity_residuals)
        if (c.name == name) return &c;
    return nullptr;
}

bool MyersReport::all_checks_passed() const {
    return std::all_of(identity_residuals.begin(), identity_residuals.end(),
                       [](const IdentityCheck& c) { return c.passed; });
}

std::vector<PointOnManifold> probe_points(const ManifoldModel& m, std::uint64_t seed, int n_random) {
    switch (m.kind()) {
        case geometry::ManifoldKind::sphere:
            return {{0, Vec2::Zero()}, {1, Vec2::Zero()}, {0, Vec2(1.0, 0.0)}};
        case geometry::ManifoldKind::flat_torus:
            return {{0, Vec2::Zero()}, {0, Vec2(0.5 * m.period_u(), 0.5 * m.period_v())}};
        case geometry::ManifoldKind::expression_metric: break;
    }
    rng::Philox4x32 gen(seed ^ kProbeSalt, 0);
    std::vector<PointOnManifold> out;
    for (int i = 0; i < n_random; ++i) {
        const double u = gen.uniform() * m.period_u();
        out.push_back({0, Vec2(u, gen.uniform() * m.period_v())});
    }
    return out;
}

Vec2 probe_direction(const ManifoldModel& m, const PointOnManifold& p) {
    return sde::orthonormalize(Mat2::Identity(), m.metric(p)).col(0);
}

expr::ScalarFieldExpr default_test_field(const ManifoldModel& m) {
    if (m.kind() == geometry::ManifoldKind::sphere) return expr::parse("z + 0.5*x");
    const double a = 2.0 * std::numbers::pi / m.period_u();
    const double b = 2.0 * std::numbers::pi / m.period_v();
    return expr::parse("sin(" + fmt(a) + "*u) + 0.5*cos(" + fmt(b) + "*v)");
}

std::pair<expr::ScalarFieldExpr, expr::ScalarFieldExpr> random_test_pair(const ManifoldModel& m,
                                                                         std::uint64_t seed, int index) {
    std::vector<std::string> basis;
    if (m.kind() == geometry::ManifoldKind::sphere) {
        basis = {"x", "y", "z", "x*y", "y*z", "x*z", "z^2"};
    } else {
        const std::string a = fmt(2.0 * std::numbers::pi / m.period_u());
        const std::string b = fmt(2.0 * std::numbers::pi / m.period_v());
        basis = {"sin(" + a + "*u)", "cos(" + a + "*u)", "sin(" + b + "*v)", "cos(" + b + "*v)",
                 "sin(" + a + "*u + " + b + "*v)", "cos(" + a + "*u - " + b + "*v)"};
    }
    rng::Philox4x32 gen(seed ^ kFieldSalt, static_cast<std::uint64_t>(index));
    auto draw = [&] {
        std::string s;
        for (const auto& term : basis) {
            if (!s.empty()) s += " + ";
            s += "(" + fmt(gen.normal()) + ")*" + term;
        }
        return expr::parse(s);
    };
    auto f = draw();
    return {f, draw()};
}

double spectral_directional_derivative(const ManifoldModel& m, const spectral::DiscreteOperator& op,
                                       const Vector& pt_f, const PointOnManifold& x0, const Vec2& v0,
                                       double eps) {
    const spectral::NodeInterpolator interp(m, op);
    const auto fit = interp.fit(pt_f, x0);
    const Vec2 plus = geometry::exp_map_approx(m, x0, v0, eps);
    const Vec2 minus = geometry::exp_map_approx(m, x0, v0, -eps);
    return (fit(plus) - fit(minus)) / (2.0 * eps);
}

double decay_rate_fit(const std::vector<double>& times, const std::vector<std::vector<Stat>>& curves,
                      double t_lo, double t_hi) {
    if (curves.empty()) throw InsufficientDecayWindow("no Feynman-Kac curves to fit");
    std::vector<double> sup(times.size(), 0.0);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const Stat* best = nullptr;
        for (const auto& c : curves)
            if (!best || c[i].mean > best->mean) best = &c[i];
        sup[i] = best->mean;
        const bool in_window = times[i] >= t_lo - 1e-12 && times[i] <= t_hi + 1e-12;
        if (in_window && !(best->mean > 10.0 * best->std_error))
            throw InsufficientDecayWindow("Feynman-Kac mean within 10 standard errors of zero at t = " +
                                          fmt(times[i]));
    }
    return flows::fit_log_slope(times, sup, t_lo, t_hi);
}

BakryResult bakry_inequality_check(const ManifoldModel& m, const spectral::DiscreteOperator& op, double u1_sup,
                                   const expr::ScalarFieldExpr& f, const expr::ScalarFieldExpr& g, double t) {
    const Vector fv = spectral::sample_nodes(m, op, f);
    const Vector gv = spectral::sample_nodes(m, op, g);
    const Vector pf = spectral::semigroup_apply(op, fv, t, spectral::Generator::heat);
    BakryResult r;
    r.lhs = op.inner(pf - fv, gv);
    double max_df = 0.0, l1_dg = 0.0;
    for (Eigen::Index i = 0; i < op.size(); ++i) {
        const PointOnManifold& p = op.nodes[i];
        max_df = std::max(max_df, gradient_norm(m, node_gradient(m, f, p), p));
        l1_dg += op.weights[i] * gradient_norm(m, node_gradient(m, g, p), p);
    }
    r.rhs = u1_sup * max_df * l1_dg;
    r.slack = r.rhs - std::fabs(r.lhs);
    r.holds = std::fabs(r.lhs) <= r.rhs + 1e-8;
    return r;
}

MyersReport check(const ManifoldModel& m, const expr::ScalarFieldExpr& h, const NumericsConfig& cfg) {
    cfg.validate();
    m.validate_field(h, "h");

    MyersReport r;
    r.manifold = m.name();
    r.manifold_parameters = m.describe();
    r.h = expr::print(h);
    r.resolution = cfg.resolution;
    r.sampler = cfg.sampler;
    r.known_pi1_finite = m.known_pi1_finite();
    r.lambda0 = r.mu_top = r.eigen_residual = kNaN;

    const std::vector<PointOnManifold> probes =
        cfg.probes.empty() ? probe_points(m, cfg.sampler.seed, cfg.n_random_probes) : cfg.probes;
    const expr::ScalarFieldExpr test_f = default_test_field(m);

    // The spectral build runs beside the Monte Carlo suite; both are deterministic.
    auto spectral_future = std::async(std::launch::async, [&] { return run_spectral(m, h, cfg); });

    std::vector<ProbeRun> runs(probes.size());
    std::vector<Vec2> directions(probes.size());
    for (std::size_t k = 0; k < probes.size(); ++k) {
        try {
            directions[k] = probe_direction(m, probes[k]);
            sde::Observables obs;
            obs.one_form = sde::OneFormProbe{test_f, directions[k]};
            runs[k].rec = sde::sample_ensemble(m, h, probes[k], obs, cfg.sampler);
        } catch (const Error& e) {
            runs[k].error = SectionError{"monte_carlo", category_name(e.category()), e.what()};
        }
    }
    SpectralPart sp = spectral_future.get();

    for (auto& e : sp.errors) r.errors.push_back(std::move(e));
    for (const auto& run : runs)
        if (run.error) r.errors.push_back(*run.error);
    const bool mc_ok = std::all_of(runs.begin(), runs.end(), [](const ProbeRun& p) { return p.rec.has_value(); });

    guarded(r, "geometry", [&] {
        r.h_volume = geometry::h_volume(m, h, cfg.resolution);
        r.negative_rho_fraction = geometry::negative_rho_fraction(m, h, cfg.resolution);
    });

    if (sp.eig) {
        r.mu_top = sp.eig->mu_top;
        r.lambda0 = sp.eig->lambda0;
        r.eigen_residual = sp.eig->residual;
        r.criterion_holds = sp.eig->criterion_holds();
    }
    if (sp.u1) {
        const Vector& u = *sp.u1;
        r.u1_spectral = U1Summary{u.maxCoeff(), u.minCoeff(), u.dot(sp.op->weights) / sp.op->weights.sum()};
    }

    std::optional<spectral::NodeInterpolator> interp;
    if (sp.op) interp.emplace(m, *sp.op);

    const std::optional<double> rate_hint =
        sp.eig && sp.eig->mu_top < 0.0 ? std::optional<double>(sp.eig->mu_top) : std::nullopt;
    for (std::size_t k = 0; k < probes.size(); ++k) {
        ProbeResult pr;
        pr.point = probes[k];
        pr.ambient = m.ambient(probes[k]);
        if (runs[k].rec)
            guarded(r, "potential_kernel_mc",
                    [&] { pr.u1_mc = flows::potential_from_record(*runs[k].rec, cfg.sampler.t_max, rate_hint); });
        if (sp.u1 && interp) pr.u1_spectral = interp->value(*sp.u1, probes[k]);
        r.probes.push_back(std::move(pr));
    }

    if (mc_ok) {
        guarded(r, "decay_fit", [&] {
            std::vector<std::vector<Stat>> curves;
            for (const auto& run : runs) curves.push_back(run.rec->fk_weight);
            DecayFit d;
            d.t_hi = cfg.sampler.t_max;
            d.t_lo = 0.5 * d.t_hi;
            d.rate = decay_rate_fit(runs.front().rec->times, curves, d.t_lo, d.t_hi);
            if (sp.eig && sp.eig->mu_top != 0.0)
                d.relative_error = std::fabs(d.rate - sp.eig->mu_top) / std::fabs(sp.eig->mu_top);
            r.decay_fit = d;
        });
    }

    // One-form identity: E df(W_t v0) against the derivative of the spectral P_t^h f.
    if (!mc_ok || !sp.op) {
        r.identity_residuals.push_back(failed_check("eq1_eq3", "missing Monte Carlo or spectral input"));
    } else {
        IdentityCheck c = pending_check("eq1_eq3", 1e-2);
        guarded(r, "eq1_eq3", [&] {
            const auto& times = runs.front().rec->times;
            const auto it = std::min_element(times.begin(), times.end(), [&](double a, double b) {
                return std::fabs(a - cfg.identity_time) < std::fabs(b - cfg.identity_time);
            });
            const std::size_t idx = static_cast<std::size_t>(it - times.begin());
            const double t = times[idx];
            const Vector pt = spectral::semigroup_apply(*sp.op, spectral::sample_nodes(m, *sp.op, test_f), t,
                                                        spectral::Generator::heat);
            double worst = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < probes.size(); ++k) {
                const Stat& mc = runs[k].rec->one_form[idx];
                const double spec = spectral_directional_derivative(m, *sp.op, pt, probes[k], directions[k]);
                worst = std::max(worst, std::fabs(mc.mean - spec) - 3.0 * mc.std_error);
            }
            c.residual = worst;
            c.passed = worst <= c.tolerance;
            c.detail = "max |MC - spectral| - 3 stderr at t = " + fmt(t) + " over probes, f = " +
                       expr::print(test_f);
        });
        r.identity_residuals.push_back(c);
    }

    // Gradient bound: |E df(W_t v0)| <= sup|df| |v0| E|W_t| (v0 is a unit vector).
    if (!mc_ok || !sp.op) {
        r.identity_residuals.push_back(failed_check("eq4", "missing Monte Carlo or spectral input"));
    } else {
        IdentityCheck c;
        c.name = "eq4";
        c.tolerance = 1e-12;
        double sup_df = 0.0;
        for (Eigen::Index i = 0; i < sp.op->size(); ++i) {
            const PointOnManifold& p = sp.op->nodes[i];
            sup_df = std::max(sup_df, gradient_norm(m, node_gradient(m, test_f, p), p));
        }
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& run : runs)
            for (std::size_t i = 0; i < run.rec->times.size(); ++i) {
                const Stat& of = run.rec->one_form[i];
                const double bound = sup_df * run.rec->w_norm[i].mean + 3.0 * of.std_error;
                worst = std::max(worst, std::fabs(of.mean) - bound);
            }
        c.residual = worst;
        c.passed = worst <= c.tolerance;
        c.detail = "max |E df(W v0)| - (sup|df| E|W| + 3 stderr); sup|df| = " + fmt(sup_df);
        r.identity_residuals.push_back(c);
    }

    // Flow bound: E|W_t| <= E exp(-1/2 int rho^h), paired per path.
    if (!mc_ok) {
        r.identity_residuals.push_back(failed_check("eq5", "missing Monte Carlo input"));
    } else {
        IdentityCheck c;
        c.name = "eq5";
        c.tolerance = 1e-12;
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& run : runs)
            for (const Stat& d : run.rec->w_minus_fk) worst = std::max(worst, d.mean - 3.0 * d.std_error);
        c.residual = worst;
        c.passed = worst <= c.tolerance;
        c.detail = "max over probes and recorded t of E(|W| - FK) - 3 stderr";
        r.identity_residuals.push_back(c);
    }

    // Feynman-Kac: MC P_t^rho 1 against the spectral Schrodinger semigroup.
    if (cfg.rho_shift != 0.0) {
        r.identity_residuals.push_back(
            skipped_check("feynman_kac", "rho_shift acts on the spectral engine only"));
    } else if (!mc_ok || !sp.op) {
        r.identity_residuals.push_back(failed_check("feynman_kac", "missing Monte Carlo or spectral input"));
    } else {
        IdentityCheck c = pending_check("feynman_kac", 0.02);
        guarded(r, "feynman_kac", [&] {
            std::vector<double> ts;
            std::vector<int> idx;
            for (double t : cfg.fk_times) {
                const int i = record_index(runs.front().rec->times, t);
                if (i >= 0) {
                    ts.push_back(t);
                    idx.push_back(i);
                }
            }
            if (ts.empty()) throw ConfigError("no Feynman-Kac time falls on the record grid");
            std::vector<std::size_t> order(ts.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ts[a] < ts[b]; });
            std::vector<double> sorted;
            for (auto i : order) sorted.push_back(ts[i]);
            const auto spec = spectral::semigroup_apply_times(*sp.op, Vector::Ones(sp.op->size()), sorted,
                                                              spectral::Generator::schrodinger);
            double worst = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < order.size(); ++j) {
                const int i = idx[order[j]];
                for (std::size_t k = 0; k < probes.size(); ++k) {
                    const Stat& mc = runs[k].rec->fk_weight[i];
                    const double s = interp->value(spec[j], probes[k]);
                    worst = std::max(worst, (std::fabs(mc.mean - s) - 3.0 * mc.std_error) / std::fabs(s));
                }
            }
            c.residual = worst;
            c.passed = worst <= c.tolerance;
            std::string list;
            for (double t : sorted) list += (list.empty() ? "" : ", ") + fmt(t);
            c.detail = "max relative (|MC - spectral| - 3 stderr) over probes at t = " + list;
        });
        r.identity_residuals.push_back(c);
    }

    if (!cfg.run_witten) {
        r.identity_residuals.push_back(skipped_check("witten", "disabled"));
    } else {
        IdentityCheck c = pending_check("witten", 0.01);
        guarded(r, "witten", [&] {
            const auto w = spectral::witten_check(m, h, cfg.resolution);
            c.residual = w.max_eigen_deviation;
            c.passed = w.max_eigen_deviation <= c.tolerance;
            c.detail = "top-10 eigenvalue deviation; conjugation residual " + fmt(w.conjugation_residual);
        });
        r.identity_residuals.push_back(c);
    }

    if (!r.criterion_holds || !r.u1_spectral) {
        r.identity_residuals.push_back(
            skipped_check("bakry", "criterion fails, so c = sup U1 is not finite"));
    } else {
        IdentityCheck c = pending_check("bakry", 1e-8);
        guarded(r, "bakry", [&] {
            double worst = -std::numeric_limits<double>::infinity(), min_slack = worst;
            for (int i = 0; i < cfg.bakry_pairs; ++i) {
                const auto [f, g] = random_test_pair(m, cfg.sampler.seed, i);
                const BakryResult b = bakry_inequality_check(m, *sp.op, r.u1_spectral->sup, f, g, cfg.bakry_time);
                worst = std::max(worst, std::fabs(b.lhs) - b.rhs);
                min_slack = i == 0 ? b.slack : std::min(min_slack, b.slack);
            }
            c.residual = worst;
            c.passed = worst <= c.tolerance;
            c.detail = "max |<P_t f - f, g>_w| - c |grad f|_inf |grad g|_1 over " + std::to_string(cfg.bakry_pairs) +
                       " random pairs; min slack " + fmt(min_slack);
        });
        r.identity_residuals.push_back(c);
    }

    if (r.criterion_holds && r.known_pi1_finite == false) {
        r.consistency = false;
        r.consistency_note = "criterion holds on a manifold with infinite fundamental group";
    } else if (r.criterion_holds) {
        r.consistency = true;
        r.consistency_note = "criterion holds, so the fundamental group is finite";
    } else {
        r.consistency = true;
        r.consistency_note = "criterion fails; this implies nothing about the fundamental group";
    }
    return r;
}

}  // namespace myers::criterion
