#include "myers/validation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <sstream>

#include <Eigen/LU>

#include "myers/criterion.hpp"
#include "myers/errors.hpp"
#include "myers/report.hpp"

namespace myers::validation {

using criterion::MyersReport;
using geometry::ManifoldModel;
using geometry::PointOnManifold;
using geometry::Vec2;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const expr::ScalarFieldExpr kZero;

// Collects sub-checks of one criterion into a verdict and a one-line detail.
class Verdict {
public:
    void require(bool ok, const std::string& what) {
        ok_ = ok_ && ok;
        if (!ok) failures_.push_back(what);
        notes_.push_back(what);
    }
    void note(const std::string& what) { notes_.push_back(what); }
    bool ok() const { return ok_; }
    std::string detail() const {
        const auto& list = ok_ ? notes_ : failures_;
        std::string s;
        for (const auto& n : list) s += (s.empty() ? "" : "; ") + n;
        return ok_ ? s : "FAILED " + s;
    }

private:
    bool ok_ = true;
    std::vector<std::string> notes_, failures_;
};

std::string num(double x, int digits = 4) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

sde::SamplerConfig sampler(const Options& o, double dt, double t_max, int n_paths, int stride) {
    sde::SamplerConfig c;
    c.dt = dt;
    c.t_max = t_max;
    c.n_paths = o.quick ? std::max(200, n_paths / 4) : n_paths;
    c.record_stride = stride;
    c.seed = o.seed;
    c.threads = o.threads;
    return c;
}

// The sphere run behind criteria 5, 6 and 7.
criterion::NumericsConfig sphere_check_config(const Options& o) {
    criterion::NumericsConfig c;
    c.sampler = sampler(o, 1e-2, 10.0, 6000, 10);
    c.resolution = 64;
    return c;
}

struct Shared {
    std::optional<MyersReport> sphere_03;
    const MyersReport& sphere(const Options& o) {
        if (!sphere_03)
            sphere_03 = criterion::check(ManifoldModel::sphere(), expr::parse("0.3*z"), sphere_check_config(o));
        return *sphere_03;
    }
};

void constant_curvature(const Options& o, Verdict& v) {
    const auto sphere = ManifoldModel::sphere();
    rng::Philox4x32 gen(o.seed, 0);
    double analytic = 0.0, fd = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double a = gen.normal(), b = gen.normal();
        const PointOnManifold p = sphere.from_ambient(geometry::Vec3(a, b, gen.normal()));
        analytic = std::max(analytic, std::fabs(geometry::rho_h(sphere, kZero, p) - 1.0));
        const geometry::Mat2 ric = geometry::fd_ricci(sphere.metric_fn(p.chart), p.coords, sphere.fd());
        fd = std::max(fd, std::fabs(geometry::smallest_generalized_eigenvalue(ric, sphere.metric(p)) - 1.0));
    }
    v.require(analytic <= 1e-8, "max|rho-1| analytic " + num(analytic));
    v.require(fd <= 1e-4, "finite-difference " + num(fd));

    const auto op = spectral::build_operator(sphere, kZero, 64);
    const auto eig = spectral::top_eigen(op);
    v.require(std::fabs(eig.lambda0 + 1.0) <= 1e-3, "lambda0 " + num(eig.lambda0, 8));
    const spectral::Vector u1 = spectral::potential_resolvent(op, eig);
    const double u1_err = (u1.array() - 2.0).abs().maxCoeff();
    v.require(u1_err <= 1e-6, "max|U1_spectral-2| " + num(u1_err));

    for (const PointOnManifold& p : criterion::probe_points(sphere, o.seed, 0)) {
        const auto est = flows::potential_kernel_mc(sphere, kZero, p, sampler(o, 1e-2, 10.0, 400, 10), 10.0);
        const double u = est.u1_mc.value_or(std::nan(""));
        v.require(std::fabs(u - 2.0) <= 0.04, "U1_mc " + num(u, 6));
    }
    const auto w = flows::flow_record(sphere, kZero, {0, Vec2(0.3, -0.2)}, sampler(o, 1e-2, 1.0, 2000, 100));
    const auto& last = w.e_w_norm.back();
    v.require(std::fabs(last.mean - std::exp(-0.5)) <= 3.0 * last.std_error + 1e-12,
              "E|W_1| - e^-1/2 = " + num(last.mean - std::exp(-0.5)) + ", sigma " + num(last.std_error));
}

void negative_control(const Options& o, Verdict& v) {
    criterion::NumericsConfig c;
    c.sampler = sampler(o, 1e-2, 6.0, 400, 10);
    c.resolution = 64;
    c.bakry_pairs = 0;
    const MyersReport r = criterion::check(ManifoldModel::flat_torus(kTwoPi, kTwoPi), kZero, c);
    v.require(r.errors.empty(), "no section errors");
    v.require(std::fabs(r.lambda0) <= 1e-6, "lambda0 " + num(r.lambda0));
    bool diverged = !r.probes.empty();
    for (const auto& p : r.probes) diverged = diverged && p.u1_mc.diverged;
    v.require(diverged && !r.u1_spectral, "U1 diverged");
    v.require(!r.criterion_holds, "criterion fails");
    v.require(r.consistency && r.known_pi1_finite == false, "consistent with infinite pi1");
}

void one_form_identity(const Options& o, Verdict& v) {
    struct Case {
        ManifoldModel m;
        const char* h;
        const char* f;
        PointOnManifold x0;
        Vec2 dir;
        double t;
    };
    const std::vector<Case> cases = {
        {ManifoldModel::sphere(), "0.3*z", "z + 0.5*x", {0, Vec2(0.3, -0.2)}, Vec2(1.0, 0.0), 1.0},
        {ManifoldModel::sphere(), "0", "x*z", {0, Vec2(0.8, 0.4)}, Vec2(0.0, 1.0), 0.5},
        {ManifoldModel::flat_torus(kTwoPi, kTwoPi), "0.5*cos(u)", "sin(u) + 0.5*cos(v)", {0, Vec2(1.0, 2.0)},
         Vec2(0.6, 0.8), 0.5},
    };
    for (const auto& c : cases) {
        const auto h = expr::parse(c.h);
        const auto f = expr::parse(c.f);
        const geometry::Mat2 g = c.m.metric(c.x0);
        const Vec2 v0 = c.dir / std::sqrt(c.dir.dot(g * c.dir));
        const double dt = 5e-3;
        const int steps = static_cast<int>(std::lround(c.t / dt));
        sde::Observables obs;
        obs.one_form = sde::OneFormProbe{f, v0};
        const auto rec = sde::sample_ensemble(c.m, h, c.x0, obs, sampler(o, dt, c.t, 8000, steps));
        const sde::Stat mc = rec.one_form.back();

        const auto op = spectral::build_operator(c.m, h, 64);
        const spectral::Vector pt =
            spectral::semigroup_apply(op, spectral::sample_nodes(c.m, op, f), rec.times.back(),
                                      spectral::Generator::heat);
        const double spec = criterion::spectral_directional_derivative(c.m, op, pt, c.x0, v0);
        v.require(std::fabs(mc.mean - spec) <= 3.0 * mc.std_error + 1e-2,
                  std::string(c.m.name()) + " f=" + c.f + ": MC " + num(mc.mean, 5) + " +- " +
                      num(mc.std_error, 2) + " vs " + num(spec, 5));
    }
}

void eq5_inequality(const Options& o, Verdict& v) {
    const auto sphere = ManifoldModel::sphere();
    const PointOnManifold x0{0, Vec2(0.3, -0.2)};
    for (const std::string hs : {"0.3*z", "1.0*z", "0"}) {
        const bool equality = hs == "0";
        const auto rec = flows::flow_record(sphere, expr::parse(hs), x0, sampler(o, 2e-3, 1.0, 20000, 25));
        double worst = -1e300, worst_paired = -1e300;
        for (std::size_t i = 0; i < rec.times.size(); ++i) {
            const double sigma = std::hypot(rec.e_w_norm[i].std_error, rec.fk_mean[i].std_error);
            const double gap = rec.e_w_norm[i].mean - rec.fk_mean[i].mean;
            if (equality) {
                worst = std::max(worst, std::fabs(gap) - 3.0 * sigma);
                worst_paired = std::max(worst_paired, std::fabs(rec.w_minus_fk[i].mean) -
                                                          3.0 * rec.w_minus_fk[i].std_error);
            } else {
                worst = std::max(worst, gap - 3.0 * sigma);
                worst_paired = std::max(worst_paired, rec.w_minus_fk[i].mean - 3.0 * rec.w_minus_fk[i].std_error);
            }
        }
        v.require(worst <= 1e-12 && worst_paired <= 1e-12,
                  "h=" + hs + (equality ? " |E|W|-E FK|-3s " : " E|W|-E FK-3s ") + num(worst) +
                      " (paired " + num(worst_paired) + ", n=" + std::to_string(rec.n_paths) + ", " +
                      std::to_string(rec.times.size()) + " times)");
    }
}

void feynman_kac(const Options& o, Shared& s, Verdict& v) {
    const MyersReport& r = s.sphere(o);
    const auto* c = r.find("feynman_kac");
    v.require(c && c->passed && !c->skipped,
              "sphere h=0.3z relative excess over 3 sigma " + (c ? num(c->residual) : std::string("missing")));
}

void potential_kernel(const Options& o, Shared& s, Verdict& v) {
    const MyersReport& r = s.sphere(o);
    v.require(r.criterion_holds && r.probes.size() == 3, "criterion holds with 3 probes");
    for (const auto& p : r.probes) {
        if (!p.u1_mc.u1_mc || !p.u1_spectral) {
            v.require(false, "missing U1 at a probe");
            continue;
        }
        const double rel = std::fabs(*p.u1_mc.u1_mc - *p.u1_spectral) / *p.u1_spectral;
        v.require(rel <= 0.05, "z=" + num(p.ambient[2], 2) + " MC " + num(*p.u1_mc.u1_mc, 5) + " vs " +
                                   num(*p.u1_spectral, 5) + " (" + num(100 * rel, 2) + "%)");
    }
}

void decay(const Options& o, Shared& s, Verdict& v) {
    const MyersReport& r = s.sphere(o);
    if (!r.decay_fit || !r.decay_fit->relative_error) {
        v.require(false, "decay fit missing");
        return;
    }
    v.require(r.decay_fit->t_lo == 5.0 && r.decay_fit->t_hi == 10.0, "window [5, 10]");
    v.require(*r.decay_fit->relative_error <= 0.1, "rate " + num(r.decay_fit->rate, 5) + " vs mu_top " +
                                                       num(r.mu_top, 5) + " (" +
                                                       num(100 * *r.decay_fit->relative_error, 2) + "%)");
}

void witten(const Options&, Verdict& v) {
    const auto w = spectral::witten_check(ManifoldModel::flat_torus(kTwoPi, kTwoPi), expr::parse("0.5*cos(u)"), 64);
    v.require(w.weighted.size() == 10 && w.conjugated.size() == 10, "10 eigenvalues each");
    v.require(w.max_eigen_deviation <= 0.01, "max relative deviation " + num(w.max_eigen_deviation));
    v.note("pointwise conjugation residual " + num(w.conjugation_residual));
}

void bakry(const Options& o, Verdict& v) {
    struct Case {
        ManifoldModel m;
        const char* h;
    };
    const std::vector<Case> catalog = {
        {ManifoldModel::sphere(), "0"},
        {ManifoldModel::sphere(), "0.3*z"},
        {ManifoldModel::sphere(), "1.0*z"},
        {ManifoldModel::sphere(), "2.0*z"},
        {ManifoldModel::flat_torus(kTwoPi, kTwoPi), "0"},
        {ManifoldModel::flat_torus(kTwoPi, kTwoPi), "0.5*cos(u)"},
        {ManifoldModel::expression_metric(kTwoPi, kTwoPi, expr::parse("1 + 0.3*cos(v)"), expr::parse("0"),
                                          expr::parse("1")),
         "0.2*sin(u)"},
    };
    int holding = 0;
    for (const auto& c : catalog) {
        const auto h = expr::parse(c.h);
        const auto op = spectral::build_operator(c.m, h, 64);
        const auto eig = spectral::top_eigen(op);
        const std::string label = std::string(c.m.name()) + " h=" + c.h;
        if (!eig.criterion_holds()) {
            v.note(label + " criterion fails (lambda0 " + num(eig.lambda0) + ")");
            continue;
        }
        ++holding;
        const double sup_u1 = spectral::potential_resolvent(op, eig).maxCoeff();
        double min_slack = 1e300;
        bool all = true;
        for (int i = 0; i < 5; ++i) {
            const auto [f, g] = criterion::random_test_pair(c.m, o.seed, i);
            const auto b = criterion::bakry_inequality_check(c.m, op, sup_u1, f, g, 1.0);
            all = all && b.holds && b.slack >= 0.0;
            min_slack = std::min(min_slack, b.slack);
        }
        v.require(all, label + " min slack " + num(min_slack));
    }
    v.require(holding > 0, std::to_string(holding) + " catalog cases satisfy the criterion");
}

void determinism(const Options& o, Verdict& v) {
    criterion::NumericsConfig c;
    c.sampler = sampler(o, 1e-2, 2.0, 600, 10);
    c.sampler.n_paths = 600;
    c.resolution = 32;
    c.bakry_pairs = 1;
    c.run_witten = false;
    const auto sphere = ManifoldModel::sphere();
    const auto h = expr::parse("0.3*z");
    const std::string a = report::report_json(criterion::check(sphere, h, c));
    const std::string b = report::report_json(criterion::check(sphere, h, c));
    c.sampler.threads = o.threads == 3 ? 2 : 3;
    const std::string d = report::report_json(criterion::check(sphere, h, c));
    v.require(a == b, "identical config and seed give byte-identical JSON (" + std::to_string(a.size()) + " bytes)");
    v.require(a == d, "thread count " + std::to_string(c.sampler.threads) + " gives the same bytes");
}

void harmonics(const Options&, Verdict& v) {
    const auto sphere = ManifoldModel::sphere();
    const auto op = spectral::build_operator(sphere, kZero, 64);
    v.require(op.meta.level == 5, "subdivision level " + std::to_string(op.meta.level));
    const auto s = spectral::top_eigenpairs(op, spectral::Generator::heat, 16);
    int idx = 0;
    for (int l = 0; l <= 3; ++l) {
        const double exact = -l * (l + 1.0);
        double worst = 0.0;
        for (int k = 0; k < 2 * l + 1; ++k, ++idx) {
            const double lam = 2.0 * s.values[static_cast<std::size_t>(idx)];
            worst = std::max(worst, l == 0 ? std::fabs(lam) : std::fabs(lam - exact) / -exact);
        }
        v.require(l == 0 ? worst <= 1e-8 : worst <= 0.01,
                  "l=" + std::to_string(l) + (l == 0 ? " |lambda| " : " rel ") + num(worst));
    }
}

void h_volume(const Options&, Verdict& v) {
    const double sphere = geometry::h_volume(ManifoldModel::sphere(), kZero, 64);
    const double rel_s = std::fabs(sphere - 4.0 * std::numbers::pi) / (4.0 * std::numbers::pi);
    v.require(rel_s <= 5e-3, "sphere " + num(sphere, 8) + " (" + num(100 * rel_s, 2) + "%)");
    // int exp(cos u) du dv over [0, 2 pi]^2 = 4 pi^2 I_0(1).
    const double oracle = kTwoPi * kTwoPi * std::cyl_bessel_i(0.0, 1.0);
    const double torus =
        geometry::h_volume(ManifoldModel::flat_torus(kTwoPi, kTwoPi), expr::parse("0.5*cos(u)"), 64);
    const double rel_t = std::fabs(torus - oracle) / oracle;
    v.require(rel_t <= 5e-3, "torus " + num(torus, 8) + " vs " + num(oracle, 8) + " (" + num(100 * rel_t, 2) + "%)");
}

}  // namespace

std::string format_line(const CriterionResult& r) {
    char head[64];
    std::snprintf(head, sizeof head, "%s %2d ", r.passed ? "PASS" : "FAIL", r.id);
    return head + r.title + ": " + r.detail + " [" + num(r.seconds, 3) + " s]";
}

std::vector<CriterionResult> run_acceptance(const Options& opt, const Listener& on_result) {
    Shared shared;
    struct Entry {
        const char* title;
        std::function<void(Verdict&)> run;
    };
    const std::vector<Entry> entries = {
        {"constant-curvature closed forms", [&](Verdict& v) { constant_curvature(opt, v); }},
        {"flat torus negative control", [&](Verdict& v) { negative_control(opt, v); }},
        {"one-form identity against the spectral derivative", [&](Verdict& v) { one_form_identity(opt, v); }},
        {"Hessian flow bounded by the Feynman-Kac weight", [&](Verdict& v) { eq5_inequality(opt, v); }},
        {"Feynman-Kac cross-validation", [&](Verdict& v) { feynman_kac(opt, shared, v); }},
        {"potential kernel cross-validation", [&](Verdict& v) { potential_kernel(opt, shared, v); }},
        {"decay rate against mu_top", [&](Verdict& v) { decay(opt, shared, v); }},
        {"Witten conjugation", [&](Verdict& v) { witten(opt, v); }},
        {"Bakry inequality on the catalog", [&](Verdict& v) { bakry(opt, v); }},
        {"report determinism", [&](Verdict& v) { determinism(opt, v); }},
        {"spherical-harmonic spectrum", [&](Verdict& v) { harmonics(opt, v); }},
        {"h-volume quadrature", [&](Verdict& v) { h_volume(opt, v); }},
    };
    std::vector<CriterionResult> out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        CriterionResult r;
        r.id = static_cast<int>(i + 1);
        r.title = entries[i].title;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            entries[i].run(v);
            r.passed = v.ok();
            r.detail = v.detail();
        } catch (const std::exception& e) {
            r.passed = false;
            r.detail = std::string("error: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (on_result) on_result(r);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace myers::validation
