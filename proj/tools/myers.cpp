// myers: evaluate the probabilistic Myers criterion on closed surfaces.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure,
// 3 validation-suite failure.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <Eigen/LU>

#include "myers/config.hpp"
#include "myers/errors.hpp"
#include "myers/report.hpp"
#include "myers/validation.hpp"

using namespace myers;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out;
    bool quick = false;
};

config::RunConfig load(const Globals& g) {
    if (g.config_path.empty()) throw ConfigError("--config is required for this command");
    config::RunConfig c = config::load_config(g.config_path);
    auto& s = c.numerics.sampler;
    if (g.seed) s.seed = *g.seed;
    s.threads = g.threads > 0 ? g.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (!g.out.empty()) c.output = g.out;
    if (g.quick) {
        s.n_paths = std::max(200, s.n_paths / 4);
        c.numerics.resolution = std::max(32, c.numerics.resolution / 2);
    }
    c.numerics.validate();
    return c;
}

std::vector<geometry::PointOnManifold> probes(const config::RunConfig& c) {
    return c.numerics.probes.empty()
               ? criterion::probe_points(*c.manifold, c.numerics.sampler.seed, c.numerics.n_random_probes)
               : c.numerics.probes;
}

void write(const config::RunConfig& c, const std::string& name, const std::string& content) {
    const fs::path path = c.output / name;
    report::write_atomic(path, content);
    std::printf("wrote %s\n", path.string().c_str());
}

void inspect(const config::RunConfig& c) {
    const auto& m = *c.manifold;
    const auto op = spectral::build_operator(m, c.h, c.numerics.resolution);
    report::Csv csv({"chart", "u", "v", "x", "y", "z", "h", "rho_h", "ric_11", "ric_12", "ric_22", "hess_11",
                     "hess_12", "hess_22"});
    for (Eigen::Index i = 0; i < op.size(); ++i) {
        const auto& p = op.nodes[static_cast<std::size_t>(i)];
        const auto a = m.ambient(p);
        const auto k = geometry::curvature(m, c.h, p);
        csv.cell(p.chart).cell(p.coords[0]).cell(p.coords[1]).cell(a[0]).cell(a[1]).cell(a[2]);
        csv.cell(k.h_value).cell(k.rho_h);
        csv.cell(k.ric(0, 0)).cell(k.ric(0, 1)).cell(k.ric(1, 1));
        csv.cell(k.hess_h(0, 0)).cell(k.hess_h(0, 1)).cell(k.hess_h(1, 1)).end_row();
    }
    write(c, "inspect.csv", csv.str());
}

void sample(const config::RunConfig& c, int n_trace) {
    const auto& m = *c.manifold;
    report::Csv csv({"probe", "path", "t", "chart", "u", "v", "x", "y", "z", "rho_h", "fk_weight", "w_norm"});
    const auto ps = probes(c);
    for (std::size_t k = 0; k < ps.size(); ++k)
        for (int path = 0; path < std::min(n_trace, c.numerics.sampler.n_paths); ++path)
            for (const auto& row : sde::trace_path(m, c.h, ps[k], c.numerics.sampler, static_cast<std::uint64_t>(path))) {
                const auto a = m.ambient({row.chart_id, geometry::Vec2(row.u, row.v)});
                csv.cell(static_cast<long long>(k)).cell(path).cell(row.t).cell(row.chart_id).cell(row.u).cell(row.v);
                csv.cell(a[0]).cell(a[1]).cell(a[2]).cell(row.rho_h).cell(row.fk_weight).cell(row.w_norm).end_row();
            }
    write(c, "sample.csv", csv.str());
}

void fk(const config::RunConfig& c) {
    const auto& m = *c.manifold;
    report::Csv csv({"probe", "t", "fk_mean", "fk_stderr", "w_norm_mean", "w_norm_stderr", "w_minus_fk_mean",
                     "w_minus_fk_stderr", "fk_time_integral_mean", "fk_time_integral_stderr"});
    const auto ps = probes(c);
    for (std::size_t k = 0; k < ps.size(); ++k) {
        const auto rec = sde::sample_ensemble(m, c.h, ps[k], {}, c.numerics.sampler);
        for (std::size_t i = 0; i < rec.times.size(); ++i) {
            csv.cell(static_cast<long long>(k)).cell(rec.times[i]);
            csv.cell(rec.fk_weight[i].mean).cell(rec.fk_weight[i].std_error);
            csv.cell(rec.w_norm[i].mean).cell(rec.w_norm[i].std_error);
            csv.cell(rec.w_minus_fk[i].mean).cell(rec.w_minus_fk[i].std_error);
            csv.cell(rec.fk_time_integral[i].mean).cell(rec.fk_time_integral[i].std_error).end_row();
        }
    }
    write(c, "fk.csv", csv.str());
}

void spectrum(const config::RunConfig& c, int n_eigen, bool matrix_market) {
    const auto& m = *c.manifold;
    const auto op = spectral::build_operator(m, c.h, c.numerics.resolution, c.numerics.rho_shift);
    const auto s = spectral::top_eigenpairs(op, spectral::Generator::schrodinger, n_eigen);
    const auto eig = spectral::top_eigen(op);
    const auto w = spectral::witten_check(m, c.h, c.numerics.resolution, n_eigen);

    report::Csv values({"index", "mu", "lambda", "residual"});
    for (std::size_t i = 0; i < s.values.size(); ++i)
        values.cell(static_cast<long long>(i)).cell(s.values[i]).cell(2.0 * s.values[i]).cell(s.residuals[i]).end_row();
    write(c, "spectrum.csv", values.str());

    report::Csv witten({"index", "weighted", "conjugated"});
    for (std::size_t i = 0; i < w.weighted.size(); ++i)
        witten.cell(static_cast<long long>(i)).cell(w.weighted[i]).cell(w.conjugated[i]).end_row();
    write(c, "witten.csv", witten.str());

    std::optional<spectral::Vector> u1;
    if (eig.criterion_holds()) u1 = spectral::potential_resolvent(op, eig);
    report::Csv nodes({"chart", "u", "v", "x", "y", "z", "weight", "rho_h", "top_eigenvector", "u1"});
    for (Eigen::Index i = 0; i < op.size(); ++i) {
        const auto& p = op.nodes[static_cast<std::size_t>(i)];
        const auto& a = op.ambient[static_cast<std::size_t>(i)];
        nodes.cell(p.chart).cell(p.coords[0]).cell(p.coords[1]).cell(a[0]).cell(a[1]).cell(a[2]);
        nodes.cell(op.weights[i]).cell(op.rho[i]).cell(eig.eigvec[i]).cell(u1 ? (*u1)[i] : std::nan(""));
        nodes.end_row();
    }
    write(c, "nodes.csv", nodes.str());

    report::Json j;
    j["manifold"] = m.describe();
    j["h"] = expr::print(c.h);
    j["resolution"] = c.numerics.resolution;
    j["nodes"] = static_cast<long long>(op.size());
    j["rho_shift"] = c.numerics.rho_shift;
    j["lambda0"] = eig.lambda0;
    j["mu_top"] = eig.mu_top;
    j["eigen_residual"] = eig.residual;
    j["criterion_holds"] = eig.criterion_holds();
    j["mu"] = s.values;
    j["witten"] = {{"weighted", w.weighted},
                   {"conjugated", w.conjugated},
                   {"max_eigen_deviation", w.max_eigen_deviation},
                   {"conjugation_residual", w.conjugation_residual}};
    write(c, "spectrum.json", report::dump(j));

    if (matrix_market) {
        std::ostringstream os;
        spectral::write_matrix_market(os, op.stiffness);
        write(c, "stiffness.mtx", os.str());
    }
}

int check(const config::RunConfig& c) {
    const auto r = criterion::check(*c.manifold, c.h, c.numerics);
    write(c, "report.json", report::report_json(r));
    write(c, "residuals.csv", report::residuals_csv(r));
    std::printf("lambda0 = %.10g, criterion %s\n", r.lambda0, r.criterion_holds ? "holds" : "fails");
    int code = 0;
    for (const auto& e : r.errors) {
        std::fprintf(stderr, "error in %s: %s\n", e.section.c_str(), e.message.c_str());
        code = std::max(code, e.category == "config" ? 1 : 2);
    }
    return code;
}

int validate(const Globals& g) {
    validation::Options opt;
    opt.quick = g.quick;
    opt.threads = g.threads > 0 ? g.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (g.seed) opt.seed = *g.seed;
    int failed = 0;
    const auto results = validation::run_acceptance(opt, [&](const validation::CriterionResult& r) {
        std::printf("%s\n", validation::format_line(r).c_str());
        std::fflush(stdout);
        if (!r.passed) ++failed;
    });
    std::printf("%d/%zu checks passed\n", static_cast<int>(results.size()) - failed, results.size());
    return failed ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic Myers criterion on closed surfaces"};
    app.require_subcommand(1);
    Globals g;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", g.config_path, "Run configuration (JSON)");
        sub->add_option("--seed", g.seed, "Override sde.seed");
        sub->add_option("--threads", g.threads, "Monte Carlo worker threads (results do not depend on it)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out", g.out, "Output directory (overrides the config)");
        sub->add_flag("--quick", g.quick, "Reduced paths and resolution");
    };
    int n_trace = 8, n_eigen = 10;
    bool matrix_market = false;
    auto* inspect_cmd = app.add_subcommand("inspect", "Curvature fields at the grid nodes");
    auto* sample_cmd = app.add_subcommand("sample", "Path dumps");
    sample_cmd->add_option("--paths", n_trace, "Paths traced per probe")->check(CLI::PositiveNumber);
    auto* fk_cmd = app.add_subcommand("fk", "Feynman-Kac weight and |W_t| curves");
    auto* spectrum_cmd = app.add_subcommand("spectrum", "Top eigenvalues and the Witten check");
    spectrum_cmd->add_option("--eigs", n_eigen, "Number of eigenvalues")->check(CLI::PositiveNumber);
    spectrum_cmd->add_flag("--matrix-market", matrix_market, "Also write the stiffness matrix");
    auto* check_cmd = app.add_subcommand("check", "Full criterion report");
    auto* validate_cmd = app.add_subcommand("validate", "Identity and invariant suite on the built-in catalog");
    for (auto* sub : {inspect_cmd, sample_cmd, fk_cmd, spectrum_cmd, check_cmd, validate_cmd}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (validate_cmd->parsed()) return validate(g);
        const config::RunConfig c = load(g);
        if (inspect_cmd->parsed()) inspect(c);
        if (sample_cmd->parsed()) sample(c, n_trace);
        if (fk_cmd->parsed()) fk(c);
        if (spectrum_cmd->parsed()) spectrum(c, n_eigen, matrix_market);
        if (check_cmd->parsed()) return check(c);
        return 0;
    } catch (const Error& e) {
        std::fprintf(stderr, "myers: %s\n", e.what());
        return e.category() == Error::Category::config ? 1 : 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "myers: %s\n", e.what());
        return 2;
    }
}
