#pragma once

// Both engines combined into one verdict on "Delta^h - rho^h < 0", with the
// Monte Carlo / spectral cross-checks that back it.

#include <optional>
#include <string>
#include <vector>

#include "myers/flows.hpp"
#include "myers/spectral.hpp"

namespace myers::criterion {

using geometry::PointOnManifold;

struct NumericsConfig {
    // Monte Carlo horizon is sampler.t_max; it doubles as the U1 truncation time
    // and the decay window is [t_max / 2, t_max].
    sde::SamplerConfig sampler;
    int resolution = 64;
    double rho_shift = 0.0;
    std::vector<PointOnManifold> probes;  // empty: landmark/random policy
    int n_random_probes = 4;
    double identity_time = 1.0;                  // t for the one-form identities
    std::vector<double> fk_times{0.5, 1.0, 2.0};  // Feynman-Kac cross-validation times
    int bakry_pairs = 5;
    double bakry_time = 1.0;
    bool run_witten = true;

    void validate() const;
};

// Default probes: poles and an equator point on the sphere, (0,0) and the
// half-period point on the flat torus, seeded random points otherwise.
std::vector<PointOnManifold> probe_points(const geometry::ManifoldModel& m, std::uint64_t seed, int n_random);

struct U1Summary {
    double sup = 0.0, inf = 0.0, mean = 0.0;
};

struct ProbeResult {
    PointOnManifold point;
    geometry::Vec3 ambient;
    flows::PotentialEstimate u1_mc;
    std::optional<double> u1_spectral;
};

struct DecayFit {
    double rate = 0.0;
    double t_lo = 0.0, t_hi = 0.0;
    std::optional<double> relative_error;  // |rate - mu_top| / |mu_top|
};

struct IdentityCheck {
    std::string name;
    double residual = 0.0;   // worst violation measure; <= 0 passes unless noted in detail
    double tolerance = 0.0;
    bool passed = false;
    bool skipped = false;
    std::string detail;
};

struct SectionError {
    std::string section;
    std::string category;  // config / numerical / validation
    std::string message;
};

struct MyersReport {
    std::string manifold;
    std::string manifold_parameters;
    std::string h;
    int resolution = 0;
    sde::SamplerConfig sampler;

    double lambda0 = 0.0;
    double mu_top = 0.0;
    double eigen_residual = 0.0;
    bool criterion_holds = false;
    std::optional<U1Summary> u1_spectral;
    std::vector<ProbeResult> probes;
    double h_volume = 0.0;
    double negative_rho_fraction = 0.0;
    std::optional<DecayFit> decay_fit;
    std::vector<IdentityCheck> identity_residuals;
    std::optional<bool> known_pi1_finite;
    bool consistency = true;
    std::string consistency_note;
    std::vector<SectionError> errors;

    const IdentityCheck* find(const std::string& name) const;
    bool all_checks_passed() const;
};

MyersReport check(const geometry::ManifoldModel& m, const expr::ScalarFieldExpr& h, const NumericsConfig& cfg);

// Slope of log(max over curves of mean(t)) over [t_lo, t_hi]; every mean in
// the window must exceed 10 standard errors.
double decay_rate_fit(const std::vector<double>& times, const std::vector<std::vector<sde::Stat>>& curves,
                      double t_lo, double t_hi);

struct BakryResult {
    double lhs = 0.0;   // <P_t f - f, g>_w
    double rhs = 0.0;   // sup U1 * max |grad f| * sum w |grad g|
    double slack = 0.0; // rhs - lhs
    bool holds = false;
};

BakryResult bakry_inequality_check(const geometry::ManifoldModel& m, const spectral::DiscreteOperator& op,
                                   double u1_sup, const expr::ScalarFieldExpr& f, const expr::ScalarFieldExpr& g,
                                   double t);

// Smooth random test fields native to the model (seeded).
std::pair<expr::ScalarFieldExpr, expr::ScalarFieldExpr> random_test_pair(const geometry::ManifoldModel& m,
                                                                         std::uint64_t seed, int index);

// Default observable for the one-form identities.
expr::ScalarFieldExpr default_test_field(const geometry::ManifoldModel& m);

// Spectral directional derivative of P_t^h f at x0 along v0:
// (P f(exp(eps v0)) - P f(exp(-eps v0))) / (2 eps).
double spectral_directional_derivative(const geometry::ManifoldModel& m, const spectral::DiscreteOperator& op,
                                       const spectral::Vector& pt_f, const PointOnManifold& x0,
                                       const geometry::Vec2& v0, double eps = 1e-3);

// Unit tangent vector used at a probe: the first g-orthonormal frame vector.
geometry::Vec2 probe_direction(const geometry::ManifoldModel& m, const PointOnManifold& p);

}  // namespace myers::criterion
