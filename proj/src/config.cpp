#include "myers/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "myers/errors.hpp"

namespace myers::config {

using Json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw ConfigError("config: '" + key + "' " + what);
}

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

void require_keys(const Json& obj, const std::string& prefix, const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail(prefix, "must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError("config: unknown key '" + join(prefix, it.key()) + "'");
}

// Numbers may also be given as constant expressions such as "2*pi".
double number(const Json& j, const std::string& key) {
    double x = 0.0;
    if (j.is_number()) {
        x = j.get<double>();
    } else if (j.is_string()) {
        const auto e = expr::parse(j.get<std::string>());
        if (e.uses_chart() || e.uses_ambient()) fail(key, "must be a constant");
        x = expr::eval(e, {});
    } else {
        fail(key, "must be a number");
    }
    if (!std::isfinite(x)) fail(key, "must be finite");
    return x;
}

double positive(const Json& j, const std::string& key) {
    const double x = number(j, key);
    if (!(x > 0.0)) fail(key, "must be positive");
    return x;
}

long long positive_integer(const Json& j, const std::string& key) {
    if (!j.is_number_integer() || j.get<long long>() <= 0) fail(key, "must be a positive integer");
    return j.get<long long>();
}

std::string text(const Json& j, const std::string& key) {
    if (!j.is_string()) fail(key, "must be a string");
    return j.get<std::string>();
}

expr::ScalarFieldExpr expression(const Json& j, const std::string& key) {
    try {
        return expr::parse(text(j, key));
    } catch (const Error& e) {
        fail(key, std::string("is not a valid expression: ") + e.what());
    }
}

geometry::ManifoldModel parse_manifold(const Json& j) {
    if (!j.is_object()) fail("manifold", "must be an object");
    if (!j.contains("kind")) fail("manifold.kind", "is required");
    const std::string kind = text(j.at("kind"), "manifold.kind");
    if (kind == "sphere") {
        require_keys(j, "manifold", {"kind", "radius"});
        const double r = j.contains("radius") ? positive(j.at("radius"), "manifold.radius") : 1.0;
        return geometry::ManifoldModel::sphere(r);
    }
    const double two_pi = 2.0 * std::acos(-1.0);
    auto period = [&](const char* k) {
        return j.contains(k) ? positive(j.at(k), std::string("manifold.") + k) : two_pi;
    };
    if (kind == "flat_torus") {
        require_keys(j, "manifold", {"kind", "period_u", "period_v"});
        return geometry::ManifoldModel::flat_torus(period("period_u"), period("period_v"));
    }
    if (kind == "expression_metric") {
        require_keys(j, "manifold", {"kind", "period_u", "period_v", "g11", "g12", "g22"});
        for (const char* k : {"g11", "g12", "g22"})
            if (!j.contains(k)) fail(std::string("manifold.") + k, "is required");
        return geometry::ManifoldModel::expression_metric(
            period("period_u"), period("period_v"), expression(j.at("g11"), "manifold.g11"),
            expression(j.at("g12"), "manifold.g12"), expression(j.at("g22"), "manifold.g22"));
    }
    fail("manifold.kind", "must be one of sphere, flat_torus, expression_metric (got '" + kind + "')");
}

geometry::PointOnManifold parse_probe(const Json& j, const std::string& key, const geometry::ManifoldModel& m) {
    if (!j.is_object()) fail(key, "must be an object");
    if (j.contains("x") || j.contains("y") || j.contains("z")) {
        require_keys(j, key, {"x", "y", "z"});
        if (m.kind() != geometry::ManifoldKind::sphere) fail(key, "ambient probes need the sphere");
        geometry::Vec3 a;
        const char* names[] = {"x", "y", "z"};
        for (int i = 0; i < 3; ++i) {
            if (!j.contains(names[i])) fail(join(key, names[i]), "is required");
            a[i] = number(j.at(names[i]), join(key, names[i]));
        }
        if (!(a.norm() > 0.0)) fail(key, "must not be the origin");
        return m.from_ambient(a);
    }
    require_keys(j, key, {"chart", "u", "v"});
    int chart = 0;
    if (j.contains("chart")) {
        if (!j.at("chart").is_number_integer()) fail(join(key, "chart"), "must be an integer");
        chart = j.at("chart").get<int>();
        if (chart < 0 || chart >= static_cast<int>(m.charts().size())) fail(join(key, "chart"), "is out of range");
    }
    for (const char* k : {"u", "v"})
        if (!j.contains(k)) fail(join(key, k), "is required");
    geometry::PointOnManifold p{chart, geometry::Vec2(number(j.at("u"), join(key, "u")),
                                                      number(j.at("v"), join(key, "v")))};
    try {
        return m.canonical(p);
    } catch (const Error& e) {
        fail(key, std::string("is not a valid point: ") + e.what());
    }
}

}  // namespace

RunConfig default_config() {
    RunConfig c;
    c.numerics.sampler.dt = 1e-2;
    c.numerics.sampler.t_max = 10.0;
    c.numerics.sampler.n_paths = 2000;
    c.numerics.sampler.seed = 1;
    c.numerics.sampler.record_stride = 10;
    c.numerics.resolution = 64;
    return c;
}

RunConfig parse_config(const std::string& source) {
    Json j;
    try {
        j = Json::parse(source);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    require_keys(j, "", {"manifold", "h", "sde", "spectral", "probes", "output"});
    RunConfig c = default_config();
    if (!j.contains("manifold")) fail("manifold", "is required");
    c.manifold = parse_manifold(j.at("manifold"));

    if (j.contains("h")) {
        c.h_text = text(j.at("h"), "h");
        c.h = expression(j.at("h"), "h");
        try {
            c.manifold->validate_field(c.h, "h");
        } catch (const Error& e) {
            fail("h", e.what());
        }
    }

    if (j.contains("sde")) {
        const Json& s = j.at("sde");
        require_keys(s, "sde", {"dt", "t_max", "n_paths", "seed", "record_stride"});
        auto& cfg = c.numerics.sampler;
        if (s.contains("dt")) cfg.dt = positive(s.at("dt"), "sde.dt");
        if (s.contains("t_max")) cfg.t_max = positive(s.at("t_max"), "sde.t_max");
        if (s.contains("n_paths")) cfg.n_paths = static_cast<int>(positive_integer(s.at("n_paths"), "sde.n_paths"));
        if (s.contains("seed")) {
            if (!s.at("seed").is_number_unsigned()) fail("sde.seed", "must be a non-negative integer");
            cfg.seed = s.at("seed").get<std::uint64_t>();
        }
        if (s.contains("record_stride"))
            cfg.record_stride = static_cast<int>(positive_integer(s.at("record_stride"), "sde.record_stride"));
    }

    if (j.contains("spectral")) {
        const Json& s = j.at("spectral");
        require_keys(s, "spectral", {"resolution", "rho_shift"});
        if (s.contains("resolution"))
            c.numerics.resolution = static_cast<int>(positive_integer(s.at("resolution"), "spectral.resolution"));
        if (s.contains("rho_shift")) {
            c.numerics.rho_shift = number(s.at("rho_shift"), "spectral.rho_shift");
            if (c.numerics.rho_shift < 0.0) fail("spectral.rho_shift", "must be non-negative");
        }
    }

    if (j.contains("probes")) {
        const Json& p = j.at("probes");
        if (!p.is_array()) fail("probes", "must be an array");
        for (std::size_t i = 0; i < p.size(); ++i)
            c.numerics.probes.push_back(parse_probe(p[i], "probes[" + std::to_string(i) + "]", *c.manifold));
    }

    if (j.contains("output")) {
        c.output = text(j.at("output"), "output");
        if (c.output.empty()) fail("output", "must not be empty");
    }

    try {
        c.numerics.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("config: cannot read " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

}  // namespace myers::config
