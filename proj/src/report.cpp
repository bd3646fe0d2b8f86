#include "myers/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

#include <unistd.h>

#include "myers/errors.hpp"

namespace myers::report {

using criterion::MyersReport;

std::string format_number(double x) {
    if (!std::isfinite(x)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

void dump_into(const Json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += inner + Json(it.key()).dump() + ": ";
                dump_into(it.value(), out, indent + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += inner;
                dump_into(j[i], out, indent + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case Json::value_t::number_float: out += format_number(j.get<double>()); return;
        default: out += j.dump(); return;
    }
}

Json opt(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

Json stat_json(const flows::PotentialEstimate& e) {
    Json j;
    j["value"] = opt(e.u1_mc);
    j["std_error"] = e.u1_stderr;
    j["t_trunc"] = e.t_trunc;
    j["tail_bound"] = e.tail_bound;
    j["diverged"] = e.diverged;
    j["decay_rate_fit"] = e.decay_rate_fit;
    return j;
}

}  // namespace

std::string dump(const Json& j) {
    std::string out;
    dump_into(j, out, 0);
    out += "\n";
    return out;
}

Json to_json(const MyersReport& r) {
    Json j;
    j["manifold"] = {{"name", r.manifold}, {"parameters", r.manifold_parameters}};
    j["h"] = r.h;
    j["known_pi1_finite"] = r.known_pi1_finite ? Json(*r.known_pi1_finite) : Json(nullptr);
    // Thread count is left out: results do not depend on it.
    j["numerics"] = {{"resolution", r.resolution},
                     {"dt", r.sampler.dt},
                     {"t_max", r.sampler.t_max},
                     {"n_paths", r.sampler.n_paths},
                     {"seed", r.sampler.seed},
                     {"record_stride", r.sampler.record_stride}};
    j["lambda0"] = r.lambda0;
    j["mu_top"] = r.mu_top;
    j["eigen_residual"] = r.eigen_residual;
    j["criterion_holds"] = r.criterion_holds;
    if (r.u1_spectral)
        j["u1_spectral"] = {{"sup", r.u1_spectral->sup}, {"inf", r.u1_spectral->inf}, {"mean", r.u1_spectral->mean}};
    else
        j["u1_spectral"] = nullptr;
    Json probes = Json::array();
    for (const auto& p : r.probes) {
        Json pj;
        pj["chart"] = p.point.chart;
        pj["u"] = p.point.coords[0];
        pj["v"] = p.point.coords[1];
        pj["ambient"] = {p.ambient[0], p.ambient[1], p.ambient[2]};
        pj["u1_mc"] = stat_json(p.u1_mc);
        pj["u1_spectral"] = opt(p.u1_spectral);
        probes.push_back(pj);
    }
    j["probes"] = probes;
    j["h_volume"] = r.h_volume;
    j["negative_rho_fraction"] = r.negative_rho_fraction;
    if (r.decay_fit)
        j["decay_fit"] = {{"rate", r.decay_fit->rate},
                          {"window", {r.decay_fit->t_lo, r.decay_fit->t_hi}},
                          {"relative_error", opt(r.decay_fit->relative_error)}};
    else
        j["decay_fit"] = nullptr;
    Json checks = Json::object();
    for (const auto& c : r.identity_residuals)
        checks[c.name] = {{"residual", c.residual},
                          {"tolerance", c.tolerance},
                          {"passed", c.passed},
                          {"skipped", c.skipped},
                          {"detail", c.detail}};
    j["identity_residuals"] = checks;
    j["consistency"] = {{"consistent", r.consistency}, {"note", r.consistency_note}};
    Json errors = Json::array();
    for (const auto& e : r.errors)
        errors.push_back({{"section", e.section}, {"category", e.category}, {"message", e.message}});
    j["errors"] = errors;
    return j;
}

std::string report_json(const MyersReport& r) { return dump(to_json(r)); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

Csv::Csv(std::vector<std::string> header) : columns_(header.size()) {
    for (const auto& h : header) cell(h);
    end_row();
}

void Csv::sep() {
    if (in_row_ == columns_) throw Error("CSV row has more cells than the header");
    if (in_row_++) out_ += ',';
}

Csv& Csv::cell(const std::string& s) {
    sep();
    out_ += csv_field(s);
    return *this;
}

Csv& Csv::cell(double x) {
    sep();
    if (std::isfinite(x)) out_ += format_number(x);
    return *this;
}

Csv& Csv::cell(long long x) {
    sep();
    out_ += std::to_string(x);
    return *this;
}

void Csv::end_row() {
    if (in_row_ != columns_) throw Error("CSV row has fewer cells than the header");
    out_ += "\r\n";
    in_row_ = 0;
}

std::string residuals_csv(const MyersReport& r) {
    Csv csv({"check", "residual", "tolerance", "passed", "skipped", "detail"});
    for (const auto& c : r.identity_residuals) {
        csv.cell(c.name).cell(c.residual).cell(c.tolerance);
        csv.cell(std::string(c.passed ? "true" : "false")).cell(std::string(c.skipped ? "true" : "false"));
        csv.cell(c.detail).end_row();
    }
    return csv.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    std::filesystem::create_directories(dir);
    const auto tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ConfigError("cannot write " + tmp.string());
        os << content;
        os.flush();
        if (!os) throw ConfigError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ConfigError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

}  // namespace myers::report
