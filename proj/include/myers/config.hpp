#pragma once

// Run configuration (JSON). Parsing is strict: unknown keys, wrong types and
// non-positive numbers are ConfigErrors naming the offending key path.

#include <filesystem>
#include <optional>
#include <string>

#include "myers/criterion.hpp"

namespace myers::config {

struct RunConfig {
    std::optional<geometry::ManifoldModel> manifold;
    std::string h_text = "0";
    expr::ScalarFieldExpr h;
    criterion::NumericsConfig numerics;
    std::filesystem::path output = "out";
};

// Defaults used for keys a config leaves out.
RunConfig default_config();

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace myers::config
