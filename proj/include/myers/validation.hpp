#pragma once

// The acceptance suite: every check compares against a closed form or an
// independent engine, never against a stored number.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace myers::validation {

struct Options {
    bool quick = false;  // fewer Monte Carlo paths
    int threads = 1;
    std::uint64_t seed = 20240601;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

using Listener = std::function<void(const CriterionResult&)>;

std::vector<CriterionResult> run_acceptance(const Options& opt, const Listener& on_result = {});

// "PASS  3  title: detail"
std::string format_line(const CriterionResult& r);

}  // namespace myers::validation
