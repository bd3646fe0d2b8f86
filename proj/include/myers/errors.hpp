#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace myers {

// Root of every exception the library throws. `category()` drives CLI exit codes.
class Error : public std::runtime_error {
public:
    enum class Category { config, numerical, validation };

    explicit Error(const std::string& msg, Category cat = Category::numerical)
        : std::runtime_error(msg), category_(cat) {}

    Category category() const noexcept { return category_; }

private:
    Category category_;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& detail)
        : Error(format(offset, expected, detail), Category::config),
          offset_(offset),
          expected_(std::move(expected)) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    static std::string format(std::size_t offset, const std::vector<std::string>& expected,
                              const std::string& detail) {
        std::string s = "syntax error at byte " + std::to_string(offset) + ": " + detail;
        if (!expected.empty()) {
            s += " (expected one of:";
            for (const auto& e : expected) s += " " + e;
            s += ")";
        }
        return s;
    }

    std::size_t offset_;
    std::vector<std::string> expected_;
};

class UnknownIdentifier : public Error {
public:
    UnknownIdentifier(std::size_t offset, const std::string& name)
        : Error("unknown identifier '" + name + "' at byte " + std::to_string(offset),
                Category::config),
          name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg, Category::config) {}
};

class NonSPDMetric : public Error {
public:
    using Error::Error;
};

class ChartBoundary : public Error {
public:
    using Error::Error;
};

class StepOutOfAtlas : public Error {
public:
    using Error::Error;
};

class MeshTooCoarse : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, double residual)
        : Error(what + " did not converge (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class CriterionFails : public Error {
public:
    using Error::Error;
};

class InsufficientDecayWindow : public Error {
public:
    using Error::Error;
};

class ExcessiveExclusions : public Error {
public:
    using Error::Error;
};

}  // namespace myers
