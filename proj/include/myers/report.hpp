#pragma once

// Serialization of reports: JSON with fixed 17-significant-digit numbers,
// RFC-4180 CSV, and atomic file replacement.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "myers/criterion.hpp"

namespace myers::report {

using Json = nlohmann::ordered_json;

// %.17g for finite values, "null" otherwise.
std::string format_number(double x);

// Keys in insertion order, two-space indent, floats via format_number.
std::string dump(const Json& j);

Json to_json(const criterion::MyersReport& r);
std::string report_json(const criterion::MyersReport& r);

class Csv {
public:
    explicit Csv(std::vector<std::string> header);
    Csv& cell(const std::string& s);
    Csv& cell(double x);
    Csv& cell(long long x);
    Csv& cell(int x) { return cell(static_cast<long long>(x)); }
    void end_row();
    const std::string& str() const { return out_; }

private:
    void sep();
    std::string out_;
    std::size_t columns_;
    std::size_t in_row_ = 0;
};

// Quotes a field when it contains a comma, quote, CR or LF.
std::string csv_field(const std::string& s);

std::string residuals_csv(const criterion::MyersReport& r);

// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace myers::report
