#include <cstdio>

#include "myers/validation.hpp"

int main() {
    std::setvbuf(stdout, nullptr, _IOLBF, 0);
    myers::validation::Options opt;
    int failed = 0;
    const auto results = myers::validation::run_acceptance(opt, [&](const auto& r) {
        std::printf("%s\n", myers::validation::format_line(r).c_str());
        if (!r.passed) ++failed;
    });
    std::printf("%d/%zu acceptance criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
    return failed == 0 ? 0 : 1;
}
