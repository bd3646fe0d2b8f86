#include <doctest.h>

#include <cmath>
#include <set>

#include "myers/rng.hpp"

using myers::rng::Philox4x32;

TEST_CASE("philox known-answer vectors") {
    using B = Philox4x32::Block;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::bijection(B{0, 0, 0, 0}, K{0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::bijection(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
          B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::bijection(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
          B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
    Philox4x32 a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    std::set<std::uint32_t> seen;
    for (int i = 0; i < 64; ++i) {
        const auto x = a();
        CHECK(x == b());
        seen.insert(x);
        seen.insert(c());
        seen.insert(d());
    }
    CHECK(seen.size() == 3 * 64);
}

TEST_CASE("uniform and normal moments") {
    Philox4x32 g(1, 0);
    const int n = 200000;
    double su = 0, sn = 0, sn2 = 0, sn4 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = g.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double z = g.normal();
        sn += z;
        sn2 += z * z;
        sn4 += z * z * z * z;
    }
    CHECK(std::fabs(su / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::fabs(sn / n) < 4.0 / std::sqrt(n));
    CHECK(std::fabs(sn2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::fabs(sn4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
}
