#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace myers::rng {

// Philox4x32-10 (Salmon et al., SC'11). The 64-bit seed is the key; the
// stream index occupies the upper half of the counter, so stream p of seed s
// is the same sequence no matter which worker draws it.
class Philox4x32 {
public:
    using result_type = std::uint32_t;
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream);

    static Block bijection(Block counter, Key key) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept;

    // Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() noexcept;
    // Standard normal by Box-Muller; both variates of a pair are used.
    double normal() noexcept;

private:
    Key key_;
    Block counter_;
    Block buffer_{};
    int index_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace myers::rng
