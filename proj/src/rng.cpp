#include "ttoi/rng.hpp"

#include <cmath>
#include <numbers>

namespace ttoi {

double Rng::normal()
{
    if (has_cached_) {
        has_cached_ = false;
        return cached_normal_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t n)
{
    if (n <= 1) return 0;
    int shift = 0;
    while (shift < 63 && ((n - 1) >> (63 - shift)) == 0) ++shift;
    // Smallest power-of-two mask covering n-1, drawn from the high bits.
    for (;;) {
        const std::uint64_t v = engine_() >> shift;
        if (v < n) return v;
    }
}

}  // namespace ttoi
