#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ttoi {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded random source with platform-independent output.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the standard.
/// Distributions are implemented here rather than taken from <random>, whose
/// algorithms are implementation-defined:
///   uniform()  top 53 bits of one draw, scaled to [0, 1);
///   normal()   Box-Muller on two uniforms, both outputs used in turn;
///   below(n)   rejection sampling on the top bits.
/// stream(seed, {a, b, ...}) addresses an independent generator by a path of
/// counters (e.g. replication index, purpose), so any replication can be
/// regenerated without replaying the ones before it.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
    {
        std::uint64_t key = splitmix64(seed);
        for (std::uint64_t c : path) key = splitmix64(key ^ splitmix64(c + 0x632be59bd9b4e019ULL));
        return Rng(key);
    }

    std::uint64_t next_u64() { return engine_(); }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal();

    /// Uniform integer in [0, n), n >= 1.
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace ttoi
