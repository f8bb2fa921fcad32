#ifndef ESSEG_RNG_HPP
#define ESSEG_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace esseg {

// mt19937_64 with hand-rolled distributions. The standard distribution
// classes are implementation-defined, so outputs here are generated from raw
// engine words only; identical seeds give identical streams on every build.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(scramble(seed)) {}

    // [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; draws two uniforms per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Unbiased integer in [0, n); n must be positive.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    std::uint64_t raw() { return engine_(); }

    // splitmix64 finalizer; decorrelates nearby seeds.
    static std::uint64_t scramble(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Stream for one ensemble member: the run seed xor the member index, then
// scrambled by the engine constructor. Members of one run never collide.
inline Rng member_rng(std::uint64_t seed, int member_index) {
    return Rng(seed ^ static_cast<std::uint64_t>(member_index));
}

} // namespace esseg

#endif
