#ifndef D2DSIM_RNG_HPP_
#define D2DSIM_RNG_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>

namespace d2dsim {

/**
 * Counter-addressed random stream. The pair (seed, stream_id) fully determines
 * the draw sequence; trial i of a run uses stream_id = i.
 *
 * Only the engine comes from <random>. Every distribution is written out here
 * because the standard distributions are implementation-defined, and results
 * must be bit-identical across standard libraries.
 */
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id), engine_(mix(seed, stream_id))
    {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased integer in [0, n); n must be > 0.
    std::size_t index(std::size_t n)
    {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % bound);
    }

    /// Unit-mean exponential.
    double exponential() { return -std::log1p(-uniform()); }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Poisson(mean) by inversion; large means are split into exact chunks.
    std::uint64_t poisson(double mean)
    {
        constexpr double chunk = 500.0;
        std::uint64_t total = 0;
        while (mean > chunk) {
            total += poisson_small(chunk);
            mean -= chunk;
        }
        return total + poisson_small(mean);
    }

private:
    static std::uint64_t splitmix(std::uint64_t &state)
    {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream)
    {
        std::uint64_t state = seed;
        std::uint64_t a = splitmix(state);
        state ^= stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
        return a ^ splitmix(state);
    }

    std::uint64_t poisson_small(double mean)
    {
        if (mean <= 0.0)
            return 0;
        double p = std::exp(-mean);
        double cdf = p;
        const double u = uniform();
        std::uint64_t k = 0;
        while (u > cdf) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
            if (p <= 0.0 && static_cast<double>(k) > mean)
                break;
        }
        return k;
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace d2dsim

#endif // D2DSIM_RNG_HPP_
