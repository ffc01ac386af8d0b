#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace dysalign {

/// Seeded random source with platform-independent distribution mapping.
///
/// The standard distributions are implementation-defined, so corpora and
/// checkpoints would differ between standard libraries. Everything here is
/// derived from raw mt19937_64 output.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::size_t index(std::size_t n);

    /// Uniform integer in [lo, hi] (inclusive).
    std::int64_t between(std::int64_t lo, std::int64_t hi);

    /// Standard normal draw (Box-Muller, one value per call).
    double normal();

    /// Index drawn with probability proportional to weights[i].
    template <typename Range>
    std::size_t weighted(const Range& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double r = uniform() * total;
        std::size_t i = 0, last = 0;
        for (double w : weights) {
            if (w > 0.0) {
                last = i;
                if (r < w) return i;
                r -= w;
            }
            ++i;
        }
        return last;
    }

    /// splitmix64 mix of (master, stream); used to derive per-record seeds.
    static std::uint64_t derive(std::uint64_t master, std::uint64_t stream);

private:
    std::mt19937_64 engine_;
};

}  // namespace dysalign
