#ifndef SEQFILL_UTIL_HPP
#define SEQFILL_UTIL_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace seqfill {

// SplitMix64 step; used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic random source. The generator is std::mt19937_64 (whose
// output sequence is fixed by the C++ standard); all variate transforms
// are implemented here explicitly so that streams are bit-reproducible
// across platforms:
//   uniform01: top 53 bits of a 64-bit draw, scaled by 2^-53
//   normal:    Box-Muller, z = sqrt(-2 ln u1) * cos(2 pi u2)
// Substreams are derived by hashing (seed, stream id) through SplitMix64,
// so operations with the same user seed but different stream ids are
// statistically independent.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t s = seed + 0x632be59bd9b4e019ULL * (stream + 1);
        engine_.seed(splitmix64(s));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1).
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal draw; consumes two 64-bit words.
    double normal() {
        // u1 in (0, 1] so the log is finite.
        double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform01() * static_cast<double>(n)) % n;
    }

private:
    std::mt19937_64 engine_;
};

// Number of worker threads: hardware count capped by SEQFILL_THREADS.
int worker_threads();

// Runs fn(i) for i in [0, n) across worker threads. Each index is
// processed exactly once; callers must write results to per-index slots
// so the outcome is independent of the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// FNV-1a 64-bit hash, hex-encoded; used to fingerprint model files in reports.
std::string fnv1a_hex(const std::string& bytes);

// Shortest round-trip decimal formatting (std::to_chars).
std::string format_double(double v);

}  // namespace seqfill

#endif
