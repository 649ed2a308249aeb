#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rnnls {

/// Name of the generator family; written into every result file.
inline constexpr std::string_view kGeneratorFamily =
    "mt19937_64 seeded by std::seed_seq{seed_lo, seed_hi, stream_lo, stream_hi}";

/// Deterministic random stream keyed by (seed, stream id).
///
/// The engine and std::seed_seq are fully specified by the standard, and every
/// variate below is derived from raw 64-bit draws by explicit formulas, so a
/// given (seed, stream) produces the same sequence on every platform.
/// Not thread-safe; parallel work derives child streams instead of sharing one.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }

    /// Child stream with the same seed and a stream id mixed from (stream_id, key).
    RngStream derive(std::uint64_t key) const;

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// True with probability p (p >= 1 always true, p <= 0 always false).
    bool bernoulli(double p) { return uniform() < p; }

    /// +1 or -1 with probability 1/2 each.
    double sign() { return (next_u64() >> 63) != 0 ? -1.0 : 1.0; }

    /// Standard normal via Box-Muller (one value per call, second discarded).
    double normal();

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer, used to combine stream keys.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace rnnls
