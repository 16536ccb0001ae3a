#pragma once

#include <cstdint>
#include <random>

namespace sdbf {

/// Seeded random stream. Every sampler takes one of these explicitly; two
/// streams built from the same (seed, stream_id) produce identical sequences.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream_id = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
        engine_.seed(seq);
    }

    double uniform() { return std::generate_canonical<double, 53>(engine_); }
    double normal() { return normal_(engine_); }
    /// Gamma with the given shape and unit scale.
    double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }
    double chi_squared(double df) { return 2.0 * gamma(0.5 * df); }
    std::uint64_t next_u64() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace sdbf
