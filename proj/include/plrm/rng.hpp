#pragma once

#include <cstdint>

#include "plrm/dist.hpp"
#include "plrm/model.hpp"

namespace plrm {

/// splitmix64 finalizer: a bijective 64-bit mix.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based stream: the state is a pure function of (seed, stream, draw
/// index), so replications can be split deterministically across threads and
/// serial/parallel runs agree bit for bit.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : state_(mix64(mix64(seed ^ 0x5851F42D4C957F2DULL) + stream)) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform draw strictly inside (0, 1).
    double next_unit() {
        return (next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    /// Standard normal by inverse CDF (deterministic across platforms).
    double next_normal() { return normal_quantile(next_unit()); }

    /// One multinomial trial over the probability vector pi.
    int next_category(const Eigen::Ref<const Vector>& pi) {
        const double u = next_unit();
        double cum = 0.0;
        for (Eigen::Index j = 0; j < pi.size(); ++j) {
            cum += pi[j];
            if (u <= cum) return static_cast<int>(j);
        }
        return static_cast<int>(pi.size()) - 1;
    }

private:
    std::uint64_t state_;
};

}  // namespace plrm
