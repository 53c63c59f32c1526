#ifndef MAXSTABLE_RNG_HPP
#define MAXSTABLE_RNG_HPP

#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "maxstable/normal.hpp"

namespace maxstable {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace detail

/// Deterministic random stream addressed by (seed, stream_id).
///
/// The generator state is derived from both identifiers through SplitMix64,
/// so distinct stream ids give statistically independent xoshiro256++
/// sequences and the same pair always reproduces the same draws, regardless
/// of which thread or replicate order consumes them.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id) {
        std::uint64_t mix = seed ^ (0x6a09e667f3bcc909ULL + stream_id * 0x9e3779b97f4a7c15ULL);
        for (auto& word : state_) word = detail::splitmix64(mix);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64() {
        std::uint64_t* s = state_;
        const std::uint64_t result = detail::rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = detail::rotl(s[3], 45);
        return result;
    }

    /// Uniform draw strictly inside (0,1): (k + 0.5) * 2^-53.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Unit-mean exponential.
    double exponential() { return -std::log(uniform()); }

    /// Standard normal via the quantile function (no rejection, one draw).
    double normal() { return inv_std_normal_cdf(uniform()); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t state_[4];
};

/// Pareto inverse CDF: P(Z > z) = 1/z for z >= 1.
inline double pareto_from_uniform(double v) {
    if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument("pareto_from_uniform: v must be in (0,1)");
    return 1.0 / v;
}

/// Standard Pareto variable, P(Z > z) = 1/z, z >= 1.
inline double sample_pareto(RngStream& rng) {
    return pareto_from_uniform(rng.uniform());
}

/// Atoms of a Frechet point process (intensity u^-2 du scaled by total_mass),
/// stored in decreasing order: U_i = total_mass / Gamma_i.
struct FrechetAtoms {
    std::vector<double> values;
    double total_mass = 0.0;
};

/// Atoms from explicit cumulative-exponential increments (test seam).
inline FrechetAtoms frechet_atoms_from_exponentials(double mass, const std::vector<double>& exp_draws) {
    if (!(mass > 0.0)) throw std::invalid_argument("frechet atoms: mass must be positive");
    FrechetAtoms atoms;
    atoms.total_mass = mass;
    atoms.values.reserve(exp_draws.size());
    double gamma = 0.0;
    for (double e : exp_draws) {
        if (!(e > 0.0)) throw std::invalid_argument("frechet atoms: exponential draws must be positive");
        gamma += e;
        atoms.values.push_back(mass / gamma);
    }
    return atoms;
}

/// The largest `budget` atoms of the Frechet point process with the given mass.
inline FrechetAtoms frechet_ppp_stream(RngStream& rng, double mass, int budget) {
    if (!(mass > 0.0)) throw std::invalid_argument("frechet_ppp_stream: mass must be positive");
    if (budget < 1) throw std::invalid_argument("frechet_ppp_stream: budget must be >= 1");
    FrechetAtoms atoms;
    atoms.total_mass = mass;
    atoms.values.reserve(static_cast<std::size_t>(budget));
    double gamma = 0.0;
    for (int i = 0; i < budget; ++i) {
        gamma += rng.exponential();
        atoms.values.push_back(mass / gamma);
    }
    return atoms;
}

} // namespace maxstable

#endif
