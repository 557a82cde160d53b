#pragma once

#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nfb {

// Deterministic random source. Everything stochastic in the engine draws from
// this wrapper rather than from <random> distributions: the mt19937_64 engine
// is fully specified by the standard but the distributions are not, and
// archive reproducibility across toolchains depends on every sampled byte.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix(seed)) {}

    // Derives an independent stream from a root seed. Used to give each
    // simulated sequence its own stream so sequences can be regenerated in
    // isolation and in any order.
    static Rng split(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t x = splitmix(seed + 0x9e3779b97f4a7c15ULL * (stream + 1));
        return Rng(x ^ splitmix(stream ^ 0xbf58476d1ce4e5b9ULL));
    }

    std::uint64_t next_u64() {
        // xoshiro-free choice: one splitmix64 step per draw keeps the state a
        // single word and the sequence trivially portable.
        return splitmix_step(state_);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; the spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
        std::uint64_t limit = ~0ULL - ~0ULL % n;
        std::uint64_t v;
        do { v = next_u64(); } while (v >= limit);
        return v % n;
    }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Poisson by inversion; adequate for the small rates used here.
    std::uint64_t poisson(double mean) {
        if (mean < 0.0) throw std::invalid_argument("Rng::poisson: mean must be >= 0");
        if (mean == 0.0) return 0;
        double l = std::exp(-mean);
        double p = 1.0;
        std::uint64_t k = 0;
        do {
            ++k;
            p *= uniform();
        } while (p > l);
        return k - 1;
    }

private:
    static std::uint64_t splitmix_step(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t splitmix(std::uint64_t x) { return splitmix_step(x); }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace nfb
