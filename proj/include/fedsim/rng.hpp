#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

// Seed derivation and explicit samplers.
//
// Every random decision in the simulator is drawn from an RngStream whose seed
// is derived from a parent seed plus a salt (a name like "partition", or a
// (client_id, round) pair). Streams are therefore independent of execution
// order and thread scheduling, which is what makes serial and parallel runs
// byte-identical. Samplers are written out explicitly instead of using
// std::*_distribution, whose algorithms are implementation-defined.

namespace fedsim {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    return splitmix64(base ^ splitmix64(salt));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view name) {
    return derive_seed(base, fnv1a64(name));
}

// Per-(client, round) stream: hash(master_seed, client_id, round).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(base, a), b);
}

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n), unbiased (rejection sampling). n must be > 0.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t rem = (0 - n) % n;  // 2^64 mod n
        if (rem == 0) return engine_() % n;
        const std::uint64_t limit = 0 - rem;  // largest multiple of n
        for (;;) {
            const std::uint64_t r = engine_();
            if (r < limit) return r % n;
        }
    }

    // Box-Muller. Each call consumes exactly two engine draws.
    double normal(double mean, double stddev) {
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        constexpr double two_pi = 6.283185307179586476925286766559;
        return mean + stddev * radius * std::cos(two_pi * u2);
    }

    // Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 handled by the boost
    // Gamma(shape+1) * U^(1/shape).
    double gamma(double shape) {
        if (shape < 1.0) {
            double u;
            do {
                u = uniform();
            } while (u <= 0.0);
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal(0.0, 1.0);
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Dirichlet(concentration * 1_k): k gamma draws, normalized.
    std::vector<double> dirichlet(double concentration, std::size_t k) {
        std::vector<double> p(k);
        double sum = 0.0;
        for (auto& v : p) {
            v = gamma(concentration);
            sum += v;
        }
        if (sum <= 0.0) {  // all draws underflowed; fall back to uniform
            for (auto& v : p) v = 1.0 / static_cast<double>(k);
            return p;
        }
        for (auto& v : p) v /= sum;
        return p;
    }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace fedsim
