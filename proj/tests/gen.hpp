// Seeded generators for property tests.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dmdilc/core.hpp"

namespace gen {

class Source {
public:
    explicit Source(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
    bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

    /// Sum of a few Gaussian bumps that vanish at the grid ends.
    dmdilc::core::RealField1D smooth_field(const dmdilc::core::SpatialGrid1D& g, bool nonnegative = false) {
        const std::size_t bumps = 1 + index(5);
        std::vector<double> c(bumps), w(bumps), a(bumps);
        const double half = 0.5 * g.length();
        for (std::size_t b = 0; b < bumps; ++b) {
            c[b] = uniform(-0.5 * half, 0.5 * half);
            w[b] = uniform(0.03, 0.12) * g.length();
            a[b] = nonnegative ? uniform(0.1, 2.0) : uniform(-2.0, 2.0);
        }
        return dmdilc::core::RealField1D::from_function(g, [&](double z) {
            double s = 0.0;
            for (std::size_t b = 0; b < bumps; ++b) s += a[b] * std::exp(-std::pow((z - c[b]) / w[b], 2));
            return s;
        });
    }

    std::vector<std::uint8_t> bits(std::size_t n, double p = 0.5) {
        std::vector<std::uint8_t> out(n);
        for (auto& b : out) b = coin(p) ? 1 : 0;
        return out;
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace gen
