#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "dmdilc/core.hpp"
#include "gen.hpp"

using namespace dmdilc;
using core::RealField1D;
using core::SpatialGrid1D;

namespace {

double gaussian_unit(double z, double s) {
    return std::exp(-z * z / (2.0 * s * s)) / (s * std::sqrt(2.0 * std::numbers::pi));
}

// O(n^2) reference for the zero-padded convolution.
std::vector<double> direct_convolution(const RealField1D& f, const RealField1D& k) {
    const auto& g = f.grid();
    const double dz = g.dz();
    const long half = static_cast<long>(k.size() - 1) / 2;
    std::vector<double> out(f.size(), 0.0);
    for (long i = 0; i < static_cast<long>(f.size()); ++i) {
        for (long j = 0; j < static_cast<long>(f.size()); ++j) {
            const long lag = i - j;
            if (lag < -half || lag > half) continue;
            out[i] += dz * f[j] * k[static_cast<std::size_t>(lag + half)];
        }
    }
    return out;
}

}  // namespace

TEST_CASE("grid samples span the domain uniformly") {
    const SpatialGrid1D g(400.0, 1024);
    CHECK(g.front() == -200.0);
    CHECK(g.z(g.size() - 1) == doctest::Approx(200.0).epsilon(1e-14));
    CHECK(g.dz() == doctest::Approx(400.0 / 1023.0).epsilon(1e-15));
    const auto s = g.samples();
    for (std::size_t i = 1; i < s.size(); ++i) {
        CHECK(s[i] > s[i - 1]);
        CHECK(std::abs((s[i] - s[i - 1]) - g.dz()) <= 1e-12 * g.dz());
    }
    CHECK_THROWS_AS(SpatialGrid1D(0.0, 10), DomainError);
    CHECK_THROWS_AS(SpatialGrid1D(10.0, 1), DomainError);

    const auto c = SpatialGrid1D::centered(5, 0.5);
    CHECK(c.size() == 11);
    CHECK(c.is_centered());
    CHECK(c.z(5) == 0.0);
}

TEST_CASE("fields reject non-finite values") {
    const SpatialGrid1D g(10.0, 5);
    CHECK_THROWS_AS(RealField1D(g, {0, 1, std::numeric_limits<double>::quiet_NaN(), 0, 0}), DomainError);
    CHECK_THROWS_AS(RealField1D(g, {0, 1, 2}), DomainError);
}

TEST_CASE("integrate") {
    const SpatialGrid1D g(400.0, 1024);
    CHECK(core::integrate(RealField1D::from_function(g, [](double) { return 1.0; })) ==
          doctest::Approx(400.0).epsilon(1e-14));
    const double odd = core::integrate(RealField1D::from_function(g, [](double z) { return z; }));
    CHECK(std::abs(odd) <= 1e-12 * 400.0 * 200.0);

    const double sigma = 2.5;
    const auto gauss = RealField1D::from_function(g, [&](double z) { return std::exp(-z * z / (sigma * sigma)); });
    const double exact = sigma * std::sqrt(std::numbers::pi);
    CHECK(std::abs(core::integrate(gauss) - exact) <= 1e-8 * exact);

    // High-resolution quadrature oracle agrees with the closed form.
    const SpatialGrid1D fine(400.0, 64001);
    const auto gf = RealField1D::from_function(fine, [&](double z) { return std::exp(-z * z / (sigma * sigma)); });
    CHECK(std::abs(core::integrate(gf) - exact) <= 1e-12 * exact);
}

TEST_CASE("spectrum of a delta is flat") {
    const SpatialGrid1D g(400.0, 1025);
    std::vector<double> v(g.size(), 0.0);
    v[512] = 1.0 / g.dz();
    const auto s = core::spectrum(RealField1D(g, v));
    for (std::size_t m = 0; m < s.size(); ++m) CHECK(std::abs(s[m] - complex(1.0, 0.0)) < 1e-12);
}

TEST_CASE("spectrum round trip") {
    gen::Source src(11);
    const SpatialGrid1D g(400.0, 1024);
    for (int t = 0; t < 10; ++t) {
        const auto f = src.smooth_field(g);
        const auto back = core::inverse_spectrum(core::spectrum(f));
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            num = std::max(num, std::abs(back[i] - complex(f[i], 0.0)));
            den = std::max(den, std::abs(f[i]));
        }
        CHECK(num <= 1e-10 * den);
    }
}

TEST_CASE("spectrum of a unit Gaussian") {
    const double sigma = 2.5;
    const SpatialGrid1D g(400.0, 1024);
    const auto f = RealField1D::from_function(g, [&](double z) { return gaussian_unit(z, sigma); });
    const auto s = core::spectrum(f);
    for (std::size_t m = 0; m < s.size(); ++m) {
        const double k = s.k(m);
        CHECK(std::abs(s[m] - complex(std::exp(-0.5 * k * k * sigma * sigma), 0.0)) < 1e-8);
    }
    // Direct summation oracle at a few wavenumbers.
    for (std::size_t m : {std::size_t{0}, std::size_t{7}, std::size_t{40}, s.size() - 3}) {
        complex acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) acc += g.dz() * f[i] * std::polar(1.0, -s.k(m) * g.z(i));
        CHECK(std::abs(acc - s[m]) < 1e-12);
    }
}

TEST_CASE("convolution with a unit delta is the identity") {
    gen::Source src(5);
    const SpatialGrid1D g(400.0, 1024);
    const auto f = src.smooth_field(g);
    const auto kg = SpatialGrid1D::centered(8, g.dz());
    std::vector<double> k(kg.size(), 0.0);
    k[8] = 1.0 / g.dz();
    const auto r = core::convolve(f, RealField1D(kg, k));
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(r.field[i] - f[i]) <= 1e-10 * (1.0 + std::abs(f[i])));
}

TEST_CASE("two Gaussians convolve to a wider Gaussian") {
    const double s1 = 2.5, s2 = 4.0;
    const SpatialGrid1D g(400.0, 1024);
    const auto f = RealField1D::from_function(g, [&](double z) { return gaussian_unit(z, s1); });
    const auto kgrid = core::lag_grid(g);
    const auto k = RealField1D::from_function(kgrid, [&](double z) { return gaussian_unit(z, s2); });
    const auto r = core::convolve(f, k);
    CHECK_FALSE(r.kernel_not_decayed);
    const double s = std::hypot(s1, s2);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(r.field[i] - gaussian_unit(g.z(i), s)) < 1e-6);
}

TEST_CASE("convolution of zero is zero") {
    const SpatialGrid1D g(100.0, 256);
    const auto k = RealField1D::from_function(SpatialGrid1D::centered(20, g.dz()),
                                              [](double z) { return std::exp(-z * z); });
    const auto r = core::convolve(RealField1D(g), k);
    for (double v : r.field.values()) CHECK(v == 0.0);
}

TEST_CASE("slowly decaying kernels are flagged") {
    const SpatialGrid1D g(100.0, 256);
    const auto k = RealField1D::from_function(SpatialGrid1D::centered(20, g.dz()), [](double) { return 1.0; });
    CHECK(core::convolve(RealField1D(g), k).kernel_not_decayed);
}

TEST_CASE("convolution rejects mismatched grids") {
    const SpatialGrid1D g(100.0, 256);
    const RealField1D even(SpatialGrid1D(10.0, 10));
    CHECK_THROWS_AS(core::convolve(RealField1D(g), even), DomainError);
    const RealField1D wrong(SpatialGrid1D::centered(3, 2.0 * g.dz()));
    CHECK_THROWS_AS(core::convolve(RealField1D(g), wrong), DomainError);
}

TEST_CASE("property: Parseval") {
    gen::Source src(101);
    for (int t = 0; t < 50; ++t) {
        const SpatialGrid1D g(src.uniform(50.0, 500.0), 64 + src.index(2000));
        const auto f = src.smooth_field(g);
        double lhs = 0.0;
        for (double v : f.values()) lhs += v * v;
        lhs *= g.dz();
        const auto s = core::spectrum(f);
        double rhs = 0.0;
        for (const auto& c : s.values()) rhs += std::norm(c);
        rhs *= s.dk() / (2.0 * std::numbers::pi);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * lhs);
    }
}

TEST_CASE("property: spectral convolution equals direct summation") {
    gen::Source src(202);
    for (int t = 0; t < 30; ++t) {
        const SpatialGrid1D g(src.uniform(20.0, 200.0), 16 + src.index(241));
        const auto f = src.smooth_field(g);
        const std::size_t half = 1 + src.index(g.size());
        const auto k = src.smooth_field(SpatialGrid1D::centered(half, g.dz()));
        const auto fast = core::convolve(f, k).field;
        const auto slow = direct_convolution(f, k);
        double scale = 0.0;
        for (double v : slow) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < slow.size(); ++i) CHECK(std::abs(fast[i] - slow[i]) <= 1e-8 * scale);
    }
}

TEST_CASE("property: integrate is linear and positive") {
    gen::Source src(303);
    for (int t = 0; t < 100; ++t) {
        const SpatialGrid1D g(src.uniform(1.0, 100.0), 2 + src.index(500));
        const auto a = src.smooth_field(g);
        const auto b = src.smooth_field(g);
        const double x = src.uniform(-3.0, 3.0), y = src.uniform(-3.0, 3.0);
        const double lhs = core::integrate(x * a + y * b);
        const double rhs = x * core::integrate(a) + y * core::integrate(b);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(x * core::integrate(a)) + std::abs(y * core::integrate(b))));
        CHECK(core::integrate(src.smooth_field(g, true)) >= 0.0);
    }
}

TEST_CASE("fnv1a is stable") {
    CHECK(core::hex64(core::fnv1a("")) == "cbf29ce484222325");
    CHECK(core::hex64(core::fnv1a("a")) == "af63dc4c8601ec8c");
}
