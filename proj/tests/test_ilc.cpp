#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "dmdilc/harness.hpp"
#include "dmdilc/ilc.hpp"
#include "gen.hpp"

using namespace dmdilc;
using namespace dmdilc::ilc;
using core::RealField1D;
using core::SpatialGrid1D;

namespace {

const SpatialGrid1D kGrid(400.0, 1024);

const LinearizedModel& model() {
    static const LinearizedModel m = transfer_function(optics::PsfModel{}, 0.71, kGrid);
    return m;
}

const LearningKernel& kernel() {
    static const LearningKernel k = design_kernel(model().G, default_gamma(model().G));
    return k;
}

RealField1D column_nu(gen::Source& src, const SpatialGrid1D& cols, double lo, double hi) {
    std::vector<double> v(cols.size());
    for (auto& x : v) x = src.uniform(lo, hi);
    return RealField1D(cols, std::move(v));
}

}  // namespace

TEST_CASE("density error") {
    gen::Source src(1);
    const auto rho = src.smooth_field(kGrid, true);
    for (double v : density_error(rho, rho).values()) CHECK(v == 0.0);
    const auto e = density_error(4.0 * rho, rho);
    for (std::size_t i = 0; i < rho.size(); ++i) CHECK(e[i] == doctest::Approx(std::sqrt(rho[i])).epsilon(1e-15));
    CHECK_THROWS_AS(density_error(-1.0 * rho, rho), DomainError);
    CHECK_THROWS_AS(density_error(rho, RealField1D(SpatialGrid1D(400.0, 100))), DomainError);
}

TEST_CASE("gain profile") {
    const condensate::CondensateParams p;
    const auto vd = harness::desired_potential({}, kGrid);
    const auto vmag = optics::magnetic_potential({}, p.mass, kGrid);
    const double mu = 10.24;
    const auto g = gain_profile(vd, vmag, mu, p, 2.0, 1.0);
    CHECK(g.alpha_bar > 0.0);
    CHECK(std::isfinite(g.alpha_bar));
    CHECK(g.alpha_bar == g.alpha.max());
    CHECK(g.kappa == doctest::Approx(1.0 / std::sqrt(3.0 * p.omega_perp * p.coupling())).epsilon(1e-15));
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
        if (g.alpha[i] == 0.0) continue;
        const double expect = g.kappa * 2.0 * std::sqrt((vd[i] - vmag[i]) / (mu - vd[i]));
        CHECK(g.alpha[i] == doctest::Approx(expect).epsilon(1e-14));
    }

    // Pushing the TF-edge cutoff towards zero lets the gain grow without bound.
    const auto tight = gain_profile(vd, vmag, mu, p, 2.0, 1.0, {0.0, 1e-6 * p.omega_perp});
    CHECK(tight.alpha_bar > 10.0 * g.alpha_bar);

    CHECK_THROWS_AS(gain_profile(vmag, vmag, mu, p, 2.0, 1.0), DomainError);
}

TEST_CASE("transfer function of the Gaussian PSF") {
    const auto& m = model();
    CHECK(std::abs(m.G[0] - complex(-0.71, 0.0)) < 1e-12);
    const double s = optics::PsfModel{}.sigma_z();
    const std::size_t n = m.G.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double kk = m.G.k(k);
        CHECK(std::abs(std::abs(m.G[k]) - 0.71 * std::exp(-0.5 * kk * kk * s * s)) < 1e-8);
        if (k > 0) CHECK(std::abs(m.G[n - k] - std::conj(m.G[k])) < 1e-12);
    }
    CHECK_THROWS_AS(transfer_function(optics::PsfModel{}, 0.0, kGrid), DomainError);
}

TEST_CASE("learning kernel") {
    const auto& k = kernel();
    CHECK(default_gamma(model().G) == doctest::Approx(1e-2 * 0.71 * 0.71).epsilon(1e-12));
    const auto& L = k.kernel;
    REQUIRE(L.grid().is_centered());
    const std::size_t n = L.size();
    double peak = 0.0;
    for (double v : L.values()) peak = std::max(peak, std::abs(v));
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(L[i] - L[n - 1 - i]) <= 1e-10 * peak);
    CHECK(L[(n - 1) / 2] < 0.0);
    CHECK(L.max() > 0.0);  // oscillatory side lobes
    CHECK(std::abs(L[0]) < 1e-6 * peak);
    CHECK_THROWS_AS(design_kernel(model().G, 0.0), DomainError);
}

TEST_CASE("constant plant inverts to a scaled delta") {
    const SpatialGrid1D g = SpatialGrid1D::centered(50, 0.5);
    const double g0 = -0.8;
    const core::Spectrum G(g, std::vector<complex>(g.size(), complex(g0, 0.0)));
    const auto k = design_kernel(G, 1e-12);
    const std::size_t c = (k.kernel.size() - 1) / 2;
    CHECK(k.kernel[c] == doctest::Approx(1.0 / (g0 * g.dz())).epsilon(1e-9));
    for (std::size_t i = 0; i < k.kernel.size(); ++i) {
        if (i != c) CHECK(std::abs(k.kernel[i]) < 1e-9);
    }
}

TEST_CASE("kernel CSV export") {
    const auto path = std::filesystem::temp_directory_path() / "dmdilc_kernel.csv";
    kernel().save_csv(path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "z,L");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        double z = 0.0, v = 0.0;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf", &z, &v) == 2);
        CHECK(z == kernel().kernel.grid().z(rows));
        CHECK(v == kernel().kernel[rows]);
        ++rows;
    }
    CHECK(rows == kernel().kernel.size());
    std::filesystem::remove(path);
}

TEST_CASE("column grid") {
    const auto g = column_grid(optics::DmdGeometry{});
    CHECK(g.size() == 400);
    CHECK(g.dz() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g.z(0) == -199.5);
}

TEST_CASE("saturation clamps and leaves the rest finite") {
    const auto cols = column_grid(optics::DmdGeometry{});
    const RealField1D nu(cols, std::vector<double>(cols.size(), 0.5));
    const auto e = RealField1D::from_function(kGrid, [](double z) { return -0.5 * std::exp(-z * z / 4.0); });
    const auto r = update(nu, e, kernel());
    CHECK(r.clamped > 0);
    std::size_t zeros = 0;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        CHECK(r.nu[j] >= 0.0);
        CHECK(r.nu[j] <= 1.0);
        zeros += r.nu[j] == 0.0;
    }
    CHECK(zeros > 0);
    CHECK(r.nu.interpolate(0.0) == 0.0);
    CHECK(r.nu[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("property: zero error is a fixed point") {
    gen::Source src(2);
    const auto cols = column_grid(optics::DmdGeometry{});
    for (int t = 0; t < 50; ++t) {
        const auto nu = column_nu(src, cols, 0.0, 1.0);
        const auto r = update(nu, RealField1D(kGrid), kernel());
        CHECK(r.clamped == 0);
        for (std::size_t j = 0; j < cols.size(); ++j) CHECK(r.nu[j] == nu[j]);
    }
}

TEST_CASE("property: update is linear below saturation") {
    gen::Source src(3);
    const auto cols = column_grid(optics::DmdGeometry{});
    for (int t = 0; t < 30; ++t) {
        const auto nu = column_nu(src, cols, 0.3, 0.7);
        const auto e1 = 0.01 * src.smooth_field(kGrid);
        const auto e2 = 0.01 * src.smooth_field(kGrid);
        const double a = src.uniform(-1.0, 1.0), b = src.uniform(-1.0, 1.0);
        const auto u1 = update(nu, e1, kernel()).nu - nu;
        const auto u2 = update(nu, e2, kernel()).nu - nu;
        const auto r = update(nu, a * e1 + b * e2, kernel());
        REQUIRE(r.clamped == 0);
        const auto u = r.nu - nu;
        for (std::size_t j = 0; j < cols.size(); ++j) CHECK(std::abs(u[j] - (a * u1[j] + b * u2[j])) <= 1e-10);
    }
}

TEST_CASE("property: kernels of Gaussian plants are even") {
    gen::Source src(4);
    for (int t = 0; t < 10; ++t) {
        const SpatialGrid1D g(src.uniform(100.0, 400.0), 256 + src.index(800));
        const auto m = transfer_function(optics::PsfModel(src.uniform(1.0, 5.0)), src.uniform(0.1, 2.0), g);
        const auto k = design_kernel(m.G, src.uniform(1e-3, 1e-1) * default_gamma(m.G) * 100.0);
        const auto& L = k.kernel;
        double peak = 0.0;
        for (double v : L.values()) peak = std::max(peak, std::abs(v));
        for (std::size_t i = 0; i < L.size(); ++i) CHECK(std::abs(L[i] - L[L.size() - 1 - i]) <= 1e-10 * peak);
    }
}
