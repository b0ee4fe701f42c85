#include "dmdilc/ilc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace dmdilc::ilc {

using core::RealField1D;
using core::SpatialGrid1D;
using core::Spectrum;

RealField1D density_error(const RealField1D& rho_meas, const RealField1D& rho_desired) {
    if (!(rho_meas.grid() == rho_desired.grid())) throw DomainError("density grids differ");
    std::vector<double> e(rho_meas.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (rho_meas[i] < 0.0 || rho_desired[i] < 0.0) throw DomainError("negative density in error computation");
        e[i] = std::sqrt(rho_meas[i]) - std::sqrt(rho_desired[i]);
    }
    return RealField1D(rho_meas.grid(), std::move(e));
}

GainProfile gain_profile(const RealField1D& v_desired, const RealField1D& v_mag, double mu_desired,
                         const condensate::CondensateParams& params, double e_perp_max, double alpha_v,
                         const SupportCutoffs& cutoffs) {
    if (!(v_desired.grid() == v_mag.grid())) throw DomainError("potential grids differ");
    params.validate();
    if (!(params.coupling() > 0.0)) throw DomainError("gain profile needs a non-zero interaction");
    if (!(e_perp_max > 0.0) || !(alpha_v > 0.0)) throw DomainError("optical scale must be positive");

    const double eps_opt = cutoffs.eps_opt > 0.0 ? cutoffs.eps_opt : 0.05 * v_desired.max();
    const double eps_mu = cutoffs.eps_mu > 0.0 ? cutoffs.eps_mu : 0.15 * params.omega_perp;
    const double kappa = 1.0 / std::sqrt(3.0 * params.omega_perp * params.coupling());

    std::vector<double> a(v_desired.size(), 0.0);
    double best = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double opt = v_desired[i] - v_mag[i];
        const double excess = mu_desired - v_desired[i];
        if (opt > eps_opt && excess > eps_mu) {
            a[i] = kappa * e_perp_max * std::sqrt(alpha_v * opt / excess);
            best = std::max(best, a[i]);
            ++count;
        }
    }
    if (count == 0) throw DomainError("gain profile support is empty");
    return {RealField1D(v_desired.grid(), std::move(a)), best, kappa, count};
}

LinearizedModel transfer_function(const optics::PsfModel& psf, double alpha_bar, const SpatialGrid1D& field_grid) {
    if (!(alpha_bar > 0.0)) throw DomainError("plant gain must be positive");
    const auto lags = core::lag_grid(field_grid);
    auto g = RealField1D::from_function(lags, [&](double z) { return psf.g_z(z); });
    auto s = core::spectrum(g);
    std::vector<complex> G(s.values().begin(), s.values().end());
    for (auto& c : G) c *= -alpha_bar;
    return {alpha_bar, std::move(g), Spectrum(lags, std::move(G))};
}

double default_gamma(const Spectrum& G) {
    double m = 0.0;
    for (const auto& c : G.values()) m = std::max(m, std::norm(c));
    return 1e-2 * m;
}

LearningKernel design_kernel(const Spectrum& G, double gamma) {
    if (!(gamma > 0.0)) throw DomainError("regularisation must be positive");
    if (!G.grid().is_centered()) throw DomainError("transfer function must be tabulated on a centred grid");

    std::vector<complex> l(G.size());
    for (std::size_t m = 0; m < l.size(); ++m) l[m] = std::conj(G[m]) / (gamma + std::norm(G[m]));
    const auto full = core::inverse_spectrum(Spectrum(G.grid(), std::move(l))).real();

    const std::size_t n = full.size();
    const std::size_t c = (n - 1) / 2;
    double peak = 0.0;
    for (double v : full.values()) peak = std::max(peak, std::abs(v));
    std::size_t half = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(full[i]) >= 1e-8 * peak) half = std::max(half, i > c ? i - c : c - i);
    }
    half = std::min(half, c);

    const auto grid = SpatialGrid1D::centered(half, G.grid().dz());
    std::vector<double> k(grid.size());
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = full[c - half + i];

    std::string key;
    char buf[64];
    for (const auto& g : G.values()) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g;", g.real(), g.imag());
        key += buf;
    }
    return {RealField1D(grid, std::move(k)), gamma, core::hex64(core::fnv1a(key))};
}

void LearningKernel::save_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "z,L\n";
    char buf[96];
    const auto& g = kernel.grid();
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", g.z(i), kernel[i]);
        out << buf;
    }
    if (!out) throw IoError("failed writing " + path.string());
}

UpdateResult update(const RealField1D& nu, const RealField1D& error, const LearningKernel& kernel) {
    const auto correction = core::convolve(error, kernel.kernel).field;
    std::vector<double> next(nu.size());
    std::size_t clamped = 0;
    for (std::size_t j = 0; j < next.size(); ++j) {
        const double v = nu[j] - correction.interpolate(nu.grid().z(j));
        if (v < 0.0 || v > 1.0) ++clamped;
        next[j] = std::clamp(v, 0.0, 1.0);
    }
    return {RealField1D(nu.grid(), std::move(next)), clamped};
}

SpatialGrid1D column_grid(const optics::DmdGeometry& geometry) {
    geometry.validate();
    return SpatialGrid1D(static_cast<double>(geometry.n_longitudinal - 1) * geometry.pitch, geometry.n_longitudinal);
}

}  // namespace dmdilc::ilc
