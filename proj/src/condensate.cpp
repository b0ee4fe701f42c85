#include "dmdilc/condensate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fft.hpp"

namespace dmdilc::condensate {

using core::ComplexField1D;
using core::RealField1D;
using core::SpatialGrid1D;

void CondensateParams::validate() const {
    if (!(mass > 0.0)) throw DomainError("mass must be positive");
    if (!(scattering_length >= 0.0)) throw DomainError("scattering length must be non-negative");
    if (!(atom_number > 0.0)) throw DomainError("atom number must be positive");
    if (!(omega_perp > 0.0)) throw DomainError("omega_perp must be positive");
}

double nonlinearity(double rho, const CondensateParams& p) {
    if (rho < 0.0) throw DomainError("negative density");
    const double x = p.coupling() * rho;
    return p.omega_perp * ((1.0 + 3.0 * x) / std::sqrt(1.0 + 2.0 * x) - 1.0);
}

double interaction_energy_density(double rho, const CondensateParams& p) {
    const double x = p.coupling() * rho;
    return p.omega_perp * rho * (std::sqrt(1.0 + 2.0 * x) - 1.0);
}

double invert_nonlinearity(double excess, const CondensateParams& p) {
    if (!(excess > 0.0)) return 0.0;
    if (!(p.coupling() > 0.0)) throw DomainError("Thomas-Fermi inversion needs a non-zero interaction");
    // With s = sqrt(1 + 2x): 1.5 s^2 - (1 + y) s - 0.5 = 0, y = excess / omega_perp.
    const double y = excess / p.omega_perp;
    const double r = std::sqrt(4.0 + 2.0 * y + y * y);
    const double s_minus_1 = (y + (2.0 * y + y * y) / (r + 2.0)) / 3.0;
    const double x = 0.5 * s_minus_1 * (s_minus_1 + 2.0);
    return x / p.coupling();
}

void SolverConfig::validate() const {
    if (!(dtau > 0.0)) throw ConfigError("imaginary time step must be positive");
    if (!(tolerance > 0.0)) throw ConfigError("convergence tolerance must be positive");
    if (check_every == 0 || max_steps == 0) throw ConfigError("step counts must be positive");
}

// ---------------------------------------------------------------- spectral helpers

namespace {

double norm2(std::span<const complex> psi, double dz) {
    std::vector<double> a(psi.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::norm(psi[i]);
    return core::integrate(a, dz);
}

/// (1/2m) integral |phi'|^2 by Parseval on the periodic grid.
double kinetic_energy(std::span<const complex> psi, const SpatialGrid1D& grid, double mass,
                      detail::Fft& fft) {
    std::copy(psi.begin(), psi.end(), fft.buffer().begin());
    fft.forward();
    const auto k = core::fft_wavenumbers(grid.size(), grid.dz());
    double acc = 0.0;
    for (std::size_t m = 0; m < k.size(); ++m) acc += k[m] * k[m] * std::norm(fft.buffer()[m]);
    return acc * grid.dz() / static_cast<double>(grid.size()) / (2.0 * mass);
}

struct Expectations {
    double kinetic, potential, interaction, interaction_energy, norm;
};

Expectations expectations(std::span<const complex> psi, const RealField1D& v,
                          const CondensateParams& p, detail::Fft& fft) {
    const auto& g = v.grid();
    const std::size_t n = psi.size();
    std::vector<double> pot(n), inter(n), inter_e(n), dens(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double rho = std::norm(psi[i]);
        dens[i] = rho;
        pot[i] = v[i] * rho;
        inter[i] = nonlinearity(rho, p) * rho;
        inter_e[i] = interaction_energy_density(rho, p);
    }
    return {kinetic_energy(psi, g, p.mass, fft), core::integrate(pot, g.dz()), core::integrate(inter, g.dz()),
            core::integrate(inter_e, g.dz()), core::integrate(dens, g.dz())};
}

}  // namespace

double chemical_potential(const ComplexField1D& phi, const RealField1D& potential, const CondensateParams& params) {
    if (!(phi.grid() == potential.grid())) throw DomainError("wave function and potential grids differ");
    detail::Fft fft(phi.size());
    const auto e = expectations(phi.values(), potential, params, fft);
    return (e.kinetic + e.potential + e.interaction) / e.norm;
}

double energy(const ComplexField1D& phi, const RealField1D& potential, const CondensateParams& params) {
    if (!(phi.grid() == potential.grid())) throw DomainError("wave function and potential grids differ");
    detail::Fft fft(phi.size());
    const auto e = expectations(phi.values(), potential, params, fft);
    return e.kinetic + e.potential + e.interaction_energy;
}

// ---------------------------------------------------------------- evolver

struct ImaginaryTimeEvolver::Impl {
    RealField1D potential;
    CondensateParams params;
    double dtau;
    std::vector<double> kinetic_half;
    std::vector<complex> psi;
    detail::Fft fft;

    Impl(const RealField1D& v, const CondensateParams& p, double dt, const ComplexField1D& init)
        : potential(v), params(p), dtau(dt), psi(init.values().begin(), init.values().end()), fft(v.size()) {
        const auto& g = v.grid();
        const auto k = core::fft_wavenumbers(g.size(), g.dz());
        kinetic_half.resize(k.size());
        for (std::size_t m = 0; m < k.size(); ++m) {
            kinetic_half[m] = std::exp(-0.5 * dtau * k[m] * k[m] / (2.0 * p.mass));
        }
    }

    void kinetic() {
        std::copy(psi.begin(), psi.end(), fft.buffer().begin());
        fft.forward();
        const double inv_n = 1.0 / static_cast<double>(psi.size());
        for (std::size_t m = 0; m < psi.size(); ++m) fft.buffer()[m] *= kinetic_half[m] * inv_n;
        fft.backward();
        std::copy(fft.buffer().begin(), fft.buffer().end(), psi.begin());
    }

    void local() {
        for (std::size_t i = 0; i < psi.size(); ++i) {
            const double rho = std::norm(psi[i]);
            psi[i] *= std::exp(-dtau * (potential[i] + nonlinearity(rho, params)));
        }
    }

    double normalize() {
        const double n2 = norm2(psi, potential.grid().dz());
        if (!std::isfinite(n2) || !(n2 > 0.0)) throw SolverError("imaginary-time evolution produced a non-finite state");
        const double s = 1.0 / std::sqrt(n2);
        for (auto& c : psi) c *= s;
        return n2;
    }
};

ImaginaryTimeEvolver::ImaginaryTimeEvolver(const RealField1D& potential, const CondensateParams& params,
                                           double dtau, const ComplexField1D& initial) {
    params.validate();
    if (!(dtau > 0.0)) throw DomainError("imaginary time step must be positive");
    if (!(initial.grid() == potential.grid())) throw DomainError("initial state and potential grids differ");
    impl_ = std::make_unique<Impl>(potential, params, dtau, initial);
    impl_->normalize();
}

ImaginaryTimeEvolver::~ImaginaryTimeEvolver() = default;

void ImaginaryTimeEvolver::step() {
    impl_->kinetic();
    impl_->local();
    impl_->kinetic();
    const double n2 = impl_->normalize();
    decay_rate_ = -std::log(n2) / (2.0 * impl_->dtau);
    ++steps_;
}

ComplexField1D ImaginaryTimeEvolver::state() const {
    return ComplexField1D(impl_->potential.grid(), impl_->psi);
}

double ImaginaryTimeEvolver::norm() const { return norm2(impl_->psi, impl_->potential.grid().dz()); }

double ImaginaryTimeEvolver::energy() const {
    const auto e = expectations(impl_->psi, impl_->potential, impl_->params, impl_->fft);
    return e.kinetic + e.potential + e.interaction_energy;
}

double ImaginaryTimeEvolver::chemical_potential() const {
    const auto e = expectations(impl_->psi, impl_->potential, impl_->params, impl_->fft);
    return (e.kinetic + e.potential + e.interaction) / e.norm;
}

// ---------------------------------------------------------------- ground state

ComplexField1D initial_guess(const RealField1D& potential, const CondensateParams& params) {
    const auto& g = potential.grid();
    if (params.coupling() > 0.0) {
        const auto tf = thomas_fermi_density(potential, params);
        std::vector<complex> psi(g.size());
        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = std::sqrt(tf.density[i]);
        return ComplexField1D(g, std::move(psi));
    }
    const auto v = potential.values();
    const auto imin = static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
    const double z0 = g.z(imin);
    constexpr double kWidth = 10.0;
    std::vector<complex> psi(g.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double d = (g.z(i) - z0) / kWidth;
        psi[i] = std::exp(-0.5 * d * d);
    }
    return ComplexField1D(g, std::move(psi));
}

GroundState ground_state(const RealField1D& potential, const CondensateParams& params, const SolverConfig& cfg,
                         const std::optional<ComplexField1D>& initial) {
    params.validate();
    cfg.validate();
    const ComplexField1D start = initial ? *initial : initial_guess(potential, params);
    ImaginaryTimeEvolver evo(potential, params, cfg.dtau, start);

    double mu_prev = evo.chemical_potential();
    double change = std::numeric_limits<double>::infinity();
    bool converged = false;
    while (evo.steps() < cfg.max_steps) {
        evo.step();
        if (evo.steps() % cfg.check_every != 0) continue;
        const double mu = evo.chemical_potential();
        if (!std::isfinite(mu)) throw SolverError("chemical potential became non-finite");
        change = std::abs(mu - mu_prev) / std::max(std::abs(mu), 1e-12) / static_cast<double>(cfg.check_every);
        mu_prev = mu;
        if (change < cfg.tolerance) {
            converged = true;
            break;
        }
    }

    GroundState gs{evo.state(), evo.chemical_potential(), evo.decay_rate(), evo.steps(), converged, change, true};
    double max_excess = 0.0;
    for (std::size_t i = 0; i < potential.size(); ++i) max_excess = std::max(max_excess, gs.mu - potential[i]);
    if (max_excess > 0.0) {
        gs.resolves_healing_length = potential.grid().dz() <= 0.5 / std::sqrt(2.0 * params.mass * max_excess);
    }
    return gs;
}

// ---------------------------------------------------------------- Thomas-Fermi

ThomasFermi thomas_fermi_density(const RealField1D& potential, const CondensateParams& params) {
    params.validate();
    if (!(params.coupling() > 0.0)) throw DomainError("Thomas-Fermi density needs a non-zero interaction");
    const auto& g = potential.grid();
    const double vmin = potential.min();

    auto density_for = [&](double mu) {
        std::vector<double> rho(g.size());
        for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = invert_nonlinearity(mu - potential[i], params);
        return rho;
    };
    auto mass_for = [&](double mu) { return core::integrate(density_for(mu), g.dz()); };

    double lo = vmin;
    double hi = vmin + params.omega_perp;
    int expansions = 0;
    while (mass_for(hi) < 1.0) {
        lo = hi;
        hi = vmin + 2.0 * (hi - vmin);
        if (++expansions > 200) throw SolverError("no chemical potential bracket found for Thomas-Fermi density");
    }
    double mu = hi;
    for (int it = 0; it < 400; ++it) {
        mu = 0.5 * (lo + hi);
        const double m = mass_for(mu);
        if (std::abs(m - 1.0) < 1e-13) break;
        (m < 1.0 ? lo : hi) = mu;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(mu)) break;
    }
    auto rho = density_for(mu);
    // Remove the residual bisection error from the normalisation.
    const double m = core::integrate(rho, g.dz());
    for (double& r : rho) r /= m;
    return {RealField1D(g, std::move(rho)), mu};
}

// ---------------------------------------------------------------- measurement

void MeasurementConfig::validate() const {
    if (!(noise_std >= 0.0)) throw ConfigError("measurement noise must be non-negative");
}

RealField1D measure_density(const RealField1D& rho, const MeasurementConfig& cfg, std::uint64_t shot) {
    cfg.validate();
    for (double r : rho.values()) {
        if (r < 0.0) throw DomainError("negative density passed to measurement");
    }
    if (cfg.noise_std == 0.0) return rho;
    std::mt19937_64 eng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * (shot + 1)));
    auto uniform = [&] { return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53; };
    std::vector<double> out(rho.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        // Box-Muller keeps the stream portable across standard libraries.
        const double g = std::sqrt(-2.0 * std::log(uniform())) * std::cos(2.0 * std::numbers::pi * uniform());
        out[i] = rho[i] + cfg.noise_std * g;
        if (cfg.clamp_nonnegative) out[i] = std::max(out[i], 0.0);
    }
    return RealField1D(rho.grid(), std::move(out));
}

}  // namespace dmdilc::condensate
