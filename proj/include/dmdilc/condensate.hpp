// Stationary quasi-1D condensate: npSE nonlinearity, ground state by
// split-step imaginary-time evolution, chemical potential, Thomas-Fermi
// density and the density measurement model.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "dmdilc/core.hpp"

namespace dmdilc::condensate {

struct CondensateParams {
    double mass = 1.368;                                      // ms/µm^2
    double scattering_length = 5.2e-3;                        // µm
    double atom_number = 5000.0;
    double omega_perp = 2.0 * 3.14159265358979323846 * 1.4;  // rad/ms

    void validate() const;
    /// a_s N, the density scale of the nonlinearity.
    double coupling() const { return scattering_length * atom_number; }
};

/// omega_perp ((1 + 3 a N rho) / sqrt(1 + 2 a N rho) - 1).
double nonlinearity(double rho, const CondensateParams& params);

/// Antiderivative of the nonlinearity in rho:
/// omega_perp (rho sqrt(1 + 2 a N rho) - rho).
double interaction_energy_density(double rho, const CondensateParams& params);

/// Non-negative rho with nonlinearity(rho) == excess (0 for excess <= 0).
/// Closed-form root of the quadratic in sqrt(1 + 2 a N rho).
double invert_nonlinearity(double excess, const CondensateParams& params);

struct SolverConfig {
    double dtau = 1e-3;  // ms
    std::size_t max_steps = 2'000'000;
    double tolerance = 1e-10;  // relative change of mu per step
    std::size_t check_every = 20;

    void validate() const;
};

struct GroundState {
    core::ComplexField1D phi;
    double mu = 0.0;
    /// Independent estimate from the per-step norm decay.
    double mu_decay = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    /// Last observed relative mu change per step.
    double last_change = 0.0;
    /// dz <= 0.5 / sqrt(2 m max(mu - V)).
    bool resolves_healing_length = true;

    core::RealField1D density() const { return phi.abs2(); }
};

/// Strang-split imaginary-time propagator with renormalisation after every
/// step. Exposed so callers can observe per-step invariants.
class ImaginaryTimeEvolver {
public:
    ImaginaryTimeEvolver(const core::RealField1D& potential, const CondensateParams& params,
                         double dtau, const core::ComplexField1D& initial);
    ~ImaginaryTimeEvolver();
    ImaginaryTimeEvolver(const ImaginaryTimeEvolver&) = delete;
    ImaginaryTimeEvolver& operator=(const ImaginaryTimeEvolver&) = delete;

    void step();
    std::size_t steps() const { return steps_; }
    core::ComplexField1D state() const;
    double norm() const;
    /// -ln(norm^2 before renormalisation) / (2 dtau) of the last step.
    double decay_rate() const { return decay_rate_; }
    double energy() const;
    double chemical_potential() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::size_t steps_ = 0;
    double decay_rate_ = 0.0;
};

/// Gaussian of width 10 µm centred on the potential minimum, or the
/// Thomas-Fermi profile when the interaction is non-zero.
core::ComplexField1D initial_guess(const core::RealField1D& potential, const CondensateParams& params);

GroundState ground_state(const core::RealField1D& potential, const CondensateParams& params,
                         const SolverConfig& cfg,
                         const std::optional<core::ComplexField1D>& initial = std::nullopt);

/// mu = integral phi* (-(1/2m) phi'' + V phi + nonlinearity(|phi|^2) phi)
/// with a spectral second derivative; phi is normalised internally.
double chemical_potential(const core::ComplexField1D& phi, const core::RealField1D& potential,
                          const CondensateParams& params);

/// npSE energy functional.
double energy(const core::ComplexField1D& phi, const core::RealField1D& potential,
              const CondensateParams& params);

struct ThomasFermi {
    core::RealField1D density;
    double mu;
};

/// Density neglecting kinetic energy, normalised to unit integral.
ThomasFermi thomas_fermi_density(const core::RealField1D& potential, const CondensateParams& params);

struct MeasurementConfig {
    double noise_std = 0.0;  // 1/µm
    std::uint64_t seed = 7;
    bool clamp_nonnegative = true;

    void validate() const;
};

/// rho plus white Gaussian noise. `shot` selects an independent, reproducible
/// noise realisation (e.g. the iteration index).
core::RealField1D measure_density(const core::RealField1D& rho, const MeasurementConfig& cfg,
                                  std::uint64_t shot = 0);

}  // namespace dmdilc::condensate
