// Learning layer: density error, linearised plant, pseudo-inverse learning
// kernel and the virtual-input update.

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "dmdilc/condensate.hpp"
#include "dmdilc/core.hpp"
#include "dmdilc/optics.hpp"

namespace dmdilc::ilc {

/// sqrt(rho_meas) - sqrt(rho_desired), pointwise.
core::RealField1D density_error(const core::RealField1D& rho_meas, const core::RealField1D& rho_desired);

struct SupportCutoffs {
    double eps_opt = 0.0;  // rad/ms; 0 selects 0.05 * V_max of the desired potential
    double eps_mu = 0.0;   // rad/ms; 0 selects 0.15 * omega_perp
};

struct GainProfile {
    /// kappa E_perp_max sqrt(alpha_V (V_d - V_mag) / (mu_d - V_d)) on the
    /// support, zero elsewhere.
    core::RealField1D alpha;
    double alpha_bar = 0.0;
    double kappa = 0.0;
    std::size_t support_size = 0;
};

GainProfile gain_profile(const core::RealField1D& v_desired, const core::RealField1D& v_mag, double mu_desired,
                         const condensate::CondensateParams& params, double e_perp_max, double alpha_v,
                         const SupportCutoffs& cutoffs = {});

/// Linearised plant G(jk) = -alpha_bar F{g_z}, tabulated on the lag grid of
/// `field_grid`.
struct LinearizedModel {
    double alpha_bar;
    core::RealField1D g_z;  // sampled on the lag grid
    core::Spectrum G;
};

LinearizedModel transfer_function(const optics::PsfModel& psf, double alpha_bar,
                                  const core::SpatialGrid1D& field_grid);

struct LearningKernel {
    core::RealField1D kernel;  // centred grid
    double gamma = 0.0;
    std::string model_hash;

    void save_csv(const std::filesystem::path& path) const;
};

/// Default regularisation 1e-2 * max |G|^2.
double default_gamma(const core::Spectrum& G);

/// Inverse transform of conj(G) / (gamma + |G|^2), cropped to the smallest
/// centred window outside which |L| < 1e-8 of its peak.
LearningKernel design_kernel(const core::Spectrum& G, double gamma);

struct UpdateResult {
    core::RealField1D nu;
    std::size_t clamped = 0;
};

/// One learning step on a virtual input sampled at `nu.grid()` positions:
/// nu - (L * e) evaluated by linear interpolation of the fine-grid
/// convolution, then clamped to [0, 1]. The minus sign compensates the
/// negative plant gain folded into L.
UpdateResult update(const core::RealField1D& nu, const core::RealField1D& error, const LearningKernel& kernel);

/// Grid of DMD column centres (spacing = pitch).
core::SpatialGrid1D column_grid(const optics::DmdGeometry& geometry);

}  // namespace dmdilc::ilc
