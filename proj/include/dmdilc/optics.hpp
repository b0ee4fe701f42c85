// Optical truth model: DMD reflectance, incident beam, point-spread function,
// output field on the condensate line and the resulting dipole potential.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dmdilc/core.hpp"

namespace dmdilc::optics {

/// Pixel layout of the DMD. Rows run along the transversal direction y,
/// columns along the longitudinal direction z. Both axes are centred on 0.
struct DmdGeometry {
    std::size_t n_transversal = 100;
    std::size_t n_longitudinal = 400;
    double pitch = 1.0;  // µm

    void validate() const;
    double row_center(std::size_t i) const;
    double column_center(std::size_t j) const;
    /// Half of the transversal extent of the mirror array.
    double half_height() const { return 0.5 * static_cast<double>(n_transversal) * pitch; }
    std::vector<double> column_centers() const;
    bool operator==(const DmdGeometry&) const = default;
};

/// Binary mirror states, stored column by column so that each longitudinal
/// slot's transversal pattern is contiguous.
class DmdPattern {
public:
    DmdPattern(DmdGeometry geometry, std::vector<std::uint8_t> column_major_bits);
    static DmdPattern zeros(const DmdGeometry& g);
    static DmdPattern ones(const DmdGeometry& g);

    const DmdGeometry& geometry() const { return geometry_; }
    bool at(std::size_t row, std::size_t col) const {
        return bits_[col * geometry_.n_transversal + row] != 0;
    }
    void set(std::size_t row, std::size_t col, bool on) {
        bits_[col * geometry_.n_transversal + row] = on ? 1 : 0;
    }
    std::span<const std::uint8_t> column(std::size_t col) const {
        return std::span<const std::uint8_t>(bits_).subspan(col * geometry_.n_transversal,
                                                            geometry_.n_transversal);
    }
    void set_column(std::size_t col, std::span<const std::uint8_t> bits);
    std::span<const std::uint8_t> bits() const { return bits_; }
    std::size_t count_on() const;

    bool operator==(const DmdPattern&) const = default;

private:
    DmdGeometry geometry_;
    std::vector<std::uint8_t> bits_;
};

/// Incident field |E_in| p_y(y) p_z(z) with Gaussian envelopes
/// p(x) = exp(-x^2 / sigma^2). sigma_z = +inf gives a flat longitudinal beam.
struct BeamProfile {
    double amplitude = 1.0;
    double sigma_y = 13.0;   // µm
    double sigma_z = 125.0;  // µm

    void validate() const;
    double p_y(double y) const;
    double p_z(double z) const;
    bool flat_longitudinal() const;
};

/// Separable point-spread function g(y, z) = g_y(y) g_z(z).
///
/// g_z is a unit-mass Gaussian of standard deviation sigma_z. g_y is the
/// field response of a rectangular Fourier-plane aperture, sin(pi y/w)/(pi y/w),
/// truncated at its sixth zero and scaled to unit mass. `y_range` is the
/// half-width over which the kernel is tabulated; transversal evaluations
/// must stay inside it.
class PsfModel {
public:
    PsfModel(double sigma_z = 2.5, double w_y = 100.0, double y_range = 60.0);

    double sigma_z() const { return sigma_z_; }
    double w_y() const { return w_y_; }
    double y_range() const { return y_range_; }
    double support_y() const { return 6.0 * w_y_; }

    double g_z(double z) const;
    double g_y(double y) const;

private:
    double sigma_z_;
    double w_y_;
    double y_range_;
    double g_y_norm_;
};

struct DarkSpot {
    double center = 0.0;  // µm
    double width = 2.0;   // µm
    double depth = 0.3;   // in (0, 1]
};

/// Multiplicative transmission tau(z) = 1 - sum a_k exp(-(z - z_k)^2 / w_k^2),
/// floored at 1e-3. No spots means tau == 1.
struct TransmissionDisturbance {
    std::vector<DarkSpot> spots;

    static constexpr double kFloor = 1e-3;

    void validate() const;
    double tau(double z) const;
    bool empty() const { return spots.empty(); }
};

struct MagneticPotentialSpec {
    double omega_par = 2.0 * 3.14159265358979323846 * 7e-3;  // rad/ms
    double ripple_amplitude = 0.0;                           // rad/ms
    double ripple_wavelength = 10.0;                         // µm
    double ripple_phase = 0.0;                               // rad

    void validate() const;
};

/// erf(x1) - erf(x2) without cancellation in the tails.
double erf_difference(double x1, double x2);

/// Integral over eta in [lo, hi] of g_z(z - eta) p_z(eta), in closed form.
double longitudinal_pixel_integral(const PsfModel& psf, const BeamProfile& beam, double z,
                                   double lo, double hi);

/// Integral over xi in [lo, hi] of g_y(y - xi) p_y(xi) by Gauss-Legendre
/// quadrature (8 nodes per sub-interval, split at the kernel's truncation
/// points).
double transversal_pixel_integral(const PsfModel& psf, const BeamProfile& beam, double y,
                                  double lo, double hi);

/// Per-row weights w_i(y) = integral over row i of g_y(y - xi) p_y(xi),
/// for a fixed list of evaluation points y. The transversal field of a
/// column pattern u at y_s is |E_in| * sum_i u_i w_i(y_s).
class TransversalResponse {
public:
    TransversalResponse(const PsfModel& psf, const BeamProfile& beam, const DmdGeometry& geometry,
                        std::vector<double> y_points);

    std::size_t n_points() const { return y_.size(); }
    std::size_t n_rows() const { return n_rows_; }
    double y(std::size_t s) const { return y_[s]; }
    /// Row weights at evaluation point s (contiguous over rows).
    std::span<const double> weights(std::size_t s) const {
        return std::span<const double>(w_).subspan(s * n_rows_, n_rows_);
    }
    /// Row weights at y = 0.
    std::span<const double> center_weights() const { return w0_; }
    /// sum_i w_i(0): the all-on response at y = 0 per unit amplitude.
    double all_on_center() const { return all_on_; }

private:
    std::vector<double> y_;
    std::size_t n_rows_;
    std::vector<double> w_;
    std::vector<double> w0_;
    double all_on_;
};

/// E_perp_max = |E_in| * sum_i w_i(0).
double e_perp_max(const PsfModel& psf, const BeamProfile& beam, const DmdGeometry& geometry);

/// Amplitude |E_in| such that alpha_V * E_perp_max^2 equals target_potential.
double calibrate_amplitude(const PsfModel& psf, const BeamProfile& beam,
                           const DmdGeometry& geometry, double alpha_v, double target_potential);

/// Output field E_out(0, z) on `grid` by direct summation over every on-pixel
/// of the closed-form per-pixel integrals.
core::ComplexField1D propagate_full(const DmdPattern& pattern, const BeamProfile& beam,
                                    const PsfModel& psf, const core::SpatialGrid1D& grid);

/// V_opt(z) = alpha_V |tau(z) E_out(0, z)|^2.
core::RealField1D potential_from_field(const core::ComplexField1D& e_out, double alpha_v,
                                       const TransmissionDisturbance& tau = {});

/// Reduced model: V_opt(z) = alpha_V [E_perp_max * sum_j nu_j * integral over
/// column j of g_z(z - eta) p_z(eta)]^2 with nu piecewise constant per column.
core::RealField1D propagate_separable(std::span<const double> nu_columns,
                                      const DmdGeometry& geometry, const BeamProfile& beam,
                                      const PsfModel& psf, double e_perp_max, double alpha_v,
                                      const core::SpatialGrid1D& grid);

/// V_mag(z) = (m omega_par^2 / 2) z^2 + A sin(2 pi z / lambda + phase).
core::RealField1D magnetic_potential(const MagneticPotentialSpec& spec, double mass,
                                     const core::SpatialGrid1D& grid);

}  // namespace dmdilc::optics
