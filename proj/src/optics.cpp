#include "dmdilc/optics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace dmdilc::optics {

using core::ComplexField1D;
using core::RealField1D;
using core::SpatialGrid1D;

namespace {

constexpr std::array<double, 8> kGlNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

template <class F>
double gauss_legendre(F&& f, double lo, double hi) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double acc = 0.0;
    for (std::size_t q = 0; q < kGlNodes.size(); ++q) acc += kGlWeights[q] * f(mid + half * kGlNodes[q]);
    return half * acc;
}

double sinc_pi(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x * std::numbers::pi * std::numbers::pi / 6.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

}  // namespace

// ---------------------------------------------------------------- geometry

void DmdGeometry::validate() const {
    if (n_transversal < 1 || n_longitudinal < 1) throw DomainError("DMD needs at least one pixel");
    if (!(pitch > 0.0)) throw DomainError("DMD pixel pitch must be positive");
}

double DmdGeometry::row_center(std::size_t i) const {
    return (static_cast<double>(i) - 0.5 * static_cast<double>(n_transversal - 1)) * pitch;
}

double DmdGeometry::column_center(std::size_t j) const {
    return (static_cast<double>(j) - 0.5 * static_cast<double>(n_longitudinal - 1)) * pitch;
}

std::vector<double> DmdGeometry::column_centers() const {
    std::vector<double> z(n_longitudinal);
    for (std::size_t j = 0; j < n_longitudinal; ++j) z[j] = column_center(j);
    return z;
}

DmdPattern::DmdPattern(DmdGeometry geometry, std::vector<std::uint8_t> column_major_bits)
    : geometry_(geometry), bits_(std::move(column_major_bits)) {
    geometry_.validate();
    if (bits_.size() != geometry_.n_transversal * geometry_.n_longitudinal) {
        throw DomainError("DMD pattern size does not match geometry");
    }
    for (auto b : bits_) {
        if (b > 1) throw DomainError("DMD pattern entries must be 0 or 1");
    }
}

DmdPattern DmdPattern::zeros(const DmdGeometry& g) {
    return DmdPattern(g, std::vector<std::uint8_t>(g.n_transversal * g.n_longitudinal, 0));
}

DmdPattern DmdPattern::ones(const DmdGeometry& g) {
    return DmdPattern(g, std::vector<std::uint8_t>(g.n_transversal * g.n_longitudinal, 1));
}

void DmdPattern::set_column(std::size_t col, std::span<const std::uint8_t> bits) {
    if (bits.size() != geometry_.n_transversal) throw DomainError("column length mismatch");
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] > 1) throw DomainError("DMD pattern entries must be 0 or 1");
        bits_[col * geometry_.n_transversal + i] = bits[i];
    }
}

std::size_t DmdPattern::count_on() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

// ---------------------------------------------------------------- beam / psf

void BeamProfile::validate() const {
    if (!(amplitude > 0.0) || !(sigma_y > 0.0) || !(sigma_z > 0.0)) {
        throw DomainError("beam amplitude and widths must be positive");
    }
}

double BeamProfile::p_y(double y) const { return std::exp(-(y * y) / (sigma_y * sigma_y)); }

double BeamProfile::p_z(double z) const {
    if (flat_longitudinal()) return 1.0;
    return std::exp(-(z * z) / (sigma_z * sigma_z));
}

bool BeamProfile::flat_longitudinal() const { return std::isinf(sigma_z); }

PsfModel::PsfModel(double sigma_z, double w_y, double y_range)
    : sigma_z_(sigma_z), w_y_(w_y), y_range_(y_range), g_y_norm_(1.0) {
    if (!(sigma_z > 0.0) || !(w_y > 0.0) || !(y_range > 0.0)) {
        throw DomainError("PSF widths must be positive");
    }
    // Unit mass of the truncated sinc, integrated lobe by lobe.
    double mass = 0.0;
    constexpr int kSub = 8;
    for (int lobe = -6; lobe < 6; ++lobe) {
        for (int s = 0; s < kSub; ++s) {
            const double lo = (lobe + static_cast<double>(s) / kSub) * w_y_;
            const double hi = (lobe + static_cast<double>(s + 1) / kSub) * w_y_;
            mass += gauss_legendre([&](double y) { return sinc_pi(y / w_y_); }, lo, hi);
        }
    }
    g_y_norm_ = 1.0 / mass;
}

double PsfModel::g_z(double z) const {
    return std::exp(-0.5 * z * z / (sigma_z_ * sigma_z_)) / (sigma_z_ * std::sqrt(2.0 * std::numbers::pi));
}

double PsfModel::g_y(double y) const {
    if (std::abs(y) >= support_y()) return 0.0;
    return g_y_norm_ * sinc_pi(y / w_y_);
}

// ---------------------------------------------------------------- disturbances

void TransmissionDisturbance::validate() const {
    for (const auto& s : spots) {
        if (!(s.width > 0.0)) throw DomainError("dark spot width must be positive");
        if (!(s.depth > 0.0 && s.depth <= 1.0)) throw DomainError("dark spot depth must lie in (0, 1]");
    }
}

double TransmissionDisturbance::tau(double z) const {
    double t = 1.0;
    for (const auto& s : spots) {
        const double d = (z - s.center) / s.width;
        t -= s.depth * std::exp(-d * d);
    }
    return std::max(t, kFloor);
}

void MagneticPotentialSpec::validate() const {
    if (!(omega_par > 0.0)) throw DomainError("omega_par must be positive");
    if (!(ripple_wavelength > 0.0)) throw DomainError("ripple wavelength must be positive");
}

// ---------------------------------------------------------------- pixel integrals

double erf_difference(double x1, double x2) {
    if (x1 > 0.0 && x2 > 0.0) return std::erfc(x2) - std::erfc(x1);
    if (x1 < 0.0 && x2 < 0.0) return std::erfc(-x1) - std::erfc(-x2);
    return std::erf(x1) - std::erf(x2);
}

double longitudinal_pixel_integral(const PsfModel& psf, const BeamProfile& beam, double z,
                                   double lo, double hi) {
    const double s2 = psf.sigma_z() * psf.sigma_z();
    const double norm = 1.0 / (psf.sigma_z() * std::sqrt(2.0 * std::numbers::pi));
    if (beam.flat_longitudinal()) {
        const double r = 1.0 / std::sqrt(2.0 * s2);
        return 0.5 * erf_difference((z - lo) * r, (z - hi) * r);
    }
    // g_z(z - eta) p_z(eta) = exp(-z^2 / (sb^2 + 2 s^2)) exp(-A (eta - eta0)^2)
    const double sb2 = beam.sigma_z * beam.sigma_z;
    const double a = 0.5 / s2 + 1.0 / sb2;
    const double eta0 = z / (2.0 * s2 * a);
    const double pref = norm * std::exp(-z * z / (sb2 + 2.0 * s2));
    const double ra = std::sqrt(a);
    return pref * 0.5 * std::sqrt(std::numbers::pi / a) *
           erf_difference(ra * (hi - eta0), ra * (lo - eta0));
}

double transversal_pixel_integral(const PsfModel& psf, const BeamProfile& beam, double y,
                                  double lo, double hi) {
    // Split at the kernel's kink points y -/+ support so each piece is smooth.
    std::array<double, 4> cuts = {lo, y - psf.support_y(), y + psf.support_y(), hi};
    std::sort(cuts.begin() + 1, cuts.begin() + 3);
    double acc = 0.0;
    double a = lo;
    for (std::size_t c = 1; c < cuts.size(); ++c) {
        const double b = std::clamp(cuts[c], lo, hi);
        if (b > a) {
            constexpr int kSub = 2;
            for (int s = 0; s < kSub; ++s) {
                const double sa = a + (b - a) * s / kSub;
                const double sb = a + (b - a) * (s + 1) / kSub;
                acc += gauss_legendre([&](double xi) { return psf.g_y(y - xi) * beam.p_y(xi); }, sa, sb);
            }
            a = b;
        }
    }
    return acc;
}

TransversalResponse::TransversalResponse(const PsfModel& psf, const BeamProfile& beam,
                                         const DmdGeometry& geometry, std::vector<double> y_points)
    : y_(std::move(y_points)), n_rows_(geometry.n_transversal) {
    geometry.validate();
    beam.validate();
    double max_abs_y = 0.0;
    for (double y : y_) max_abs_y = std::max(max_abs_y, std::abs(y));
    if (geometry.half_height() + max_abs_y > psf.y_range()) {
        throw DomainError("DMD pattern (half-height " + std::to_string(geometry.half_height()) +
                          " µm) is wider than the tabulated PSF range (" +
                          std::to_string(psf.y_range()) + " µm)");
    }
    const double half = 0.5 * geometry.pitch;
    auto row_weights = [&](double y, std::span<double> out) {
        for (std::size_t i = 0; i < n_rows_; ++i) {
            const double c = geometry.row_center(i);
            out[i] = transversal_pixel_integral(psf, beam, y, c - half, c + half);
        }
    };
    w_.assign(y_.size() * n_rows_, 0.0);
    for (std::size_t s = 0; s < y_.size(); ++s) row_weights(y_[s], std::span<double>(w_).subspan(s * n_rows_, n_rows_));
    w0_.assign(n_rows_, 0.0);
    row_weights(0.0, w0_);
    all_on_ = 0.0;
    for (double w : w0_) all_on_ += w;
    if (!(all_on_ > 0.0)) throw DomainError("all-on transversal response is not positive");
}

double e_perp_max(const PsfModel& psf, const BeamProfile& beam, const DmdGeometry& geometry) {
    const TransversalResponse resp(psf, beam, geometry, {});
    return beam.amplitude * resp.all_on_center();
}

double calibrate_amplitude(const PsfModel& psf, const BeamProfile& beam,
                           const DmdGeometry& geometry, double alpha_v, double target_potential) {
    if (!(alpha_v > 0.0) || !(target_potential > 0.0)) {
        throw DomainError("calibration needs positive alpha_V and target potential");
    }
    BeamProfile unit = beam;
    unit.amplitude = 1.0;
    const double e_unit = e_perp_max(psf, unit, geometry);
    return std::sqrt(target_potential / alpha_v) / e_unit;
}

// ---------------------------------------------------------------- propagation

ComplexField1D propagate_full(const DmdPattern& pattern, const BeamProfile& beam,
                              const PsfModel& psf, const SpatialGrid1D& grid) {
    beam.validate();
    const auto& geo = pattern.geometry();
    const TransversalResponse resp(psf, beam, geo, {});
    const auto w0 = resp.center_weights();
    const double half = 0.5 * geo.pitch;

    std::vector<complex> out(grid.size());
    std::vector<double> lz(geo.n_longitudinal);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double z = grid.z(k);
        for (std::size_t j = 0; j < geo.n_longitudinal; ++j) {
            const double c = geo.column_center(j);
            lz[j] = longitudinal_pixel_integral(psf, beam, z, c - half, c + half);
        }
        double acc = 0.0;
        for (std::size_t j = 0; j < geo.n_longitudinal; ++j) {
            const auto col = pattern.column(j);
            for (std::size_t i = 0; i < geo.n_transversal; ++i) {
                if (col[i]) acc += w0[i] * lz[j];
            }
        }
        out[k] = beam.amplitude * acc;
    }
    return ComplexField1D(grid, std::move(out));
}

RealField1D potential_from_field(const ComplexField1D& e_out, double alpha_v,
                                 const TransmissionDisturbance& tau) {
    if (!(alpha_v > 0.0)) throw DomainError("alpha_V must be positive");
    tau.validate();
    const auto& g = e_out.grid();
    std::vector<double> v(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double t = tau.empty() ? 1.0 : tau.tau(g.z(k));
        v[k] = alpha_v * std::norm(t * e_out[k]);
    }
    return RealField1D(g, std::move(v));
}

RealField1D propagate_separable(std::span<const double> nu_columns, const DmdGeometry& geometry,
                                const BeamProfile& beam, const PsfModel& psf, double e_perp_max,
                                double alpha_v, const SpatialGrid1D& grid) {
    geometry.validate();
    if (nu_columns.size() != geometry.n_longitudinal) throw DomainError("one nu value per DMD column expected");
    if (!(alpha_v > 0.0)) throw DomainError("alpha_V must be positive");
    for (double nu : nu_columns) {
        if (!(nu >= 0.0 && nu <= 1.0)) throw DomainError("virtual input outside [0, 1]");
    }
    const double half = 0.5 * geometry.pitch;
    std::vector<double> v(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double z = grid.z(k);
        double acc = 0.0;
        for (std::size_t j = 0; j < geometry.n_longitudinal; ++j) {
            if (nu_columns[j] == 0.0) continue;
            const double c = geometry.column_center(j);
            acc += nu_columns[j] * longitudinal_pixel_integral(psf, beam, z, c - half, c + half);
        }
        const double field = e_perp_max * acc;
        v[k] = alpha_v * field * field;
    }
    return RealField1D(grid, std::move(v));
}

RealField1D magnetic_potential(const MagneticPotentialSpec& spec, double mass,
                               const SpatialGrid1D& grid) {
    spec.validate();
    if (!(mass > 0.0)) throw DomainError("mass must be positive");
    const double curvature = 0.5 * mass * spec.omega_par * spec.omega_par;
    return RealField1D::from_function(grid, [&](double z) {
        return curvature * z * z +
               spec.ripple_amplitude *
                   std::sin(2.0 * std::numbers::pi * z / spec.ripple_wavelength + spec.ripple_phase);
    });
}

}  // namespace dmdilc::optics
