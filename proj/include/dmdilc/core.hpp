// Grids, field containers, quadrature and spectral transforms.
//
// Unit system used throughout the library: lengths in µm, times in ms and
// energies expressed as angular frequencies in rad/ms (hbar = 1).

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dmdilc {

using complex = std::complex<double>;

/// Raised for invalid physical or numerical input.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised for inconsistent or malformed configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an iterative solver breaks down or fails to converge.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for file system failures; the message carries the path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace core {

/// Uniform grid over [-L/2, L/2] with both end points sampled.
class SpatialGrid1D {
public:
    SpatialGrid1D(double length, std::size_t n_points);

    /// Odd, zero-centred grid with 2*half+1 samples of spacing dz. Used for
    /// convolution kernels.
    static SpatialGrid1D centered(std::size_t half, double dz);

    double length() const { return length_; }
    std::size_t size() const { return n_; }
    double dz() const { return dz_; }
    double z(std::size_t i) const { return -0.5 * length_ + static_cast<double>(i) * dz_; }
    double front() const { return -0.5 * length_; }
    double back() const { return 0.5 * length_; }
    std::vector<double> samples() const;

    /// True when the grid has a sample exactly at z = 0.
    bool is_centered() const { return n_ % 2 == 1; }

    /// Same spacing within 1e-12 relative.
    bool same_spacing(const SpatialGrid1D& other) const;

    bool operator==(const SpatialGrid1D& other) const;

private:
    double length_;
    std::size_t n_;
    double dz_;
};

/// Real samples on a grid. Values are checked finite on construction.
class RealField1D {
public:
    explicit RealField1D(SpatialGrid1D grid);  // zero-filled
    RealField1D(SpatialGrid1D grid, std::vector<double> values);

    template <class F>
    static RealField1D from_function(const SpatialGrid1D& grid, F&& f) {
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid.z(i));
        return RealField1D(grid, std::move(v));
    }

    const SpatialGrid1D& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double max() const;
    double min() const;

    /// Linear interpolation; zero outside the grid.
    double interpolate(double z) const;

    RealField1D& operator+=(const RealField1D& o);
    RealField1D& operator-=(const RealField1D& o);
    RealField1D& operator*=(double s);

private:
    SpatialGrid1D grid_;
    std::vector<double> values_;
};

RealField1D operator+(RealField1D a, const RealField1D& b);
RealField1D operator-(RealField1D a, const RealField1D& b);
RealField1D operator*(double s, RealField1D a);

class ComplexField1D {
public:
    explicit ComplexField1D(SpatialGrid1D grid);
    ComplexField1D(SpatialGrid1D grid, std::vector<complex> values);
    explicit ComplexField1D(const RealField1D& real);

    const SpatialGrid1D& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    std::span<const complex> values() const { return values_; }
    complex operator[](std::size_t i) const { return values_[i]; }

    RealField1D real() const;
    RealField1D imag() const;
    RealField1D abs2() const;

private:
    SpatialGrid1D grid_;
    std::vector<complex> values_;
};

/// Trapezoidal rule over the whole grid.
double integrate(const RealField1D& f);
double integrate(std::span<const double> values, double dz);

/// sqrt(integral of f^2).
double l2_norm(const RealField1D& f);

/// Continuous-convention spectrum f(k) = integral f(z) exp(-jkz) dz,
/// sampled at the DFT wavenumbers k_m = 2*pi*m'/(n*dz) (FFT order, m' the
/// signed index). Carries the source grid so the inverse can rebuild it.
class Spectrum {
public:
    Spectrum(SpatialGrid1D grid, std::vector<complex> values);

    const SpatialGrid1D& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double dk() const;
    /// Signed wavenumber of slot m.
    double k(std::size_t m) const;
    std::span<const complex> values() const { return values_; }
    complex operator[](std::size_t m) const { return values_[m]; }

    /// Pointwise product with a transfer function H(k).
    template <class H>
    Spectrum filtered(H&& h) const {
        std::vector<complex> out(values_.size());
        for (std::size_t m = 0; m < out.size(); ++m) out[m] = values_[m] * h(k(m));
        return Spectrum(grid_, std::move(out));
    }

private:
    SpatialGrid1D grid_;
    std::vector<complex> values_;
};

Spectrum spectrum(const RealField1D& f);
Spectrum spectrum(const ComplexField1D& f);

/// Inverse with the 1/(2*pi) convention; inverse_spectrum(spectrum(f)) == f.
ComplexField1D inverse_spectrum(const Spectrum& s);

/// Wavenumbers of an n-point periodic grid of spacing dz, in FFT order.
std::vector<double> fft_wavenumbers(std::size_t n, double dz);

struct ConvolutionResult {
    RealField1D field;
    /// Kernel magnitude at its ends exceeds 1e-8 of its peak.
    bool kernel_not_decayed = false;
};

/// Zero-padded linear convolution (f * kernel)(z) = dz * sum f(z_j) k(z - z_j)
/// evaluated on f's grid. The kernel must live on a centred (odd) grid with
/// the same spacing as f.
ConvolutionResult convolve(const RealField1D& f, const RealField1D& kernel);

/// Kernel sampled on a centred grid matching the spacing of `like`, spanning
/// all lags that can occur on `like`.
SpatialGrid1D lag_grid(const SpatialGrid1D& like);

/// Stable 64-bit FNV-1a hash, used for content fingerprints.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 14695981039346656037ULL);
std::string hex64(std::uint64_t h);

}  // namespace core
}  // namespace dmdilc
