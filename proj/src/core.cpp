#include "dmdilc/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "fft.hpp"

namespace dmdilc::core {

namespace {

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite value");
    }
}

void require_finite(std::span<const complex> v, const char* what) {
    for (const complex& x : v) {
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
            throw DomainError(std::string(what) + ": non-finite value");
        }
    }
}

void require_same_grid(const SpatialGrid1D& a, const SpatialGrid1D& b) {
    if (!(a == b)) throw DomainError("fields live on different grids");
}

}  // namespace

// ---------------------------------------------------------------- grid

SpatialGrid1D::SpatialGrid1D(double length, std::size_t n_points)
    : length_(length), n_(n_points), dz_(0.0) {
    if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("grid length must be positive");
    if (n_points < 2) throw DomainError("grid needs at least two points");
    dz_ = length_ / static_cast<double>(n_ - 1);
}

SpatialGrid1D SpatialGrid1D::centered(std::size_t half, double dz) {
    if (half == 0) throw DomainError("centred grid needs half-width >= 1");
    return SpatialGrid1D(2.0 * static_cast<double>(half) * dz, 2 * half + 1);
}

std::vector<double> SpatialGrid1D::samples() const {
    std::vector<double> z(n_);
    for (std::size_t i = 0; i < n_; ++i) z[i] = this->z(i);
    return z;
}

bool SpatialGrid1D::same_spacing(const SpatialGrid1D& other) const {
    return std::abs(dz_ - other.dz_) <= 1e-12 * std::max(dz_, other.dz_);
}

bool SpatialGrid1D::operator==(const SpatialGrid1D& other) const {
    return n_ == other.n_ && std::abs(length_ - other.length_) <= 1e-12 * length_;
}

// ---------------------------------------------------------------- fields

RealField1D::RealField1D(SpatialGrid1D grid) : grid_(grid), values_(grid.size(), 0.0) {}

RealField1D::RealField1D(SpatialGrid1D grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw DomainError("field size does not match grid");
    require_finite(values_, "RealField1D");
}

double RealField1D::max() const { return *std::max_element(values_.begin(), values_.end()); }
double RealField1D::min() const { return *std::min_element(values_.begin(), values_.end()); }

double RealField1D::interpolate(double z) const {
    const double s = (z - grid_.front()) / grid_.dz();
    if (s < 0.0 || s > static_cast<double>(values_.size() - 1)) return 0.0;
    const auto i = std::min(static_cast<std::size_t>(s), values_.size() - 2);
    const double t = s - static_cast<double>(i);
    if (t == 0.0) return values_[i];
    return (1.0 - t) * values_[i] + t * values_[i + 1];
}

RealField1D& RealField1D::operator+=(const RealField1D& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

RealField1D& RealField1D::operator-=(const RealField1D& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}

RealField1D& RealField1D::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

RealField1D operator+(RealField1D a, const RealField1D& b) { return a += b; }
RealField1D operator-(RealField1D a, const RealField1D& b) { return a -= b; }
RealField1D operator*(double s, RealField1D a) { return a *= s; }

ComplexField1D::ComplexField1D(SpatialGrid1D grid) : grid_(grid), values_(grid.size()) {}

ComplexField1D::ComplexField1D(SpatialGrid1D grid, std::vector<complex> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw DomainError("field size does not match grid");
    require_finite(values_, "ComplexField1D");
}

ComplexField1D::ComplexField1D(const RealField1D& real)
    : grid_(real.grid()), values_(real.values().begin(), real.values().end()) {}

RealField1D ComplexField1D::real() const {
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[i].real();
    return RealField1D(grid_, std::move(v));
}

RealField1D ComplexField1D::imag() const {
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[i].imag();
    return RealField1D(grid_, std::move(v));
}

RealField1D ComplexField1D::abs2() const {
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::norm(values_[i]);
    return RealField1D(grid_, std::move(v));
}

// ---------------------------------------------------------------- quadrature

double integrate(std::span<const double> values, double dz) {
    require_finite(values, "integrate");
    if (values.size() < 2) return 0.0;
    double interior = 0.0;
    for (std::size_t i = 1; i + 1 < values.size(); ++i) interior += values[i];
    return dz * (interior + 0.5 * (values.front() + values.back()));
}

double integrate(const RealField1D& f) { return integrate(f.values(), f.grid().dz()); }

double l2_norm(const RealField1D& f) {
    std::vector<double> sq(f.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = f[i] * f[i];
    return std::sqrt(integrate(sq, f.grid().dz()));
}

// ---------------------------------------------------------------- spectra

std::vector<double> fft_wavenumbers(std::size_t n, double dz) {
    std::vector<double> k(n);
    const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * dz);
    for (std::size_t m = 0; m < n; ++m) {
        const auto signed_m = m <= (n - 1) / 2 ? static_cast<double>(m)
                                               : static_cast<double>(m) - static_cast<double>(n);
        k[m] = signed_m * dk;
    }
    return k;
}

Spectrum::Spectrum(SpatialGrid1D grid, std::vector<complex> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw DomainError("spectrum size does not match grid");
}

double Spectrum::dk() const {
    return 2.0 * std::numbers::pi / (static_cast<double>(values_.size()) * grid_.dz());
}

double Spectrum::k(std::size_t m) const {
    const std::size_t n = values_.size();
    const auto signed_m = m <= (n - 1) / 2 ? static_cast<double>(m)
                                           : static_cast<double>(m) - static_cast<double>(n);
    return signed_m * dk();
}

Spectrum spectrum(const ComplexField1D& f) {
    const auto& g = f.grid();
    detail::Fft fft(g.size());
    std::copy(f.values().begin(), f.values().end(), fft.buffer().begin());
    fft.forward();
    std::vector<complex> out(g.size());
    const double z0 = g.front();
    const auto k = fft_wavenumbers(g.size(), g.dz());
    for (std::size_t m = 0; m < out.size(); ++m) {
        out[m] = g.dz() * std::polar(1.0, -k[m] * z0) * fft.buffer()[m];
    }
    return Spectrum(g, std::move(out));
}

Spectrum spectrum(const RealField1D& f) { return spectrum(ComplexField1D(f)); }

ComplexField1D inverse_spectrum(const Spectrum& s) {
    const auto& g = s.grid();
    detail::Fft fft(g.size());
    const auto k = fft_wavenumbers(g.size(), g.dz());
    const double z0 = g.front();
    for (std::size_t m = 0; m < g.size(); ++m) {
        fft.buffer()[m] = s[m] * std::polar(1.0, k[m] * z0);
    }
    fft.backward();
    const double scale = 1.0 / (static_cast<double>(g.size()) * g.dz());
    std::vector<complex> out(g.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * fft.buffer()[i];
    return ComplexField1D(g, std::move(out));
}

// ---------------------------------------------------------------- convolution

SpatialGrid1D lag_grid(const SpatialGrid1D& like) {
    return SpatialGrid1D::centered(like.size() - 1, like.dz());
}

ConvolutionResult convolve(const RealField1D& f, const RealField1D& kernel) {
    const auto& fg = f.grid();
    const auto& kg = kernel.grid();
    if (!kg.is_centered()) throw DomainError("convolution kernel must live on a centred grid");
    if (!fg.same_spacing(kg)) throw DomainError("kernel and field spacing differ");

    const std::size_t nf = f.size();
    const std::size_t nk = kernel.size();
    const std::size_t centre = (nk - 1) / 2;

    double peak = 0.0;
    for (double v : kernel.values()) peak = std::max(peak, std::abs(v));
    const bool not_decayed = peak > 0.0 && (std::abs(kernel[0]) > 1e-8 * peak ||
                                            std::abs(kernel[nk - 1]) > 1e-8 * peak);

    std::size_t m = 1;
    while (m < nf + nk - 1) m <<= 1;

    detail::Fft a(m);
    detail::Fft b(m);
    std::copy(f.values().begin(), f.values().end(), a.buffer().begin());
    std::copy(kernel.values().begin(), kernel.values().end(), b.buffer().begin());
    a.forward();
    b.forward();
    for (std::size_t i = 0; i < m; ++i) a.buffer()[i] *= b.buffer()[i];
    a.backward();

    // full[t] = sum_j f[j] k[t - j]; output sample i sits at t = i + centre.
    const double scale = fg.dz() / static_cast<double>(m);
    std::vector<double> out(nf);
    for (std::size_t i = 0; i < nf; ++i) out[i] = scale * a.buffer()[i + centre].real();
    return {RealField1D(fg, std::move(out)), not_decayed};
}

// ---------------------------------------------------------------- hashing

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace dmdilc::core
