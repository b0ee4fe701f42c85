// Quasi-continuous input mapping: binary transversal patterns that realise a
// normalised field value nu at y = 0, their look-up table, and the mapping
// of a longitudinal virtual-input profile onto a full DMD pattern.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmdilc/optics.hpp"

namespace dmdilc::inputmap {

using TransversalPattern = std::vector<std::uint8_t>;

enum class Algorithm { genetic, local_search };

struct OptimizerConfig {
    Algorithm algorithm = Algorithm::genetic;
    std::size_t population = 100;
    std::size_t generations = 200;
    double mutation_rate = 0.0;  // per bit; 0 selects 2 / n_T
    std::uint64_t seed = 20211;
    double gamma_perp = 0.3;
    double delta_y = 4.0;  // µm
    std::size_t restarts = 8;  // local_search only

    void validate() const;
};

/// Normalised transversal field of one column pattern,
/// E~(y) = sum_i u_i w_i(y) / sum_i w_i(0), by direct quadrature.
double transversal_field(std::span<const std::uint8_t> pattern, const optics::PsfModel& psf,
                         const optics::BeamProfile& beam, const optics::DmdGeometry& geometry,
                         double y);

/// Pattern objective
///   (|E~(0)| - nu)^2 + gamma * integral_{-dy}^{dy} (|E~(eta)| - nu)^2 d eta,
/// with the integral sampled at pixel resolution by the trapezoidal rule.
class TransversalObjective {
public:
    TransversalObjective(const optics::PsfModel& psf, const optics::BeamProfile& beam,
                         const optics::DmdGeometry& geometry, double gamma_perp, double delta_y);

    std::size_t n_bits() const { return n_bits_; }
    std::size_t n_samples() const { return quad_.size(); }
    double gamma_perp() const { return gamma_; }
    double delta_y() const { return delta_y_; }

    double achieved(std::span<const std::uint8_t> pattern) const;
    double evaluate(std::span<const std::uint8_t> pattern, double nu) const;

    /// Normalised field at every sample point (index 0 is y = 0, then the
    /// penalty points); used for incremental evaluation.
    void fields(std::span<const std::uint8_t> pattern, std::span<double> out) const;
    double evaluate_fields(std::span<const double> fields, double nu) const;
    /// Normalised weight of bit i at sample s.
    double weight(std::size_t s, std::size_t i) const { return w_[s * n_bits_ + i]; }
    std::size_t n_fields() const { return quad_.size() + 1; }

private:
    std::size_t n_bits_;
    double gamma_;
    double delta_y_;
    std::vector<double> quad_;  // trapezoid weights of the penalty points
    std::vector<double> w_;     // (1 + n_penalty) x n_bits, normalised
};

struct PatternSolution {
    TransversalPattern pattern;
    double achieved = 0.0;
    double residual = 0.0;
};

/// Heuristic minimiser of the pattern objective; deterministic for a given
/// seed. Returns the best pattern found.
PatternSolution solve_pattern(double nu, const OptimizerConfig& cfg,
                              const TransversalObjective& objective);

struct LutEntry {
    double nu = 0.0;
    TransversalPattern pattern;
    double achieved = 0.0;
    double residual = 0.0;
};

struct LutHeader {
    std::size_t n_transversal = 0;
    std::size_t n_nu = 0;
    double gamma_perp = 0.0;
    double delta_y = 0.0;
    std::string model_hash;
    std::uint64_t seed = 0;
};

class Lut {
public:
    Lut(LutHeader header, std::vector<LutEntry> entries);

    const LutHeader& header() const { return header_; }
    std::span<const LutEntry> entries() const { return entries_; }
    const LutEntry& operator[](std::size_t k) const { return entries_[k]; }
    std::size_t size() const { return entries_.size(); }

    /// Index of the entry whose nominal nu is nearest (ties to the lower index).
    std::size_t nearest(double nu) const;
    /// Index of the entry storing exactly this pattern.
    std::optional<std::size_t> find(std::span<const std::uint8_t> pattern) const;

    std::string to_json() const;
    static Lut from_json(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static Lut load(const std::filesystem::path& path);

private:
    LutHeader header_;
    std::vector<LutEntry> entries_;
};

/// Fingerprint of everything the table depends on besides the optimiser.
std::string model_hash(const optics::PsfModel& psf, const optics::BeamProfile& beam,
                       const optics::DmdGeometry& geometry);

/// Solve every quantised nu_k = k / (n_nu - 1) and repair monotonicity.
Lut build_lut(std::size_t n_nu, const OptimizerConfig& cfg, const optics::PsfModel& psf,
              const optics::BeamProfile& beam, const optics::DmdGeometry& geometry);

/// Assemble the DMD pattern whose column j is the entry nearest to nu[j].
optics::DmdPattern map_virtual_input(std::span<const double> nu, const Lut& lut,
                                     const optics::DmdGeometry& geometry);

/// Nominal nu of the entry each column matches exactly.
std::vector<double> invert_pattern(const optics::DmdPattern& pattern, const Lut& lut);

std::string bits_to_string(std::span<const std::uint8_t> bits);
TransversalPattern bits_from_string(const std::string& s);

}  // namespace dmdilc::inputmap
