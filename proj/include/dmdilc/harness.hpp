// Scenario configuration, closed-loop driver, disturbance schedule, metrics
// and on-disk export of the record trail.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dmdilc/condensate.hpp"
#include "dmdilc/core.hpp"
#include "dmdilc/ilc.hpp"
#include "dmdilc/inputmap.hpp"
#include "dmdilc/optics.hpp"

namespace dmdilc::harness {

struct DesiredPotentialSpec {
    double v_max = 2.0 * 3.14159265358979323846 * 8.0;  // rad/ms
    double k_v = 7.53e-2;                                 // 1/µm

    void validate() const;
};

/// (V_max/2)(1 + cos(k_V z)) for |z| <= 2 pi/k_V, V_max elsewhere: two
/// harmonic wells with minima at +-pi/k_V, continuous at the outer edges.
core::RealField1D desired_potential(const DesiredPotentialSpec& spec, const core::SpatialGrid1D& grid);

struct DisturbanceEvent {
    std::size_t iteration = 0;  // active for every n >= iteration
    optics::TransmissionDisturbance disturbance;
};

/// Union of all spots scheduled at or before iteration n.
optics::TransmissionDisturbance inject_disturbances(const std::vector<DisturbanceEvent>& schedule, std::size_t n);

struct ScenarioConfig {
    double grid_length = 400.0;  // µm
    std::size_t grid_points = 1024;
    condensate::CondensateParams condensate;
    condensate::SolverConfig solver;
    optics::BeamProfile beam;  // amplitude is replaced by the calibrated value
    double psf_sigma_z = 2.5;  // µm
    double psf_w_y = 100.0;    // µm
    double psf_y_range = 60.0;  // µm
    optics::DmdGeometry dmd;
    optics::MagneticPotentialSpec magnetic{2.0 * 3.14159265358979323846 * 7e-3, 0.05 * 2.0 * 3.14159265358979323846 * 8.0,
                                           10.0, 0.0};
    DesiredPotentialSpec desired;
    double alpha_v = 1.0;
    double headroom = 1.3;  // alpha_V E_perp_max^2 = headroom * V_max
    std::size_t n_nu = 51;
    inputmap::OptimizerConfig optimizer;
    double gamma = 0.0;  // 0 selects 1e-2 max |G|^2
    ilc::SupportCutoffs cutoffs;
    std::size_t iterations = 80;
    std::vector<DisturbanceEvent> disturbances = default_disturbances();
    condensate::MeasurementConfig measurement;
    double nu0 = 0.5;
    std::uint64_t seed = 20211;
    std::vector<std::size_t> export_iterations{0, 1, 2, 3, 39, 40, 79};

    static std::vector<DisturbanceEvent> default_disturbances();

    void validate() const;
    core::SpatialGrid1D grid() const { return core::SpatialGrid1D(grid_length, grid_points); }
    optics::PsfModel psf() const { return optics::PsfModel(psf_sigma_z, psf_w_y, psf_y_range); }
    /// Propagate the master seed into the optimiser and the measurement noise.
    void apply_seed(std::uint64_t s);

    std::string to_json() const;
    static ScenarioConfig from_json(const std::string& text);
    static ScenarioConfig load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

/// Quantities derived once per scenario: potentials, calibration, the
/// desired ground state and the learning kernel.
struct Scenario {
    ScenarioConfig config;
    core::SpatialGrid1D grid;
    optics::PsfModel psf;
    optics::BeamProfile beam;  // calibrated amplitude
    double e_perp_max;
    core::RealField1D v_mag;
    core::RealField1D v_desired;
    condensate::GroundState desired_state;
    core::RealField1D rho_desired;
    ilc::GainProfile gain;
    ilc::LinearizedModel model;
    ilc::LearningKernel kernel;
};

Scenario prepare(const ScenarioConfig& cfg);

struct PlantResponse {
    core::RealField1D rho;  // true density before measurement
    core::RealField1D v;
    core::RealField1D v_opt;
    double mu = 0.0;
    std::optional<optics::DmdPattern> pattern;
    /// Virtual input actually realised (f^{-1}(u)); the next update starts
    /// from it when present.
    std::optional<core::RealField1D> applied_nu;
};

/// Maps the virtual input at iteration n to the density it produces.
using Plant = std::function<PlantResponse(const core::RealField1D& nu, std::size_t n)>;

/// Full truth model: LUT mapping, pixel-level optics with the scheduled
/// disturbances and a ground-state solve started from the Thomas-Fermi profile.
Plant physics_plant(const Scenario& scenario, const inputmap::Lut& lut);

/// Linearised surrogate: sqrt(rho) = sqrt(rho_ref) - alpha_bar (g_z * (nu - nu_ref))
/// with nu interpolated onto the field grid.
Plant linear_surrogate(const Scenario& scenario, const core::RealField1D& nu_ref,
                       const core::RealField1D& rho_ref);

struct IterationRecord {
    std::size_t n = 0;
    core::RealField1D nu;
    std::optional<optics::DmdPattern> pattern;
    std::string pattern_hash;
    core::RealField1D v;
    core::RealField1D v_opt;
    core::RealField1D rho;
    core::RealField1D error;
    double error_norm = 0.0;
    double mu = 0.0;
    std::size_t clamped = 0;  // clamp activations of the update that follows
};

struct RunResult {
    std::vector<IterationRecord> records;
    bool aborted = false;
    std::string failure;
};

/// Iterate measure -> error -> update from `nu0` for `iterations` steps.
/// A SolverError from the plant stops the loop and keeps the records so far.
RunResult run_closed_loop(const Scenario& scenario, const Plant& plant, const core::RealField1D& nu0,
                          std::size_t iterations, const core::RealField1D& rho_desired);

/// Scenario defaults: nu0 from the config on the column grid, physics plant.
RunResult run_closed_loop(const Scenario& scenario, const inputmap::Lut& lut);

struct HiddenRegionMetric {
    double hidden_per_length = 0.0;    // sum |dnu| per µm where rho_d < 1e-4 max
    double occupied_per_length = 0.0;  // same for the remaining columns
    double ratio = 0.0;
};

/// Accumulated |nu^{n+1} - nu^n| over records with n >= from_n.
HiddenRegionMetric hidden_region(const std::vector<IterationRecord>& records, const core::RealField1D& rho_desired,
                                 std::size_t from_n = 0);

std::string pattern_hash(const optics::DmdPattern& pattern);

struct RunMetadata {
    std::string lut_hash;
    std::string kernel_hash;
};

/// error_norms.csv, fields_<n>.csv, pattern_<n>.pbm and run.json.
void export_records(const RunResult& run, const Scenario& scenario, const RunMetadata& meta,
                    const std::filesystem::path& out_dir);

struct ReportRow {
    std::size_t n = 0;
    double stored_norm = 0.0;
    double recomputed_norm = std::numeric_limits<double>::quiet_NaN();  // NaN when no field file
    double mu = 0.0;
    std::size_t clamped = 0;
};

/// Re-read an exported run and recompute the error norms from field files.
std::vector<ReportRow> report(const std::filesystem::path& in_dir);

}  // namespace dmdilc::harness
