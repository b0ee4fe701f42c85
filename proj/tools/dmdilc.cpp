// Command-line front end. Exit codes: 0 success, 1 configuration error,
// 2 solver non-convergence, 3 I/O error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dmdilc/harness.hpp"

using namespace dmdilc;

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 1;
constexpr int kSolver = 2;
constexpr int kIo = 3;

harness::ScenarioConfig load_config(const std::string& path, const std::optional<std::uint64_t>& seed) {
    auto cfg = harness::ScenarioConfig::load(path);
    if (seed) cfg.apply_seed(*seed);
    return cfg;
}

core::RealField1D read_potential(const std::filesystem::path& path, const core::SpatialGrid1D& grid) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<double> v;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double z = 0.0, value = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf", &z, &value) != 2) throw ConfigError("malformed potential row: " + line);
        if (v.size() >= grid.size() || std::abs(z - grid.z(v.size())) > 1e-9 * grid.length()) {
            throw ConfigError("potential file does not match the configured grid");
        }
        v.push_back(value);
    }
    if (v.size() != grid.size()) throw ConfigError("potential file does not match the configured grid");
    return core::RealField1D(grid, std::move(v));
}

int cmd_build_lut(const std::string& config, const std::string& out, const std::optional<std::uint64_t>& seed) {
    const auto cfg = load_config(config, seed);
    const auto psf = cfg.psf();
    const auto lut = inputmap::build_lut(cfg.n_nu, cfg.optimizer, psf, cfg.beam, cfg.dmd);
    lut.save(out);
    const double step = 1.0 / static_cast<double>(cfg.n_nu - 1);
    double worst = 0.0;
    std::size_t good = 0;
    for (const auto& e : lut.entries()) {
        const double err = std::abs(e.achieved - e.nu) / step;
        worst = std::max(worst, err);
        good += err <= 0.05;
    }
    std::printf("entries %zu  within 0.05 step %zu  worst %.4f step\n", lut.size(), good, worst);
    return kOk;
}

int cmd_design_kernel(const std::string& config, const std::string& out) {
    const auto sc = harness::prepare(load_config(config, std::nullopt));
    sc.kernel.save_csv(out);
    std::printf("alpha_bar %.10g  gamma %.10g  mu_d %.10g  kernel points %zu\n", sc.gain.alpha_bar, sc.kernel.gamma,
                sc.desired_state.mu, sc.kernel.kernel.size());
    return kOk;
}

int cmd_groundstate(const std::string& config, const std::vector<std::string>& potential, const std::string& out) {
    const auto cfg = load_config(config, std::nullopt);
    const auto grid = cfg.grid();
    core::RealField1D v(grid);
    if (potential.size() == 1 && potential[0] == "desired") {
        v = harness::desired_potential(cfg.desired, grid);
    } else if (potential.size() == 2 && potential[0] == "file") {
        v = read_potential(potential[1], grid);
    } else {
        throw ConfigError("--potential expects 'desired' or 'file PATH'");
    }
    const auto gs = condensate::ground_state(v, cfg.condensate, cfg.solver);
    if (!gs.converged) throw SolverError("ground state did not converge");
    const auto rho = gs.density();

    std::ofstream f(out, std::ios::binary);
    if (!f) throw IoError("cannot open " + out + " for writing");
    f << "z,V,rho\n";
    char buf[128];
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", grid.z(i), v[i], rho[i]);
        f << buf;
    }
    if (!f) throw IoError("failed writing " + out);
    std::printf("mu %.12g  mu_decay %.12g  steps %zu  resolves_healing_length %s\n", gs.mu, gs.mu_decay,
                gs.iterations, gs.resolves_healing_length ? "yes" : "no");
    return kOk;
}

std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return core::hex64(core::fnv1a(ss.str()));
}

int cmd_run(const std::string& config, const std::string& lut_path, std::size_t iterations, const std::string& out,
            const std::optional<std::uint64_t>& seed) {
    auto cfg = load_config(config, seed);
    if (iterations > 0) cfg.iterations = iterations;
    cfg.validate();
    const auto lut = inputmap::Lut::load(lut_path);
    const auto sc = harness::prepare(cfg);
    const auto run = harness::run_closed_loop(sc, lut);
    harness::export_records(run, sc, {file_hash(lut_path), sc.kernel.model_hash}, out);
    for (const auto& r : run.records) std::printf("%4zu  %.6e  %.6f  %zu\n", r.n, r.error_norm, r.mu, r.clamped);
    if (run.aborted) {
        std::fprintf(stderr, "aborted: %s\n", run.failure.c_str());
        return kSolver;
    }
    return kOk;
}

int cmd_report(const std::string& in) {
    const auto rows = harness::report(in);
    std::printf("%5s  %-14s  %-14s  %-10s  %s\n", "n", "norm", "recomputed", "mu", "clamped");
    double worst = 0.0;
    for (const auto& r : rows) {
        if (std::isnan(r.recomputed_norm)) {
            std::printf("%5zu  %.8e  %-14s  %.6f  %zu\n", r.n, r.stored_norm, "-", r.mu, r.clamped);
        } else {
            worst = std::max(worst, std::abs(r.recomputed_norm - r.stored_norm));
            std::printf("%5zu  %.8e  %.8e  %.6f  %zu\n", r.n, r.stored_norm, r.recomputed_norm, r.mu, r.clamped);
        }
    }
    std::printf("max |recomputed - stored| = %.3e\n", worst);
    if (worst > 1e-12) {
        std::fprintf(stderr, "stored norms disagree with field files\n");
        return kIo;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DMD potential shaping with iterative learning control"};
    app.require_subcommand(1);

    std::string config, out, lut_path, in;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> potential;
    std::size_t iterations = 0;

    auto* build = app.add_subcommand("build-lut", "optimise the transversal look-up table");
    build->add_option("--config", config, "scenario JSON")->required();
    build->add_option("--out", out, "LUT JSON output")->required();
    build->add_option("--seed", seed, "master seed");

    auto* kernel = app.add_subcommand("design-kernel", "write the learning kernel as CSV");
    kernel->add_option("--config", config, "scenario JSON")->required();
    kernel->add_option("--out", out, "kernel CSV output")->required();

    auto* gs = app.add_subcommand("groundstate", "solve the stationary condensate");
    gs->add_option("--config", config, "scenario JSON")->required();
    gs->add_option("--potential", potential, "'desired' or 'file PATH' (CSV z,V)")->required()->expected(1, 2);
    gs->add_option("--out", out, "CSV output")->required();

    auto* run = app.add_subcommand("run", "closed-loop simulation");
    run->add_option("--config", config, "scenario JSON")->required();
    run->add_option("--lut", lut_path, "LUT JSON")->required();
    run->add_option("--iterations", iterations, "iteration count (overrides the config)");
    run->add_option("--out", out, "output directory")->required();
    run->add_option("--seed", seed, "master seed");

    auto* rep = app.add_subcommand("report", "verify and summarise an exported run");
    rep->add_option("--in", in, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*build) return cmd_build_lut(config, out, seed);
        if (*kernel) return cmd_design_kernel(config, out);
        if (*gs) return cmd_groundstate(config, potential, out);
        if (*run) return cmd_run(config, lut_path, iterations, out, seed);
        if (*rep) return cmd_report(in);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfig;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kConfig;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kSolver;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kIo;
    }
    return kOk;
}
