#include "dmdilc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#ifndef DMDILC_VERSION
#define DMDILC_VERSION "unknown"
#endif

namespace dmdilc::harness {

using core::RealField1D;
using core::SpatialGrid1D;
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------- potentials

void DesiredPotentialSpec::validate() const {
    if (!(v_max > 0.0)) throw DomainError("V_max must be positive");
    if (!(k_v > 0.0)) throw DomainError("k_V must be positive");
}

RealField1D desired_potential(const DesiredPotentialSpec& spec, const SpatialGrid1D& grid) {
    spec.validate();
    const double edge = 2.0 * std::numbers::pi / spec.k_v;
    return RealField1D::from_function(grid, [&](double z) {
        return std::abs(z) <= edge ? 0.5 * spec.v_max * (1.0 + std::cos(spec.k_v * z)) : spec.v_max;
    });
}

optics::TransmissionDisturbance inject_disturbances(const std::vector<DisturbanceEvent>& schedule, std::size_t n) {
    optics::TransmissionDisturbance out;
    for (const auto& ev : schedule) {
        if (ev.iteration > n) continue;
        out.spots.insert(out.spots.end(), ev.disturbance.spots.begin(), ev.disturbance.spots.end());
    }
    return out;
}

// ---------------------------------------------------------------- config

std::vector<DisturbanceEvent> ScenarioConfig::default_disturbances() {
    DisturbanceEvent ev;
    ev.iteration = 40;
    ev.disturbance.spots = {{-45.0, 2.0, 0.3}, {-35.0, 2.0, 0.3}, {38.0, 2.0, 0.3}};
    return {ev};
}

void ScenarioConfig::validate() const {
    try {
        if (!(grid_length > 0.0) || grid_points < 3) throw ConfigError("grid needs positive length and >= 3 points");
        condensate.validate();
        solver.validate();
        beam.validate();
        (void)psf();
        dmd.validate();
        magnetic.validate();
        desired.validate();
        if (!(alpha_v > 0.0)) throw ConfigError("alpha_v must be positive");
        if (!(headroom > 0.0)) throw ConfigError("headroom must be positive");
        if (n_nu < 2) throw ConfigError("n_nu must be at least 2");
        optimizer.validate();
        if (gamma < 0.0) throw ConfigError("gamma must be non-negative");
        if (iterations < 1) throw ConfigError("iteration count must be at least 1");
        for (const auto& ev : disturbances) ev.disturbance.validate();
        measurement.validate();
        if (!(nu0 >= 0.0 && nu0 <= 1.0)) throw ConfigError("nu0 must lie in [0, 1]");
    } catch (const DomainError& ex) {
        throw ConfigError(ex.what());
    }
}

void ScenarioConfig::apply_seed(std::uint64_t s) {
    seed = s;
    optimizer.seed = s;
    measurement.seed = s + 1;
}

namespace {

double finite_or_null(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json inf_as_null(double x) { return std::isinf(x) ? json(nullptr) : json(x); }

/// Reads optional keys from an object and rejects unknown ones.
class Section {
public:
    Section(const json& parent, const char* name) : name_(name) {
        if (!parent.contains(name)) return;
        obj_ = &parent.at(name);
        if (!obj_->is_object()) throw ConfigError(std::string("section '") + name + "' must be an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        used_.insert(key);
        if (obj_ && obj_->contains(key)) out = obj_->at(key).get<T>();
    }

    const json* raw(const char* key) {
        used_.insert(key);
        return obj_ && obj_->contains(key) ? &obj_->at(key) : nullptr;
    }

    void finish() const {
        if (!obj_) return;
        for (auto it = obj_->begin(); it != obj_->end(); ++it) {
            if (!used_.count(it.key())) throw ConfigError("unknown key '" + name_ + "." + it.key() + "'");
        }
    }

private:
    std::string name_;
    const json* obj_ = nullptr;
    std::set<std::string> used_;
};

}  // namespace

std::string ScenarioConfig::to_json() const {
    json j;
    j["grid"] = {{"length", grid_length}, {"points", grid_points}};
    j["condensate"] = {{"mass", condensate.mass},
                       {"scattering_length", condensate.scattering_length},
                       {"atom_number", condensate.atom_number},
                       {"omega_perp", condensate.omega_perp}};
    j["solver"] = {{"dtau", solver.dtau},
                   {"max_steps", solver.max_steps},
                   {"tolerance", solver.tolerance},
                   {"check_every", solver.check_every}};
    j["beam"] = {{"sigma_y", beam.sigma_y}, {"sigma_z", inf_as_null(beam.sigma_z)}};
    j["psf"] = {{"sigma_z", psf_sigma_z}, {"w_y", psf_w_y}, {"y_range", psf_y_range}};
    j["dmd"] = {{"n_transversal", dmd.n_transversal}, {"n_longitudinal", dmd.n_longitudinal}, {"pitch", dmd.pitch}};
    j["magnetic"] = {{"omega_par", magnetic.omega_par},
                     {"ripple_amplitude", magnetic.ripple_amplitude},
                     {"ripple_wavelength", magnetic.ripple_wavelength},
                     {"ripple_phase", magnetic.ripple_phase}};
    j["desired"] = {{"v_max", desired.v_max}, {"k_v", desired.k_v}};
    j["optics"] = {{"alpha_v", alpha_v}, {"headroom", headroom}};
    j["lut"] = {{"n_nu", n_nu},
                {"algorithm", optimizer.algorithm == inputmap::Algorithm::genetic ? "genetic" : "local_search"},
                {"population", optimizer.population},
                {"generations", optimizer.generations},
                {"mutation_rate", optimizer.mutation_rate},
                {"seed", optimizer.seed},
                {"gamma_perp", optimizer.gamma_perp},
                {"delta_y", optimizer.delta_y},
                {"restarts", optimizer.restarts}};
    j["learning"] = {{"gamma", gamma}, {"eps_opt", cutoffs.eps_opt}, {"eps_mu", cutoffs.eps_mu}};
    j["measurement"] = {{"noise_std", measurement.noise_std},
                        {"seed", measurement.seed},
                        {"clamp_nonnegative", measurement.clamp_nonnegative}};
    auto& dist = j["disturbances"] = json::array();
    for (const auto& ev : disturbances) {
        json spots = json::array();
        for (const auto& s : ev.disturbance.spots) {
            spots.push_back({{"center", s.center}, {"width", s.width}, {"depth", s.depth}});
        }
        dist.push_back({{"iteration", ev.iteration}, {"spots", spots}});
    }
    j["run"] = {{"iterations", iterations}, {"nu0", nu0}, {"seed", seed}, {"export_iterations", export_iterations}};
    return j.dump(2) + "\n";
}

ScenarioConfig ScenarioConfig::from_json(const std::string& text) {
    ScenarioConfig c;
    try {
        const json j = json::parse(text);
        if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");
        static const std::set<std::string> known{"grid",     "condensate", "solver",   "beam",        "psf",
                                                 "dmd",      "magnetic",   "desired",  "optics",      "lut",
                                                 "learning", "measurement", "disturbances", "run"};
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!known.count(it.key())) throw ConfigError("unknown section '" + it.key() + "'");
        }

        // The master seed goes first so explicit per-module seeds override it.
        Section run(j, "run");
        run.get("iterations", c.iterations);
        run.get("nu0", c.nu0);
        if (const auto* s = run.raw("seed")) c.apply_seed(s->get<std::uint64_t>());
        run.get("export_iterations", c.export_iterations);
        run.finish();

        Section grid(j, "grid");
        grid.get("length", c.grid_length);
        grid.get("points", c.grid_points);
        grid.finish();

        Section cond(j, "condensate");
        cond.get("mass", c.condensate.mass);
        cond.get("scattering_length", c.condensate.scattering_length);
        cond.get("atom_number", c.condensate.atom_number);
        cond.get("omega_perp", c.condensate.omega_perp);
        cond.finish();

        Section solver(j, "solver");
        solver.get("dtau", c.solver.dtau);
        solver.get("max_steps", c.solver.max_steps);
        solver.get("tolerance", c.solver.tolerance);
        solver.get("check_every", c.solver.check_every);
        solver.finish();

        Section beam(j, "beam");
        beam.get("sigma_y", c.beam.sigma_y);
        if (const auto* s = beam.raw("sigma_z")) c.beam.sigma_z = finite_or_null(*s);
        beam.finish();

        Section psf(j, "psf");
        psf.get("sigma_z", c.psf_sigma_z);
        psf.get("w_y", c.psf_w_y);
        psf.get("y_range", c.psf_y_range);
        psf.finish();

        Section dmd(j, "dmd");
        dmd.get("n_transversal", c.dmd.n_transversal);
        dmd.get("n_longitudinal", c.dmd.n_longitudinal);
        dmd.get("pitch", c.dmd.pitch);
        dmd.finish();

        Section mag(j, "magnetic");
        mag.get("omega_par", c.magnetic.omega_par);
        mag.get("ripple_amplitude", c.magnetic.ripple_amplitude);
        mag.get("ripple_wavelength", c.magnetic.ripple_wavelength);
        mag.get("ripple_phase", c.magnetic.ripple_phase);
        mag.finish();

        Section des(j, "desired");
        des.get("v_max", c.desired.v_max);
        des.get("k_v", c.desired.k_v);
        des.finish();

        Section opt(j, "optics");
        opt.get("alpha_v", c.alpha_v);
        opt.get("headroom", c.headroom);
        opt.finish();

        Section lut(j, "lut");
        lut.get("n_nu", c.n_nu);
        if (const auto* a = lut.raw("algorithm")) {
            const auto name = a->get<std::string>();
            if (name == "genetic") c.optimizer.algorithm = inputmap::Algorithm::genetic;
            else if (name == "local_search") c.optimizer.algorithm = inputmap::Algorithm::local_search;
            else throw ConfigError("unknown LUT algorithm '" + name + "'");
        }
        lut.get("population", c.optimizer.population);
        lut.get("generations", c.optimizer.generations);
        lut.get("mutation_rate", c.optimizer.mutation_rate);
        lut.get("seed", c.optimizer.seed);
        lut.get("gamma_perp", c.optimizer.gamma_perp);
        lut.get("delta_y", c.optimizer.delta_y);
        lut.get("restarts", c.optimizer.restarts);
        lut.finish();

        Section learn(j, "learning");
        learn.get("gamma", c.gamma);
        learn.get("eps_opt", c.cutoffs.eps_opt);
        learn.get("eps_mu", c.cutoffs.eps_mu);
        learn.finish();

        Section meas(j, "measurement");
        meas.get("noise_std", c.measurement.noise_std);
        meas.get("seed", c.measurement.seed);
        meas.get("clamp_nonnegative", c.measurement.clamp_nonnegative);
        meas.finish();

        if (j.contains("disturbances")) {
            c.disturbances.clear();
            for (const auto& ev : j.at("disturbances")) {
                DisturbanceEvent e;
                e.iteration = ev.at("iteration").get<std::size_t>();
                for (const auto& s : ev.at("spots")) {
                    e.disturbance.spots.push_back(
                        {s.at("center").get<double>(), s.value("width", 2.0), s.value("depth", 0.3)});
                }
                c.disturbances.push_back(std::move(e));
            }
            std::stable_sort(c.disturbances.begin(), c.disturbances.end(),
                             [](const auto& a, const auto& b) { return a.iteration < b.iteration; });
        }
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("malformed scenario config: ") + ex.what());
    }
    c.validate();
    return c;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

void ScenarioConfig::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << to_json();
    if (!out) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------- scenario

Scenario prepare(const ScenarioConfig& cfg) {
    cfg.validate();
    const auto grid = cfg.grid();
    const auto psf = cfg.psf();
    auto beam = cfg.beam;
    beam.amplitude = optics::calibrate_amplitude(psf, beam, cfg.dmd, cfg.alpha_v, cfg.headroom * cfg.desired.v_max);
    const double e_max = optics::e_perp_max(psf, beam, cfg.dmd);

    auto v_mag = optics::magnetic_potential(cfg.magnetic, cfg.condensate.mass, grid);
    auto v_d = desired_potential(cfg.desired, grid);
    auto gs = condensate::ground_state(v_d, cfg.condensate, cfg.solver);
    if (!gs.converged) throw SolverError("desired ground state did not converge");
    auto rho_d = gs.density();

    auto gain = ilc::gain_profile(v_d, v_mag, gs.mu, cfg.condensate, e_max, cfg.alpha_v, cfg.cutoffs);
    auto model = ilc::transfer_function(psf, gain.alpha_bar, grid);
    const double gamma = cfg.gamma > 0.0 ? cfg.gamma : ilc::default_gamma(model.G);
    auto kernel = ilc::design_kernel(model.G, gamma);

    return Scenario{cfg,       grid, psf, beam, e_max, std::move(v_mag), std::move(v_d), std::move(gs),
                    std::move(rho_d), std::move(gain), std::move(model), std::move(kernel)};
}

// ---------------------------------------------------------------- plants

Plant physics_plant(const Scenario& scenario, const inputmap::Lut& lut) {
    const auto& cfg = scenario.config;
    if (lut.header().model_hash != inputmap::model_hash(scenario.psf, scenario.beam, cfg.dmd)) {
        throw ConfigError("LUT was built for a different optical model");
    }
    return [&scenario, &lut](const RealField1D& nu, std::size_t n) {
        const auto& c = scenario.config;
        auto pattern = inputmap::map_virtual_input(nu.values(), lut, c.dmd);
        const auto field = optics::propagate_full(pattern, scenario.beam, scenario.psf, scenario.grid);
        auto v_opt = optics::potential_from_field(field, c.alpha_v, inject_disturbances(c.disturbances, n));
        auto v = scenario.v_mag + v_opt;

        // Solved from the Thomas-Fermi profile every time: a warm start can
        // settle in a metastable state that leaves disjoint pockets empty.
        auto gs = condensate::ground_state(v, c.condensate, c.solver);
        if (!gs.converged) {
            throw SolverError("ground state did not converge at iteration " + std::to_string(n));
        }
        RealField1D applied(nu.grid(), inputmap::invert_pattern(pattern, lut));
        return PlantResponse{gs.density(), std::move(v), std::move(v_opt), gs.mu, std::move(pattern),
                             std::move(applied)};
    };
}

Plant linear_surrogate(const Scenario& scenario, const RealField1D& nu_ref, const RealField1D& rho_ref) {
    if (!(rho_ref.grid() == scenario.grid)) throw DomainError("reference density must live on the field grid");
    return [&scenario, nu_ref, rho_ref](const RealField1D& nu, std::size_t) {
        if (!(nu.grid() == nu_ref.grid())) throw DomainError("virtual input grid differs from the reference");
        const auto& g = scenario.grid;
        auto dnu = RealField1D::from_function(g, [&](double z) { return nu.interpolate(z) - nu_ref.interpolate(z); });
        const auto blur = core::convolve(dnu, scenario.model.g_z).field;
        std::vector<double> rho(g.size());
        for (std::size_t i = 0; i < rho.size(); ++i) {
            const double s = std::sqrt(rho_ref[i]) - scenario.model.alpha_bar * blur[i];
            if (s < 0.0) throw DomainError("linear surrogate left its valid range (negative sqrt density)");
            rho[i] = s * s;
        }
        RealField1D zero(g);
        return PlantResponse{RealField1D(g, std::move(rho)), zero, zero, 0.0, std::nullopt, std::nullopt};
    };
}

// ---------------------------------------------------------------- loop

std::string pattern_hash(const optics::DmdPattern& pattern) {
    const auto bits = pattern.bits();
    return core::hex64(core::fnv1a(std::string_view(reinterpret_cast<const char*>(bits.data()), bits.size())));
}

RunResult run_closed_loop(const Scenario& scenario, const Plant& plant, const RealField1D& nu0,
                          std::size_t iterations, const RealField1D& rho_desired) {
    RunResult out;
    RealField1D nu = nu0;
    for (std::size_t n = 0; n < iterations; ++n) {
        PlantResponse resp{RealField1D(scenario.grid), RealField1D(scenario.grid), RealField1D(scenario.grid), 0.0,
                           std::nullopt, std::nullopt};
        try {
            resp = plant(nu, n);
        } catch (const SolverError& ex) {
            out.aborted = true;
            out.failure = ex.what();
            break;
        }
        const auto meas = condensate::measure_density(resp.rho, scenario.config.measurement, n);
        auto e = ilc::density_error(meas, rho_desired);
        if (resp.applied_nu) nu = *resp.applied_nu;
        auto upd = ilc::update(nu, e, scenario.kernel);

        const double norm = core::l2_norm(e);
        std::string hash = resp.pattern ? pattern_hash(*resp.pattern) : std::string();
        IterationRecord rec{n,         nu,   std::move(resp.pattern), std::move(hash), std::move(resp.v),
                            std::move(resp.v_opt), meas, std::move(e), norm, resp.mu, upd.clamped};
        out.records.push_back(std::move(rec));
        nu = std::move(upd.nu);
    }
    return out;
}

RunResult run_closed_loop(const Scenario& scenario, const inputmap::Lut& lut) {
    const auto cols = ilc::column_grid(scenario.config.dmd);
    const RealField1D nu0(cols, std::vector<double>(cols.size(), scenario.config.nu0));
    return run_closed_loop(scenario, physics_plant(scenario, lut), nu0, scenario.config.iterations,
                           scenario.rho_desired);
}

HiddenRegionMetric hidden_region(const std::vector<IterationRecord>& records, const RealField1D& rho_desired,
                                 std::size_t from_n) {
    HiddenRegionMetric m;
    if (records.size() < 2) return m;
    const auto& cols = records.front().nu.grid();
    const double threshold = 1e-4 * rho_desired.max();
    std::vector<bool> hidden(cols.size());
    std::size_t n_hidden = 0;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        hidden[j] = rho_desired.interpolate(cols.z(j)) < threshold;
        n_hidden += hidden[j];
    }
    double sum_h = 0.0, sum_o = 0.0;
    for (std::size_t k = 0; k + 1 < records.size(); ++k) {
        if (records[k].n < from_n) continue;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const double d = std::abs(records[k + 1].nu[j] - records[k].nu[j]);
            (hidden[j] ? sum_h : sum_o) += d;
        }
    }
    const std::size_t n_occ = cols.size() - n_hidden;
    if (n_hidden) m.hidden_per_length = sum_h / (static_cast<double>(n_hidden) * cols.dz());
    if (n_occ) m.occupied_per_length = sum_o / (static_cast<double>(n_occ) * cols.dz());
    m.ratio = m.occupied_per_length > 0.0 ? m.hidden_per_length / m.occupied_per_length : 0.0;
    return m;
}

// ---------------------------------------------------------------- export

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double column_value(const RealField1D& nu, double z) {
    const auto& g = nu.grid();
    const double t = (z - g.front()) / g.dz();
    const double j = std::round(t);
    if (j < 0.0 || j > static_cast<double>(g.size() - 1) || std::abs(t - j) > 0.5) return 0.0;
    return nu[static_cast<std::size_t>(j)];
}

std::string fields_csv(const IterationRecord& r) {
    std::string s = "z,nu,V,V_opt,rho,e_rho\n";
    const auto& g = r.error.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        s += fmt17(g.z(i)) + "," + fmt17(column_value(r.nu, g.z(i))) + "," + fmt17(r.v[i]) + "," +
             fmt17(r.v_opt[i]) + "," + fmt17(r.rho[i]) + "," + fmt17(r.error[i]) + "\n";
    }
    return s;
}

std::string pbm(const optics::DmdPattern& p) {
    const auto& g = p.geometry();
    std::string s = "P1\n" + std::to_string(g.n_longitudinal) + " " + std::to_string(g.n_transversal) + "\n";
    for (std::size_t row = 0; row < g.n_transversal; ++row) {
        for (std::size_t col = 0; col < g.n_longitudinal; ++col) {
            s += p.at(row, col) ? '1' : '0';
            s += col + 1 < g.n_longitudinal ? ' ' : '\n';
        }
    }
    return s;
}

}  // namespace

void export_records(const RunResult& run, const Scenario& scenario, const RunMetadata& meta,
                    const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    std::string norms = "n,norm,mu,clamped\n";
    for (const auto& r : run.records) {
        norms += std::to_string(r.n) + "," + fmt17(r.error_norm) + "," + fmt17(r.mu) + "," + std::to_string(r.clamped) + "\n";
    }
    write_file(out_dir / "error_norms.csv", norms);

    const std::set<std::size_t> selected(scenario.config.export_iterations.begin(),
                                         scenario.config.export_iterations.end());
    for (const auto& r : run.records) {
        if (!selected.count(r.n) && r.n + 1 != run.records.size()) continue;
        write_file(out_dir / ("fields_" + std::to_string(r.n) + ".csv"), fields_csv(r));
        if (r.pattern) write_file(out_dir / ("pattern_" + std::to_string(r.n) + ".pbm"), pbm(*r.pattern));
    }

    json j;
    j["version"] = DMDILC_VERSION;
    j["config"] = json::parse(scenario.config.to_json());
    j["derived"] = {{"beam_amplitude", scenario.beam.amplitude},
                    {"e_perp_max", scenario.e_perp_max},
                    {"mu_desired", scenario.desired_state.mu},
                    {"alpha_bar", scenario.gain.alpha_bar},
                    {"kappa", scenario.gain.kappa},
                    {"gamma", scenario.kernel.gamma},
                    {"kernel_points", scenario.kernel.kernel.size()},
                    {"grid_dz", scenario.grid.dz()}};
    j["hashes"] = {{"config", core::hex64(core::fnv1a(scenario.config.to_json()))},
                   {"lut", meta.lut_hash},
                   {"kernel", meta.kernel_hash.empty() ? scenario.kernel.model_hash : meta.kernel_hash}};
    j["iterations_run"] = run.records.size();
    j["aborted"] = run.aborted;
    j["failure"] = run.failure;
    write_file(out_dir / "run.json", j.dump(2) + "\n");
}

std::vector<ReportRow> report(const std::filesystem::path& in_dir) {
    std::istringstream norms(read_file(in_dir / "error_norms.csv"));
    std::string line;
    std::getline(norms, line);
    if (line != "n,norm,mu,clamped") throw IoError("unexpected header in " + (in_dir / "error_norms.csv").string());

    std::vector<ReportRow> rows;
    while (std::getline(norms, line)) {
        if (line.empty()) continue;
        ReportRow r;
        unsigned long long n = 0, clamped = 0;
        if (std::sscanf(line.c_str(), "%llu,%lf,%lf,%llu", &n, &r.stored_norm, &r.mu, &clamped) != 4) {
            throw IoError("malformed row in error_norms.csv: " + line);
        }
        r.n = n;
        r.clamped = clamped;

        const auto fields = in_dir / ("fields_" + std::to_string(r.n) + ".csv");
        if (std::filesystem::exists(fields)) {
            std::istringstream fs(read_file(fields));
            std::string fl;
            std::getline(fs, fl);
            std::vector<double> z, e;
            while (std::getline(fs, fl)) {
                double v[6];
                if (std::sscanf(fl.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3], &v[4], &v[5]) != 6) {
                    throw IoError("malformed row in " + fields.string());
                }
                z.push_back(v[0]);
                e.push_back(v[5] * v[5]);
            }
            if (z.size() >= 2) {
                const double dz = (z.back() - z.front()) / static_cast<double>(z.size() - 1);
                r.recomputed_norm = std::sqrt(core::integrate(e, dz));
            }
        }
        rows.push_back(r);
    }
    return rows;
}

}  // namespace dmdilc::harness
