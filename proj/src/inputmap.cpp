#include "dmdilc/inputmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace dmdilc::inputmap {

using optics::BeamProfile;
using optics::DmdGeometry;
using optics::DmdPattern;
using optics::PsfModel;

namespace {

/// Portable draws from mt19937_64; std distributions are implementation
/// defined and would break cross-platform reproducibility of the table.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 eng_;
};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool improves(double candidate, double current) {
    return candidate < current - 1e-15 * std::abs(current) - 1e-300;
}

/// Best-improvement descent over single flips and on/off swaps. Moves that
/// would drop the achieved value to or below `floor` are rejected.
void polish(TransversalPattern& bits, double nu, const TransversalObjective& obj,
            double floor = -std::numeric_limits<double>::infinity()) {
    const std::size_t nb = obj.n_bits();
    const std::size_t nf = obj.n_fields();
    std::vector<double> f(nf), trial(nf);
    for (;;) {
        obj.fields(bits, f);
        const double current = obj.evaluate_fields(f, nu);
        double best = current;
        std::size_t bi = nb, bj = nb;

        for (std::size_t i = 0; i < nb; ++i) {
            const double sgn = bits[i] ? -1.0 : 1.0;
            for (std::size_t s = 0; s < nf; ++s) trial[s] = f[s] + sgn * obj.weight(s, i);
            if (!(trial[0] > floor)) continue;
            const double v = obj.evaluate_fields(trial, nu);
            if (improves(v, best)) {
                best = v;
                bi = i;
                bj = nb;
            }
        }
        for (std::size_t i = 0; i < nb; ++i) {
            if (!bits[i]) continue;
            for (std::size_t j = 0; j < nb; ++j) {
                if (bits[j]) continue;
                for (std::size_t s = 0; s < nf; ++s) trial[s] = f[s] - obj.weight(s, i) + obj.weight(s, j);
                if (!(trial[0] > floor)) continue;
                const double v = obj.evaluate_fields(trial, nu);
                if (improves(v, best)) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bi == nb) return;
        bits[bi] ^= 1;
        if (bj != nb) bits[bj] ^= 1;
    }
}

PatternSolution finish(TransversalPattern bits, double nu, const TransversalObjective& obj) {
    PatternSolution s;
    s.achieved = obj.achieved(bits);
    s.residual = obj.evaluate(bits, nu);
    s.pattern = std::move(bits);
    return s;
}

PatternSolution solve_genetic(double nu, const OptimizerConfig& cfg, const TransversalObjective& obj) {
    const std::size_t nb = obj.n_bits();
    const std::size_t pop = std::max<std::size_t>(cfg.population, 4);
    const double mutation = cfg.mutation_rate > 0.0 ? cfg.mutation_rate : 2.0 / static_cast<double>(nb);
    Rng rng(cfg.seed);

    std::vector<TransversalPattern> population(pop, TransversalPattern(nb, 0));
    std::fill(population[1].begin(), population[1].end(), 1);
    for (std::size_t p = 2; p < pop; ++p) {
        const double q = p % 2 == 0 ? nu : rng.uniform();
        for (auto& b : population[p]) b = rng.bernoulli(q) ? 1 : 0;
    }
    std::vector<double> fitness(pop);
    for (std::size_t p = 0; p < pop; ++p) fitness[p] = obj.evaluate(population[p], nu);

    std::vector<std::size_t> order(pop);
    auto rank = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });
    };
    auto tournament = [&]() -> const TransversalPattern& {
        const std::size_t a = rng.below(pop);
        const std::size_t b = rng.below(pop);
        return fitness[a] <= fitness[b] ? population[a] : population[b];
    };

    constexpr std::size_t kElites = 2;
    std::vector<TransversalPattern> next(pop, TransversalPattern(nb));
    std::vector<double> next_fitness(pop);
    for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
        rank();
        for (std::size_t e = 0; e < kElites; ++e) {
            next[e] = population[order[e]];
            next_fitness[e] = fitness[order[e]];
        }
        for (std::size_t p = kElites; p < pop; ++p) {
            const auto& a = tournament();
            const auto& b = tournament();
            auto& child = next[p];
            for (std::size_t i = 0; i < nb; ++i) {
                child[i] = rng.bernoulli(0.5) ? a[i] : b[i];
                if (rng.bernoulli(mutation)) child[i] ^= 1;
            }
            next_fitness[p] = obj.evaluate(child, nu);
        }
        population.swap(next);
        fitness.swap(next_fitness);
    }
    rank();
    TransversalPattern best = population[order[0]];
    polish(best, nu, obj);
    return finish(std::move(best), nu, obj);
}

PatternSolution solve_local(double nu, const OptimizerConfig& cfg, const TransversalObjective& obj) {
    const std::size_t nb = obj.n_bits();
    Rng rng(cfg.seed);
    std::optional<PatternSolution> best;
    for (std::size_t r = 0; r < std::max<std::size_t>(cfg.restarts, 1); ++r) {
        TransversalPattern bits(nb, 0);
        if (r == 1) std::fill(bits.begin(), bits.end(), 1);
        if (r > 1) {
            for (auto& b : bits) b = rng.bernoulli(nu) ? 1 : 0;
        }
        polish(bits, nu, obj);
        auto sol = finish(std::move(bits), nu, obj);
        if (!best || sol.residual < best->residual) best = std::move(sol);
    }
    return *best;
}

std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void OptimizerConfig::validate() const {
    if (population < 4) throw ConfigError("optimizer population must be at least 4");
    if (mutation_rate < 0.0 || mutation_rate > 1.0) throw ConfigError("mutation rate must lie in [0, 1]");
    if (!(gamma_perp > 0.0)) throw ConfigError("gamma_perp must be positive");
    if (!(delta_y > 0.0)) throw ConfigError("delta_y must be positive");
}

// ---------------------------------------------------------------- field / objective

double transversal_field(std::span<const std::uint8_t> pattern, const PsfModel& psf,
                         const BeamProfile& beam, const DmdGeometry& geometry, double y) {
    if (pattern.size() != geometry.n_transversal) throw DomainError("pattern length must equal n_T");
    const optics::TransversalResponse resp(psf, beam, geometry, {y});
    const auto w = resp.weights(0);
    double acc = 0.0;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i]) acc += w[i];
    }
    return acc / resp.all_on_center();
}

TransversalObjective::TransversalObjective(const PsfModel& psf, const BeamProfile& beam,
                                           const DmdGeometry& geometry, double gamma_perp,
                                           double delta_y)
    : n_bits_(geometry.n_transversal), gamma_(gamma_perp), delta_y_(delta_y) {
    if (!(gamma_perp > 0.0) || !(delta_y > 0.0)) throw DomainError("gamma_perp and delta_y must be positive");
    // At least 2*dy/pitch + 1 points.
    const auto intervals = static_cast<std::size_t>(std::ceil(2.0 * delta_y / geometry.pitch - 1e-9));
    const double h = 2.0 * delta_y / static_cast<double>(intervals);
    std::vector<double> ys{0.0};
    for (std::size_t s = 0; s <= intervals; ++s) {
        ys.push_back(-delta_y + h * static_cast<double>(s));
        quad_.push_back((s == 0 || s == intervals) ? 0.5 * h : h);
    }
    const optics::TransversalResponse resp(psf, beam, geometry, ys);
    const double norm = resp.all_on_center();
    w_.resize(ys.size() * n_bits_);
    for (std::size_t s = 0; s < ys.size(); ++s) {
        const auto w = resp.weights(s);
        for (std::size_t i = 0; i < n_bits_; ++i) w_[s * n_bits_ + i] = w[i] / norm;
    }
}

void TransversalObjective::fields(std::span<const std::uint8_t> pattern, std::span<double> out) const {
    if (pattern.size() != n_bits_) throw DomainError("pattern length must equal n_T");
    for (std::size_t s = 0; s < n_fields(); ++s) {
        double acc = 0.0;
        const double* w = &w_[s * n_bits_];
        for (std::size_t i = 0; i < n_bits_; ++i) {
            if (pattern[i]) acc += w[i];
        }
        out[s] = acc;
    }
}

double TransversalObjective::evaluate_fields(std::span<const double> f, double nu) const {
    const double d0 = std::abs(f[0]) - nu;
    double pen = 0.0;
    for (std::size_t s = 0; s < quad_.size(); ++s) {
        const double d = std::abs(f[s + 1]) - nu;
        pen += quad_[s] * d * d;
    }
    return d0 * d0 + gamma_ * pen;
}

double TransversalObjective::achieved(std::span<const std::uint8_t> pattern) const {
    std::vector<double> f(n_fields());
    fields(pattern, f);
    return f[0];
}

double TransversalObjective::evaluate(std::span<const std::uint8_t> pattern, double nu) const {
    std::vector<double> f(n_fields());
    fields(pattern, f);
    return evaluate_fields(f, nu);
}

PatternSolution solve_pattern(double nu, const OptimizerConfig& cfg, const TransversalObjective& objective) {
    if (!(nu >= 0.0 && nu <= 1.0)) throw DomainError("target nu must lie in [0, 1]");
    cfg.validate();
    return cfg.algorithm == Algorithm::genetic ? solve_genetic(nu, cfg, objective)
                                               : solve_local(nu, cfg, objective);
}

// ---------------------------------------------------------------- table

Lut::Lut(LutHeader header, std::vector<LutEntry> entries)
    : header_(std::move(header)), entries_(std::move(entries)) {
    if (entries_.size() < 2) throw DomainError("look-up table needs at least two entries");
    for (const auto& e : entries_) {
        if (e.pattern.size() != header_.n_transversal) throw DomainError("LUT pattern length mismatch");
    }
}

std::size_t Lut::nearest(double nu) const {
    const double x = nu * static_cast<double>(entries_.size() - 1);
    auto k = static_cast<std::size_t>(std::floor(x));
    if (x - static_cast<double>(k) > 0.5) ++k;
    return std::min(k, entries_.size() - 1);
}

std::optional<std::size_t> Lut::find(std::span<const std::uint8_t> pattern) const {
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        if (std::equal(pattern.begin(), pattern.end(), entries_[k].pattern.begin(), entries_[k].pattern.end())) {
            return k;
        }
    }
    return std::nullopt;
}

std::string bits_to_string(std::span<const std::uint8_t> bits) {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
    return s;
}

TransversalPattern bits_from_string(const std::string& s) {
    TransversalPattern bits(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '0' && s[i] != '1') throw ConfigError("bit string may only contain 0 and 1");
        bits[i] = s[i] == '1' ? 1 : 0;
    }
    return bits;
}

std::string Lut::to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "dmdilc-lut";
    j["version"] = 1;
    j["header"] = {{"n_transversal", header_.n_transversal},
                   {"n_nu", header_.n_nu},
                   {"gamma_perp", header_.gamma_perp},
                   {"delta_y", header_.delta_y},
                   {"model_hash", header_.model_hash},
                   {"seed", header_.seed}};
    auto& arr = j["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : entries_) {
        arr.push_back({{"nu", e.nu},
                       {"bits", bits_to_string(e.pattern)},
                       {"achieved", e.achieved},
                       {"residual", e.residual}});
    }
    return j.dump(1) + "\n";
}

Lut Lut::from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("format").get<std::string>() != "dmdilc-lut") throw ConfigError("not a LUT file");
        if (j.at("version").get<int>() != 1) throw ConfigError("unsupported LUT version");
        const auto& h = j.at("header");
        LutHeader header{h.at("n_transversal").get<std::size_t>(), h.at("n_nu").get<std::size_t>(),
                         h.at("gamma_perp").get<double>(),        h.at("delta_y").get<double>(),
                         h.at("model_hash").get<std::string>(),   h.at("seed").get<std::uint64_t>()};
        std::vector<LutEntry> entries;
        for (const auto& e : j.at("entries")) {
            entries.push_back({e.at("nu").get<double>(), bits_from_string(e.at("bits").get<std::string>()),
                               e.at("achieved").get<double>(), e.at("residual").get<double>()});
        }
        if (entries.size() != header.n_nu) throw ConfigError("LUT entry count does not match header");
        return Lut(std::move(header), std::move(entries));
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("malformed LUT: ") + ex.what());
    }
}

void Lut::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << to_json();
    if (!out) throw IoError("failed writing " + path.string());
}

Lut Lut::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string model_hash(const PsfModel& psf, const BeamProfile& beam, const DmdGeometry& geometry) {
    const std::string key = "psf:" + fmt17(psf.sigma_z()) + "," + fmt17(psf.w_y()) + "," +
                            fmt17(psf.y_range()) + ";beam:" + fmt17(beam.sigma_y) + "," +
                            fmt17(beam.sigma_z) + ";dmd:" + std::to_string(geometry.n_transversal) +
                            "," + fmt17(geometry.pitch);
    return core::hex64(core::fnv1a(key));
}

Lut build_lut(std::size_t n_nu, const OptimizerConfig& cfg, const PsfModel& psf,
              const BeamProfile& beam, const DmdGeometry& geometry) {
    if (n_nu < 2) throw DomainError("n_nu must be at least 2");
    cfg.validate();
    const TransversalObjective obj(psf, beam, geometry, cfg.gamma_perp, cfg.delta_y);

    std::vector<LutEntry> entries(n_nu);
    for (std::size_t k = 0; k < n_nu; ++k) {
        const double nu = static_cast<double>(k) / static_cast<double>(n_nu - 1);
        OptimizerConfig entry_cfg = cfg;
        entry_cfg.seed = splitmix64(cfg.seed ^ splitmix64(k));
        auto sol = solve_pattern(nu, entry_cfg, obj);
        entries[k] = {nu, std::move(sol.pattern), sol.achieved, sol.residual};
    }

    // Monotonic repair: re-solve offending entries from the previous entry's
    // pattern, keeping the achieved value strictly above it.
    constexpr int kRetries = 3;
    std::vector<std::size_t> failed;
    for (std::size_t k = 1; k < n_nu; ++k) {
        if (entries[k].achieved > entries[k - 1].achieved) continue;
        const double floor = entries[k - 1].achieved;
        const double nu = entries[k].nu;
        TransversalPattern bits = entries[k - 1].pattern;
        // Greedy additions: switch on the bit that helps the objective most.
        for (;;) {
            const double current = obj.evaluate(bits, nu);
            double best = current;
            std::size_t bi = bits.size();
            for (std::size_t i = 0; i < bits.size(); ++i) {
                if (bits[i]) continue;
                bits[i] = 1;
                const double v = obj.evaluate(bits, nu);
                if (improves(v, best)) {
                    best = v;
                    bi = i;
                }
                bits[i] = 0;
            }
            if (bi == bits.size()) break;
            bits[bi] = 1;
        }
        // Still not above the floor: add the strongest remaining bits.
        for (int attempt = 0; attempt < kRetries && !(obj.achieved(bits) > floor); ++attempt) {
            std::size_t bi = bits.size();
            for (std::size_t i = 0; i < bits.size(); ++i) {
                if (!bits[i] && obj.weight(0, i) > 0.0 && (bi == bits.size() || obj.weight(0, i) > obj.weight(0, bi))) bi = i;
            }
            if (bi == bits.size()) break;
            bits[bi] = 1;
        }
        bool fixed = false;
        if (obj.achieved(bits) > floor) {
            polish(bits, nu, obj, floor);
            auto sol = finish(std::move(bits), nu, obj);
            entries[k] = {nu, std::move(sol.pattern), sol.achieved, sol.residual};
            fixed = true;
        }
        if (!fixed) failed.push_back(k);
    }
    if (!failed.empty()) {
        std::string msg = "monotonic repair failed for LUT entries:";
        for (auto k : failed) msg += " " + std::to_string(k);
        throw DomainError(msg);
    }

    LutHeader header{geometry.n_transversal, n_nu, cfg.gamma_perp, cfg.delta_y,
                     model_hash(psf, beam, geometry), cfg.seed};
    return Lut(std::move(header), std::move(entries));
}

// ---------------------------------------------------------------- mapping

DmdPattern map_virtual_input(std::span<const double> nu, const Lut& lut, const DmdGeometry& geometry) {
    geometry.validate();
    if (nu.size() != geometry.n_longitudinal) throw DomainError("one nu value per DMD column expected");
    if (lut.header().n_transversal != geometry.n_transversal) throw DomainError("LUT does not match DMD height");
    DmdPattern pattern = DmdPattern::zeros(geometry);
    for (std::size_t j = 0; j < nu.size(); ++j) {
        if (!(nu[j] >= 0.0 && nu[j] <= 1.0)) throw DomainError("virtual input outside [0, 1]");
        pattern.set_column(j, lut[lut.nearest(nu[j])].pattern);
    }
    return pattern;
}

std::vector<double> invert_pattern(const DmdPattern& pattern, const Lut& lut) {
    const auto& g = pattern.geometry();
    if (lut.header().n_transversal != g.n_transversal) throw DomainError("LUT does not match DMD height");
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t k = lut.size(); k-- > 0;) index[bits_to_string(lut[k].pattern)] = k;
    std::vector<double> nu(g.n_longitudinal);
    for (std::size_t j = 0; j < g.n_longitudinal; ++j) {
        const auto it = index.find(bits_to_string(pattern.column(j)));
        if (it == index.end()) {
            throw DomainError("column " + std::to_string(j) + " is not a LUT pattern");
        }
        nu[j] = lut[it->second].nu;
    }
    return nu;
}

}  // namespace dmdilc::inputmap
