#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "dmdilc/inputmap.hpp"
#include "gen.hpp"

using namespace dmdilc;
using namespace dmdilc::inputmap;
using optics::BeamProfile;
using optics::DmdGeometry;
using optics::PsfModel;

namespace {

const DmdGeometry kGeom{100, 40, 1.0};
const PsfModel kPsf;
const BeamProfile kBeam{1.0, 13.0, 125.0};

const Lut& small_lut() {
    static const Lut lut = build_lut(11, OptimizerConfig{}, kPsf, kBeam, kGeom);
    return lut;
}

double quad_field(std::span<const std::uint8_t> bits, double y) {
    // Midpoint rule with 200 sub-samples per pixel.
    double acc = 0.0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (!bits[i]) continue;
        const double lo = kGeom.row_center(i) - 0.5;
        for (int s = 0; s < 200; ++s) {
            const double xi = lo + (s + 0.5) / 200.0;
            acc += kPsf.g_y(y - xi) * kBeam.p_y(xi) / 200.0;
        }
    }
    return acc;
}

}  // namespace

TEST_CASE("transversal field") {
    const std::vector<std::uint8_t> zeros(100, 0), ones(100, 1);
    for (double y : {-3.0, 0.0, 4.0}) CHECK(transversal_field(zeros, kPsf, kBeam, kGeom, y) == 0.0);
    CHECK(transversal_field(ones, kPsf, kBeam, kGeom, 0.0) == 1.0);

    std::vector<std::uint8_t> alt(100);
    for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2;
    const double got = transversal_field(alt, kPsf, kBeam, kGeom, 0.0);
    CHECK(got == doctest::Approx(0.5).epsilon(0.02));
    CHECK(got == doctest::Approx(quad_field(alt, 0.0) / quad_field(ones, 0.0)).epsilon(1e-6));
}

TEST_CASE("objective matches its definition") {
    const TransversalObjective obj(kPsf, kBeam, kGeom, 0.3, 4.0);
    CHECK(obj.n_samples() >= 9);
    gen::Source src(3);
    for (int t = 0; t < 10; ++t) {
        const auto bits = src.bits(100);
        const double nu = src.uniform(0.0, 1.0);
        // Trapezoid over the pixel-resolution penalty points.
        double pen = 0.0;
        for (int s = -4; s <= 4; ++s) {
            const double d = transversal_field(bits, kPsf, kBeam, kGeom, s) - nu;
            pen += (std::abs(s) == 4 ? 0.5 : 1.0) * d * d;
        }
        const double c = transversal_field(bits, kPsf, kBeam, kGeom, 0.0) - nu;
        CHECK(obj.evaluate(bits, nu) == doctest::Approx(c * c + 0.3 * pen).epsilon(1e-12));
    }
}

TEST_CASE("solve_pattern extremes and midpoint") {
    const TransversalObjective obj(kPsf, kBeam, kGeom, 0.3, 4.0);
    const OptimizerConfig cfg;
    const auto zero = solve_pattern(0.0, cfg, obj);
    CHECK(std::count(zero.pattern.begin(), zero.pattern.end(), 1) == 0);
    CHECK(zero.residual == 0.0);

    const auto one = solve_pattern(1.0, cfg, obj);
    CHECK(std::count(one.pattern.begin(), one.pattern.end(), 1) == 100);
    CHECK(one.achieved == doctest::Approx(1.0).epsilon(1e-14));

    const auto half = solve_pattern(0.5, cfg, obj);
    CHECK(std::abs(half.achieved - 0.5) <= 0.05 / 50.0);

    OptimizerConfig ls;
    ls.algorithm = Algorithm::local_search;
    const auto half_ls = solve_pattern(0.5, ls, obj);
    CHECK(std::abs(half_ls.achieved - 0.5) <= 0.05 / 50.0);
    CHECK_THROWS_AS(solve_pattern(1.5, cfg, obj), DomainError);
}

TEST_CASE("two-entry table holds the extremes") {
    const auto lut = build_lut(2, OptimizerConfig{}, kPsf, kBeam, kGeom);
    CHECK(std::count(lut[0].pattern.begin(), lut[0].pattern.end(), 1) == 0);
    CHECK(std::count(lut[1].pattern.begin(), lut[1].pattern.end(), 1) == 100);
}

TEST_CASE("table stores exact evaluations") {
    const auto& lut = small_lut();
    const TransversalObjective obj(kPsf, kBeam, kGeom, 0.3, 4.0);
    CHECK(lut.size() == 11);
    for (std::size_t k = 0; k < lut.size(); ++k) {
        CHECK(lut[k].nu == doctest::Approx(k / 10.0).epsilon(1e-15));
        CHECK(std::abs(lut[k].achieved - obj.achieved(lut[k].pattern)) <= 1e-12);
        CHECK(std::abs(lut[k].residual - obj.evaluate(lut[k].pattern, lut[k].nu)) <= 1e-12);
        CHECK(std::abs(lut[k].achieved - lut[k].nu) <= 0.2 / 10.0);
    }
}

TEST_CASE("nearest entry, ties to the lower index") {
    const auto& lut = small_lut();
    CHECK(lut.nearest(0.0) == 0);
    CHECK(lut.nearest(1.0) == 10);
    CHECK(lut.nearest(0.5) == 5);
    CHECK(lut.nearest(0.04) == 0);
    CHECK(lut.nearest(0.06) == 1);
    CHECK(lut.nearest(0.25) == 2);
}

TEST_CASE("mapping and inversion") {
    const auto& lut = small_lut();
    const std::vector<double> zeros(kGeom.n_longitudinal, 0.0);
    CHECK(map_virtual_input(zeros, lut, kGeom).count_on() == 0);

    const std::vector<double> half(kGeom.n_longitudinal, 0.5);
    const auto ph = map_virtual_input(half, lut, kGeom);
    for (std::size_t j = 0; j < kGeom.n_longitudinal; ++j) {
        CHECK(std::equal(ph.column(j).begin(), ph.column(j).end(), lut[5].pattern.begin()));
    }

    std::vector<double> ramp(kGeom.n_longitudinal);
    for (std::size_t j = 0; j < ramp.size(); ++j) ramp[j] = static_cast<double>(j) / (ramp.size() - 1);
    const auto pr = map_virtual_input(ramp, lut, kGeom);
    std::size_t prev = 0;
    for (std::size_t j = 0; j < ramp.size(); ++j) {
        const auto k = lut.find(pr.column(j));
        REQUIRE(k.has_value());
        CHECK(*k == lut.nearest(ramp[j]));
        CHECK(*k >= prev);
        prev = *k;
    }

    CHECK(invert_pattern(optics::DmdPattern::zeros(kGeom), lut) == zeros);
    auto flipped = ph;
    flipped.set(50, 7, !flipped.at(50, 7));
    CHECK_THROWS_AS(invert_pattern(flipped, lut), DomainError);

    std::vector<double> out = half;
    out[3] = -0.1;
    CHECK_THROWS_AS(map_virtual_input(out, lut, kGeom), DomainError);
}

TEST_CASE("table file round trip is bit exact") {
    const auto& lut = small_lut();
    const auto text = lut.to_json();
    const auto back = Lut::from_json(text);
    CHECK(back.to_json() == text);
    for (std::size_t k = 0; k < lut.size(); ++k) {
        CHECK(back[k].achieved == lut[k].achieved);
        CHECK(back[k].residual == lut[k].residual);
        CHECK(back[k].pattern == lut[k].pattern);
    }
    CHECK(back.header().model_hash == model_hash(kPsf, kBeam, kGeom));

    const auto path = std::filesystem::temp_directory_path() / "dmdilc_test_lut.json";
    lut.save(path);
    CHECK(Lut::load(path).to_json() == text);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(Lut::load("/nonexistent/lut.json"), IoError);
    CHECK_THROWS_AS(Lut::from_json("{\"format\": \"other\"}"), ConfigError);
    CHECK_THROWS_AS(bits_from_string("0102"), ConfigError);
    CHECK(bits_to_string(bits_from_string("0110")) == "0110");
}

TEST_CASE("model hash tracks the optics") {
    CHECK(model_hash(kPsf, kBeam, kGeom) == model_hash(kPsf, kBeam, kGeom));
    CHECK(model_hash(PsfModel(2.5, 90.0), kBeam, kGeom) != model_hash(kPsf, kBeam, kGeom));
    CHECK(model_hash(kPsf, BeamProfile{1.0, 12.0, 125.0}, kGeom) != model_hash(kPsf, kBeam, kGeom));
}

TEST_CASE("property: table is monotone and deterministic") {
    gen::Source src(17);
    for (int t = 0; t < 3; ++t) {
        OptimizerConfig cfg;
        cfg.population = 20 + src.index(20);
        cfg.generations = 10 + src.index(20);
        cfg.seed = src.index(1u << 30);
        const std::size_t n = 3 + src.index(8);
        const auto a = build_lut(n, cfg, kPsf, kBeam, kGeom);
        const auto b = build_lut(n, cfg, kPsf, kBeam, kGeom);
        CHECK(a.to_json() == b.to_json());
        for (std::size_t k = 1; k < a.size(); ++k) CHECK(a[k - 1].achieved <= a[k].achieved);
    }
}

TEST_CASE("property: round trip on the quantisation grid") {
    const auto& lut = small_lut();
    gen::Source src(18);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> nu(kGeom.n_longitudinal);
        for (auto& v : nu) v = static_cast<double>(src.index(11)) / 10.0;
        const auto back = invert_pattern(map_virtual_input(nu, lut, kGeom), lut);
        for (std::size_t j = 0; j < nu.size(); ++j) CHECK(back[j] == lut[lut.nearest(nu[j])].nu);
        for (std::size_t j = 0; j < nu.size(); ++j) CHECK(std::abs(back[j] - nu[j]) < 1e-15);
    }
}

TEST_CASE("property: quantisation bound") {
    const auto& lut = small_lut();
    double worst_entry = 0.0;
    for (const auto& e : lut.entries()) worst_entry = std::max(worst_entry, std::abs(e.achieved - e.nu));
    gen::Source src(19);
    for (int t = 0; t < 2000; ++t) {
        const double nu = src.uniform(0.0, 1.0);
        CHECK(std::abs(lut[lut.nearest(nu)].achieved - nu) <= 0.5 / 10.0 + worst_entry + 1e-15);
    }
}
