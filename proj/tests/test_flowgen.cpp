// Stream-function generators, the per-axis scale decomposition, and
// restriction onto local grids.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "shmm/common.hpp"
#include "shmm/flowgen.hpp"
#include "shmm/spectral.hpp"

using namespace shmm;

namespace {

double max_coeff_diff(const SpectralField2D& a, const SpectralField2D& b) {
    REQUIRE(a.kmax == b.kmax);
    double m = 0.0;
    for (std::size_t i = 0; i < a.coeff.size(); ++i)
        m = std::max(m, std::abs(a.coeff[i] - b.coeff[i]));
    return m;
}

}  // namespace

TEST_CASE("gen_cellular: unit vortex has four coefficients of magnitude 1/4") {
    SpectralField2D s = gen_cellular({{1.0, 1, 1}});
    CHECK(s.mean() == 0.0);
    CHECK(s.hermitian_error() == 0.0);
    int nonzero = 0;
    for (int k2 = -s.kmax; k2 <= s.kmax; ++k2)
        for (int k1 = -s.kmax; k1 <= s.kmax; ++k1)
            if (std::abs(s.at(k1, k2)) > 0.0) {
                ++nonzero;
                CHECK(std::abs(s.at(k1, k2)) == doctest::Approx(0.25).epsilon(1e-15));
            }
    CHECK(nonzero == 4);
}

TEST_CASE("gen_cellular: two separated components carry energy amp^2/4 each") {
    SpectralField2D s = gen_cellular({{1.0 / 3.0, 5, 5}, {1.0 / 3.0, 25, 25}});
    CHECK(s.energy() == doctest::Approx(2.0 * (1.0 / 9.0) / 4.0).epsilon(1e-14));
    CHECK(s.max_nonzero_k1() == 25);
    CHECK(s.max_nonzero_k2() == 25);
    CHECK_THROWS_AS(gen_cellular({{1.0, 0, 1}}), InvalidInput);
}

TEST_CASE("gen_random_shear: support on the k2 axis, energy pinned, seeded") {
    SpectralField2D one = gen_random_shear(1, 7);
    int nonzero = 0;
    for (const cplx& c : one.coeff)
        if (std::abs(c) > 0.0) ++nonzero;
    CHECK(nonzero == 2);  // one conjugate pair

    SpectralField2D s = gen_random_shear(50, 42, 2.0);
    CHECK(s.max_nonzero_k1() == 0);
    CHECK(s.max_nonzero_k2() == 50);
    CHECK(s.mean() == 0.0);
    CHECK(s.energy() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.hermitian_error() == 0.0);

    SpectralField2D again = gen_random_shear(50, 42, 2.0);
    CHECK(max_coeff_diff(s, again) == 0.0);
    SpectralField2D other = gen_random_shear(50, 43, 2.0);
    CHECK(max_coeff_diff(s, other) > 0.0);
}

TEST_CASE("gen_continuous_spectrum: magnitude law, normalization, determinism") {
    SpectralField2D s = gen_continuous_spectrum(50, 3.0, 404, 2.0);
    CHECK(s.mean() == 0.0);
    CHECK(s.energy() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.hermitian_error() == 0.0);

    // |coeff(k)| / |coeff(k')| = (|k'| / |k|)^3 independent of the draw.
    double m1 = std::abs(s.at(1, 0));
    double m2 = std::abs(s.at(3, 4));
    CHECK(m1 / m2 == doctest::Approx(std::pow(25.0, 1.5)).epsilon(1e-12));

    SpectralField2D again = gen_continuous_spectrum(50, 3.0, 404, 2.0);
    CHECK(max_coeff_diff(s, again) == 0.0);

    SpectralField2D shell = gen_continuous_spectrum(1, 3.0, 9, 1.0);
    CHECK(shell.energy() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(shell.max_nonzero_k1() <= 1);
    CHECK(shell.max_nonzero_k2() <= 1);
}

TEST_CASE("generate dispatches on the variant and validates") {
    StreamSpec spec;
    spec.variant = StreamSpec::Variant::cellular_sum;
    spec.components = {};
    CHECK_THROWS_AS(generate(spec), InvalidInput);
    spec.components = {{1.0, 2, 3}};
    CHECK(max_coeff_diff(generate(spec), gen_cellular({{1.0, 2, 3}})) == 0.0);
}

TEST_CASE("stream spec json round trip") {
    StreamSpec spec;
    spec.variant = StreamSpec::Variant::continuous_spectrum;
    spec.kmax = 50;
    spec.decay = 3.0;
    spec.target_energy = 2.0;
    spec.seed = 404;
    StreamSpec back = StreamSpec::from_json(spec.to_json());
    CHECK(max_coeff_diff(generate(back), generate(spec)) == 0.0);
}

TEST_CASE("decompose: single low mode stays in the coarse block") {
    SpectralField2D psi = gen_cellular({{1.0, 3, 3}});
    DecompositionSet ds = decompose(psi, 5, 1);
    REQUIRE(ds.levels.size() == 1);
    CHECK(max_coeff_diff(ds.levels[0].coarse, psi) == 0.0);
    CHECK(ds.levels[0].fine_k2.is_zero());
    CHECK(ds.levels[0].fine_k1.is_zero());
    CHECK(ds.levels[0].fine.is_zero());
    CHECK(ds.residual.is_zero());
}

TEST_CASE("decompose: four-component flow splits exactly as listed") {
    // psi = (1/5)(phi_c(5x) + phi_c(5x1,45x2) + phi_c(45x1,5x2) + phi_c(50x)).
    SpectralField2D psi = gen_cellular(
        {{0.2, 5, 5}, {0.2, 5, 45}, {0.2, 45, 5}, {0.2, 50, 50}});
    DecompositionSet ds = decompose(psi, 5, 1);
    REQUIRE(ds.levels.size() == 1);
    const LevelComponents& lc = ds.levels[0];
    CHECK(lc.threshold == 5);
    // The generators emit blocks at their own kmax; embed at the full kmax to compare.
    auto embed = [&](const std::vector<CellularComponent>& comps) {
        SpectralField2D small = gen_cellular(comps);
        SpectralField2D out(psi.kmax);
        for (int k2 = -small.kmax; k2 <= small.kmax; ++k2)
            for (int k1 = -small.kmax; k1 <= small.kmax; ++k1)
                out.at(k1, k2) = small.at(k1, k2);
        return out;
    };
    CHECK(max_coeff_diff(lc.coarse, embed({{0.2, 5, 5}})) == 0.0);
    CHECK(max_coeff_diff(lc.fine_k2, embed({{0.2, 5, 45}})) == 0.0);
    CHECK(max_coeff_diff(lc.fine_k1, embed({{0.2, 45, 5}})) == 0.0);
    CHECK(max_coeff_diff(lc.fine, embed({{0.2, 50, 50}})) == 0.0);
    CHECK(max_coeff_diff(ds.residual, lc.fine) == 0.0);
}

TEST_CASE("decompose: boundary wavevectors split strictly at the threshold") {
    SpectralField2D psi(8);
    psi.at(5, 5) = cplx(0.1, 0.0);
    psi.at(-5, -5) = cplx(0.1, 0.0);
    psi.at(5, 6) = cplx(0.2, 0.0);
    psi.at(-5, -6) = cplx(0.2, 0.0);
    psi.at(6, 5) = cplx(0.3, 0.0);
    psi.at(-6, -5) = cplx(0.3, 0.0);
    psi.at(6, 6) = cplx(0.4, 0.0);
    psi.at(-6, -6) = cplx(0.4, 0.0);
    DecompositionSet ds = decompose(psi, 5, 1);
    const LevelComponents& lc = ds.levels[0];
    CHECK(std::abs(lc.coarse.at(5, 5)) > 0.0);
    CHECK(std::abs(lc.fine_k2.at(5, 6)) > 0.0);
    CHECK(std::abs(lc.fine_k1.at(6, 5)) > 0.0);
    CHECK(std::abs(lc.fine.at(6, 6)) > 0.0);
}

TEST_CASE("decompose: exact reconstruction and disjoint support") {
    SpectralField2D psi = gen_continuous_spectrum(50, 3.0, 11, 2.0);
    DecompositionSet ds = decompose(psi, 5, 3);
    CHECK(max_coeff_diff(ds.reconstruct(), psi) == 0.0);

    for (int k2 = -psi.kmax; k2 <= psi.kmax; ++k2)
        for (int k1 = -psi.kmax; k1 <= psi.kmax; ++k1)
            for (const LevelComponents& lc : ds.levels) {
                int owners = 0;
                if (std::abs(lc.coarse.at(k1, k2)) > 0.0) ++owners;
                if (std::abs(lc.fine_k2.at(k1, k2)) > 0.0) ++owners;
                if (std::abs(lc.fine_k1.at(k1, k2)) > 0.0) ++owners;
                if (std::abs(lc.fine.at(k1, k2)) > 0.0) ++owners;
                CHECK(owners <= 1);
            }
}

TEST_CASE("decompose: recursion stops once the remainder fits the next threshold") {
    SpectralField2D psi = gen_cellular({{1.0 / 3.0, 5, 5}, {1.0 / 3.0, 25, 25}});
    DecompositionSet ds = decompose(psi, 5, 3);
    // Level 1 splits at 5; the 25-mode remainder sits within 5^2, so no deeper split.
    CHECK(ds.levels.size() == 1);
    CHECK(ds.residual.max_nonzero_k1() == 25);
}

TEST_CASE("decompose is idempotent on band-limited components") {
    SpectralField2D psi11 = gen_cellular({{0.2, 5, 5}});
    DecompositionSet ds = decompose(psi11, 5, 1);
    REQUIRE(ds.levels.size() == 1);
    CHECK(max_coeff_diff(ds.levels[0].coarse, psi11) == 0.0);
    CHECK(ds.levels[0].fine_k2.is_zero());
    CHECK(ds.levels[0].fine_k1.is_zero());
    CHECK(ds.residual.is_zero());
}

TEST_CASE("restrict_to_domain: pointwise spectral evaluation on a subwindow") {
    SpectralField2D s(2);
    s.at(1, 0) = cplx(0.0, -0.5);
    s.at(-1, 0) = cplx(0.0, 0.5);
    Rect dom{0.0, 0.0, 0.2, 0.2};
    Grid2D g = Grid2D::local_cell(0.0, 0.0, 0.2, 32);
    GridField2D f = restrict_to_domain(s, dom, g, /*subtract_mean=*/false);
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            worst = std::max(worst, std::abs(f.at(i, j) - std::sin(two_pi * g.x(i))));
    CHECK(worst < 1e-12);
}

TEST_CASE("restrict_to_domain: subtracted mean vanishes and periodic cells repeat") {
    SpectralField2D s = gen_cellular({{1.0, 25, 25}});
    Rect dom{0.1, 0.3, 0.2, 0.2};
    Grid2D g = Grid2D::local_cell(0.1, 0.3, 0.2, 50);
    GridField2D f = restrict_to_domain(s, dom, g);
    CHECK(std::abs(f.mean()) < 1e-12);
    // Width 0.2 covers exactly five periods; ten grid columns per period.
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 10 < g.nx; ++i)
            CHECK(f.at(i, j) == doctest::Approx(f.at(i + 10, j)).epsilon(1e-12));
}

TEST_CASE("restrict_to_domain rejects grids below two points per wavelength") {
    SpectralField2D s = gen_cellular({{1.0, 25, 25}});
    Rect dom{0.0, 0.0, 0.2, 0.2};
    Grid2D g = Grid2D::local_cell(0.0, 0.0, 0.2, 8);
    CHECK_THROWS_AS(restrict_to_domain(s, dom, g), InvalidInput);
}
