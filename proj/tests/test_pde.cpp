// Channel solvers: resolved transport, tensor diffusion, and profile tools.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "shmm/common.hpp"
#include "shmm/flowgen.hpp"
#include "shmm/pde.hpp"
#include "shmm/spectral.hpp"

using namespace shmm;

namespace {

// Early-time channel solution of the step problem with scalar diffusivity.
double step_heat(double x, double t, double kappa) {
    return 0.5 * std::erfc((x - 0.5) / (2.0 * std::sqrt(kappa * t)));
}

}  // namespace

TEST_CASE("dns without flow matches the heat-kernel step solution to 1e-3") {
    SolveSetup s;
    s.grid = Grid2D::channel(257, 64);
    s.t_end = 0.008;
    SolveStats stats;
    GridField2D u = dns_solve(SpectralField2D(1), 1.0, s, &stats);
    Profile1D mid = midline_profile(u);
    double worst = 0.0;
    for (std::size_t i = 0; i < mid.x.size(); ++i)
        worst = std::max(worst, std::abs(mid.u[i] - step_heat(mid.x[i], s.t_end, 1.0)));
    CHECK(worst < 1e-3);
    CHECK(stats.min_u >= -1e-12);
    CHECK(stats.max_u <= 1.0 + 1e-12);
}

TEST_CASE("macro_solve with the identity tensor reproduces the flow-free dns") {
    SolveSetup s;
    s.grid = Grid2D::channel(129, 32);
    s.t_end = 0.01;
    GridField2D a = dns_solve(SpectralField2D(1), 1.0, s);
    GridField2D b = macro_solve(DiffTensor2::isotropic(1.0), s);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
    CHECK(worst < 1e-12);
}

TEST_CASE("macro_solve with diag(3,1) behaves as 1D diffusion at kappa 3") {
    SolveSetup s;
    s.grid = Grid2D::channel(257, 32);
    s.t_end = 0.003;
    GridField2D u = macro_solve(DiffTensor2::diagonal(3.0, 1.0), s);
    Profile1D mid = midline_profile(u);
    double worst = 0.0;
    for (std::size_t i = 0; i < mid.x.size(); ++i)
        worst = std::max(worst, std::abs(mid.u[i] - step_heat(mid.x[i], s.t_end, 3.0)));
    CHECK(worst < 1e-3);

    // x2-invariance: every row equals the midline row.
    for (int j = 0; j < u.grid.ny; ++j)
        for (int i = 0; i < u.grid.nx; ++i)
            CHECK(std::abs(u.at(i, j) - mid.u[std::size_t(i)]) < 1e-12);
}

TEST_CASE("dirichlet boundary values are held exactly") {
    SolveSetup s;
    s.grid = Grid2D::channel(65, 16);
    s.t_end = 0.01;
    GridField2D u = dns_solve(gen_cellular({{0.5, 1, 1}}), 1.0, s);
    for (int j = 0; j < u.grid.ny; ++j) {
        CHECK(u.at(0, j) == 1.0);
        CHECK(u.at(u.grid.nx - 1, j) == 0.0);
    }
}

TEST_CASE("fully periodic run conserves mass to 1e-10 per step") {
    SolveSetup s;
    s.grid = Grid2D::periodic_unit(128);
    s.t_end = 0.005;
    SolveStats stats;
    GridField2D u = dns_solve(gen_cellular({{1.0, 2, 3}}), 1.0, s, &stats);
    CHECK(stats.mass_drift_per_step < 1e-10);
    CHECK(stats.steps > 100);
    u.check_finite();
}

TEST_CASE("maximum principle holds under strong advection") {
    SolveSetup s;
    s.grid = Grid2D::channel(129, 128);
    s.t_end = 0.01;
    SolveStats stats;
    dns_solve(gen_cellular({{2.0, 3, 3}}), 1.0, s, &stats);
    CHECK(stats.min_u >= -1e-12);
    CHECK(stats.max_u <= 1.0 + 1e-12);
}

TEST_CASE("advection enhances mixing over the flow-free baseline") {
    SolveSetup s;
    s.grid = Grid2D::channel(129, 128);
    s.t_end = 0.05;
    GridField2D stirred = dns_solve(gen_cellular({{1.0, 1, 1}}), 1.0, s);
    GridField2D plain = dns_solve(SpectralField2D(1), 1.0, s);
    CHECK(mixing_width(averaged_profile(stirred)) > mixing_width(averaged_profile(plain)));
}

TEST_CASE("dns profiles converge at roughly second order in the grid") {
    auto run = [](int n) {
        SolveSetup s;
        s.grid = Grid2D::channel(n + 1, n);
        s.t_end = 0.01;
        s.dt = 2e-6;  // shared step isolates the spatial error
        return averaged_profile(dns_solve(gen_cellular({{0.5, 1, 1}}), 1.0, s));
    };
    Profile1D ref = run(256);
    double e64 = profile_metrics(ref, run(64)).l2_rel;
    double e128 = profile_metrics(ref, run(128)).l2_rel;
    CHECK(e64 / e128 > 2.5);
    CHECK(e64 / e128 < 7.0);
}

TEST_CASE("oversized explicit steps are rejected before stepping") {
    SolveSetup s;
    s.grid = Grid2D::channel(65, 64);
    s.dt = 1.0;
    s.t_end = 2.0;
    CHECK_THROWS_AS(dns_solve(gen_cellular({{1.0, 1, 1}}), 1.0, s), InvalidInput);
}

TEST_CASE("profile helpers: metrics, mixing width, csv round trip") {
    Profile1D p;
    for (int i = 0; i <= 100; ++i) {
        p.x.push_back(i / 100.0);
        p.u.push_back(step_heat(i / 100.0, 0.01, 1.0));
    }
    ProfileMetrics same = profile_metrics(p, p);
    CHECK(same.l2_rel == 0.0);
    CHECK(same.max_dev == 0.0);
    CHECK(mixing_width(p) > 0.0);

    std::string path = "profile_roundtrip.csv";
    p.write_csv(path);
    Profile1D back = Profile1D::read_csv(path);
    REQUIRE(back.x.size() == p.x.size());
    for (std::size_t i = 0; i < p.x.size(); ++i) {
        CHECK(back.x[i] == p.x[i]);
        CHECK(back.u[i] == p.u[i]);
    }
    std::remove(path.c_str());

    GridField2D u(Grid2D::channel(5, 4));
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 5; ++i) u.at(i, j) = i + 10.0 * j;
    Profile1D avg = averaged_profile(u);
    CHECK(avg.u[0] == doctest::Approx(15.0));  // column mean of {0,10,20,30}
}

TEST_CASE("solve stats serialize to parseable json") {
    SolveSetup s;
    s.grid = Grid2D::channel(33, 16);
    s.t_end = 0.002;
    SolveStats stats;
    dns_solve(SpectralField2D(1), 1.0, s, &stats);
    std::string j = stats.to_json();
    CHECK(j.find("\"steps\"") != std::string::npos);
    CHECK(j.find("\"mass_drift_per_step\"") != std::string::npos);
}
