// Channel solvers sharing one stencil engine: scalar transport resolving the
// full velocity field, and tensor diffusion with an upscaled coefficient.
#pragma once

#include <string>
#include <vector>

#include "shmm/grid.hpp"
#include "shmm/hierarchy.hpp"
#include "shmm/spectral.hpp"
#include "shmm/tensor.hpp"

namespace shmm {

struct SolveSetup {
    Grid2D grid = Grid2D::channel(256, 256);  // Dirichlet x1, periodic x2 by default
    double dt = 0.0;                          // 0 = derived from the stability bound
    double t_end = 0.1;
    double u_left = 1.0, u_right = 0.0;  // Dirichlet data when bc_x is dirichlet

    enum class Ic { step };  // u0 = 1 for x1 < 1/2, 0 for x1 > 1/2, jump mid-cell
    Ic ic = Ic::step;
};

struct SolveStats {
    long steps = 0;
    double dt = 0.0;
    double wall_seconds = 0.0;
    double cfl_diff = 0.0;        // dt * max diffusion eigenvalue estimate
    double cfl_adv = 0.0;         // dt * vmax / min(h)
    double min_u = 0.0, max_u = 0.0;
    double mass_drift_per_step = 0.0;  // fully periodic runs only; else 0

    std::string to_json() const;
};

// Heun steps of du/dt = -v.grad u + kappa lap u with v from the stream
// function (skew-split advection; node velocities differenced from nodal psi
// so the discrete divergence vanishes identically).
GridField2D dns_solve(const SpectralField2D& psi, double kappa, const SolveSetup& setup,
                      SolveStats* stats = nullptr);

// Heun steps of dU/dt = div(K grad U), constant or per-macro-point K
// (bilinearly interpolated onto the solve grid).
GridField2D macro_solve(const DiffTensor2& K, const SolveSetup& setup,
                        SolveStats* stats = nullptr);
GridField2D macro_solve(const EffDiffField& K, const SolveSetup& setup,
                        SolveStats* stats = nullptr);

struct Profile1D {
    std::vector<double> x;
    std::vector<double> u;

    void write_csv(const std::string& path) const;  // rows x1,u
    static Profile1D read_csv(const std::string& path);
};

Profile1D midline_profile(const GridField2D& u, double x2 = 0.5);
Profile1D averaged_profile(const GridField2D& u);  // mean over x2 per column

// Integral of u(1-u) dx1: grows as the front spreads.
double mixing_width(const Profile1D& p);

struct ProfileMetrics {
    double l2_rel = 0.0;
    double max_dev = 0.0;
};

// b is linearly interpolated onto a's abscissae over the common x1 range.
ProfileMetrics profile_metrics(const Profile1D& a, const Profile1D& b);

}  // namespace shmm
