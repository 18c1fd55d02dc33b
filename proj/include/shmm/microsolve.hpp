// Constrained local simulations with imposed mean gradient: the flux-averaging
// route to an effective diffusivity on a periodic cell.
#pragma once

#include "shmm/grid.hpp"
#include "shmm/tensor.hpp"

namespace shmm {

enum class MicroMethod {
    direct,         // stationary linear solve for the periodic fluctuation
    forward_euler,  // explicit evolution to quasi-stationarity
};

struct MicroSolveConfig {
    int n_micro = 64;            // points per side of a local grid built by callers
    double dt_micro = 0.0;       // 0 = stability-derived automatically
    double quasi_stat_tol = 1e-8;
    long max_steps = 4'000'000;
    MicroMethod method = MicroMethod::direct;
    double gmres_tol = 1e-12;    // relative, preconditioned (direct method)
};

struct EffDiffResult {
    DiffTensor2 tensor;      // symmetrized flux map
    double residual = 0.0;   // max |du/dt| at the accepted state, per unit mean gradient
    long steps_taken = 0;    // time steps, or Krylov iterations for the direct path
    double asymmetry = 0.0;  // |k12 - k21| of the raw flux map
};

// Average flux response of the cell carrying diffusivity A = base + psi*J,
// J = [[0,-1],[1,0]]. Two solves with mean gradients e1, e2; u - G.x periodic.
// psi_local must live on a periodic grid and resolve its own oscillations
// (>= 4 points per shortest wavelength); its mean is expected to be ~0.
EffDiffResult hmm_effdiff(const GridField2D& psi_local, const DiffTensor2& base,
                          const MicroSolveConfig& cfg = {});

}  // namespace shmm
