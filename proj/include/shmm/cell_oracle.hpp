// Ground-truth homogenization: periodic cell problem on the unit torus,
// solved pseudospectrally with dealiased advection products.
#pragma once

#include "shmm/spectral.hpp"
#include "shmm/tensor.hpp"

namespace shmm {

// Solves, for i = 1,2, the corrector problem
//   -div(base grad chi_i) - v.grad chi_i = v_i,   v = (-d2 psi, d1 psi),
// with periodic BCs and mean-zero chi_i, then returns
//   base + (1/2) <v (x) chi + chi (x) v>.
// n is the collocation grid per side; products are evaluated on a padded grid
// large enough that no aliased mode folds back below the truncation.
DiffTensor2 cell_problem_oracle(const SpectralField2D& psi, const DiffTensor2& base, int n,
                                double tol = 1e-10);

}  // namespace shmm
