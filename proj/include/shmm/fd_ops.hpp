// Second-order centered finite-difference operators.
//
// Periodic directions wrap; Dirichlet directions use one-sided second-order
// stencils on the boundary rows for first derivatives. div_tensor_grad is the
// conservative flux form with tensor entries averaged to half-points, so the
// discrete operator is symmetric for symmetric K on periodic grids.
#pragma once

#include <utility>

#include "shmm/grid.hpp"
#include "shmm/tensor.hpp"

namespace shmm {

std::pair<GridField2D, GridField2D> gradient(const GridField2D& f);

GridField2D divergence(const VectorField2D& v);

// div(K grad f) for a symmetric tensor field K on the same grid as f.
// Dirichlet boundary rows of the output are left at zero (solvers pin them).
GridField2D div_tensor_grad(const TensorField2& K, const GridField2D& f);
GridField2D div_tensor_grad(const DiffTensor2& K, const GridField2D& f);

}  // namespace shmm
