#include "shmm/fd_ops.hpp"

namespace shmm {

namespace {

inline int wrap(int i, int n) { return (i % n + n) % n; }

// Centered first derivative along x1 at (i, j); one-sided 2nd order on
// Dirichlet boundary columns.
inline double d1(const GridField2D& f, int i, int j) {
    const Grid2D& g = f.grid;
    if (g.bc_x == Bc::periodic)
        return (f.at(wrap(i + 1, g.nx), j) - f.at(wrap(i - 1, g.nx), j)) / (2.0 * g.hx);
    if (i == 0) return (-3.0 * f.at(0, j) + 4.0 * f.at(1, j) - f.at(2, j)) / (2.0 * g.hx);
    if (i == g.nx - 1)
        return (3.0 * f.at(i, j) - 4.0 * f.at(i - 1, j) + f.at(i - 2, j)) / (2.0 * g.hx);
    return (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * g.hx);
}

inline double d2(const GridField2D& f, int i, int j) {
    const Grid2D& g = f.grid;
    if (g.bc_y == Bc::periodic)
        return (f.at(i, wrap(j + 1, g.ny)) - f.at(i, wrap(j - 1, g.ny))) / (2.0 * g.hy);
    if (j == 0) return (-3.0 * f.at(i, 0) + 4.0 * f.at(i, 1) - f.at(i, 2)) / (2.0 * g.hy);
    if (j == g.ny - 1)
        return (3.0 * f.at(i, j) - 4.0 * f.at(i, j - 1) + f.at(i, j - 2)) / (2.0 * g.hy);
    return (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * g.hy);
}

}  // namespace

std::pair<GridField2D, GridField2D> gradient(const GridField2D& f) {
    GridField2D gx(f.grid), gy(f.grid);
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            gx.at(i, j) = d1(f, i, j);
            gy.at(i, j) = d2(f, i, j);
        }
    return {std::move(gx), std::move(gy)};
}

GridField2D divergence(const VectorField2D& v) {
    GridField2D out(v.grid());
    for (int j = 0; j < out.grid.ny; ++j)
        for (int i = 0; i < out.grid.nx; ++i) out.at(i, j) = d1(v.v1, i, j) + d2(v.v2, i, j);
    return out;
}

namespace {

// Conservative flux form shared by both div_tensor_grad overloads; K sampled
// through an accessor to avoid duplicating the stencil.
template <class KAt>
GridField2D div_tensor_grad_impl(const Grid2D& g, KAt K, const GridField2D& f) {
    GridField2D out(g);
    const bool px = g.bc_x == Bc::periodic;
    const bool py = g.bc_y == Bc::periodic;
    const int ilo = px ? 0 : 1, ihi = px ? g.nx - 1 : g.nx - 2;
    const int jlo = py ? 0 : 1, jhi = py ? g.ny - 1 : g.ny - 2;

    auto u = [&](int i, int j) { return f.at(wrap(i, g.nx), wrap(j, g.ny)); };
    auto dc2 = [&](int i, int j) {  // centered d/dx2 at a node
        return (u(i, j + 1) - u(i, j - 1)) / (2.0 * g.hy);
    };
    auto dc1 = [&](int i, int j) { return (u(i + 1, j) - u(i - 1, j)) / (2.0 * g.hx); };

    // x-face flux between (i,j) and (i+1,j); y-face flux between (i,j),(i,j+1)
    auto fx = [&](int i, int j) {
        DiffTensor2 kf = K(wrap(i, g.nx), j), kn = K(wrap(i + 1, g.nx), j);
        double k11 = 0.5 * (kf.k11 + kn.k11);
        double k12 = 0.5 * (kf.k12 + kn.k12);
        return k11 * (u(i + 1, j) - u(i, j)) / g.hx + k12 * 0.5 * (dc2(i, j) + dc2(i + 1, j));
    };
    auto fy = [&](int i, int j) {
        DiffTensor2 kf = K(i, wrap(j, g.ny)), kn = K(i, wrap(j + 1, g.ny));
        double k22 = 0.5 * (kf.k22 + kn.k22);
        double k12 = 0.5 * (kf.k12 + kn.k12);
        return k22 * (u(i, j + 1) - u(i, j)) / g.hy + k12 * 0.5 * (dc1(i, j) + dc1(i, j + 1));
    };

    for (int j = jlo; j <= jhi; ++j)
        for (int i = ilo; i <= ihi; ++i)
            out.at(i, j) =
                (fx(i, j) - fx(i - 1, j)) / g.hx + (fy(i, j) - fy(i, j - 1)) / g.hy;
    return out;
}

}  // namespace

GridField2D div_tensor_grad(const TensorField2& K, const GridField2D& f) {
    require(K.grid.same_layout(f.grid), "div_tensor_grad: K and f on different grids");
    return div_tensor_grad_impl(f.grid, [&](int i, int j) { return K.at(i, j); }, f);
}

GridField2D div_tensor_grad(const DiffTensor2& K, const GridField2D& f) {
    return div_tensor_grad_impl(f.grid, [&](int, int) { return K; }, f);
}

}  // namespace shmm
