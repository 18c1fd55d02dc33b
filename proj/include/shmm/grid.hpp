// Uniform 2D grids and real-valued fields on them.
#pragma once

#include <iosfwd>
#include <vector>

#include "shmm/common.hpp"

namespace shmm {

enum class Bc { periodic, dirichlet };

// Uniform rectangular grid. Periodic directions span n*h with no duplicated
// endpoint; Dirichlet directions span (n-1)*h with both endpoints as nodes.
struct Grid2D {
    int nx = 0, ny = 0;
    double hx = 0.0, hy = 0.0;
    double x0 = 0.0, y0 = 0.0;
    Bc bc_x = Bc::periodic, bc_y = Bc::periodic;

    Grid2D() = default;
    Grid2D(int nx_, int ny_, double hx_, double hy_, double x0_ = 0.0, double y0_ = 0.0,
           Bc bcx = Bc::periodic, Bc bcy = Bc::periodic)
        : nx(nx_), ny(ny_), hx(hx_), hy(hy_), x0(x0_), y0(y0_), bc_x(bcx), bc_y(bcy) {
        require(nx >= 2 && ny >= 2, "Grid2D: need nx,ny >= 2");
        require(hx > 0.0 && hy > 0.0, "Grid2D: need positive spacing");
    }

    // n x n nodes over [0,1)^2, periodic both ways.
    static Grid2D periodic_unit(int n) { return Grid2D(n, n, 1.0 / n, 1.0 / n); }
    static Grid2D periodic_unit(int nx_, int ny_) {
        return Grid2D(nx_, ny_, 1.0 / nx_, 1.0 / ny_);
    }
    // Dirichlet in x1 (endpoints included), periodic in x2; spans [0,1]x[0,1).
    static Grid2D channel(int nx_, int ny_) {
        return Grid2D(nx_, ny_, 1.0 / (nx_ - 1), 1.0 / ny_, 0.0, 0.0, Bc::dirichlet,
                      Bc::periodic);
    }
    // Square periodic-style cell of given side and lower corner, n nodes per side.
    static Grid2D local_cell(double x0_, double y0_, double side, int n) {
        return Grid2D(n, n, side / n, side / n, x0_, y0_);
    }

    double x(int i) const { return x0 + i * hx; }
    double y(int j) const { return y0 + j * hy; }
    double extent_x() const { return bc_x == Bc::periodic ? nx * hx : (nx - 1) * hx; }
    double extent_y() const { return bc_y == Bc::periodic ? ny * hy : (ny - 1) * hy; }
    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }

    bool same_layout(const Grid2D& o) const {
        return nx == o.nx && ny == o.ny && almost_equal(hx, o.hx, 1e-14) &&
               almost_equal(hy, o.hy, 1e-14) && almost_equal(x0, o.x0, 1e-14) &&
               almost_equal(y0, o.y0, 1e-14) && bc_x == o.bc_x && bc_y == o.bc_y;
    }
};

// Real scalar field sampled on a Grid2D, row index = x2, column index = x1.
struct GridField2D {
    Grid2D grid;
    std::vector<double> values;

    GridField2D() = default;
    explicit GridField2D(const Grid2D& g, double fill = 0.0)
        : grid(g), values(g.size(), fill) {}
    GridField2D(const Grid2D& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        require(values.size() == grid.size(), "GridField2D: value count != nx*ny");
        check_finite();
    }

    double& at(int i, int j) { return values[grid.idx(i, j)]; }
    double at(int i, int j) const { return values[grid.idx(i, j)]; }

    double mean() const;
    double min() const;
    double max() const;
    void check_finite() const;  // throws InvalidInput on NaN/Inf

    // CSV: "# nx,ny,hx,hy,x10,x20" then ny rows of nx comma-separated values.
    void write_csv(std::ostream& os) const;
    static GridField2D read_csv(std::istream& is, Bc bcx = Bc::periodic,
                                Bc bcy = Bc::periodic);
};

struct VectorField2D {
    GridField2D v1, v2;  // shared grid

    VectorField2D() = default;
    VectorField2D(GridField2D a, GridField2D b) : v1(std::move(a)), v2(std::move(b)) {
        require(v1.grid.same_layout(v2.grid), "VectorField2D: component grids differ");
    }
    const Grid2D& grid() const { return v1.grid; }
};

}  // namespace shmm
