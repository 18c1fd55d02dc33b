// Symmetric 2x2 diffusivity tensors and 1D profiles of them.
#pragma once

#include <string>
#include <vector>

#include "shmm/common.hpp"
#include "shmm/grid.hpp"

namespace shmm {

// Symmetric 2x2 diffusivity; k21 == k12 by construction.
struct DiffTensor2 {
    double k11 = 0.0, k12 = 0.0, k22 = 0.0;

    static DiffTensor2 isotropic(double kappa) { return {kappa, 0.0, kappa}; }
    static DiffTensor2 diagonal(double a, double b) { return {a, 0.0, b}; }

    double det() const { return k11 * k22 - k12 * k12; }
    bool is_spd(double tol = 0.0) const { return k11 > tol && det() > tol; }
    // Eigenvalues in ascending order.
    std::pair<double, double> eigenvalues() const;

    DiffTensor2 operator+(const DiffTensor2& o) const {
        return {k11 + o.k11, k12 + o.k12, k22 + o.k22};
    }
    DiffTensor2 operator-(const DiffTensor2& o) const {
        return {k11 - o.k11, k12 - o.k12, k22 - o.k22};
    }
    bool operator==(const DiffTensor2& o) const = default;

    double max_abs_diff(const DiffTensor2& o) const;
    std::string csv() const;  // "k11,k12,k22"
    static DiffTensor2 from_csv(const std::string& line);
};

// Diffusivity sampled along one axis (0 = x1, 1 = x2) at uniform spacing.
struct ProfileDiffusivity {
    int axis = 0;
    double spacing = 0.0;
    std::vector<DiffTensor2> samples;
};

// Symmetric tensor field on a grid (one DiffTensor2 per node).
struct TensorField2 {
    Grid2D grid;
    std::vector<double> k11, k12, k22;

    TensorField2() = default;
    TensorField2(const Grid2D& g, const DiffTensor2& constant)
        : grid(g),
          k11(g.size(), constant.k11),
          k12(g.size(), constant.k12),
          k22(g.size(), constant.k22) {}
    explicit TensorField2(const Grid2D& g)
        : grid(g), k11(g.size(), 0.0), k12(g.size(), 0.0), k22(g.size(), 0.0) {}

    DiffTensor2 at(int i, int j) const {
        auto n = grid.idx(i, j);
        return {k11[n], k12[n], k22[n]};
    }
    void set(int i, int j, const DiffTensor2& t) {
        auto n = grid.idx(i, j);
        k11[n] = t.k11;
        k12[n] = t.k12;
        k22[n] = t.k22;
    }
};

}  // namespace shmm
