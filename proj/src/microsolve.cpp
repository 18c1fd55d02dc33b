#include "shmm/microsolve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "shmm/krylov.hpp"
#include "shmm/spectral.hpp"

namespace shmm {

namespace {

// Workspace for one local cell: A = base + psi*J in conservative flux form,
// psi averaged onto faces. Periodic in both directions.
struct CellOp {
    int nx, ny;
    double hx, hy;
    DiffTensor2 b;
    std::vector<double> psi_xf, psi_yf;  // face-averaged stream values
    std::vector<int> ip, im, jp, jm;     // wrapped neighbor tables

    CellOp(const GridField2D& psi, const DiffTensor2& base) {
        const Grid2D& g = psi.grid;
        nx = g.nx;
        ny = g.ny;
        hx = g.hx;
        hy = g.hy;
        b = base;
        ip.resize(nx);
        im.resize(nx);
        jp.resize(ny);
        jm.resize(ny);
        for (int i = 0; i < nx; ++i) {
            ip[i] = i + 1 == nx ? 0 : i + 1;
            im[i] = i == 0 ? nx - 1 : i - 1;
        }
        for (int j = 0; j < ny; ++j) {
            jp[j] = j + 1 == ny ? 0 : j + 1;
            jm[j] = j == 0 ? ny - 1 : j - 1;
        }
        psi_xf.resize(g.size());
        psi_yf.resize(g.size());
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                psi_xf[at(i, j)] = 0.5 * (psi.at(i, j) + psi.at(ip[i], j));
                psi_yf[at(i, j)] = 0.5 * (psi.at(i, j) + psi.at(i, jp[j]));
            }
    }

    std::size_t at(int i, int j) const { return std::size_t(j) * nx + i; }

    // x-face flux between (i,j)-(i+1,j) of the field w plus a constant mean
    // gradient G; the affine part contributes exactly G through every stencil.
    double fx(const std::vector<double>& w, int i, int j, double g1, double g2) const {
        double d1 = (w[at(ip[i], j)] - w[at(i, j)]) / hx + g1;
        double d2 = 0.25 *
                        (w[at(i, jp[j])] - w[at(i, jm[j])] + w[at(ip[i], jp[j])] -
                         w[at(ip[i], jm[j])]) /
                        hy +
                    g2;
        return b.k11 * d1 + (b.k12 - psi_xf[at(i, j)]) * d2;
    }

    double fy(const std::vector<double>& w, int i, int j, double g1, double g2) const {
        double d2 = (w[at(i, jp[j])] - w[at(i, j)]) / hy + g2;
        double d1 = 0.25 *
                        (w[at(ip[i], j)] - w[at(im[i], j)] + w[at(ip[i], jp[j])] -
                         w[at(im[i], jp[j])]) /
                        hx +
                    g1;
        return b.k22 * d2 + (b.k12 + psi_yf[at(i, j)]) * d1;
    }

    // out = div(A grad(w + G.x)); the flux divergence telescopes, so the mean
    // of out vanishes identically.
    void apply(const std::vector<double>& w, double g1, double g2,
               std::vector<double>& out) const {
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                out[at(i, j)] = (fx(w, i, j, g1, g2) - fx(w, im[i], j, g1, g2)) / hx +
                                (fy(w, i, j, g1, g2) - fy(w, i, jm[j], g1, g2)) / hy;
    }

    // Average total flux over all faces: the effective-flux column for G.
    void mean_flux(const std::vector<double>& w, double g1, double g2, double& f1,
                   double& f2) const {
        double s1 = 0.0, s2 = 0.0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                s1 += fx(w, i, j, g1, g2);
                s2 += fy(w, i, j, g1, g2);
            }
        f1 = s1 / double(nx * ny);
        f2 = s2 / double(nx * ny);
    }

    // Spectral inverse of the constant-coefficient part, mean mode pinned to
    // zero; used as the GMRES preconditioner.
    void precondition(const std::vector<double>& r, std::vector<double>& out) const {
        std::vector<cplx> a(r.begin(), r.end());
        dft2_inplace(a, nx, ny, -1);
        const double scale = 1.0 / (double(nx) * ny);
        for (int j = 0; j < ny; ++j) {
            double th2 = two_pi * j / ny;
            for (int i = 0; i < nx; ++i) {
                double th1 = two_pi * i / nx;
                double sym = b.k11 * (2.0 * std::cos(th1) - 2.0) / (hx * hx) +
                             b.k22 * (2.0 * std::cos(th2) - 2.0) / (hy * hy) -
                             2.0 * b.k12 * std::sin(th1) * std::sin(th2) / (hx * hy);
                std::size_t n = at(i, j);
                a[n] = (i == 0 && j == 0) ? cplx(0.0) : a[n] * (scale / sym);
            }
        }
        dft2_inplace(a, nx, ny, +1);
        for (std::size_t n = 0; n < out.size(); ++n) out[n] = a[n].real();
    }
};

}  // namespace

EffDiffResult hmm_effdiff(const GridField2D& psi_local, const DiffTensor2& base,
                          const MicroSolveConfig& cfg) {
    const Grid2D& g = psi_local.grid;
    require(g.bc_x == Bc::periodic && g.bc_y == Bc::periodic,
            "hmm_effdiff: local grid must be periodic");
    require(base.is_spd(), "hmm_effdiff: base must be SPD");
    require(cfg.quasi_stat_tol > 0.0, "hmm_effdiff: quasi_stat_tol must be positive");
    double amp = std::max(std::abs(psi_local.min()), std::abs(psi_local.max()));
    require(std::abs(psi_local.mean()) <= 1e-10 * (1.0 + amp),
            "hmm_effdiff: psi_local must have zero mean on the cell");

    CellOp op(psi_local, base);
    const std::size_t N = g.size();

    EffDiffResult res;
    double col[2][2];  // col[c] = mean flux for G = e_{c+1}

    for (int c = 0; c < 2; ++c) {
        double g1 = c == 0 ? 1.0 : 0.0;
        double g2 = 1.0 - g1;

        // Stationary fluctuation: div(A grad w) = -div(A G x).
        std::vector<double> rhs(N), zero(N, 0.0);
        op.apply(zero, g1, g2, rhs);
        for (auto& v : rhs) v = -v;

        std::vector<double> w(N, 0.0);
        long steps = 0;
        double resid = 0.0;

        if (cfg.method == MicroMethod::direct) {
            std::function<void(const std::vector<double>&, std::vector<double>&)> A =
                [&](const std::vector<double>& x, std::vector<double>& y) {
                    op.apply(x, 0.0, 0.0, y);
                };
            std::function<void(const std::vector<double>&, std::vector<double>&)> M =
                [&](const std::vector<double>& x, std::vector<double>& y) {
                    op.precondition(x, y);
                };
            double tol = cfg.gmres_tol;
            std::vector<double> r(N);
            for (int attempt = 0; attempt < 3; ++attempt) {
                auto out = gmres<double>(A, M, rhs, tol, 4000, 100);
                w = std::move(out.x);
                steps += out.iterations;
                op.apply(w, 0.0, 0.0, r);
                resid = 0.0;
                for (std::size_t n = 0; n < N; ++n)
                    resid = std::max(resid, std::abs(r[n] - rhs[n]));
                if (resid <= cfg.quasi_stat_tol) break;
                tol *= 1e-2;
            }
            require_solved(resid <= cfg.quasi_stat_tol,
                           "hmm_effdiff: stationary solve stalled at residual " + fmt_g17(resid));
        } else {
            double h = std::min(g.hx, g.hy);
            double lam = base.eigenvalues().second + amp;
            double dt = cfg.dt_micro > 0.0 ? cfg.dt_micro : 0.2 * h * h / (4.0 * lam);
            std::vector<double> dw(N);
            resid = 1.0 + cfg.quasi_stat_tol;
            while (steps < cfg.max_steps && resid > cfg.quasi_stat_tol) {
                op.apply(w, g1, g2, dw);  // du/dt of the full field w + G.x
                resid = 0.0;
                for (std::size_t n = 0; n < N; ++n) {
                    w[n] += dt * dw[n];
                    resid = std::max(resid, std::abs(dw[n]));
                }
                ++steps;
            }
            require_solved(resid <= cfg.quasi_stat_tol,
                           "hmm_effdiff: no quasi-stationary state within max_steps (residual " +
                               fmt_g17(resid) + ")");
        }

        op.mean_flux(w, g1, g2, col[c][0], col[c][1]);
        res.steps_taken += steps;
        res.residual = std::max(res.residual, resid);
    }

    res.asymmetry = std::abs(col[1][0] - col[0][1]);
    res.tensor = DiffTensor2{col[0][0], 0.5 * (col[1][0] + col[0][1]), col[1][1]};
    require_solved(res.tensor.is_spd(),
                   "hmm_effdiff: assembled tensor not SPD (" + res.tensor.csv() + ")");
    return res;
}

}  // namespace shmm
