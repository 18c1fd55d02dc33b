#include "shmm/pde.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

namespace shmm {

namespace {

// One stencil engine for both solvers: flux-form tensor diffusion plus an
// optional skew-split advection term. x2 is always periodic; x1 is periodic
// or Dirichlet (boundary columns pinned, their rate forced to zero).
struct Engine {
    Grid2D g;
    int nx = 0, ny = 0;
    double hx = 0.0, hy = 0.0;
    bool per_x = false;

    std::vector<int> ipx, imx, jpy, jmy;
    // Face-averaged coefficients; x-face i sits between columns i and i+1.
    std::vector<double> k11xf, k12xf, k22yf, k12yf;
    std::vector<double> v1, v2;  // node velocities; empty = pure diffusion

    double lam_diff = 0.0;  // max nodal diffusion eigenvalue bound
    double vmax = 0.0;

    std::size_t at(int i, int j) const { return std::size_t(j) * nx + i; }

    Engine(const Grid2D& grid, const std::vector<double>& k11, const std::vector<double>& k12,
           const std::vector<double>& k22)
        : g(grid), nx(grid.nx), ny(grid.ny), hx(grid.hx), hy(grid.hy) {
        require(g.bc_y == Bc::periodic, "solver: x2 must be periodic");
        require(nx >= 4 && ny >= 4, "solver: grid too small");
        per_x = g.bc_x == Bc::periodic;

        ipx.resize(nx);
        imx.resize(nx);
        for (int i = 0; i < nx; ++i) {
            ipx[i] = (i + 1) % nx;
            imx[i] = (i + nx - 1) % nx;
        }
        jpy.resize(ny);
        jmy.resize(ny);
        for (int j = 0; j < ny; ++j) {
            jpy[j] = (j + 1) % ny;
            jmy[j] = (j + ny - 1) % ny;
        }

        const std::size_t n = std::size_t(nx) * ny;
        k11xf.assign(n, 0.0);
        k12xf.assign(n, 0.0);
        k22yf.assign(n, 0.0);
        k12yf.assign(n, 0.0);
        const int fi_hi = per_x ? nx : nx - 1;
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < fi_hi; ++i) {
                std::size_t a = at(i, j), b = at(ipx[i], j);
                k11xf[a] = 0.5 * (k11[a] + k11[b]);
                k12xf[a] = 0.5 * (k12[a] + k12[b]);
            }
            for (int i = 0; i < nx; ++i) {
                std::size_t a = at(i, j), b = at(i, jpy[j]);
                k22yf[a] = 0.5 * (k22[a] + k22[b]);
                k12yf[a] = 0.5 * (k12[a] + k12[b]);
            }
        }

        for (std::size_t m = 0; m < n; ++m) {
            require(k11[m] > 0.0 && k11[m] * k22[m] - k12[m] * k12[m] > 0.0,
                    "solver: diffusivity must be SPD at every node");
            double lam = 4.0 * k11[m] / (hx * hx) + 4.0 * k22[m] / (hy * hy) +
                         8.0 * std::abs(k12[m]) / (hx * hy);
            lam_diff = std::max(lam_diff, lam);
        }
    }

    void set_velocity(std::vector<double> v1_, std::vector<double> v2_) {
        v1 = std::move(v1_);
        v2 = std::move(v2_);
        vmax = 0.0;
        for (double v : v1) vmax = std::max(vmax, std::abs(v));
        for (double v : v2) vmax = std::max(vmax, std::abs(v));
    }

    // r = div(K grad u) - v.grad u (skew split), boundary columns zeroed.
    void rate(const std::vector<double>& u, std::vector<double>& r, std::vector<double>& fx,
              std::vector<double>& fy) const {
        const int fi_hi = per_x ? nx : nx - 1;
        const int ilo = per_x ? 0 : 1, ihi = per_x ? nx - 1 : nx - 2;
        const double rhx = 1.0 / hx, rhy = 1.0 / hy;

        for (int j = 0; j < ny; ++j) {
            const int jp = jpy[j], jm = jmy[j];
            for (int i = 0; i < fi_hi; ++i) {
                const int in = ipx[i];
                const std::size_t a = at(i, j), b = at(in, j);
                double dudx = (u[b] - u[a]) * rhx;
                double dudy = 0.25 * rhy *
                              (u[at(i, jp)] - u[at(i, jm)] + u[at(in, jp)] - u[at(in, jm)]);
                fx[a] = k11xf[a] * dudx + k12xf[a] * dudy;
            }
            for (int i = ilo; i <= ihi; ++i) {
                const std::size_t a = at(i, j), b = at(i, jp);
                double dudy = (u[b] - u[a]) * rhy;
                double dudx = 0.25 * rhx *
                              (u[at(ipx[i], j)] - u[at(imx[i], j)] + u[at(ipx[i], jp)] -
                               u[at(imx[i], jp)]);
                fy[a] = k22yf[a] * dudy + k12yf[a] * dudx;
            }
        }

        const bool advect = !v1.empty();
        for (int j = 0; j < ny; ++j) {
            const int jp = jpy[j], jm = jmy[j];
            if (!per_x) {
                r[at(0, j)] = 0.0;
                r[at(nx - 1, j)] = 0.0;
            }
            for (int i = ilo; i <= ihi; ++i) {
                const std::size_t a = at(i, j);
                double val = (fx[a] - fx[at(imx[i], j)]) * rhx + (fy[a] - fy[at(i, jm)]) * rhy;
                if (advect) {
                    const std::size_t e = at(ipx[i], j), w = at(imx[i], j);
                    const std::size_t nn = at(i, jp), ss = at(i, jm);
                    double adv = 0.5 * (v1[a] * (u[e] - u[w]) * (0.5 * rhx) +
                                        v2[a] * (u[nn] - u[ss]) * (0.5 * rhy)) +
                                 0.5 * ((v1[e] * u[e] - v1[w] * u[w]) * (0.5 * rhx) +
                                        (v2[nn] * u[nn] - v2[ss] * u[ss]) * (0.5 * rhy));
                    val -= adv;
                }
                r[a] = val;
            }
        }
    }
};

GridField2D run(Engine& eng, const SolveSetup& setup, SolveStats* stats) {
    const auto t0 = std::chrono::steady_clock::now();
    const Grid2D& g = eng.g;
    const std::size_t n = std::size_t(g.nx) * g.ny;

    require(setup.t_end > 0.0, "solver: t_end must be positive");
    const double bound_diff = 2.0 / eng.lam_diff;
    const double bound_adv =
        eng.vmax > 0.0 ? std::min(g.hx, g.hy) / (2.0 * eng.vmax)
                       : std::numeric_limits<double>::infinity();
    const double bound = std::min(bound_diff, bound_adv);
    double dt = setup.dt;
    if (dt == 0.0)
        dt = 0.9 * bound;
    else if (dt > bound || dt <= 0.0)
        throw InvalidInput("solver: dt " + fmt_g17(dt) + " violates the stability bound " +
                           fmt_g17(bound));

    const long steps = long(std::ceil(setup.t_end / dt - 1e-9));
    const double dt_last = setup.t_end - double(steps - 1) * dt;

    GridField2D u(g);
    const double u_mid = 0.5 * (setup.u_left + setup.u_right);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double x = g.x(i);
            double v = x < 0.5 ? setup.u_left : setup.u_right;
            if (std::abs(x - 0.5) <= 1e-12) v = u_mid;
            u.values[g.idx(i, j)] = v;
        }
    if (!eng.per_x)
        for (int j = 0; j < g.ny; ++j) {
            u.values[g.idx(0, j)] = setup.u_left;
            u.values[g.idx(g.nx - 1, j)] = setup.u_right;
        }

    double umin = *std::min_element(u.values.begin(), u.values.end());
    double umax = *std::max_element(u.values.begin(), u.values.end());
    double mass0 = 0.0;
    const bool track_mass = eng.per_x && g.bc_y == Bc::periodic;
    if (track_mass) mass0 = u.mean();

    std::vector<double> r0(n), r1(n), u1(n), fx(n, 0.0), fy(n, 0.0);
    for (long s = 0; s < steps; ++s) {
        const double h = s + 1 == steps ? dt_last : dt;
        eng.rate(u.values, r0, fx, fy);
        for (std::size_t m = 0; m < n; ++m) u1[m] = u.values[m] + h * r0[m];
        eng.rate(u1, r1, fx, fy);
        for (std::size_t m = 0; m < n; ++m) {
            double v = u.values[m] + 0.5 * h * (r0[m] + r1[m]);
            u.values[m] = v;
            umin = std::min(umin, v);
            umax = std::max(umax, v);
        }
    }

    if (stats) {
        stats->steps = steps;
        stats->dt = dt;
        stats->cfl_diff = dt * eng.lam_diff;
        stats->cfl_adv = eng.vmax > 0.0 ? dt * eng.vmax / std::min(g.hx, g.hy) : 0.0;
        stats->min_u = umin;
        stats->max_u = umax;
        stats->mass_drift_per_step =
            track_mass && steps > 0 ? std::abs(u.mean() - mass0) / double(steps) : 0.0;
        stats->wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    u.check_finite();
    return u;
}

}  // namespace

GridField2D dns_solve(const SpectralField2D& psi, double kappa, const SolveSetup& setup,
                      SolveStats* stats) {
    require(kappa > 0.0, "dns_solve: kappa must be positive");
    const Grid2D& g = setup.grid;
    const std::size_t n = std::size_t(g.nx) * g.ny;
    std::vector<double> k11(n, kappa), k12(n, 0.0), k22(n, kappa);
    Engine eng(g, k11, k12, k22);

    if (!psi.is_zero()) {
        int max_k = std::max(psi.max_nonzero_k1(), psi.max_nonzero_k2());
        double h = std::max(g.hx, g.hy);
        require(max_k * h <= 0.25, "dns_solve: grid has fewer than 4 points per wavelength");

        // Velocities from centered differences of nodal stream values: the
        // discrete centered divergence then vanishes identically.
        std::vector<double> xs(g.nx), ys(g.ny), psin;
        for (int i = 0; i < g.nx; ++i) xs[i] = g.x(i);
        for (int j = 0; j < g.ny; ++j) ys[j] = g.y(j);
        eval_on_nodes(psi, xs, ys, psin);
        std::vector<double> v1(n), v2(n);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                std::size_t a = eng.at(i, j);
                v1[a] = -(psin[eng.at(i, eng.jpy[j])] - psin[eng.at(i, eng.jmy[j])]) /
                        (2.0 * g.hy);
                v2[a] = (psin[eng.at(eng.ipx[i], j)] - psin[eng.at(eng.imx[i], j)]) /
                        (2.0 * g.hx);
            }
        eng.set_velocity(std::move(v1), std::move(v2));
    }
    return run(eng, setup, stats);
}

GridField2D macro_solve(const DiffTensor2& K, const SolveSetup& setup, SolveStats* stats) {
    require(K.is_spd(), "macro_solve: diffusivity must be SPD");
    const Grid2D& g = setup.grid;
    const std::size_t n = std::size_t(g.nx) * g.ny;
    std::vector<double> k11(n, K.k11), k12(n, K.k12), k22(n, K.k22);
    Engine eng(g, k11, k12, k22);
    return run(eng, setup, stats);
}

GridField2D macro_solve(const EffDiffField& K, const SolveSetup& setup, SolveStats* stats) {
    const Grid2D& mg = K.grid;
    require(mg.bc_x == Bc::periodic && mg.bc_y == Bc::periodic,
            "macro_solve: tensor field must live on a periodic grid");
    const Grid2D& g = setup.grid;
    const std::size_t n = std::size_t(g.nx) * g.ny;
    std::vector<double> k11(n), k12(n), k22(n);

    auto wrap = [](int i, int m) { return ((i % m) + m) % m; };
    for (int j = 0; j < g.ny; ++j) {
        double sy = (g.y(j) - mg.y0) / mg.hy;
        int j0 = int(std::floor(sy));
        double wy = sy - j0;
        int ja = wrap(j0, mg.ny), jb = wrap(j0 + 1, mg.ny);
        for (int i = 0; i < g.nx; ++i) {
            double sx = (g.x(i) - mg.x0) / mg.hx;
            int i0 = int(std::floor(sx));
            double wx = sx - i0;
            int ia = wrap(i0, mg.nx), ib = wrap(i0 + 1, mg.nx);
            DiffTensor2 t00 = K.at(ia, ja), t10 = K.at(ib, ja), t01 = K.at(ia, jb),
                        t11 = K.at(ib, jb);
            double w00 = (1.0 - wx) * (1.0 - wy), w10 = wx * (1.0 - wy), w01 = (1.0 - wx) * wy,
                   w11 = wx * wy;
            std::size_t a = std::size_t(j) * g.nx + i;
            k11[a] = w00 * t00.k11 + w10 * t10.k11 + w01 * t01.k11 + w11 * t11.k11;
            k12[a] = w00 * t00.k12 + w10 * t10.k12 + w01 * t01.k12 + w11 * t11.k12;
            k22[a] = w00 * t00.k22 + w10 * t10.k22 + w01 * t01.k22 + w11 * t11.k22;
        }
    }
    Engine eng(g, k11, k12, k22);
    return run(eng, setup, stats);
}

std::string SolveStats::to_json() const {
    nlohmann::json j{{"steps", steps},
                     {"dt", dt},
                     {"wall_seconds", wall_seconds},
                     {"cfl_diff", cfl_diff},
                     {"cfl_adv", cfl_adv},
                     {"min_u", min_u},
                     {"max_u", max_u},
                     {"mass_drift_per_step", mass_drift_per_step}};
    return j.dump(2);
}

void Profile1D::write_csv(const std::string& path) const {
    std::ofstream os(path);
    require(bool(os), "Profile1D: cannot open " + path);
    os << "x1,u\n";
    for (std::size_t i = 0; i < x.size(); ++i)
        os << fmt_g17(x[i]) << ',' << fmt_g17(u[i]) << '\n';
    require(bool(os), "Profile1D: write failed for " + path);
}

Profile1D Profile1D::read_csv(const std::string& path) {
    std::ifstream is(path);
    require(bool(is), "Profile1D: cannot open " + path);
    std::string line;
    require(bool(std::getline(is, line)) && line == "x1,u",
            "Profile1D: bad header in " + path);
    Profile1D p;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::size_t comma = line.find(',');
        require(comma != std::string::npos, "Profile1D: bad row in " + path);
        p.x.push_back(std::stod(line.substr(0, comma)));
        p.u.push_back(std::stod(line.substr(comma + 1)));
    }
    return p;
}

Profile1D midline_profile(const GridField2D& u, double x2) {
    const Grid2D& g = u.grid;
    int j = int(std::lround((x2 - g.y0) / g.hy));
    j = ((j % g.ny) + g.ny) % g.ny;
    Profile1D p;
    p.x.resize(g.nx);
    p.u.resize(g.nx);
    for (int i = 0; i < g.nx; ++i) {
        p.x[i] = g.x(i);
        p.u[i] = u.values[g.idx(i, j)];
    }
    return p;
}

Profile1D averaged_profile(const GridField2D& u) {
    const Grid2D& g = u.grid;
    Profile1D p;
    p.x.resize(g.nx);
    p.u.assign(g.nx, 0.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) p.u[i] += u.values[g.idx(i, j)];
    for (int i = 0; i < g.nx; ++i) {
        p.x[i] = g.x(i);
        p.u[i] /= g.ny;
    }
    return p;
}

double mixing_width(const Profile1D& p) {
    require(p.x.size() == p.u.size() && p.x.size() >= 2, "mixing_width: bad profile");
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < p.x.size(); ++i) {
        double fa = p.u[i] * (1.0 - p.u[i]);
        double fb = p.u[i + 1] * (1.0 - p.u[i + 1]);
        s += 0.5 * (fa + fb) * (p.x[i + 1] - p.x[i]);
    }
    return s;
}

ProfileMetrics profile_metrics(const Profile1D& a, const Profile1D& b) {
    require(a.x.size() == a.u.size() && b.x.size() == b.u.size(), "profile_metrics: bad profile");
    require(a.x.size() >= 2 && b.x.size() >= 2, "profile_metrics: profiles too short");
    const double lo = std::max(a.x.front(), b.x.front());
    const double hi = std::min(a.x.back(), b.x.back());
    require(hi > lo, "profile_metrics: profiles do not overlap");

    ProfileMetrics m;
    double num = 0.0, den = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < a.x.size(); ++i) {
        double x = a.x[i];
        if (x < lo - 1e-14 || x > hi + 1e-14) continue;
        while (k + 2 < b.x.size() && b.x[k + 1] < x) ++k;
        double w = (x - b.x[k]) / (b.x[k + 1] - b.x[k]);
        w = std::clamp(w, 0.0, 1.0);
        double bv = (1.0 - w) * b.u[k] + w * b.u[k + 1];
        double d = a.u[i] - bv;
        num += d * d;
        den += a.u[i] * a.u[i];
        m.max_dev = std::max(m.max_dev, std::abs(d));
    }
    require(den > 0.0, "profile_metrics: reference profile is zero on the overlap");
    m.l2_rel = std::sqrt(num / den);
    return m;
}

}  // namespace shmm
