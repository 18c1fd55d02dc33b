#include "shmm/hierarchy.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "shmm/shear.hpp"

namespace shmm {

LevelHierarchy build_hierarchy(const Grid2D& macro_grid, int i, int j, int alpha, int n_levels,
                               int points_per_level) {
    require(alpha >= 2, "build_hierarchy: alpha must be >= 2");
    require(n_levels >= 1, "build_hierarchy: need at least one level");
    require(points_per_level >= 8, "build_hierarchy: too few points per level");
    require(std::abs(macro_grid.hx - macro_grid.hy) <= 1e-12 * macro_grid.hx,
            "build_hierarchy: macro grid must have square cells");
    require(i >= 0 && i < macro_grid.nx && j >= 0 && j < macro_grid.ny,
            "build_hierarchy: macro index out of range");

    LevelHierarchy h;
    h.cx = macro_grid.x(i);
    h.cy = macro_grid.y(j);
    h.alpha = alpha;

    double side = 2.0 * macro_grid.hx;  // level 1 spans the macro cell
    for (int ell = 0; ell < n_levels; ++ell) {
        LevelDomain d;
        d.domain = Rect{h.cx - side / 2.0, h.cy - side / 2.0, side, side};
        d.points = points_per_level;
        d.spacing = side / points_per_level;
        h.levels.push_back(d);
        side /= alpha;
    }
    return h;
}

namespace {

// Solve one spectral block on its level domain; a zero block costs nothing
// and leaves the base unchanged.
DiffTensor2 solve_block(const SpectralField2D& block, const DiffTensor2& base,
                        const LevelDomain& level, const ShmmConfig& cfg) {
    if (block.is_zero()) return base;
    int max_k = std::max(block.max_nonzero_k1(), block.max_nonzero_k2());
    if (max_k * level.spacing > 0.25)
        throw InvalidInput("local solve under-resolved: wavenumber " + std::to_string(max_k) +
                           " needs at least 4 points per wavelength at spacing " +
                           fmt_g17(level.spacing));
    Grid2D g = Grid2D::local_cell(level.domain.x_lo, level.domain.y_lo, level.domain.wx,
                                  level.points);
    GridField2D psi_local = restrict_to_domain(block, level.domain, g, true);
    EffDiffResult r = hmm_effdiff(psi_local, base, cfg.micro);
    if (cfg.work) {
        cfg.work->grid_point_work += long(level.points) * level.points;
        cfg.work->micro_solves += 1;
    }
    return r.tensor;
}

DiffTensor2 offdiag_block(const SpectralField2D& component, OffDiagTag tag,
                          const DiffTensor2& base, const LevelDomain& level,
                          const ShmmConfig& cfg) {
    if (component.is_zero()) return base;
    if (cfg.work) cfg.work->shear_lines += level.points;
    return offdiag_effdiff(component, tag, base, level.domain, level.spacing);
}

// Partition an off-diagonal block at kcut along its fine axis: modes the level
// grid can resolve go into the grid solve, the tail keeps the analytic path.
std::pair<SpectralField2D, SpectralField2D> split_resolvable(const SpectralField2D& comp,
                                                             OffDiagTag tag, int kcut) {
    SpectralField2D resolved(comp.kmax), tail(comp.kmax);
    for (int k2 = -comp.kmax; k2 <= comp.kmax; ++k2)
        for (int k1 = -comp.kmax; k1 <= comp.kmax; ++k1) {
            cplx c = comp.at(k1, k2);
            if (c == cplx(0.0)) continue;
            int fine = tag == OffDiagTag::fine_k2 ? std::abs(k2) : std::abs(k1);
            (fine <= kcut ? resolved : tail).at(k1, k2) = c;
        }
    return {resolved, tail};
}

// Depth-first composition over the splits; ell indexes both the split list
// and the hierarchy level it lives on.
DiffTensor2 compose(const std::vector<LevelComponents>& splits, const SpectralField2D& residual,
                    std::size_t ell, const DiffTensor2& base, const LevelHierarchy& hier,
                    const ShmmConfig& cfg) {
    if (ell == splits.size()) {
        if (residual.is_zero()) return base;
        require(ell < hier.levels.size(), "hierarchy too shallow for the residual block");
        return solve_block(residual, base, hier.levels[ell], cfg);
    }
    require(ell < hier.levels.size(), "hierarchy too shallow for split " + std::to_string(ell));
    const LevelComponents& lc = splits[ell];
    const LevelDomain& level = hier.levels[ell];

    // Diagonal-only split: plain iterated homogenization, fine to coarse.
    if (lc.fine_k2.is_zero() && lc.fine_k1.is_zero()) {
        DiffTensor2 k_star = compose(splits, residual, ell + 1, base, hier, cfg);
        return solve_block(lc.coarse, k_star, level, cfg);
    }

    // Off-diagonal blocks homogenized analytically with the incoming base,
    // combined into the base handed to the finer scales.
    DiffTensor2 k12 = offdiag_block(lc.fine_k2, OffDiagTag::fine_k2, base, level, cfg);
    DiffTensor2 k21 = offdiag_block(lc.fine_k1, OffDiagTag::fine_k1, base, level, cfg);
    DiffTensor2 k_off = offdiag_sum(k12, k21, base);

    DiffTensor2 k_star = compose(splits, residual, ell + 1, k_off, hier, cfg);

    // Re-anchor the fine-scale result so the off-diagonal contribution is not
    // counted twice once those components rejoin the coarse solve below.
    DiffTensor2 anchor = cfg.net_base == ShmmConfig::NetBase::molecular
                             ? DiffTensor2::isotropic(cfg.molecular_kappa)
                             : base;
    DiffTensor2 k_net = k_star - k_off + anchor;
    require_solved(k_net.is_spd(),
                   "net tensor after removing the off-diagonal base is not SPD (" + k_net.csv() +
                       ") at level " + std::to_string(ell + 1));

    // Coarse solve carries the off-diagonal components the level grid can
    // resolve; tails beyond the 4-points-per-wavelength bound keep the
    // analytic treatment, accumulated on the same base.
    int kcut = int(0.25 * level.points / level.domain.wx);
    auto [r12, t12] = split_resolvable(lc.fine_k2, OffDiagTag::fine_k2, kcut);
    auto [r21, t21] = split_resolvable(lc.fine_k1, OffDiagTag::fine_k1, kcut);
    DiffTensor2 total = solve_block(lc.coarse + r12 + r21, k_net, level, cfg);
    if (!t12.is_zero())
        total = total + (offdiag_block(t12, OffDiagTag::fine_k2, k_net, level, cfg) - k_net);
    if (!t21.is_zero())
        total = total + (offdiag_block(t21, OffDiagTag::fine_k1, k_net, level, cfg) - k_net);
    return total;
}

}  // namespace

DiffTensor2 effdiff_two_level(const LevelComponents& decomp, const DiffTensor2& base,
                              const LevelHierarchy& hier, const ShmmConfig& cfg) {
    std::vector<LevelComponents> splits{decomp};
    return compose(splits, decomp.fine, 0, base, hier, cfg);
}

DiffTensor2 effdiff_recursive(const DecompositionSet& decomp, const DiffTensor2& base,
                              const LevelHierarchy& hier, const ShmmConfig& cfg) {
    return compose(decomp.levels, decomp.residual, 0, base, hier, cfg);
}

double EffDiffField::max_spread() const {
    if (tensors.empty()) return 0.0;
    DiffTensor2 lo = tensors.front(), hi = tensors.front();
    for (const auto& t : tensors) {
        lo.k11 = std::min(lo.k11, t.k11);
        lo.k12 = std::min(lo.k12, t.k12);
        lo.k22 = std::min(lo.k22, t.k22);
        hi.k11 = std::max(hi.k11, t.k11);
        hi.k12 = std::max(hi.k12, t.k12);
        hi.k22 = std::max(hi.k22, t.k22);
    }
    return lo.max_abs_diff(hi);
}

void EffDiffField::write_csv(const std::string& path) const {
    std::ofstream os(path);
    require(bool(os), "EffDiffField: cannot open " + path);
    os << "# nx,ny,hx,hy,x10,x20\n";
    os << grid.nx << ',' << grid.ny << ',' << fmt_g17(grid.hx) << ',' << fmt_g17(grid.hy) << ','
       << fmt_g17(grid.x0) << ',' << fmt_g17(grid.y0) << '\n';
    os << "i,j,x1,x2,k11,k12,k22\n";
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const DiffTensor2& t = at(i, j);
            os << i << ',' << j << ',' << fmt_g17(grid.x(i)) << ',' << fmt_g17(grid.y(j)) << ','
               << fmt_g17(t.k11) << ',' << fmt_g17(t.k12) << ',' << fmt_g17(t.k22) << '\n';
        }
    require(bool(os), "EffDiffField: write failed for " + path);
}

EffDiffField EffDiffField::read_csv(const std::string& path) {
    std::ifstream is(path);
    require(bool(is), "EffDiffField: cannot open " + path);
    std::string line;
    require(bool(std::getline(is, line)) && line.rfind("#", 0) == 0,
            "EffDiffField: missing header in " + path);
    require(bool(std::getline(is, line)), "EffDiffField: truncated header in " + path);
    Grid2D g = Grid2D::periodic_unit(2);
    {
        std::istringstream ls(line);
        char c;
        ls >> g.nx >> c >> g.ny >> c >> g.hx >> c >> g.hy >> c >> g.x0 >> c >> g.y0;
        require(bool(ls), "EffDiffField: bad grid line in " + path);
    }
    require(g.nx >= 1 && g.ny >= 1, "EffDiffField: bad dimensions in " + path);
    require(bool(std::getline(is, line)), "EffDiffField: missing column header in " + path);

    EffDiffField f(g);
    std::vector<char> seen(f.tensors.size(), 0);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        int i, j;
        double x1, x2;
        DiffTensor2 t;
        char c;
        ls >> i >> c >> j >> c >> x1 >> c >> x2 >> c >> t.k11 >> c >> t.k12 >> c >> t.k22;
        require(bool(ls), "EffDiffField: bad row in " + path);
        require(i >= 0 && i < g.nx && j >= 0 && j < g.ny,
                "EffDiffField: index out of range in " + path);
        f.at(i, j) = t;
        seen[g.idx(i, j)] = 1;
    }
    for (char s : seen) require(s != 0, "EffDiffField: missing rows in " + path);
    return f;
}

EffDiffField assemble_macro_diffusivity(const SpectralField2D& psi, const Grid2D& macro_grid,
                                        int alpha, const ShmmConfig& cfg) {
    require(cfg.depth >= 1, "assemble_macro_diffusivity: depth must be >= 1");
    DecompositionSet decomp = decompose(psi, alpha, cfg.depth - 1);
    DiffTensor2 base = DiffTensor2::isotropic(cfg.molecular_kappa);

    EffDiffField field(macro_grid);
    std::ostringstream failures;
    int n_failed = 0;
    for (int j = 0; j < macro_grid.ny; ++j)
        for (int i = 0; i < macro_grid.nx; ++i) {
            LevelHierarchy hier = build_hierarchy(macro_grid, i, j, alpha, cfg.depth,
                                                  cfg.micro.n_micro);
            try {
                field.at(i, j) = effdiff_recursive(decomp, base, hier, cfg);
            } catch (const std::exception& e) {
                if (n_failed++ < 8) failures << "\n  (" << i << ',' << j << "): " << e.what();
            }
        }
    if (n_failed > 0)
        throw SolverFailure("assemble_macro_diffusivity: " + std::to_string(n_failed) +
                            " macro points failed:" + failures.str());
    return field;
}

}  // namespace shmm
