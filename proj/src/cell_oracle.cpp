#include "shmm/cell_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "shmm/krylov.hpp"

namespace shmm {

namespace {

// Smallest 2^a*3^b*5^c >= n (keeps FFTW on fast code paths).
int next_fast_size(int n) {
    for (int m = n;; ++m) {
        int r = m;
        for (int p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

inline int signed_freq(int bin, int n) { return bin <= n / 2 ? bin : bin - n; }

}  // namespace

DiffTensor2 cell_problem_oracle(const SpectralField2D& psi, const DiffTensor2& base, int n,
                                double tol) {
    require(base.is_spd(), "cell_problem_oracle: base must be SPD");
    require(n >= 4 && n % 2 == 0, "cell_problem_oracle: need an even grid size >= 4");
    require(std::abs(psi.mean()) <= 1e-12, "cell_problem_oracle: psi must be mean-zero");
    const int kv = std::max(psi.max_nonzero_k1(), psi.max_nonzero_k2());
    require(2 * kv + 2 <= n, "cell_problem_oracle: grid cannot resolve psi");

    // Padded grid large enough that products of solution modes (|k| <= n/2)
    // with velocity modes (|k| <= kv) alias only beyond the truncation.
    const int np = next_fast_size(n + kv + 1);
    const std::size_t N = std::size_t(n) * n, NP = std::size_t(np) * np;

    // Velocity samples (band-limited, so sampling is exact on both grids):
    // the base grid feeds the right-hand sides, the padded grid the dealiased
    // products and the flux integrals.
    VectorField2D vn = velocity_from_stream(psi, Grid2D::periodic_unit(n));
    VectorField2D vp = velocity_from_stream(psi, Grid2D::periodic_unit(np));

    const double inv_n2 = 1.0 / double(N);

    // chi values (n x n) -> hat coefficients with Nyquist lines dropped.
    auto forward = [&](const std::vector<double>& x, std::vector<cplx>& hat) {
        hat.assign(x.begin(), x.end());
        dft2_inplace(hat, n, n, -1);
        for (std::size_t m = 0; m < N; ++m) hat[m] *= inv_n2;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (i == n / 2 || j == n / 2) hat[std::size_t(j) * n + i] = cplx(0.0);
    };

    // Zero-pad hat coefficients onto the padded grid and evaluate values there;
    // optional spectral scaling (multiplier per signed frequency) on the way.
    auto to_padded = [&](const std::vector<cplx>& hat,
                         const std::function<cplx(int, int)>& mul, std::vector<cplx>& big) {
        big.assign(NP, cplx(0.0));
        for (int j = 0; j < n; ++j) {
            int k2 = signed_freq(j, n);
            int jj = (k2 + np) % np;
            for (int i = 0; i < n; ++i) {
                int k1 = signed_freq(i, n);
                int ii = (k1 + np) % np;
                big[std::size_t(jj) * np + ii] = hat[std::size_t(j) * n + i] * mul(k1, k2);
            }
        }
        dft2_inplace(big, np, np, +1);
    };

    std::vector<cplx> hat(N), d1(NP), d2(NP), adv(NP);

    // L chi = -div(base grad chi) - v.grad chi, value space in and out.
    auto apply_L = [&](const std::vector<double>& x, std::vector<double>& y) {
        forward(x, hat);
        to_padded(hat, [](int k1, int) { return cplx(0.0, two_pi * k1); }, d1);
        to_padded(hat, [](int, int k2) { return cplx(0.0, two_pi * k2); }, d2);
        for (std::size_t m = 0; m < NP; ++m)
            adv[m] = vp.v1.values[m] * d1[m].real() + vp.v2.values[m] * d2[m].real();
        dft2_inplace(adv, np, np, -1);
        const double inv_np2 = 1.0 / double(NP);

        // diffusion symbol on the base grid minus the dealiased advection term
        std::vector<cplx> out(N);
        for (int j = 0; j < n; ++j) {
            int k2 = signed_freq(j, n);
            int jj = (k2 + np) % np;
            for (int i = 0; i < n; ++i) {
                int k1 = signed_freq(i, n);
                int ii = (k1 + np) % np;
                double sym = 4.0 * pi * pi *
                             (base.k11 * k1 * k1 + 2.0 * base.k12 * k1 * k2 + base.k22 * k2 * k2);
                cplx a = adv[std::size_t(jj) * np + ii] * inv_np2;
                cplx val = sym * hat[std::size_t(j) * n + i] - a;
                if (i == n / 2 || j == n / 2 || (i == 0 && j == 0)) val = cplx(0.0);
                out[std::size_t(j) * n + i] = val;
            }
        }
        dft2_inplace(out, n, n, +1);
        y.resize(N);
        for (std::size_t m = 0; m < N; ++m) y[m] = out[m].real();
    };

    auto apply_M = [&](const std::vector<double>& x, std::vector<double>& y) {
        std::vector<cplx> a(x.begin(), x.end());
        dft2_inplace(a, n, n, -1);
        for (int j = 0; j < n; ++j) {
            int k2 = signed_freq(j, n);
            for (int i = 0; i < n; ++i) {
                int k1 = signed_freq(i, n);
                double sym = 4.0 * pi * pi *
                             (base.k11 * k1 * k1 + 2.0 * base.k12 * k1 * k2 + base.k22 * k2 * k2);
                std::size_t m = std::size_t(j) * n + i;
                if (i == n / 2 || j == n / 2 || (i == 0 && j == 0))
                    a[m] = cplx(0.0);
                else
                    a[m] *= inv_n2 / sym;
            }
        }
        dft2_inplace(a, n, n, +1);
        y.resize(N);
        for (std::size_t m = 0; m < N; ++m) y[m] = a[m].real();
    };

    // chi_i on the padded grid, for the flux integrals.
    std::vector<std::vector<double>> chi_padded(2);
    long total_iters = 0;

    for (int c = 0; c < 2; ++c) {
        const std::vector<double>& rhs = c == 0 ? vn.v1.values : vn.v2.values;
        std::function<void(const std::vector<double>&, std::vector<double>&)> A = apply_L;
        std::function<void(const std::vector<double>&, std::vector<double>&)> M = apply_M;
        auto out = gmres<double>(A, M, rhs, tol, 6000, 120);
        total_iters += out.iterations;
        if (!out.converged) {
            std::ostringstream oss;
            oss << "cell_problem_oracle: corrector solve " << (c + 1)
                << " stalled at relative residual " << fmt_g17(out.rel_residual) << " after "
                << out.iterations << " iterations; history tail:";
            std::size_t from = out.history.size() > 8 ? out.history.size() - 8 : 0;
            for (std::size_t m = from; m < out.history.size(); ++m)
                oss << ' ' << fmt_g17(out.history[m]);
            throw SolverFailure(oss.str());
        }
        forward(out.x, hat);
        std::vector<cplx> big;
        to_padded(hat, [](int, int) { return cplx(1.0); }, big);
        chi_padded[c].resize(NP);
        for (std::size_t m = 0; m < NP; ++m) chi_padded[c][m] = big[m].real();
    }

    auto mean_prod = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t m = 0; m < NP; ++m) s += a[m] * b[m];
        return s / double(NP);
    };

    DiffTensor2 K;
    K.k11 = base.k11 + mean_prod(vp.v1.values, chi_padded[0]);
    K.k22 = base.k22 + mean_prod(vp.v2.values, chi_padded[1]);
    K.k12 = base.k12 + 0.5 * (mean_prod(vp.v1.values, chi_padded[1]) +
                              mean_prod(vp.v2.values, chi_padded[0]));
    require_solved(K.is_spd(), "cell_problem_oracle: tensor not SPD (" + K.csv() + ")");
    return K;
}

}  // namespace shmm
