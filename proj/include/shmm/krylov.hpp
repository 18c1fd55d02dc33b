// Restarted GMRES with left preconditioning, over real or complex vectors.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "shmm/common.hpp"

namespace shmm {

template <class S>
struct KrylovResult {
    std::vector<S> x;
    double rel_residual = 0.0;  // preconditioned-residual estimate at exit
    long iterations = 0;
    bool converged = false;
    std::vector<double> history;  // relative residual per iteration
};

namespace detail {
inline double kdot_conj(double a, double b) { return a * b; }
inline std::complex<double> kdot_conj(std::complex<double> a, std::complex<double> b) {
    return std::conj(a) * b;
}
}  // namespace detail

// Solves A x = b with left preconditioner M (apply_m approximates A^-1).
// apply_a / apply_m map an input vector to a preallocated output vector.
template <class S>
KrylovResult<S> gmres(const std::function<void(const std::vector<S>&, std::vector<S>&)>& apply_a,
                      const std::function<void(const std::vector<S>&, std::vector<S>&)>& apply_m,
                      const std::vector<S>& b, double tol, long max_iters, int restart = 80) {
    const std::size_t n = b.size();
    KrylovResult<S> out;
    out.x.assign(n, S(0));

    auto nrm = [&](const std::vector<S>& v) {
        double s = 0.0;
        for (const auto& e : v) s += std::norm(e);
        return std::sqrt(s);
    };

    std::vector<S> tmp(n), mb(n);
    apply_m(b, mb);
    const double beta0 = nrm(mb);
    if (beta0 == 0.0) {
        out.converged = true;
        return out;
    }

    std::vector<std::vector<S>> basis;
    std::vector<S> w(n), r(n);
    long iters = 0;

    while (iters < max_iters) {
        // r = M(b - A x)
        apply_a(out.x, tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = b[i] - tmp[i];
        apply_m(tmp, r);
        double beta = nrm(r);
        out.rel_residual = beta / beta0;
        if (out.rel_residual <= tol) {
            out.converged = true;
            return out;
        }

        const int m = restart;
        basis.assign(1, r);
        for (auto& e : basis[0]) e = e * S(1.0 / beta);
        // Hessenberg factorization updated by Givens rotations.
        std::vector<std::vector<S>> h(m + 1, std::vector<S>(m, S(0)));
        std::vector<S> cs(m, S(0)), sn(m, S(0)), g(m + 1, S(0));
        g[0] = S(beta);

        int k = 0;
        for (; k < m && iters < max_iters; ++k, ++iters) {
            apply_a(basis[k], tmp);
            apply_m(tmp, w);
            for (int j = 0; j <= k; ++j) {
                S hij(0);
                const auto& vj = basis[j];
                for (std::size_t i = 0; i < n; ++i) hij += detail::kdot_conj(vj[i], w[i]);
                h[j][k] = hij;
                for (std::size_t i = 0; i < n; ++i) w[i] -= hij * vj[i];
            }
            double wn = nrm(w);
            h[k + 1][k] = S(wn);
            if (wn > 0.0) {
                basis.push_back(w);
                for (auto& e : basis.back()) e = e * S(1.0 / wn);
            }
            // Apply stored rotations, then form the new one.
            for (int j = 0; j < k; ++j) {
                S t = detail::kdot_conj(cs[j], h[j][k]) + detail::kdot_conj(sn[j], h[j + 1][k]);
                h[j + 1][k] = cs[j] * h[j + 1][k] - sn[j] * h[j][k];
                h[j][k] = t;
            }
            double denom = std::sqrt(std::norm(h[k][k]) + std::norm(h[k + 1][k]));
            if (denom == 0.0) {
                ++k;
                break;
            }
            cs[k] = h[k][k] * S(1.0 / denom);
            sn[k] = h[k + 1][k] * S(1.0 / denom);
            h[k][k] = S(denom);
            h[k + 1][k] = S(0);
            g[k + 1] = -sn[k] * g[k];
            g[k] = detail::kdot_conj(cs[k], g[k]);
            out.rel_residual = std::abs(g[k + 1]) / beta0;
            out.history.push_back(out.rel_residual);
            if (out.rel_residual <= tol || wn == 0.0) {
                ++k;
                break;
            }
        }

        // Back-substitute y and update x += V y.
        std::vector<S> y(k, S(0));
        for (int i = k - 1; i >= 0; --i) {
            S s = g[i];
            for (int j = i + 1; j < k; ++j) s -= h[i][j] * y[j];
            y[i] = s * S(1.0) / h[i][i];
        }
        for (int j = 0; j < k; ++j)
            for (std::size_t i = 0; i < n; ++i) out.x[i] += y[j] * basis[j][i];

        if (out.rel_residual <= tol) {
            // Confirm with an explicitly recomputed residual before returning.
            apply_a(out.x, tmp);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = b[i] - tmp[i];
            apply_m(tmp, r);
            out.rel_residual = nrm(r) / beta0;
            if (out.rel_residual <= 10 * tol) {
                out.converged = true;
                return out;
            }
        }
    }
    return out;
}

}  // namespace shmm
