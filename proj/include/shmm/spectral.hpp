// Spectral representation of real periodic 2D fields and 1D profiles,
// grid <-> coefficient transforms, and stream-function derived velocities.
//
// Convention: mode k = (k1,k2) is exp(2*pi*i*(k1*x1 + k2*x2)) on the unit
// period; real fields satisfy coeff(-k) == conj(coeff(k)).
#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include "shmm/common.hpp"
#include "shmm/grid.hpp"

namespace shmm {

using cplx = std::complex<double>;

// Dense block of Fourier coefficients with |k1|,|k2| <= kmax.
struct SpectralField2D {
    int kmax = 0;
    std::vector<cplx> coeff;  // index: (k1+kmax) + (2*kmax+1)*(k2+kmax)

    SpectralField2D() = default;
    explicit SpectralField2D(int kmax_) : kmax(kmax_) {
        require(kmax >= 0, "SpectralField2D: kmax must be >= 0");
        coeff.assign(static_cast<std::size_t>(2 * kmax + 1) * (2 * kmax + 1), cplx(0.0));
    }

    int side() const { return 2 * kmax + 1; }
    std::size_t idx(int k1, int k2) const {
        return static_cast<std::size_t>(k2 + kmax) * side() + (k1 + kmax);
    }
    cplx& at(int k1, int k2) { return coeff[idx(k1, k2)]; }
    cplx at(int k1, int k2) const { return coeff[idx(k1, k2)]; }
    bool in_range(int k1, int k2) const {
        return k1 >= -kmax && k1 <= kmax && k2 >= -kmax && k2 <= kmax;
    }

    bool is_zero() const;
    double mean() const { return at(0, 0).real(); }
    // Total spectral energy sum |coeff|^2 over all modes (Parseval: mean of f^2).
    double energy() const;
    // Largest |k1| (resp. |k2|) carrying a nonzero coefficient; 0 if none.
    int max_nonzero_k1() const;
    int max_nonzero_k2() const;
    // Max |coeff(-k) - conj(coeff(k))| over all modes.
    double hermitian_error() const;
    // Force exact Hermitian symmetry and a real mean mode.
    void symmetrize();

    SpectralField2D operator+(const SpectralField2D& o) const;
    SpectralField2D operator-(const SpectralField2D& o) const;
    SpectralField2D scaled(double s) const;

    // CSV rows "k1,k2,re,im", all modes in the block, sorted by (k1,k2).
    void write_csv(std::ostream& os) const;
    static SpectralField2D read_csv(std::istream& is);
};

// 1D slice of coefficients along one axis (a periodic profile).
struct SpectralProfile1D {
    int kmax = 0;
    std::vector<cplx> coeff;  // index k + kmax

    SpectralProfile1D() = default;
    explicit SpectralProfile1D(int kmax_) : kmax(kmax_) {
        require(kmax >= 0, "SpectralProfile1D: kmax must be >= 0");
        coeff.assign(static_cast<std::size_t>(2 * kmax + 1), cplx(0.0));
    }

    cplx& at(int k) { return coeff[k + kmax]; }
    cplx at(int k) const { return coeff[k + kmax]; }

    double mean() const { return at(0).real(); }
    // Integral of the profile squared over one period (Parseval, mean excluded).
    double energy() const;
    // L2 inner product of two real profiles over one period (means excluded).
    static double inner(const SpectralProfile1D& a, const SpectralProfile1D& b);

    SpectralProfile1D operator+(const SpectralProfile1D& o) const;

    // Profile holding a single real mode amp*sin or amp*cos at wavenumber k.
    static SpectralProfile1D sine(int k, double amp, int kmax);
    static SpectralProfile1D cosine(int k, double amp, int kmax);
    // Exact DFT of uniformly sampled real values on one period.
    static SpectralProfile1D from_samples(const std::vector<double>& v, int kmax);
};

// -- transforms -------------------------------------------------------------

// In-place complex 2D DFT on an nx*ny row-major array (layout j*nx+i).
// sign -1 = forward (unnormalized), +1 = backward. Thread-safe.
void dft2_inplace(std::vector<cplx>& a, int nx, int ny, int sign);

// Forward transform of a periodic grid field covering exactly one period.
// kmax < 0 selects the largest representable truncation, (min(nx,ny)-2)/2.
SpectralField2D to_spectral(const GridField2D& f, int kmax = -1);

// Inverse transform onto a periodic grid covering exactly one period.
GridField2D from_spectral(const SpectralField2D& s, const Grid2D& g);

// Pointwise evaluation of the spectral sum on an arbitrary grid (exact, no
// aliasing; used for local sub-domain grids and Dirichlet solver grids).
GridField2D eval_on_grid(const SpectralField2D& s, const Grid2D& g);
// Same, on nodes x(i) = x0 + i*hx extended outside the grid range.
void eval_on_nodes(const SpectralField2D& s, const std::vector<double>& xs,
                   const std::vector<double>& ys, std::vector<double>& out);

// v = (-d(psi)/dx2, d(psi)/dx1), differentiated spectrally, sampled on g.
VectorField2D velocity_from_stream(const SpectralField2D& psi, const Grid2D& g);

// Spectral derivative fields (coefficients scaled by 2*pi*i*k).
SpectralField2D derivative_x1(const SpectralField2D& s);
SpectralField2D derivative_x2(const SpectralField2D& s);

// Coefficients of the 1D profile x2 -> f(x1_fixed, x2) (resp. x1 profile).
SpectralProfile1D profile_along_x2(const SpectralField2D& s, double x1);
SpectralProfile1D profile_along_x1(const SpectralField2D& s, double x2);

}  // namespace shmm
