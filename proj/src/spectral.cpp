#include "shmm/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

namespace shmm {

// FFTW planning is not thread-safe; execution of a ready plan is. Plans made
// with FFTW_ESTIMATE are cheap, so one cached plan per (nx, ny, sign) executed
// through the new-array interface is enough.
void dft2_inplace(std::vector<cplx>& a, int nx, int ny, int sign) {
    require(a.size() == std::size_t(nx) * ny, "dft2_inplace: size mismatch");
    static std::mutex plan_mutex;
    static std::map<std::tuple<int, int, int>, fftw_plan> plans;
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        auto key = std::make_tuple(nx, ny, sign);
        auto it = plans.find(key);
        if (it == plans.end()) {
            // Plan on a scratch buffer; FFTW_ESTIMATE does not touch the data.
            std::vector<cplx> scratch(a.size());
            auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
            plan = fftw_plan_dft_2d(ny, nx, p, p, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
            plans.emplace(key, plan);
        } else {
            plan = it->second;
        }
    }
    auto* p = reinterpret_cast<fftw_complex*>(a.data());
    fftw_execute_dft(plan, p, p);
}

// -- SpectralField2D ---------------------------------------------------------

bool SpectralField2D::is_zero() const {
    for (const auto& c : coeff)
        if (c != cplx(0.0)) return false;
    return true;
}

double SpectralField2D::energy() const {
    double s = 0.0;
    for (const auto& c : coeff) s += std::norm(c);
    return s;
}

int SpectralField2D::max_nonzero_k1() const {
    int m = 0;
    for (int k2 = -kmax; k2 <= kmax; ++k2)
        for (int k1 = -kmax; k1 <= kmax; ++k1)
            if (at(k1, k2) != cplx(0.0)) m = std::max(m, std::abs(k1));
    return m;
}

int SpectralField2D::max_nonzero_k2() const {
    int m = 0;
    for (int k2 = -kmax; k2 <= kmax; ++k2)
        for (int k1 = -kmax; k1 <= kmax; ++k1)
            if (at(k1, k2) != cplx(0.0)) m = std::max(m, std::abs(k2));
    return m;
}

double SpectralField2D::hermitian_error() const {
    double e = 0.0;
    for (int k2 = -kmax; k2 <= kmax; ++k2)
        for (int k1 = -kmax; k1 <= kmax; ++k1)
            e = std::max(e, std::abs(at(-k1, -k2) - std::conj(at(k1, k2))));
    return e;
}

void SpectralField2D::symmetrize() {
    for (int k2 = -kmax; k2 <= kmax; ++k2)
        for (int k1 = -kmax; k1 <= kmax; ++k1) {
            if (k2 < 0 || (k2 == 0 && k1 < 0)) continue;
            cplx avg = 0.5 * (at(k1, k2) + std::conj(at(-k1, -k2)));
            at(k1, k2) = avg;
            at(-k1, -k2) = std::conj(avg);
        }
    at(0, 0) = cplx(at(0, 0).real(), 0.0);
}

SpectralField2D SpectralField2D::operator+(const SpectralField2D& o) const {
    SpectralField2D r(std::max(kmax, o.kmax));
    for (int k2 = -kmax; k2 <= kmax; ++k2)
        for (int k1 = -kmax; k1 <= kmax; ++k1) r.at(k1, k2) = at(k1, k2);
    for (int k2 = -o.kmax; k2 <= o.kmax; ++k2)
        for (int k1 = -o.kmax; k1 <= o.kmax; ++k1) r.at(k1, k2) += o.at(k1, k2);
    return r;
}

SpectralField2D SpectralField2D::operator-(const SpectralField2D& o) const {
    return *this + o.scaled(-1.0);
}

SpectralField2D SpectralField2D::scaled(double s) const {
    SpectralField2D r = *this;
    for (auto& c : r.coeff) c *= s;
    return r;
}

void SpectralField2D::write_csv(std::ostream& os) const {
    os << "k1,k2,re,im\n";
    for (int k1 = -kmax; k1 <= kmax; ++k1)
        for (int k2 = -kmax; k2 <= kmax; ++k2) {
            cplx c = at(k1, k2);
            os << k1 << ',' << k2 << ',' << fmt_g17(c.real()) << ',' << fmt_g17(c.imag()) << '\n';
        }
}

SpectralField2D SpectralField2D::read_csv(std::istream& is) {
    std::string line;
    require(bool(std::getline(is, line)) && line.rfind("k1,k2", 0) == 0,
            "SpectralField2D: missing csv header");
    struct Row {
        int k1, k2;
        cplx c;
    };
    std::vector<Row> rows;
    int km = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        Row r;
        double re, im;
        char c;
        ss >> r.k1 >> c >> r.k2 >> c >> re >> c >> im;
        require(!ss.fail(), "SpectralField2D: malformed row: " + line);
        r.c = cplx(re, im);
        rows.push_back(r);
        km = std::max({km, std::abs(r.k1), std::abs(r.k2)});
    }
    SpectralField2D s(km);
    for (const auto& r : rows) s.at(r.k1, r.k2) = r.c;
    return s;
}

// -- SpectralProfile1D --------------------------------------------------------

double SpectralProfile1D::energy() const {
    double s = 0.0;
    for (int k = -kmax; k <= kmax; ++k)
        if (k != 0) s += std::norm(at(k));
    return s;
}

double SpectralProfile1D::inner(const SpectralProfile1D& a, const SpectralProfile1D& b) {
    double s = 0.0;
    int km = std::min(a.kmax, b.kmax);
    for (int k = -km; k <= km; ++k)
        if (k != 0) s += (a.at(k) * std::conj(b.at(k))).real();
    return s;
}

SpectralProfile1D SpectralProfile1D::operator+(const SpectralProfile1D& o) const {
    SpectralProfile1D r(std::max(kmax, o.kmax));
    for (int k = -kmax; k <= kmax; ++k) r.at(k) = at(k);
    for (int k = -o.kmax; k <= o.kmax; ++k) r.at(k) += o.at(k);
    return r;
}

SpectralProfile1D SpectralProfile1D::sine(int k, double amp, int kmax) {
    SpectralProfile1D p(kmax);
    require(k >= 1 && k <= kmax, "SpectralProfile1D::sine: wavenumber out of range");
    p.at(k) = cplx(0.0, -0.5 * amp);
    p.at(-k) = cplx(0.0, 0.5 * amp);
    return p;
}

SpectralProfile1D SpectralProfile1D::cosine(int k, double amp, int kmax) {
    SpectralProfile1D p(kmax);
    require(k >= 1 && k <= kmax, "SpectralProfile1D::cosine: wavenumber out of range");
    p.at(k) = cplx(0.5 * amp, 0.0);
    p.at(-k) = cplx(0.5 * amp, 0.0);
    return p;
}

SpectralProfile1D SpectralProfile1D::from_samples(const std::vector<double>& v, int kmax) {
    int n = int(v.size());
    require(n >= 2 * kmax + 1, "SpectralProfile1D::from_samples: too few samples for kmax");
    SpectralProfile1D p(kmax);
    for (int k = -kmax; k <= kmax; ++k) {
        cplx s(0.0);
        for (int m = 0; m < n; ++m) {
            double ph = -two_pi * k * m / double(n);
            s += v[m] * cplx(std::cos(ph), std::sin(ph));
        }
        p.at(k) = s / double(n);
    }
    return p;
}

// -- transforms ---------------------------------------------------------------

SpectralField2D to_spectral(const GridField2D& f, int kmax) {
    const Grid2D& g = f.grid;
    require(g.bc_x == Bc::periodic && g.bc_y == Bc::periodic,
            "to_spectral: grid must be periodic in both directions");
    if (kmax < 0) kmax = (std::min(g.nx, g.ny) - 2) / 2;
    require(g.nx >= 2 * kmax + 2 && g.ny >= 2 * kmax + 2,
            "to_spectral: grid undersampled for kmax (need n >= 2*kmax+2)");

    std::vector<cplx> a(f.values.begin(), f.values.end());
    dft2_inplace(a, g.nx, g.ny, -1);
    const double scale = 1.0 / (double(g.nx) * g.ny);
    SpectralField2D s(kmax);
    for (int k2 = -kmax; k2 <= kmax; ++k2)
        for (int k1 = -kmax; k1 <= kmax; ++k1) {
            int i = (k1 % g.nx + g.nx) % g.nx;
            int j = (k2 % g.ny + g.ny) % g.ny;
            s.at(k1, k2) = a[std::size_t(j) * g.nx + i] * scale;
        }
    return s;
}

GridField2D from_spectral(const SpectralField2D& s, const Grid2D& g) {
    require(g.bc_x == Bc::periodic && g.bc_y == Bc::periodic,
            "from_spectral: grid must be periodic in both directions");
    require(g.nx >= 2 * s.kmax + 1 && g.ny >= 2 * s.kmax + 1,
            "from_spectral: grid cannot represent kmax");
    std::vector<cplx> a(g.size(), cplx(0.0));
    for (int k2 = -s.kmax; k2 <= s.kmax; ++k2)
        for (int k1 = -s.kmax; k1 <= s.kmax; ++k1) {
            int i = (k1 % g.nx + g.nx) % g.nx;
            int j = (k2 % g.ny + g.ny) % g.ny;
            a[std::size_t(j) * g.nx + i] += s.at(k1, k2);
        }
    dft2_inplace(a, g.nx, g.ny, +1);
    GridField2D f(g);
    for (std::size_t n = 0; n < f.values.size(); ++n) f.values[n] = a[n].real();
    return f;
}

void eval_on_nodes(const SpectralField2D& s, const std::vector<double>& xs,
                   const std::vector<double>& ys, std::vector<double>& out) {
    const int S = s.side();
    const int nx = int(xs.size()), ny = int(ys.size());
    out.assign(std::size_t(nx) * ny, 0.0);

    // phase tables: ex[i][k1+kmax], ey[j][k2+kmax]
    std::vector<cplx> ex(std::size_t(nx) * S), ey(std::size_t(ny) * S);
    for (int i = 0; i < nx; ++i)
        for (int k = -s.kmax; k <= s.kmax; ++k) {
            double ph = two_pi * k * xs[i];
            ex[std::size_t(i) * S + (k + s.kmax)] = cplx(std::cos(ph), std::sin(ph));
        }
    for (int j = 0; j < ny; ++j)
        for (int k = -s.kmax; k <= s.kmax; ++k) {
            double ph = two_pi * k * ys[j];
            ey[std::size_t(j) * S + (k + s.kmax)] = cplx(std::cos(ph), std::sin(ph));
        }

    // Decomposition blocks keep the parent's kmax around a few live modes, so
    // all-zero k2 rows are the common case; they contribute exact zeros.
    std::vector<int> live;
    for (int k2 = -s.kmax; k2 <= s.kmax; ++k2) {
        const cplx* row = &s.coeff[s.idx(-s.kmax, k2)];
        for (int a = 0; a < S; ++a)
            if (row[a] != cplx(0.0)) {
                live.push_back(k2);
                break;
            }
    }

    // t[r][i] = sum_k1 coeff(k1,live[r]) * ex[i][k1]
    std::vector<cplx> t(live.size() * nx, cplx(0.0));
    for (std::size_t r = 0; r < live.size(); ++r) {
        const cplx* row = &s.coeff[s.idx(-s.kmax, live[r])];
        cplx* trow = &t[r * nx];
        for (int i = 0; i < nx; ++i) {
            const cplx* e = &ex[std::size_t(i) * S];
            cplx acc(0.0);
            for (int a = 0; a < S; ++a) acc += row[a] * e[a];
            trow[i] = acc;
        }
    }
    for (int j = 0; j < ny; ++j) {
        const cplx* e = &ey[std::size_t(j) * S];
        for (int i = 0; i < nx; ++i) {
            cplx acc(0.0);
            for (std::size_t r = 0; r < live.size(); ++r)
                acc += e[live[r] + s.kmax] * t[r * nx + i];
            out[std::size_t(j) * nx + i] = acc.real();
        }
    }
}

GridField2D eval_on_grid(const SpectralField2D& s, const Grid2D& g) {
    std::vector<double> xs(g.nx), ys(g.ny);
    for (int i = 0; i < g.nx; ++i) xs[i] = g.x(i);
    for (int j = 0; j < g.ny; ++j) ys[j] = g.y(j);
    GridField2D f(g);
    eval_on_nodes(s, xs, ys, f.values);
    return f;
}

SpectralField2D derivative_x1(const SpectralField2D& s) {
    SpectralField2D d(s.kmax);
    for (int k2 = -s.kmax; k2 <= s.kmax; ++k2)
        for (int k1 = -s.kmax; k1 <= s.kmax; ++k1)
            d.at(k1, k2) = cplx(0.0, two_pi * k1) * s.at(k1, k2);
    return d;
}

SpectralField2D derivative_x2(const SpectralField2D& s) {
    SpectralField2D d(s.kmax);
    for (int k2 = -s.kmax; k2 <= s.kmax; ++k2)
        for (int k1 = -s.kmax; k1 <= s.kmax; ++k1)
            d.at(k1, k2) = cplx(0.0, two_pi * k2) * s.at(k1, k2);
    return d;
}

VectorField2D velocity_from_stream(const SpectralField2D& psi, const Grid2D& g) {
    require(std::abs(psi.mean()) <= 1e-12 && std::abs(psi.at(0, 0).imag()) <= 1e-12,
            "velocity_from_stream: psi must be mean-zero");
    GridField2D v1 = eval_on_grid(derivative_x2(psi).scaled(-1.0), g);
    GridField2D v2 = eval_on_grid(derivative_x1(psi), g);
    return VectorField2D(std::move(v1), std::move(v2));
}

SpectralProfile1D profile_along_x2(const SpectralField2D& s, double x1) {
    SpectralProfile1D p(s.kmax);
    for (int k2 = -s.kmax; k2 <= s.kmax; ++k2) {
        cplx acc(0.0);
        for (int k1 = -s.kmax; k1 <= s.kmax; ++k1) {
            double ph = two_pi * k1 * x1;
            acc += s.at(k1, k2) * cplx(std::cos(ph), std::sin(ph));
        }
        p.at(k2) = acc;
    }
    return p;
}

SpectralProfile1D profile_along_x1(const SpectralField2D& s, double x2) {
    SpectralProfile1D p(s.kmax);
    for (int k1 = -s.kmax; k1 <= s.kmax; ++k1) {
        cplx acc(0.0);
        for (int k2 = -s.kmax; k2 <= s.kmax; ++k2) {
            double ph = two_pi * k2 * x2;
            acc += s.at(k1, k2) * cplx(std::cos(ph), std::sin(ph));
        }
        p.at(k1) = acc;
    }
    return p;
}

}  // namespace shmm
