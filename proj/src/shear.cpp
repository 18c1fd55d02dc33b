#include "shmm/shear.hpp"

#include <cmath>

namespace shmm {

namespace {

void check_mean_zero(const SpectralProfile1D& p, const char* who) {
    require(std::abs(p.at(0)) <= 1e-10,
            std::string(who) + ": profile mean exceeds 1e-10 tolerance");
}

}  // namespace

DiffTensor2 shear_k11(const SpectralProfile1D& psi_of_x2, const DiffTensor2& base) {
    check_mean_zero(psi_of_x2, "shear_k11");
    require(base.is_spd(), "shear_k11: base must be SPD");
    return {base.k11 + psi_of_x2.energy() / base.k22, base.k12, base.k22};
}

DiffTensor2 shear_k22(const SpectralProfile1D& psi_of_x1, const DiffTensor2& base) {
    check_mean_zero(psi_of_x1, "shear_k22");
    require(base.is_spd(), "shear_k22: base must be SPD");
    return {base.k11, base.k12, base.k22 + psi_of_x1.energy() / base.k11};
}

DiffTensor2 layered_average(const ProfileDiffusivity& profile) {
    require(!profile.samples.empty(), "layered_average: empty profile");
    require(profile.axis == 0 || profile.axis == 1, "layered_average: axis must be 0 or 1");
    double inv_along = 0.0, arith_across = 0.0, arith_k12 = 0.0;
    for (const auto& t : profile.samples) {
        require(t.is_spd(), "layered_average: non-SPD sample");
        double along = profile.axis == 0 ? t.k11 : t.k22;
        double across = profile.axis == 0 ? t.k22 : t.k11;
        inv_along += 1.0 / along;
        arith_across += across;
        arith_k12 += t.k12;
    }
    double n = double(profile.samples.size());
    double along = n / inv_along;
    double across = arith_across / n;
    double k12 = arith_k12 / n;
    return profile.axis == 0 ? DiffTensor2{along, k12, across} : DiffTensor2{across, k12, along};
}

namespace {

// Evaluate a periodic unit-interval profile at x and collect n uniform samples
// over [lo, lo + w) with the segment mean removed.
std::vector<double> segment_samples(const SpectralProfile1D& p, double lo, double w, int n) {
    std::vector<double> v(n);
    double mean = 0.0;
    for (int m = 0; m < n; ++m) {
        double x = lo + w * m / double(n);
        cplx acc(0.0);
        for (int k = -p.kmax; k <= p.kmax; ++k) {
            double ph = two_pi * k * x;
            acc += p.at(k) * cplx(std::cos(ph), std::sin(ph));
        }
        v[m] = acc.real();
        mean += v[m];
    }
    mean /= n;
    for (double& e : v) e -= mean;
    return v;
}

}  // namespace

DiffTensor2 offdiag_effdiff(const SpectralField2D& component, OffDiagTag tag,
                            const DiffTensor2& base, const Rect& domain, double line_spacing) {
    if (component.is_zero()) return base;
    require(line_spacing > 0.0, "offdiag_effdiff: line spacing must be positive");

    const bool fast_x2 = tag == OffDiagTag::fine_k2;
    const double span = fast_x2 ? domain.wx : domain.wy;   // distance covered by lines
    const double width = fast_x2 ? domain.wy : domain.wx;  // length of each line
    const int n_lines = int(std::lround(span / line_spacing));
    require(n_lines >= 1 && almost_equal(n_lines * line_spacing, span, 1e-9),
            "offdiag_effdiff: line spacing must tile the domain");

    // Sample count per line: odd, and comfortably above 4 points per shortest
    // wavelength of the fast direction.
    int kfast = fast_x2 ? component.max_nonzero_k2() : component.max_nonzero_k1();
    int half = std::max(64, int(std::ceil(2.0 * kfast * width)) + 2);
    int n_samp = 2 * half + 1;

    ProfileDiffusivity prof;
    prof.axis = fast_x2 ? 0 : 1;
    prof.spacing = line_spacing;
    prof.samples.reserve(n_lines);
    for (int m = 0; m < n_lines; ++m) {
        if (fast_x2) {
            double x1 = domain.x_lo + m * line_spacing;
            auto p = profile_along_x2(component, x1);
            auto v = segment_samples(p, domain.y_lo, width, n_samp);
            prof.samples.push_back(shear_k11(SpectralProfile1D::from_samples(v, half), base));
        } else {
            double x2 = domain.y_lo + m * line_spacing;
            auto p = profile_along_x1(component, x2);
            auto v = segment_samples(p, domain.x_lo, width, n_samp);
            prof.samples.push_back(shear_k22(SpectralProfile1D::from_samples(v, half), base));
        }
    }
    return layered_average(prof);
}

DiffTensor2 offdiag_sum(const DiffTensor2& K12, const DiffTensor2& K21, const DiffTensor2& base) {
    DiffTensor2 r = K12 + K21 - base;
    require_solved(r.is_spd(), "offdiag_sum: combined tensor is not SPD (" + r.csv() + ")");
    return r;
}

std::pair<DiffTensor2, DiffTensor2> iterated_shear(const SpectralProfile1D& psi1,
                                                   const SpectralProfile1D& psi2,
                                                   const DiffTensor2& base) {
    double ip = SpectralProfile1D::inner(psi1, psi2);
    require(std::abs(ip) <= 1e-10,
            "iterated_shear: profiles not L2-orthogonal (inner product " + fmt_g17(ip) + ")");
    DiffTensor2 direct = shear_k11(psi1 + psi2, base);
    DiffTensor2 iterated = shear_k11(psi1, shear_k11(psi2, base));
    return {direct, iterated};
}

}  // namespace shmm
