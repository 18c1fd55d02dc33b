// Closed-form shear-flow homogenization and layered-material averaging.
//
// A stream profile varying only in x2 drives a flow along x1 and enhances
// k11 by (1/k22) * integral(psi^2); the x1-varying case mirrors it. Integrals
// are evaluated spectrally (Parseval), exact for band-limited profiles.
#pragma once

#include <utility>

#include "shmm/flowgen.hpp"
#include "shmm/spectral.hpp"
#include "shmm/tensor.hpp"

namespace shmm {

// base with k11 += mean(psi^2)/k22; rejects profiles with |mean| > 1e-10.
DiffTensor2 shear_k11(const SpectralProfile1D& psi_of_x2, const DiffTensor2& base);
// base with k22 += mean(psi^2)/k11.
DiffTensor2 shear_k22(const SpectralProfile1D& psi_of_x1, const DiffTensor2& base);

// Classical laminate formula: harmonic mean of the diagonal entry along the
// layering axis, arithmetic mean of the transverse entry (and of k12).
DiffTensor2 layered_average(const ProfileDiffusivity& profile);

enum class OffDiagTag { fine_k2, fine_k1 };  // fast axis of the component

// Per-line shear homogenization followed by layered averaging across lines.
// fine_k2: vertical-line profiles in x2, lines spaced along x1 (and vice versa).
DiffTensor2 offdiag_effdiff(const SpectralField2D& component, OffDiagTag tag,
                            const DiffTensor2& base, const Rect& domain, double line_spacing);

// Combined effect of the two off-diagonal blocks computed with the same base:
// K12 + K21 - base. Throws if the result is not SPD.
DiffTensor2 offdiag_sum(const DiffTensor2& K12, const DiffTensor2& K21,
                        const DiffTensor2& base);

// Direct vs iterated homogenization of two same-direction (x1-flow) shear
// profiles, which must be L2-orthogonal. Returns {direct, iterated}.
std::pair<DiffTensor2, DiffTensor2> iterated_shear(const SpectralProfile1D& psi1,
                                                   const SpectralProfile1D& psi2,
                                                   const DiffTensor2& base);

}  // namespace shmm
