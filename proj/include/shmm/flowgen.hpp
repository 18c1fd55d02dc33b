// Stream-function generators and the per-axis Fourier scale decomposition.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shmm/grid.hpp"
#include "shmm/spectral.hpp"

namespace shmm {

// One product-of-sines vortex lattice term: amp * sin(2*pi*m1*x1) * sin(2*pi*m2*x2).
struct CellularComponent {
    double amplitude = 0.0;
    int m1 = 1, m2 = 1;
};

struct StreamSpec {
    enum class Variant { cellular_sum, random_shear, continuous_spectrum };

    Variant variant = Variant::cellular_sum;
    std::vector<CellularComponent> components;  // cellular_sum
    int kmax = 50;                              // random_shear / continuous_spectrum
    double decay = 3.0;                         // continuous_spectrum magnitude exponent
    double target_energy = 2.0;                 // sum |coeff|^2 after scaling
    std::uint64_t seed = 1;

    std::string to_json() const;
    static StreamSpec from_json(const std::string& text);
};

SpectralField2D gen_cellular(const std::vector<CellularComponent>& components);

// Profile in x2 only (modes on the k2 axis, 1 <= |k2| <= kmax); coefficient
// magnitudes drawn uniform then scaled so the total energy hits the target.
SpectralField2D gen_random_shear(int kmax, std::uint64_t seed, double target_energy = 2.0);

// Isotropic magnitude law |coeff(k)| = c * |k|^(-decay) for 1 <= |k| <= kmax
// with independent uniform phases, scaled to the target energy.
SpectralField2D gen_continuous_spectrum(int kmax, double decay, std::uint64_t seed,
                                        double target_energy = 2.0);

SpectralField2D generate(const StreamSpec& spec);

// Four spectral blocks split at a per-axis threshold t:
//   coarse  : |k1| <= t and |k2| <= t
//   fine_k2 : |k1| <= t <  |k2|      (fast variation in x2 only)
//   fine_k1 : |k2| <= t <  |k1|      (fast variation in x1 only)
//   fine    : |k1| >  t and |k2| > t
struct LevelComponents {
    int threshold = 0;
    SpectralField2D coarse, fine_k2, fine_k1, fine;
};

struct DecompositionSet {
    int alpha = 2;
    std::vector<LevelComponents> levels;  // level l split at threshold alpha^(l+1)
    SpectralField2D residual;  // unsplit remainder; == levels.back().fine when levels exist

    // coarse + fine_k2 + fine_k1 summed over levels, plus the residual;
    // equals the decomposed field coefficient-wise.
    SpectralField2D reconstruct() const;
};

// Split psi at thresholds alpha, alpha^2, ... The fine block of level l is
// split again at alpha^(l+2) while it still carries wavenumbers above that
// threshold and fewer than max_levels splits have happened. max_levels = 0
// leaves psi whole in the residual.
DecompositionSet decompose(const SpectralField2D& psi, int alpha, int max_levels);

// Axis-aligned rectangle (local domains are squares; kept general).
struct Rect {
    double x_lo = 0.0, y_lo = 0.0;
    double wx = 1.0, wy = 1.0;
};

// Evaluate the global spectral sum on a local grid covering the rectangle.
// subtract_mean removes the local spatial mean (the shear formulas and the
// constrained micro solves assume mean-zero stream data).
GridField2D restrict_to_domain(const SpectralField2D& s, const Rect& domain,
                               const Grid2D& g, bool subtract_mean = true);

}  // namespace shmm
