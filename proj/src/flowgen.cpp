#include "shmm/flowgen.hpp"

#include <cmath>
#include <random>

#include "json.hpp"

namespace shmm {

SpectralField2D gen_cellular(const std::vector<CellularComponent>& components) {
    int km = 1;
    for (const auto& c : components) {
        require(c.m1 >= 1 && c.m2 >= 1, "gen_cellular: scales must be >= 1");
        km = std::max({km, c.m1, c.m2});
    }
    SpectralField2D s(km);
    // sin(a)sin(b) = (1/2)[cos(a-b) - cos(a+b)] gives four coefficients +-amp/4.
    for (const auto& c : components) {
        double q = 0.25 * c.amplitude;
        s.at(c.m1, c.m2) += cplx(-q, 0.0);
        s.at(-c.m1, -c.m2) += cplx(-q, 0.0);
        s.at(c.m1, -c.m2) += cplx(q, 0.0);
        s.at(-c.m1, c.m2) += cplx(q, 0.0);
    }
    return s;
}

SpectralField2D gen_random_shear(int kmax, std::uint64_t seed, double target_energy) {
    require(kmax >= 1, "gen_random_shear: kmax must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SpectralField2D s(kmax);
    double energy = 0.0;
    for (int k = 1; k <= kmax; ++k) {  // fixed draw order for determinism
        double mag = unit(rng);
        double phase = two_pi * unit(rng);
        cplx c = mag * cplx(std::cos(phase), std::sin(phase));
        s.at(0, k) = c;
        s.at(0, -k) = std::conj(c);
        energy += 2.0 * std::norm(c);
    }
    require(energy > 0.0, "gen_random_shear: degenerate draw");
    double scale = std::sqrt(target_energy / energy);
    for (auto& c : s.coeff) c *= scale;
    return s;
}

SpectralField2D gen_continuous_spectrum(int kmax, double decay, std::uint64_t seed,
                                        double target_energy) {
    require(kmax >= 1, "gen_continuous_spectrum: kmax must be >= 1");
    require(decay > 0.0, "gen_continuous_spectrum: decay must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SpectralField2D s(kmax);
    double energy = 0.0;
    // Half lattice (k2 > 0, plus k2 = 0 with k1 > 0), conjugates mirrored.
    for (int k2 = 0; k2 <= kmax; ++k2)
        for (int k1 = -kmax; k1 <= kmax; ++k1) {
            if (k2 == 0 && k1 <= 0) continue;
            double mag = std::pow(double(k1) * k1 + double(k2) * k2, -0.5 * decay);
            double phase = two_pi * unit(rng);
            cplx c = mag * cplx(std::cos(phase), std::sin(phase));
            s.at(k1, k2) = c;
            s.at(-k1, -k2) = std::conj(c);
            energy += 2.0 * std::norm(c);
        }
    double scale = std::sqrt(target_energy / energy);
    for (auto& c : s.coeff) c *= scale;
    return s;
}

SpectralField2D generate(const StreamSpec& spec) {
    switch (spec.variant) {
        case StreamSpec::Variant::cellular_sum:
            require(!spec.components.empty(), "generate: cellular_sum needs components");
            return gen_cellular(spec.components);
        case StreamSpec::Variant::random_shear:
            return gen_random_shear(spec.kmax, spec.seed, spec.target_energy);
        case StreamSpec::Variant::continuous_spectrum:
            return gen_continuous_spectrum(spec.kmax, spec.decay, spec.seed, spec.target_energy);
    }
    throw InvalidInput("generate: unknown variant");
}

namespace {
const char* variant_name(StreamSpec::Variant v) {
    switch (v) {
        case StreamSpec::Variant::cellular_sum: return "cellular_sum";
        case StreamSpec::Variant::random_shear: return "random_shear";
        case StreamSpec::Variant::continuous_spectrum: return "continuous_spectrum";
    }
    return "?";
}
}  // namespace

std::string StreamSpec::to_json() const {
    nlohmann::json j;
    j["variant"] = variant_name(variant);
    if (variant == Variant::cellular_sum) {
        auto arr = nlohmann::json::array();
        for (const auto& c : components) arr.push_back({c.amplitude, c.m1, c.m2});
        j["components"] = arr;
    } else {
        j["kmax"] = kmax;
        j["target_energy"] = target_energy;
        j["seed"] = seed;
        if (variant == Variant::continuous_spectrum) j["decay"] = decay;
    }
    return j.dump();
}

StreamSpec StreamSpec::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    StreamSpec spec;
    std::string v = j.at("variant").get<std::string>();
    if (v == "cellular_sum")
        spec.variant = Variant::cellular_sum;
    else if (v == "random_shear")
        spec.variant = Variant::random_shear;
    else if (v == "continuous_spectrum")
        spec.variant = Variant::continuous_spectrum;
    else
        throw InvalidInput("StreamSpec: unknown variant " + v);
    if (j.contains("components"))
        for (const auto& row : j["components"]) {
            CellularComponent c;
            c.amplitude = row.at(0).get<double>();
            c.m1 = row.at(1).get<int>();
            c.m2 = row.at(2).get<int>();
            spec.components.push_back(c);
        }
    if (j.contains("kmax")) spec.kmax = j["kmax"].get<int>();
    if (j.contains("decay")) spec.decay = j["decay"].get<double>();
    if (j.contains("target_energy")) spec.target_energy = j["target_energy"].get<double>();
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    return spec;
}

SpectralField2D DecompositionSet::reconstruct() const {
    SpectralField2D sum = residual;
    for (const auto& lv : levels) sum = sum + lv.coarse + lv.fine_k2 + lv.fine_k1;
    return sum;
}

DecompositionSet decompose(const SpectralField2D& psi, int alpha, int max_levels) {
    require(alpha >= 2, "decompose: alpha must be >= 2");
    require(max_levels >= 0, "decompose: max_levels must be >= 0");
    DecompositionSet set;
    set.alpha = alpha;
    set.residual = psi;

    long long t = alpha;
    for (int level = 0; level < max_levels; ++level) {
        const SpectralField2D& r = set.residual;
        LevelComponents lc;
        lc.threshold = int(std::min<long long>(t, psi.kmax + 1));
        lc.coarse = SpectralField2D(psi.kmax);
        lc.fine_k2 = SpectralField2D(psi.kmax);
        lc.fine_k1 = SpectralField2D(psi.kmax);
        lc.fine = SpectralField2D(psi.kmax);
        for (int k2 = -psi.kmax; k2 <= psi.kmax; ++k2)
            for (int k1 = -psi.kmax; k1 <= psi.kmax; ++k1) {
                cplx c = r.at(k1, k2);
                if (c == cplx(0.0)) continue;
                bool lo1 = std::abs(k1) <= t, lo2 = std::abs(k2) <= t;
                if (lo1 && lo2)
                    lc.coarse.at(k1, k2) = c;
                else if (lo1)
                    lc.fine_k2.at(k1, k2) = c;
                else if (lo2)
                    lc.fine_k1.at(k1, k2) = c;
                else
                    lc.fine.at(k1, k2) = c;
            }
        set.residual = lc.fine;
        set.levels.push_back(std::move(lc));

        t *= alpha;
        // Recurse only while the remainder still has scales beyond the next
        // threshold; a terminal block within it is solved directly.
        int deepest = std::max(set.residual.max_nonzero_k1(), set.residual.max_nonzero_k2());
        if (deepest <= t) break;
    }
    return set;
}

GridField2D restrict_to_domain(const SpectralField2D& s, const Rect& domain, const Grid2D& g,
                               bool subtract_mean) {
    require(almost_equal(g.x0, domain.x_lo, 1e-12) && almost_equal(g.y0, domain.y_lo, 1e-12),
            "restrict_to_domain: grid origin must match the domain corner");
    require(almost_equal(g.extent_x(), domain.wx, 1e-12) &&
                almost_equal(g.extent_y(), domain.wy, 1e-12),
            "restrict_to_domain: grid extent must match the domain size");
    require(s.max_nonzero_k1() * g.hx <= 0.5 + 1e-12 && s.max_nonzero_k2() * g.hy <= 0.5 + 1e-12,
            "restrict_to_domain: fewer than 2 grid points per shortest wavelength");
    GridField2D f = eval_on_grid(s, g);
    if (subtract_mean) {
        double m = f.mean();
        for (double& v : f.values) v -= m;
    }
    return f;
}

}  // namespace shmm
