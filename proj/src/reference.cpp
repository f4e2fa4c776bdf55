#include "casimir/reference.hpp"

#include <cmath>

#include "casimir/coupling.hpp"
#include "casimir/spectral.hpp"

namespace casimir::reference {

namespace {

// Isolated l=1 sphere eigenvalue, the zeroth-order mode position.
double dipole_ref() { return coupling::isolated_sphere_eigenvalue(1); }

// Mode shifts of the two dipole sectors: same arithmetic as the 1x1 blocks
// of the full solver, so the numbers agree to the last bit.
void dipole_shifts(const model::Geometry& geom,
                   const model::SubstrateContrast& contrast, double* d_m0,
                   double* d_m1) {
    const double ln_x = std::log(geom.x());
    *d_m0 = contrast.f_c * coupling::coupling_term(1, 1, 0, ln_x);
    *d_m1 = contrast.f_c * coupling::coupling_term(1, 1, 1, ln_x);
}

}  // namespace

DipoleModes dipole_modes(const model::Geometry& geom,
                         const model::SubstrateContrast& contrast) {
    double d0 = 0.0, d1 = 0.0;
    dipole_shifts(geom, contrast, &d0, &d1);
    const double r = dipole_ref();
    DipoleModes out;
    out.n_m1_a = r + d1;
    out.n_m1_b = out.n_m1_a;
    out.n_m0 = r + d0;
    return out;
}

EnergyForce dipole_energy_force(const model::Geometry& geom,
                                const model::SubstrateContrast& contrast) {
    double d0 = 0.0, d1 = 0.0;
    dipole_shifts(geom, contrast, &d0, &d1);
    const double r = dipole_ref();
    const double n0 = r + d0;
    const double n1 = r + d1;
    const double sr = std::sqrt(r);

    EnergyForce out;
    // sqrt(n) - sqrt(r) written as delta / (sqrt(n) + sqrt(r)): no
    // cancellation at large separation. m=0 carries weight 1/2, m=\pm1
    // carries 1.
    out.energy_reduced =
        0.5 * d0 / (std::sqrt(n0) + sr) + d1 / (std::sqrt(n1) + sr);
    const double x = geom.x();
    const double x4 = x * x * x * x;
    out.force_reduced =
        contrast.f_c * x4 * (1.0 / std::sqrt(n0) + 1.0 / std::sqrt(n1));
    return out;
}

EnergyForce quadrupole_energy_force(const model::Geometry& geom,
                                    const model::SubstrateContrast& contrast) {
    model::SolverConfig cfg;
    cfg.l_max = 2;
    cfg.adaptive_truncation = false;
    cfg.force_method = model::ForceMethod::hellmann_feynman;
    cfg.threads = 1;
    EnergyForce out;
    out.energy_reduced =
        spectral::energy_at_l_max(geom, contrast, 2, cfg).energy.energy_reduced;
    out.force_reduced = spectral::casimir_force(geom, contrast, cfg)
                            .force_reduced;
    return out;
}

double proximity_force(const model::Geometry& geom, ProximityRegime regime,
                       double coefficient) {
    if (!(coefficient > 0.0))
        throw ConfigError("proximity coefficient must be positive");
    const double z = geom.gap_over_radius;
    const int p = regime == ProximityRegime::ideal_retarded ? 2 : 3;
    return -coefficient / std::pow(z, p);
}

}  // namespace casimir::reference
