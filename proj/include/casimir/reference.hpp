#pragma once

// Closed-form and low-order reference models: the dipolar limit, the
// quadrupolar truncation, and the proximity-theorem power laws. These give
// independent numbers the full solver is checked against.

#include <string>
#include <vector>

#include "casimir/model.hpp"

namespace casimir::reference {

// The three l=1 proper modes at a given separation, in the order
// (m=1 pair member, m=1 pair member, m=0). The m=1 value appears twice
// because that sector is doubly degenerate.
struct DipoleModes {
    double n_m1_a = 0.0;
    double n_m1_b = 0.0;
    double n_m0 = 0.0;
};

DipoleModes dipole_modes(const model::Geometry& geom,
                         const model::SubstrateContrast& contrast);

struct EnergyForce {
    double energy_reduced = 0.0;
    double force_reduced = 0.0;
};

// Closed-form energy and force keeping only the l=1 sector.
EnergyForce dipole_energy_force(const model::Geometry& geom,
                                const model::SubstrateContrast& contrast);

// Energy and force from the full machinery truncated at l_max=2 (all m).
EnergyForce quadrupole_energy_force(const model::Geometry& geom,
                                    const model::SubstrateContrast& contrast);

enum class ProximityRegime {
    ideal_retarded,      // force ~ -C / (z/a)^2
    vdw_nonretarded,     // force ~ -C / (z/a)^3
};

// Proximity-theorem force at the given separation. The coefficient must be
// positive; only the exponent is meaningful for comparisons here.
double proximity_force(const model::Geometry& geom, ProximityRegime regime,
                       double coefficient);

struct ComparisonCurve {
    std::string label;
    std::vector<double> z_over_a;
    std::vector<double> force_reduced;
};

}  // namespace casimir::reference
