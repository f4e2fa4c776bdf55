#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "casimir/model.hpp"

// Per-m blocks of the dimensionless interaction matrix H. The diagonal
// carries the isolated-sphere eigenvalues l/(2l+1); the coupling between
// multipoles l and l' of the sphere and its image falls off as x^(l+l'+1)
// with a combinatorial prefactor that grows factorially, so entries are
// assembled in log space with an explicit sign.

namespace casimir::coupling {

// Depolarization eigenvalue of the isolated sphere's l-th multipole.
inline double isolated_sphere_eigenvalue(int l) {
    if (l < 1) throw ConfigError("multipole order l must be >= 1");
    return static_cast<double>(l) / (2.0 * l + 1.0);
}

struct LogCoupling {
    double log_magnitude;
    double sign;  // +1 or -1
};

// Geometry- and material-independent part of the coupling between multipole
// orders (l, l') in the azimuthal sector m. The full matrix entry is
// f_c * sign * exp(log_magnitude + (l+l'+1) * ln x). Symmetric in l <-> l',
// even in m.
LogCoupling log_coupling_coefficient(int l, int lp, int m);

// sign * exp(log_magnitude + (l+l'+1) ln x): the coupling entry without the
// contrast factor. The closed-form dipolar model evaluates its modes through
// this same function so the two code paths agree bit for bit.
double coupling_term(int l, int lp, int m, double ln_x);

struct CouplingBlock {
    int m = 0;
    int l_min = 1;
    int l_max = 1;
    double x = 0.0;
    // Isolated-sphere diagonal, index i <-> l = l_min + i (ascending).
    std::vector<double> refs;
    // Full symmetric coupling matrix (contrast folded in), column-major
    // N x N including the diagonal coupling terms; H = diag(refs) + C.
    std::vector<double> coupling;

    int size() const { return l_max - l_min + 1; }

    double coupling_at(int i, int j) const {
        return coupling[static_cast<size_t>(j) * size() + i];
    }

    // Full matrix entry by multipole order.
    double entry(int l, int lp) const {
        const int i = l - l_min, j = lp - l_min;
        double v = coupling_at(i, j);
        if (i == j) v += refs[i];
        return v;
    }

    double max_abs_coupling() const;
    // Smallest spacing between adjacent reference eigenvalues; the ratio
    // max_abs_coupling()/min_ref_gap() measures diagonal dominance.
    double min_ref_gap() const;
};

CouplingBlock build_block(const model::Geometry& geom,
                          const model::SubstrateContrast& contrast,
                          int m, int l_max);

// Debug dump: one "l,l',value" row per entry of the full matrix.
void write_block_csv(const CouplingBlock& block, std::ostream& os);

}  // namespace casimir::coupling
