#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "casimir/coupling.hpp"
#include "casimir/model.hpp"

// Eigendecomposition of the coupling blocks and everything built on top of
// it: mode spectrum, zero-point energy, force (analytic eigenvalue
// derivative or finite difference), local power-law exponent, and the
// adaptive truncation ladder.

namespace casimir::spectral {

struct BlockModes {
    int m = 0;
    int degeneracy = 1;               // 1 for m = 0, else 2 (m <-> -m)
    std::vector<double> eigenvalues;  // ascending
    std::vector<double> refs;         // rank-paired isolated-sphere values
    // eigenvalue - ref per rank. Computed by shift tracking where the block
    // is diagonally dominant, so it stays relative-accurate even when the
    // shifts sit far below absolute eigensolver roundoff.
    std::vector<double> deltas;
    std::vector<double> vectors;      // column-major; empty unless requested

    int size() const { return static_cast<int>(eigenvalues.size()); }
};

struct ModeSpectrum {
    std::vector<BlockModes> per_m;  // m = 0, 1, ..., m_max_used
    double gap_over_radius = 0.0;
    int l_max_used = 0;
    int m_max_used = 0;
};

// Eigendecompose one block; validates that every eigenvalue lies in (0,1).
BlockModes solve_block(const coupling::CouplingBlock& block, bool want_vectors);

// All blocks m = 0..m_max at fixed l_max (no adaptive dropping here; that
// belongs to converge/energy drivers).
ModeSpectrum solve_spectrum(const model::Geometry& geom,
                            const model::SubstrateContrast& contrast,
                            const model::SolverConfig& cfg);

// Resolvent element of one block at spectral value u:
//   G_ij(u) = sum_s V_is V_js / (n_s - u),
// with simple poles at the proper modes; far from the spectrum it behaves
// as -delta_ij/u. Requires eigenvectors in the block.
double green_function_element(const BlockModes& block, double u, int i, int j,
                              double pole_eps = 1e-9);

struct EnergyResult {
    double energy_reduced = 0.0;          // E-tilde, units hbar*omega_p
    std::vector<double> per_l_partials;   // cumulative sum vs l cutoff
    bool converged = false;
    double est_truncation_error = 0.0;    // absolute, from the l-tail trend
};

// Zero-point mode-shift sum over a spectrum that has already been solved.
EnergyResult zero_point_energy(const ModeSpectrum& spectrum,
                               const model::SolverConfig& cfg);

struct ForceResult {
    double force_reduced = 0.0;  // Fa-tilde, units hbar*omega_p/a
    model::ForceMethod method = model::ForceMethod::hellmann_feynman;
    std::optional<double> hf_fd_discrepancy;
    bool near_degenerate = false;  // eigenvalue gap below 1e-12 seen
    int l_max_used = 0;
    int m_max_used = 0;
};

// Force by the configured method. The analytic path differentiates each
// eigenvalue through the eigenvector quadratic form with dH/d(z/a); the
// finite-difference path re-evaluates the energy at z/a*(1 +- fd_step_rel)
// on the same truncation basis.
ForceResult casimir_force(const model::Geometry& geom,
                          const model::SubstrateContrast& contrast,
                          const model::SolverConfig& cfg);

// beta(z) = -d ln|F| / d ln(z/a) by centered differences; input pairs
// (z/a, F) sorted by z/a, all forces of one sign. Returns interior points.
std::vector<std::pair<double, double>> local_exponent(
    const std::vector<std::pair<double, double>>& sweep);

struct ConvergenceStep {
    int l_max = 0;
    double energy = 0.0;
    double rel_delta = 0.0;  // |E(L) - E(L/2)| / |E(L)|; 0 for the seed row
    int m_max_used = 0;
    double wall_seconds = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceStep> steps;
    EnergyResult energy;
    int l_max_used = 0;
    int m_max_used = 0;
    bool converged = false;
};

// Doubling ladder 4, 8, 16, ... capped at cfg.l_max; converged when the
// last doubling moved the energy by less than energy_rel_tol relatively.
// Azimuthal blocks are dropped once their contribution falls below
// energy_rel_tol/10 and keeps shrinking. Throws ConvergenceError at the cap
// unless throw_on_failure is false.
ConvergenceReport converge(const model::Geometry& geom,
                           const model::SubstrateContrast& contrast,
                           const model::SolverConfig& cfg,
                           bool throw_on_failure = true);

// One energy evaluation at a fixed l_max with the adaptive m-drop of the
// config applied; the workhorse behind converge and the deep-multipole runs.
struct FixedBasisEnergy {
    EnergyResult energy;
    int m_max_used = 0;
};
FixedBasisEnergy energy_at_l_max(const model::Geometry& geom,
                                 const model::SubstrateContrast& contrast,
                                 int l_max, const model::SolverConfig& cfg);

}  // namespace casimir::spectral
