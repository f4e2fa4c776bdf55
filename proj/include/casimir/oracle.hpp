#pragma once

// Independent cross-checks of the solver. Everything here recomputes its
// answer along a different route: exact rational arithmetic for the
// coefficients, 50-digit floats for matrix entries and spectra, and power
// iteration for the dominant mode. Slow and simple on purpose.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "casimir/model.hpp"

namespace casimir::oracle {

struct OracleReport {
    std::string case_id;
    double expected = 0.0;  // oracle value
    double got = 0.0;       // production value
    double rel_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

// Signed coupling coefficient from its exact rational square, evaluated in
// 50-digit floats and rounded once. No logs, no factorial tables.
double coupling_coefficient_exact(int l, int lp, int m);

// Full interaction matrix of one azimuthal sector, built and (optionally)
// diagonalized entirely in 50-digit floats, rounded to double at the end.
// Capped at l_max <= 6; cost grows too fast beyond that to stay an oracle.
struct HighPrecisionBlock {
    int m = 0;
    int l_min = 1;
    int l_max = 1;
    std::vector<double> entries;      // column-major, diagonal includes refs
    std::vector<double> refs;
    std::vector<double> eigenvalues;  // ascending
    std::vector<double> deltas;       // eigenvalue - ref, rank paired
    int size() const { return l_max - l_min + 1; }
};
HighPrecisionBlock brute_force_block(const model::Geometry& geom,
                                     const model::SubstrateContrast& contrast,
                                     int m, int l_max);

// Dominant (largest magnitude) eigenvalue of a dense symmetric matrix by
// plain power iteration with a Rayleigh-quotient stop. Throws
// NumericalError if the iteration cap is hit first.
double power_iteration(const std::vector<double>& a, int n,
                       double rel_tol = 1e-10, int max_iterations = 100000);

struct OracleSuiteResult {
    std::vector<OracleReport> reports;
    int failures = 0;
};

// Runs the whole differential suite (coefficients, random matrix entries,
// low-order spectra, dominant modes at l_max=32) against the production
// code, printing one OK/MISMATCH line per case.
OracleSuiteResult run_oracle_suite(std::uint64_t seed, std::ostream& os);

}  // namespace casimir::oracle
