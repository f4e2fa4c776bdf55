#pragma once

// Sweep orchestration and file output: separation grids, the comparison
// curves (full solver vs the low-order and proximity models), CSV and SVG
// writers, convergence and mode-listing reports. The CLI is a thin shell
// over this.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "casimir/model.hpp"
#include "casimir/spectral.hpp"

namespace casimir::run {

enum class Curve { full, dipole, quadrupole, proximity_vdw, proximity_ideal };
enum class Spacing { log, linear };

std::string curve_name(Curve c);
Curve curve_from_name(const std::string& name);  // throws ConfigError

struct RunConfig {
    double z_min = 0.1;
    double z_max = 100.0;
    int points = 50;
    Spacing spacing = Spacing::log;
    model::SubstrateContrast contrast{-1.0};
    model::SolverConfig solver;
    std::vector<Curve> curves{Curve::full};
    std::filesystem::path out_dir = "out";
    bool write_csv = true;
    bool write_svg = true;
    // Scale of the proximity curves; recalibrated against the full curve
    // at the smallest separation when both are in the run.
    double proximity_coefficient = 1.0;

    void validate() const;
};

struct SweepRow {
    double z_over_a = 0.0;
    std::optional<double> energy_reduced;  // empty for proximity curves
    double force_reduced = 0.0;
    std::optional<double> beta;  // local exponent, empty at the ends
    int l_max_used = 0;
    bool converged = true;
};

struct SweepCurve {
    Curve curve = Curve::full;
    std::string label;
    std::vector<SweepRow> rows;
};

struct SweepResult {
    std::vector<SweepCurve> curves;
    bool all_converged = true;
    std::vector<std::filesystem::path> files_written;
};

SweepResult run_sweep(const RunConfig& cfg, std::ostream& log);

struct ConvergenceRunResult {
    spectral::ConvergenceReport report;
    std::vector<std::filesystem::path> files_written;
};

ConvergenceRunResult run_convergence_report(double z_over_a,
                                            const RunConfig& cfg,
                                            std::ostream& log);

struct ModesRunResult {
    spectral::ModeSpectrum spectrum;
    bool converged = true;
    std::vector<std::filesystem::path> files_written;
};

// Lists every proper mode at one separation (modes.csv) with the complex
// mode frequency for the given damping ratio; optionally dumps one sector's
// interaction matrix.
ModesRunResult run_modes(double z_over_a, const RunConfig& cfg,
                         double damping_ratio, std::optional<int> dump_block_m,
                         std::ostream& log);

}  // namespace casimir::run
