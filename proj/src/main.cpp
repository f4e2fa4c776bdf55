#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "casimir/model.hpp"
#include "casimir/oracle.hpp"
#include "casimir/run.hpp"

namespace {

using casimir::ConfigError;

struct CliState {
    casimir::run::RunConfig run;
    double fc = -1.0;
    std::string substrate;
    std::string spacing = "log";
    std::string force_method = "hf";
    std::vector<std::string> curves{"full"};
    std::vector<std::string> formats{"csv", "svg"};
    std::string out_dir = "out";
    double zoa = 1.0;
    double damping = 0.0;
    std::optional<int> dump_block;
    std::uint64_t seed = 12345;
};

void add_common_options(CLI::App* cmd, CliState& st) {
    cmd->add_option("--lmax", st.run.solver.l_max,
                    "multipole truncation cap")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tol", st.run.solver.energy_rel_tol,
                    "relative energy tolerance");
    cmd->add_option("--threads", st.run.solver.threads,
                    "worker threads, 0 = all hardware threads")
        ->check(CLI::NonNegativeNumber);
    auto* fc = cmd->add_option("--fc", st.fc,
                               "substrate contrast f_c in [-1, 1)");
    auto* sub =
        cmd->add_option("--substrate", st.substrate,
                        "substrate preset: perfect_conductor or sapphire")
            ->check(CLI::IsMember({"perfect_conductor", "sapphire"}));
    fc->excludes(sub);
    sub->excludes(fc);
    cmd->add_option("--out", st.out_dir, "output directory");
    cmd->add_option("--formats", st.formats, "outputs to write: csv, svg")
        ->delimiter(',')
        ->check(CLI::IsMember({"csv", "svg"}));
}

void finalize_common(CliState& st) {
    if (!st.substrate.empty()) {
        st.run.contrast =
            st.substrate == "sapphire"
                ? casimir::model::SubstrateContrast::sapphire()
                : casimir::model::SubstrateContrast::perfect_conductor();
    } else {
        st.run.contrast = casimir::model::SubstrateContrast(st.fc);
    }
    st.run.out_dir = st.out_dir;
    st.run.write_csv = false;
    st.run.write_svg = false;
    for (const auto& f : st.formats) {
        if (f == "csv") st.run.write_csv = true;
        if (f == "svg") st.run.write_svg = true;
    }
    st.run.spacing = st.spacing == "linear" ? casimir::run::Spacing::linear
                                            : casimir::run::Spacing::log;
    if (st.force_method == "hf")
        st.run.solver.force_method =
            casimir::model::ForceMethod::hellmann_feynman;
    else if (st.force_method == "fd")
        st.run.solver.force_method =
            casimir::model::ForceMethod::finite_difference;
    else
        st.run.solver.force_method = casimir::model::ForceMethod::both;

    st.run.curves.clear();
    for (const auto& name : st.curves) {
        const auto c = casimir::run::curve_from_name(name);
        bool seen = false;
        for (auto have : st.run.curves) seen = seen || have == c;
        if (!seen) st.run.curves.push_back(c);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Sphere-plane dispersion interaction via the spectral multipole "
        "method. Lengths in sphere radii, energies in hbar*omega_p."};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "read options from a TOML/INI file (flags win)");

    CliState st;

    auto* sweep = app.add_subcommand(
        "sweep", "energy, force and local exponent over a separation grid");
    // Lets --config (held by the top-level app) appear after the
    // subcommand name as well.
    sweep->fallthrough();
    sweep->add_option("--z-min", st.run.z_min, "smallest z/a")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--z-max", st.run.z_max, "largest z/a")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--points", st.run.points, "number of grid points")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--spacing", st.spacing, "grid spacing")
        ->check(CLI::IsMember({"log", "linear"}));
    sweep
        ->add_option("--curves", st.curves,
                     "curves to compute: full, dipole, quadrupole, "
                     "proximity, proximity_ideal")
        ->delimiter(',');
    sweep->add_option("--force-method", st.force_method, "force evaluation")
        ->check(CLI::IsMember({"hf", "fd", "both"}));
    add_common_options(sweep, st);

    auto* conv = app.add_subcommand(
        "converge", "truncation ladder for one separation");
    conv->fallthrough();
    conv->add_option("z_over_a", st.zoa, "separation z/a")->required();
    add_common_options(conv, st);

    auto* modes = app.add_subcommand(
        "modes", "list every proper mode at one separation");
    modes->fallthrough();
    modes->add_option("z_over_a", st.zoa, "separation z/a")->required();
    modes
        ->add_option("--damping", st.damping,
                     "sphere damping ratio 1/(tau*omega_p)")
        ->check(CLI::NonNegativeNumber);
    modes->add_option("--dump-block", st.dump_block,
                      "also dump the interaction matrix of this m sector");
    add_common_options(modes, st);

    auto* oracle = app.add_subcommand(
        "oracle", "differential checks against independent evaluations");
    oracle->fallthrough();
    oracle->add_option("--seed", st.seed, "random draw seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (oracle->parsed()) {
            const auto res = casimir::oracle::run_oracle_suite(st.seed,
                                                               std::cout);
            return res.failures == 0 ? 0 : 4;
        }
        finalize_common(st);
        if (sweep->parsed()) {
            const auto res = casimir::run::run_sweep(st.run, std::cout);
            return res.all_converged ? 0 : 3;
        }
        if (conv->parsed()) {
            const auto res = casimir::run::run_convergence_report(
                st.zoa, st.run, std::cout);
            return res.report.converged ? 0 : 3;
        }
        if (modes->parsed()) {
            const auto res = casimir::run::run_modes(
                st.zoa, st.run, st.damping, st.dump_block, std::cout);
            return res.converged ? 0 : 3;
        }
    } catch (const casimir::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const casimir::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const casimir::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
