#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <thread>

// Domain types for the sphere-substrate problem. Everything downstream works
// in the reduced system: lengths in units of the sphere radius a, energies in
// units of hbar*omega_p, forces in units of hbar*omega_p/a. The only physical
// inputs are the gap ratio z/a and the substrate contrast f_c.

namespace casimir {

// Invalid user input (bad flags, bad config values). CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adaptive truncation hit its cap without meeting tolerance. CLI exit code 3.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Eigensolver failure or unphysical result (eigenvalue outside (0,1)).
// CLI exit code 4.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace model {

struct Geometry {
    double gap_over_radius;  // z/a

    explicit Geometry(double zoa) : gap_over_radius(zoa) {
        if (!(zoa > 0.0))
            throw ConfigError("gap_over_radius must be positive, got " +
                              std::to_string(zoa));
    }

    // x = a/(2(z+a)), the ratio of sphere radius to the distance between the
    // sphere center and the center of its image; every coupling entry scales
    // as a power of x. Always in (0, 1/2).
    double x() const { return 1.0 / (2.0 * (1.0 + gap_over_radius)); }

    // d ln x / d(z/a) = -1/(1 + z/a) = -2x; used by the analytic force path.
    double dlnx_dzeta() const { return -1.0 / (1.0 + gap_over_radius); }
};

struct SubstrateContrast {
    double f_c;  // (1 - eps_p)/(1 + eps_p); -1 for a perfect conductor

    explicit SubstrateContrast(double fc) : f_c(fc) {
        if (!(fc >= -1.0 && fc < 1.0))
            throw ConfigError("contrast f_c must lie in [-1, 1), got " +
                              std::to_string(fc));
    }

    static SubstrateContrast from_epsilon(double eps_p) {
        return SubstrateContrast((1.0 - eps_p) / (1.0 + eps_p));
    }

    static SubstrateContrast perfect_conductor() {
        return SubstrateContrast(-1.0);
    }

    // Static-permittivity placeholder (eps ~ 9.4); the source figure's actual
    // sapphire value is not recoverable, so this preset is documented as
    // configurable rather than ground truth.
    static SubstrateContrast sapphire() { return from_epsilon(9.4); }
};

struct DrudeSphere {
    double plasma_frequency_relative = 1.0;  // omega_p; outputs are reduced by it
    double damping_ratio = 0.0;              // 1/(tau * omega_p)

    DrudeSphere(double omega_p = 1.0, double gamma = 0.0)
        : plasma_frequency_relative(omega_p), damping_ratio(gamma) {
        if (!(omega_p > 0.0))
            throw ConfigError("plasma frequency must be positive");
        if (!(gamma >= 0.0))
            throw ConfigError("damping ratio must be nonnegative");
    }
};

enum class ForceMethod { hellmann_feynman, finite_difference, both };

struct SolverConfig {
    int l_max = 1024;             // truncation order, or cap when adaptive
    int m_max = -1;               // -1 means "all m up to l_max"
    double energy_rel_tol = 1e-6;
    bool adaptive_truncation = true;
    ForceMethod force_method = ForceMethod::hellmann_feynman;
    double fd_step_rel = 1e-4;
    int threads = 0;              // 0 means hardware concurrency

    void validate() const {
        if (l_max < 1) throw ConfigError("l_max must be >= 1");
        if (m_max > l_max)
            throw ConfigError("m_max must not exceed l_max");
        if (!(energy_rel_tol > 0.0))
            throw ConfigError("energy_rel_tol must be positive");
        if (!(fd_step_rel > 0.0))
            throw ConfigError("fd_step_rel must be positive");
        if (threads < 0) throw ConfigError("threads must be >= 0");
    }

    int effective_m_max() const { return m_max < 0 ? l_max : m_max; }

    int effective_threads() const {
        if (threads > 0) return threads;
        unsigned hc = std::thread::hardware_concurrency();
        return hc ? static_cast<int>(hc) : 1;
    }
};

// u(omega) = omega(omega + i/tau)/omega_p^2, the spectral variable whose
// real resonance values are the eigenvalues n_s.
inline std::complex<double> spectral_variable_of_frequency(
    const DrudeSphere& sphere, std::complex<double> omega) {
    const double wp = sphere.plasma_frequency_relative;
    const std::complex<double> inv_tau(0.0, sphere.damping_ratio * wp);
    return omega * (omega + inv_tau) / (wp * wp);
}

// omega_s = -i/(2 tau) + sqrt((i/(2 tau))^2 + omega_p^2 n_s). Lossless
// spheres give omega_p sqrt(n_s); damping adds a decaying imaginary part.
inline std::complex<double> mode_frequency_of_eigenvalue(
    const DrudeSphere& sphere, double n_s) {
    if (!(n_s > 0.0 && n_s < 1.0))
        throw NumericalError("mode eigenvalue outside (0,1): " +
                             std::to_string(n_s));
    const double wp = sphere.plasma_frequency_relative;
    const double half_gamma = 0.5 * sphere.damping_ratio;  // 1/(2 tau wp)
    const std::complex<double> radicand(n_s - half_gamma * half_gamma, 0.0);
    return wp * (std::sqrt(radicand) - std::complex<double>(0.0, half_gamma));
}

// The zero-point sum uses the lossless branch of the mode frequencies; it is
// a good approximation only while 1/(tau omega_p) stays small.
inline bool damping_invalidates_energy(const DrudeSphere& sphere) {
    return sphere.damping_ratio > 0.01;
}

}  // namespace model
}  // namespace casimir
