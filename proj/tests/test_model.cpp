#include <cmath>
#include <complex>

#include "casimir/model.hpp"
#include "doctest.h"

using namespace casimir;
using namespace casimir::model;

TEST_CASE("geometry validates and maps to the image-distance ratio") {
    CHECK_THROWS_AS(Geometry(0.0), ConfigError);
    CHECK_THROWS_AS(Geometry(-2.0), ConfigError);

    const Geometry g(1.0);
    CHECK(g.x() == doctest::Approx(0.25).epsilon(1e-15));

    // x stays inside (0, 1/2) over the whole physical range
    for (double z : {1e-6, 0.05, 1.0, 100.0, 1e8}) {
        const double x = Geometry(z).x();
        CHECK(x > 0.0);
        CHECK(x < 0.5);
    }

    // d ln x / d zeta against a centered difference
    const double h = 1e-6;
    const double fd =
        (std::log(Geometry(1.0 + h).x()) - std::log(Geometry(1.0 - h).x())) /
        (2.0 * h);
    CHECK(g.dlnx_dzeta() == doctest::Approx(fd).epsilon(1e-9));
}

TEST_CASE("substrate contrast range and presets") {
    CHECK_THROWS_AS(SubstrateContrast(1.0), ConfigError);
    CHECK_THROWS_AS(SubstrateContrast(-1.01), ConfigError);
    CHECK(SubstrateContrast(-1.0).f_c == -1.0);

    CHECK(SubstrateContrast::from_epsilon(1.0).f_c == 0.0);
    CHECK(SubstrateContrast::perfect_conductor().f_c == -1.0);
    CHECK(SubstrateContrast::sapphire().f_c ==
          doctest::Approx((1.0 - 9.4) / (1.0 + 9.4)).epsilon(1e-15));
    // large permittivity approaches the conductor limit from above
    CHECK(SubstrateContrast::from_epsilon(1e6).f_c ==
          doctest::Approx(-1.0).epsilon(1e-5));
}

TEST_CASE("drude sphere spectral variable and mode frequencies") {
    CHECK_THROWS_AS(DrudeSphere(0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(DrudeSphere(1.0, -0.1), ConfigError);

    const DrudeSphere lossless;
    // u(omega) = omega^2 for a lossless sphere in reduced units
    const auto u = spectral_variable_of_frequency(lossless, {0.6, 0.0});
    CHECK(u.real() == doctest::Approx(0.36).epsilon(1e-15));
    CHECK(u.imag() == 0.0);

    // mode frequency is the inverse map: u(omega(n)) == n
    for (double gamma : {0.0, 0.005, 0.05}) {
        const DrudeSphere sphere(1.0, gamma);
        for (double n : {0.1, 1.0 / 3.0, 0.49}) {
            const auto omega = mode_frequency_of_eigenvalue(sphere, n);
            const auto back = spectral_variable_of_frequency(sphere, omega);
            CHECK(back.real() == doctest::Approx(n).epsilon(1e-12));
            CHECK(std::abs(back.imag()) < 1e-12);
            CHECK(omega.imag() == doctest::Approx(-gamma / 2).epsilon(1e-12));
        }
    }
    CHECK(mode_frequency_of_eigenvalue(lossless, 0.25).real() ==
          doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(mode_frequency_of_eigenvalue(lossless, 1.5),
                    NumericalError);
    CHECK_THROWS_AS(mode_frequency_of_eigenvalue(lossless, -0.1),
                    NumericalError);

    CHECK_FALSE(damping_invalidates_energy(DrudeSphere(1.0, 0.005)));
    CHECK(damping_invalidates_energy(DrudeSphere(1.0, 0.05)));
}

TEST_CASE("solver config validation") {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());

    SolverConfig bad = cfg;
    bad.l_max = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = cfg;
    bad.m_max = cfg.l_max + 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = cfg;
    bad.energy_rel_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = cfg;
    bad.fd_step_rel = -1e-4;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    CHECK(cfg.effective_m_max() == cfg.l_max);
    cfg.m_max = 3;
    CHECK(cfg.effective_m_max() == 3);
    cfg.threads = 2;
    CHECK(cfg.effective_threads() == 2);
    cfg.threads = 0;
    CHECK(cfg.effective_threads() >= 1);
}
