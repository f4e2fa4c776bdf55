#include <cmath>

#include "casimir/reference.hpp"
#include "casimir/spectral.hpp"
#include "doctest.h"

using namespace casimir;
using namespace casimir::reference;
using casimir::model::Geometry;
using casimir::model::SolverConfig;
using casimir::model::SubstrateContrast;

namespace {
const SubstrateContrast kConductor(-1.0);

SolverConfig fixed_cfg(int l_max) {
    SolverConfig cfg;
    cfg.l_max = l_max;
    cfg.adaptive_truncation = false;
    cfg.threads = 1;
    return cfg;
}
}  // namespace

TEST_CASE("dipole modes at z/a = 1 against the conductor") {
    const auto m = dipole_modes(Geometry(1.0), kConductor);
    // 1/3 - (1/3)/64 = 21/64 and 1/3 - (2/3)/64 = 31/96
    CHECK(m.n_m1_a == doctest::Approx(0.328125).epsilon(1e-14));
    CHECK(m.n_m1_b == m.n_m1_a);
    CHECK(m.n_m0 == doctest::Approx(31.0 / 96.0).epsilon(1e-14));
    // the m=0 mode couples twice as strongly and sits lower
    CHECK(m.n_m0 < m.n_m1_a);

    // far away both collapse onto the isolated value
    const auto far = dipole_modes(Geometry(1e4), kConductor);
    CHECK(far.n_m0 == doctest::Approx(1.0 / 3.0).epsilon(1e-11));
    CHECK(far.n_m0 < 1.0 / 3.0);
}

TEST_CASE("dipole energy and force, frozen values") {
    const auto ef = dipole_energy_force(Geometry(1.0), kConductor);
    CHECK(ef.energy_reduced ==
          doctest::Approx(-0.00907465656108665).epsilon(1e-13));
    CHECK(ef.force_reduced ==
          doctest::Approx(-0.013693392586500697).epsilon(1e-13));
}

TEST_CASE("dipole model is the l_max = 1 solver, bit for bit") {
    for (double z : {0.1, 1.0, 7.3, 100.0}) {
        for (double fc : {-1.0, -0.5, 0.4}) {
            const Geometry geom(z);
            const SubstrateContrast contrast(fc);
            const auto ref = dipole_energy_force(geom, contrast);
            const auto sol =
                spectral::energy_at_l_max(geom, contrast, 1, fixed_cfg(1));
            CHECK(ref.energy_reduced == sol.energy.energy_reduced);

            const auto force = spectral::casimir_force(geom, contrast,
                                                       fixed_cfg(1));
            CHECK(force.force_reduced ==
                  doctest::Approx(ref.force_reduced).epsilon(1e-13));
        }
    }
}

TEST_CASE("dipole asymptotics: E -> f_c x^3 / sqrt(3)") {
    const Geometry geom(1000.0);
    const double x3 = std::pow(geom.x(), 3);
    const auto ef = dipole_energy_force(geom, kConductor);
    CHECK(ef.energy_reduced / (-x3) ==
          doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-5));
    // and F a = -dE/d(z/a) ~ 3 E * dln(x)/d(z/a) * ... collapses to the
    // x^4 law: F / (f_c x^4) -> 2 sqrt(3)
    const double x4 = std::pow(geom.x(), 4);
    CHECK(ef.force_reduced / (-x4) ==
          doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-5));
}

TEST_CASE("dipole degeneracy splits with contrast strength") {
    const auto strong = dipole_modes(Geometry(0.5), kConductor);
    const auto weak = dipole_modes(Geometry(0.5), SubstrateContrast(-0.1));
    CHECK(std::abs(weak.n_m0 - weak.n_m1_a) <
          std::abs(strong.n_m0 - strong.n_m1_a));
    // repulsive contrast pushes modes up instead of down
    const auto rep = dipole_modes(Geometry(0.5), SubstrateContrast(0.5));
    CHECK(rep.n_m0 > 1.0 / 3.0);
    CHECK(rep.n_m1_a > 1.0 / 3.0);
}

TEST_CASE("quadrupole model equals the l_max = 2 solver") {
    const Geometry geom(0.8);
    const auto q = quadrupole_energy_force(geom, kConductor);
    const auto sol = spectral::energy_at_l_max(geom, kConductor, 2,
                                               fixed_cfg(2));
    CHECK(q.energy_reduced == sol.energy.energy_reduced);

    // it binds more than the dipole model and less than the full solver
    const auto d = dipole_energy_force(geom, kConductor);
    SolverConfig full;
    full.threads = 1;
    const auto conv = spectral::converge(geom, kConductor, full);
    CHECK(q.energy_reduced < d.energy_reduced);
    CHECK(conv.energy.energy_reduced < q.energy_reduced);
}

TEST_CASE("proximity force power laws") {
    CHECK(proximity_force(Geometry(2.0), ProximityRegime::vdw_nonretarded,
                          5.0) == doctest::Approx(-0.625).epsilon(1e-15));
    CHECK(proximity_force(Geometry(2.0), ProximityRegime::ideal_retarded,
                          5.0) == doctest::Approx(-1.25).epsilon(1e-15));
    CHECK_THROWS_AS(
        proximity_force(Geometry(1.0), ProximityRegime::vdw_nonretarded, 0.0),
        ConfigError);
    CHECK_THROWS_AS(
        proximity_force(Geometry(1.0), ProximityRegime::vdw_nonretarded,
                        -2.0),
        ConfigError);

    // exact local exponents 3 and 2
    for (auto [regime, expect] :
         {std::pair{ProximityRegime::vdw_nonretarded, 3.0},
          std::pair{ProximityRegime::ideal_retarded, 2.0}}) {
        std::vector<std::pair<double, double>> sweep;
        for (int i = 0; i < 5; ++i) {
            const double z = std::pow(2.0, i);
            sweep.emplace_back(z, proximity_force(Geometry(z), regime, 1.0));
        }
        for (const auto& [z, beta] : spectral::local_exponent(sweep))
            CHECK(beta == doctest::Approx(expect).epsilon(1e-12));
    }
}
