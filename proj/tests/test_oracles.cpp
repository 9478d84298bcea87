#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "latinfe/oracles.hpp"
#include "latinfe/types.hpp"
#include "support/beam_foundation.hpp"

#include <cmath>

using namespace latinfe;

TEST_CASE("euler load of the compressed plate") {
  double p = oracles::euler_load(135000, 1, 0.1, 10);
  CHECK(p == doctest::Approx(4.4413).epsilon(1e-3));
  CHECK(oracles::euler_load(135000, 1, 0.2, 10) == doctest::Approx(8 * p));
  CHECK(oracles::euler_load(135000, 1, 0.1, 20) == doctest::Approx(p / 4));
  CHECK_THROWS_AS(oracles::euler_load(0, 1, 0.1, 10), InputError);
}

TEST_CASE("local and global buckling with a central delamination") {
  auto [pl, pg] = oracles::local_global_buckling(135000, 1, 0.2, 10, 20);
  CHECK(pl == doctest::Approx(71.06).epsilon(1e-3));
  CHECK(pg == doctest::Approx(44.41).epsilon(1e-3));
  // a0 -> L0: the formula collapses to twice the single-ply clamped load.
  auto [pl2, pg2] = oracles::local_global_buckling(135000, 1, 0.2, 20, 20);
  double i0 = 0.2 * 0.2 * 0.2 / 12.0;
  double pi2 = 4 * M_PI * M_PI * 135000 * i0 / 400.0;
  CHECK(pg2 == doctest::Approx(2 * pi2).epsilon(1e-12));
  (void)pl2;
}

TEST_CASE("propagation condition in local buckling") {
  double w = oracles::bruno_propagation(0.4, 1, 71.06, 10);
  CHECK(w == doctest::Approx(0.34).epsilon(0.02));
  CHECK(oracles::bruno_propagation(0, 1, 71.06, 10) == 0.0);
  // Tiny RHS: xi ~ sqrt(rhs/2).
  double gc = 1e-6;
  double rhs = 4 * gc * 1 / (M_PI * M_PI * 71.06);
  double w_small = oracles::bruno_propagation(gc, 1, 71.06, 10);
  CHECK(w_small == doctest::Approx(10 * std::sqrt(rhs / 2)).epsilon(1e-3));
}

TEST_CASE("dcb oracle against the brute-force foundation model") {
  double E = 135000, b = 1, h = 0.25, a0 = 6, kn = 1e5, yc = 0.4;
  CHECK(oracles::dcb_force(E, b, h, a0, kn, yc, 0.0) == 0.0);

  testsupport::BeamFoundation beam{E, b, h, kn, 30.0, 3000};
  double c_closed = oracles::dcb_compliance(E, b, h, a0, kn);
  double c_num = beam.compliance(a0);
  CHECK(c_closed == doctest::Approx(c_num).epsilon(5e-3));

  double p_closed = oracles::dcb_propagation_load(E, b, h, a0, kn, yc);
  double p_num = beam.propagation_load(a0, yc);
  CHECK(p_closed == doctest::Approx(p_num).epsilon(1e-2));

  // Peak of the force-displacement curve is the onset load.
  double d_onset = c_closed * p_closed;
  CHECK(oracles::dcb_force(E, b, h, a0, kn, yc, d_onset) ==
        doctest::Approx(p_closed).epsilon(1e-6));
  CHECK(oracles::dcb_force(E, b, h, a0, kn, yc, 1.5 * d_onset) < p_closed);

  // Stiff-foundation limit: classical built-in cantilever DCB formula.
  double kn_inf = 1e12;
  double I = b * h * h * h / 12.0;
  double p_classic = std::sqrt(b * E * I * yc) / a0;
  CHECK(oracles::dcb_propagation_load(E, b, h, a0, kn_inf, yc) ==
        doctest::Approx(p_classic).epsilon(0.02));
}
