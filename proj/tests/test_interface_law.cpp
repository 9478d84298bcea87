#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "latinfe/interface_law.hpp"

#include <random>

using namespace latinfe;

namespace {
CohesiveParams params() {
  CohesiveParams p;
  p.k_n0 = p.k_t0 = 1e5;
  p.Yc = 0.4;
  p.alpha = 1.0;
  p.n = 0.5;
  return p;
}

InterfaceFrame identity_frame() {
  return interface_frame(Mat3::Identity(), Vec3::UnitZ(), Vec3::UnitX(),
                         Vec3::UnitY());
}

Mat3 rotation(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}
}  // namespace

TEST_CASE("nanson transport of the reference normal") {
  auto [n1, j1] = deformed_normal(Mat3::Identity(), Vec3::UnitZ());
  CHECK((n1 - Vec3::UnitZ()).norm() < 1e-15);
  CHECK(j1 == doctest::Approx(1.0));

  Mat3 R = rotation(Vec3(1, 1, 0), 0.6);
  auto [n2, j2] = deformed_normal(R, Vec3::UnitZ());
  CHECK((n2 - R * Vec3::UnitZ()).norm() < 1e-14);
  CHECK(j2 == doctest::Approx(1.0).epsilon(1e-14));

  Mat3 F = Vec3(2, 1, 1).asDiagonal();
  auto [n3, j3] = deformed_normal(F, Vec3::UnitZ());
  CHECK((n3 - Vec3::UnitZ()).norm() < 1e-15);
  CHECK(j3 == doctest::Approx(2.0).epsilon(1e-14));

  CHECK_THROWS_AS(deformed_normal(Mat3::Zero(), Vec3::UnitZ()), SolverError);

  InterfaceFrame fr = interface_frame(R, Vec3::UnitZ(), Vec3::UnitX(),
                                      Vec3::UnitY());
  CHECK((fr.Q * fr.Q.transpose() - Mat3::Identity()).norm() < 1e-12);
  CHECK(fr.n3.norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("cohesive traction: basic states") {
  auto p = params();
  auto fr = identity_frame();
  DamageState d0;

  auto [t0, s0] = cohesive_traction(Vec3::Zero(), fr, d0, p);
  CHECK(t0.norm() == 0.0);
  CHECK(s0.d == 0.0);

  DamageState full;
  full.d = 1.0;
  full.Y_max = 1e9;
  auto [t1, s1] = cohesive_traction(Vec3(0, 0, 1e-3), fr, full, p);
  CHECK(t1.norm() == 0.0);  // fully open, fully damaged

  auto [t2, s2] = cohesive_traction(Vec3(0, 0, -1e-3), fr, full, p);
  CHECK(t2[2] == doctest::Approx(-1e-3 * p.k_n0).epsilon(1e-12));
  CHECK(t2[2] < 0.0);  // compression preserved by the contact indicator

  // Identity transport: small-gap tractions follow the small-strain law.
  DamageState half;
  half.d = 0.5;
  half.Y_max = 0.0;
  Vec3 g(1e-6, 0, 2e-6);
  auto [t3, s3] = cohesive_traction(g, fr, half, p);
  CHECK(t3[0] == doctest::Approx(0.5 * p.k_t0 * g[0]).epsilon(1e-9));
  CHECK(t3[2] == doctest::Approx(0.5 * p.k_n0 * g[2]).epsilon(1e-9));
}

TEST_CASE("damage law: dissipation equals Yc, irreversibility, secant") {
  auto p = params();
  auto fr = identity_frame();

  // Monotone mode-I opening to failure: integrate t dg with fine quadrature.
  double gf = std::sqrt(6 * p.Yc / p.k_n0);
  int n = 200000;
  double work = 0.0, t_prev = 0.0, g_prev = 0.0;
  DamageState s;
  for (int i = 1; i <= n; ++i) {
    double g = 1.2 * gf * i / n;
    auto [t, snew] = cohesive_traction(Vec3(0, 0, g), fr, s, p);
    work += 0.5 * (t[2] + t_prev) * (g - g_prev);
    CHECK(snew.d >= s.d);  // irreversibility along the envelope
    s = snew;
    t_prev = t[2];
    g_prev = g;
  }
  CHECK(s.d == doctest::Approx(1.0));
  CHECK(work == doctest::Approx(p.Yc).epsilon(0.01));
  CHECK(s.dissipated == doctest::Approx(p.Yc).epsilon(1e-6));

  // Unloading after partial damage: reloading retraces the secant stiffness.
  DamageState s2;
  auto [tl, sl] = cohesive_traction(Vec3(0, 0, 0.4 * gf), fr, s2, p);
  double d_frozen = sl.d;
  for (double g : {0.3 * gf, 0.1 * gf, 0.25 * gf, 0.39 * gf}) {
    auto [t, snew] = cohesive_traction(Vec3(0, 0, g), fr, sl, p);
    CHECK(snew.d == doctest::Approx(d_frozen).epsilon(1e-12));
    CHECK(t[2] ==
          doctest::Approx((1 - d_frozen) * p.k_n0 * g).epsilon(1e-10));
  }

  // Zero-history gap keeps d = 0.
  DamageState s3 = damage_update(Vec3::Zero(), DamageState{}, p);
  CHECK(s3.d == 0.0);
}

TEST_CASE("frame indifference of the interface law") {
  auto p = params();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> un(-1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    Mat3 H;
    for (int i = 0; i < 9; ++i) H(i / 3, i % 3) = 0.1 * un(rng);
    Mat3 F = Mat3::Identity() + H;
    if (F.determinant() <= 0.1) continue;
    Vec3 gap(1e-3 * un(rng), 1e-3 * un(rng), 1e-3 * un(rng));
    DamageState st;
    st.Y_max = 0.01;
    st.d = 0.2;

    auto fr = interface_frame(F, Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY());
    auto [t, s1] = cohesive_traction(gap, fr, st, p);

    Mat3 R = rotation(Vec3(un(rng), un(rng), un(rng) + 2), 0.8);
    auto frR =
        interface_frame(R * F, Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY());
    auto [tR, s2] = cohesive_traction(R * gap, frR, st, p);

    CHECK((tR - R * t).norm() <= 1e-10 * (t.norm() + 1e-12));
    CHECK(s2.d == doctest::Approx(s1.d).epsilon(1e-10));
    CHECK(s2.Y_max == doctest::Approx(s1.Y_max).epsilon(1e-10));
  }
}

TEST_CASE("contact local solve") {
  Mat3 k = Mat3::Identity() * 5e4;
  Vec3 n = Vec3::UnitZ();

  // Fixed point: open state with positive gap and zero forces.
  SidePair open{Vec3(0, 0, -1e-3), Vec3(0, 0, 1e-3), Vec3::Zero(),
                Vec3::Zero()};
  auto h1 = contact_local_solve(open, k, k, n);
  CHECK((h1.What_a - open.W_a).norm() < 1e-15);
  CHECK((h1.What_b - open.W_b).norm() < 1e-15);
  CHECK(h1.Fhat_a.norm() == 0.0);

  // Symmetric compressive inputs: closed branch, hand-solved scalar system.
  double delta = 1e-3;
  SidePair pen{Vec3(0, 0, delta), Vec3(0, 0, -delta), Vec3::Zero(),
               Vec3::Zero()};
  auto h2 = contact_local_solve(pen, k, k, n);
  double fn = -k(0, 0) * delta;  // gap_open/(2/k)
  CHECK(h2.Fhat_a[2] == doctest::Approx(fn).epsilon(1e-12));
  CHECK((h2.Fhat_a + h2.Fhat_b).norm() < 1e-15);
  CHECK(h2.Fhat_a[0] == 0.0);
  CHECK(h2.Fhat_a[1] == 0.0);
  CHECK(n.dot(h2.What_b - h2.What_a) == doctest::Approx(0.0));

  // k+ -> 0 limit on the open branch with zero forces: What = W.
  Mat3 keps = Mat3::Identity() * 1e-9;
  auto h3 = contact_local_solve(open, keps, keps, n);
  CHECK((h3.What_a - open.W_a).norm() < 1e-12);

  // Property: complementarity and search directions for random inputs.
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> un(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    Mat3 ka = direction_matrix(n, 1e4 * (1.5 + un(rng)), 1e3 * (1.5 + un(rng)));
    Mat3 kb = direction_matrix(n, 1e4 * (1.5 + un(rng)), 1e3 * (1.5 + un(rng)));
    SidePair s{Vec3(un(rng), un(rng), un(rng)) * 1e-3,
               Vec3(un(rng), un(rng), un(rng)) * 1e-3,
               Vec3(un(rng), un(rng), un(rng)) * 10,
               Vec3(un(rng), un(rng), un(rng)) * 10};
    auto h = contact_local_solve(s, ka, kb, n);
    double gap = n.dot(h.What_b - h.What_a);
    double pressure = -n.dot(h.Fhat_a);
    CHECK(gap >= -1e-10 * 1e-3);
    CHECK(pressure >= -1e-10 * 1e4 * 1e-3);
    CHECK(std::abs(gap * pressure) <= 1e-12 * (1 + std::abs(gap * pressure)));
    CHECK((h.Fhat_a + h.Fhat_b).norm() < 1e-12);
    CHECK((h.Fhat_a - s.F_a - ka * (h.What_a - s.W_a)).norm() <
          1e-9 * (1 + s.F_a.norm()));
    CHECK((h.Fhat_b - s.F_b - kb * (h.What_b - s.W_b)).norm() <
          1e-9 * (1 + s.F_b.norm()));
  }
}

TEST_CASE("cohesive local solve: infinite and finite search directions") {
  auto p = params();
  auto fr = identity_frame();
  DamageState d0;

  SidePair zero{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  auto r0 = cohesive_local_solve_infinite(zero, fr, d0, p);
  CHECK(r0.hat.Fhat_a.norm() == 0.0);

  SidePair s{Vec3(1e-4, 0, -2e-4), Vec3(0, 1e-4, 3e-4), Vec3(1, 2, 3),
             Vec3(-1, 0, 2)};
  auto ri = cohesive_local_solve_infinite(s, fr, d0, p);
  CHECK((ri.hat.What_a - s.W_a).norm() == 0.0);
  CHECK((ri.hat.What_b - s.W_b).norm() == 0.0);
  auto [t, ds] = cohesive_traction(s.W_b - s.W_a, fr, d0, p);
  CHECK((ri.hat.Fhat_a - t).norm() < 1e-14 * t.norm());
  CHECK(ri.damage.d == doctest::Approx(ds.d));

  // Consistency limit: the deviation from the infinite mode decays as the
  // combined compliance 2/k+, i.e. 2e-6 relative at k+ = 1e6 k_n0.
  Mat3 kbig = Mat3::Identity() * (1e6 * p.k_n0);
  auto rf = cohesive_local_solve_finite(s, kbig, kbig, fr, d0, p);
  CHECK(rf.converged);
  double err6 = (rf.hat.Fhat_a - ri.hat.Fhat_a).norm() / ri.hat.Fhat_a.norm();
  CHECK(err6 <= 2e-6);
  Mat3 kbigger = Mat3::Identity() * (1e7 * p.k_n0);
  auto rf7 = cohesive_local_solve_finite(s, kbigger, kbigger, fr, d0, p);
  double err7 = (rf7.hat.Fhat_a - ri.hat.Fhat_a).norm() / ri.hat.Fhat_a.norm();
  CHECK(err7 <= 2e-7);
}

TEST_CASE("boundary local solve") {
  Mat3 k = Mat3::Identity() * 54000.0;

  BoundaryCondition dir;
  dir.dirichlet = true;
  dir.value = Vec3(1e-3, 0, 2e-3);
  Vec3 W = dir.value;
  Vec3 F(3, -1, 2);
  auto [w1, f1] = boundary_local_solve(W, F, k, dir);
  CHECK((w1 - dir.value).norm() == 0.0);
  CHECK((f1 - F).norm() < 1e-14 * F.norm());  // already at the target

  BoundaryCondition neu;
  neu.dirichlet = false;
  neu.value = Vec3::Zero();
  auto [w2, f2] = boundary_local_solve(Vec3(1e-3, 2e-3, 0), Vec3::Zero(), k,
                                       neu);
  CHECK((w2 - Vec3(1e-3, 2e-3, 0)).norm() == 0.0);
  CHECK(f2.norm() == 0.0);

  Vec3 delta(1e-4, -2e-4, 5e-5);
  auto [w3, f3] = boundary_local_solve(W, F, k, [&] {
    BoundaryCondition b;
    b.value = W + delta;
    return b;
  }());
  CHECK((f3 - F - k * delta).norm() < 1e-12 * F.norm());

  // Mixed mask: z prescribed, x/y traction-free.
  BoundaryCondition mixed;
  mixed.mask = {false, false, true};
  mixed.value = Vec3(0, 0, 4e-3);
  auto [w4, f4] = boundary_local_solve(Vec3(1e-3, 1e-3, 0), Vec3(2, 3, 1), k,
                                       mixed);
  CHECK(w4[2] == doctest::Approx(4e-3));
  CHECK(f4[0] == 0.0);
  CHECK(f4[1] == 0.0);
  // The free components satisfy the search direction with zero traction.
  Vec3 resid = Vec3(0, 0, f4[2]) - Vec3(2, 3, 1) -
               k * (w4 - Vec3(1e-3, 1e-3, 0));
  CHECK(resid.norm() < 1e-10);
}

TEST_CASE("perfect local solve") {
  Mat3 k = Mat3::Identity() * 54000.0;

  // Fixed point of a converged perfect interface.
  Vec3 w(1e-3, 0, -2e-3), f(5, -2, 1);
  SidePair conv{w, w, f, -f};
  auto h = perfect_local_solve(conv, k, k);
  CHECK((h.What_a - w).norm() < 1e-15);
  CHECK((h.Fhat_a - f).norm() < 1e-12 * f.norm());

  // Jump in W with zero forces: What is the mean on both sides.
  Vec3 d(2e-3, 0, 0);
  SidePair jump{Vec3::Zero(), d, Vec3::Zero(), Vec3::Zero()};
  auto h2 = perfect_local_solve(jump, k, k);
  CHECK((h2.What_a - 0.5 * d).norm() < 1e-15);
  CHECK((h2.What_b - 0.5 * d).norm() < 1e-15);
  CHECK((h2.Fhat_a - k * 0.5 * d).norm() < 1e-12 * (k * d).norm());
  CHECK((h2.Fhat_a + h2.Fhat_b).norm() == 0.0);
}
