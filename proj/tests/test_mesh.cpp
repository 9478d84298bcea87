#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "latinfe/decomposition.hpp"

#include <random>

using namespace latinfe;

TEST_CASE("structured laminate meshes") {
  auto m = generate_laminate_mesh(10, 1, {0.1}, 40, 1, 12);
  CHECK(m.nodes.size() == 41u * 2 * 13);
  CHECK(m.elements.size() == 40u * 12);
  CHECK(m.n_plies() == 1);

  auto single = generate_laminate_mesh(1, 1, {1.0}, 1, 1, 1);
  CHECK(single.nodes.size() == 8u);
  CHECK(single.elements.size() == 1u);

  CHECK_THROWS_AS(generate_laminate_mesh(0, 1, {0.1}, 4, 1, 1), InputError);
  CHECK_THROWS_AS(generate_laminate_mesh(1, 1, {0.1}, 0, 1, 1), InputError);
  CHECK_THROWS_AS(
      generate_laminate_mesh(1, 1, {0.1, 0.1}, 4, 1, 1,
                             {CrackSpec{5, 0.2, 0.8}}),
      InputError);  // crack plane not on a ply interface
}

TEST_CASE("crack tagging covers the requested rectangle") {
  auto m = generate_laminate_mesh(
      20, 1, {0.2, 0.2}, 40, 1, 2,
      {CrackSpec{1, 5.0, 15.0, InterfaceBehavior::contact,
                 InterfaceBehavior::cohesive}});
  REQUIRE(m.plane_behavior.size() == 1u);
  int n_contact = 0;
  for (int i = 0; i < m.nx; ++i) {
    double xc = 20.0 * (i + 0.5) / m.nx;
    auto beh = m.plane_behavior[0][i];
    if (xc > 5.0 && xc < 15.0) {
      CHECK(beh == InterfaceBehavior::contact);
      ++n_contact;
    } else {
      CHECK(beh == InterfaceBehavior::cohesive);
    }
  }
  CHECK(n_contact == 20);
}

TEST_CASE("partition counts and audits") {
  // Bending-like plate: 8 axial slices, clamp + tip traction.
  auto m = generate_laminate_mesh(20, 1, {0.2}, 16, 1, 2);
  std::vector<BoundarySpec> bcs = {
      {"xmin", BCKind::dirichlet, {true, true, true}, Vec3::Zero(), 0, ""},
      {"xmax", BCKind::neumann, {false, false, true}, Vec3(0, 0, 1), 0, ""}};
  auto d = Decomposition::build(m, 8, 1, bcs);
  CHECK(d.subs.size() == 8u);
  CHECK(d.n_interior() == 7);
  CHECK(d.n_boundary() == 2);
  std::size_t total = 0;
  for (const auto& s : d.subs) total += s.elems.size();
  CHECK(total == m.elements.size());

  // Two plies, 4 axial slices: every mid-plane interface tagged.
  auto m2 = generate_laminate_mesh(
      20, 1, {0.2, 0.2}, 8, 1, 1,
      {CrackSpec{1, 5.0, 15.0, InterfaceBehavior::contact,
                 InterfaceBehavior::cohesive}});
  auto d2 = Decomposition::build(m2, 4, 1, {});
  CHECK(d2.subs.size() == 8u);
  int n_contact = 0, n_cohesive = 0;
  for (const auto& itf : d2.interfaces) {
    if (itf.axis != 2) continue;
    (itf.behavior == InterfaceBehavior::contact ? n_contact : n_cohesive)++;
  }
  CHECK(n_contact == 2);
  CHECK(n_cohesive == 2);

  // One slice: a single substructure and no interior interfaces.
  auto d3 = Decomposition::build(m, 1, 1, {});
  CHECK(d3.subs.size() == 1u);
  CHECK(d3.n_interior() == 0);

  CHECK_THROWS_AS(Decomposition::build(m, 3, 1, {}), InputError);
}

TEST_CASE("macro basis: orthonormal affine modes, exact affine projection") {
  auto m = generate_laminate_mesh(2, 1, {1.0}, 2, 1, 1);
  auto d = Decomposition::build(m, 2, 1, {});
  REQUIRE(d.n_interior() == 1);
  const auto& itf = d.interfaces[0];
  REQUIRE(itf.basis.n_modes() == 9);

  // First mode is the constant field e1 / sqrt(area).
  double expected = 1.0 / std::sqrt(itf.area);
  for (const auto& v : itf.basis.modes[0]) {
    CHECK(v[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(v[1]) < 1e-14);
    CHECK(std::abs(v[2]) < 1e-14);
  }

  // L2-orthonormality.
  for (int a = 0; a < 9; ++a)
    for (int b = 0; b < 9; ++b) {
      double dot = 0.0;
      for (int g = 0; g < itf.n_gps(); ++g)
        dot += itf.gps[g].w * itf.basis.modes[a][g].dot(itf.basis.modes[b][g]);
      CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-12);
    }

  // A random affine field is reproduced exactly (rank-9 projector), and the
  // projector is idempotent.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> un(-1, 1);
  Mat3 A;
  Vec3 b0, dir1 = itf.A1, dir2 = itf.A2;
  for (int i = 0; i < 3; ++i) {
    b0[i] = un(rng);
    for (int j = 0; j < 3; ++j) A(i, j) = un(rng);
  }
  std::vector<Vec3> f(itf.n_gps());
  for (int g = 0; g < itf.n_gps(); ++g) {
    const Vec3& X = itf.gps[g].X;
    f[g] = b0 + A.col(0) * X.dot(dir1) + A.col(1) * X.dot(dir2);
  }
  VecX c = itf.basis.project(f, itf.gps);
  double err = 0.0, scale = 0.0;
  for (int g = 0; g < itf.n_gps(); ++g) {
    Vec3 rec = Vec3::Zero();
    for (int mo = 0; mo < 9; ++mo) rec += c[mo] * itf.basis.modes[mo][g];
    err = std::max(err, (rec - f[g]).norm());
    scale = std::max(scale, f[g].norm());
  }
  CHECK(err < 1e-12 * scale);
  std::vector<Vec3> pf(itf.n_gps());
  for (int g = 0; g < itf.n_gps(); ++g) {
    pf[g] = Vec3::Zero();
    for (int mo = 0; mo < 9; ++mo) pf[g] += c[mo] * itf.basis.modes[mo][g];
  }
  VecX c2 = itf.basis.project(pf, itf.gps);
  CHECK((c2 - c).norm() < 1e-12 * (c.norm() + 1));
}

TEST_CASE("macro unknown count is nine per interface") {
  auto m = generate_laminate_mesh(10, 1, {0.1}, 16, 2, 2);
  auto d = Decomposition::build(m, 4, 2, {});
  int total = 0;
  for (const auto& itf : d.interfaces) total += itf.basis.n_modes();
  CHECK(total == 9 * static_cast<int>(d.interfaces.size()));
}

TEST_CASE("interface pairing is coincident and boundary facets unique") {
  auto m = generate_laminate_mesh(4, 2, {0.4, 0.4}, 4, 2, 2);
  auto d = Decomposition::build(m, 2, 2, {});
  for (const auto& itf : d.interfaces) {
    for (std::size_t n = 0; n < itf.inodes.size(); ++n) {
      // Both sides address the same global node: reference coordinates match.
      int ga = d.subs[itf.sub_a].nodes[itf.local_a[n]];
      int gb = d.subs[itf.sub_b].nodes[itf.local_b[n]];
      CHECK(ga == itf.inodes[n]);
      CHECK(gb == itf.inodes[n]);
    }
    CHECK(itf.N3.norm() == doctest::Approx(1.0).epsilon(1e-14));
    double wsum = 0.0;
    for (const auto& gp : itf.gps) wsum += gp.w;
    CHECK(wsum == doctest::Approx(itf.area).epsilon(1e-12));
  }
}
