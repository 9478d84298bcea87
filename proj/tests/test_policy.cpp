#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "latinfe/search_directions.hpp"

using namespace latinfe;

namespace {
// Plate of length 20 cut into 8 axial slices: vertical interfaces have
// L_Gamma = 2.5 mm (the substructure depth along the interface normal).
Decomposition bending_decomp(const ReferenceMesh& m) {
  return Decomposition::build(m, 8, 1, {});
}
}  // namespace

TEST_CASE("baseline search directions: E over L_Gamma") {
  auto m = generate_laminate_mesh(20, 1, {0.2}, 16, 1, 2);
  auto d = bending_decomp(m);
  const auto& itf = d.interfaces[0];
  CHECK(itf.L_char == doctest::Approx(2.5));
  auto dirs = baseline(itf, 135000.0);
  CHECK(dirs.k_ref == doctest::Approx(54000.0).epsilon(1e-12));
  for (const auto& k : dirs.k_minus) {
    CHECK((k - Mat3::Identity() * 54000.0).norm() < 1e-9);
    Eigen::SelfAdjointEigenSolver<Mat3> es(k);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
  // Baseline keeps k-M equal to k-m (no continuity flag).
  CHECK_FALSE(dirs.macro_continuity);
}

TEST_CASE("anisotropic micro direction: slenderness-squared ratio") {
  auto m = generate_laminate_mesh(20, 1, {0.2}, 16, 1, 2);
  auto d = bending_decomp(m);
  const auto& itf = d.interfaces[0];
  auto dirs = baseline(itf, 135000.0);

  anisotropic_micro(dirs, itf, 100.0);
  const Mat3& k = dirs.k_minus[0];
  double kn = itf.N3.dot(k * itf.N3);
  Vec3 t = itf.A1;
  double kt = t.dot(k * t);
  CHECK(kn == doctest::Approx(54000.0).epsilon(1e-12));
  CHECK(kn / kt == doctest::Approx(1e4).epsilon(1e-12));
  Eigen::SelfAdjointEigenSolver<Mat3> es(k);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  CHECK(es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff() ==
        doctest::Approx(1e4).epsilon(1e-9));

  // Slenderness 1 is the identity policy.
  auto dirs2 = baseline(itf, 135000.0);
  anisotropic_micro(dirs2, itf, 1.0);
  CHECK((dirs2.k_minus[0] - Mat3::Identity() * 54000.0).norm() < 1e-9);

  CHECK_THROWS_AS(anisotropic_micro(dirs2, itf, 0.5), InputError);
}

TEST_CASE("unified contact value and status updates") {
  // Ply-plane interfaces with L_Gamma = 2.5 need 2.5 mm thick plies.
  auto m = generate_laminate_mesh(
      20, 1, {2.5, 2.5}, 8, 1, 1,
      {CrackSpec{1, 0.0, 20.0, InterfaceBehavior::contact,
                 InterfaceBehavior::perfect}});
  auto d = Decomposition::build(m, 2, 1, {});
  int contact_id = -1;
  for (const auto& itf : d.interfaces)
    if (itf.behavior == InterfaceBehavior::contact) contact_id = itf.id;
  REQUIRE(contact_id >= 0);
  CHECK(d.interfaces[contact_id].L_char == doctest::Approx(2.5));

  PolicyConfig cfg;
  cfg.slenderness = 100.0;
  cfg.contact_mode = ContactMode::unified;
  std::vector<double> es(d.interfaces.size(), 135000.0);
  PolicyEngine engine(cfg, d, es);
  const auto& dirs = engine.directions()[contact_id];
  CHECK(dirs.k_minus[0](0, 0) == doctest::Approx(5.4).epsilon(1e-12));
  CHECK(dirs.k_plus[0](0, 0) == doctest::Approx(5.4).epsilon(1e-12));

  // Status mode: wrong closed guess, then an all-open classification at the
  // cadence drops k to the near-zero guard on both stages.
  PolicyConfig cfg2 = cfg;
  cfg2.contact_mode = ContactMode::status_update;
  cfg2.contact_guess = ContactGuess::closed;
  PolicyEngine eng2(cfg2, d, es);
  double k_ref = eng2.directions()[contact_id].k_ref;
  CHECK(eng2.directions()[contact_id].k_minus[0](0, 0) ==
        doctest::Approx(k_ref));

  std::vector<std::vector<double>> gaps(d.interfaces.size());
  std::vector<std::vector<DamageState>> dmg(d.interfaces.size());
  for (const auto& itf : d.interfaces)
    gaps[itf.id].assign(itf.n_gps(), 1e-3);  // everything open

  std::size_t n_contact = 0;
  for (const auto& itf : d.interfaces)
    if (itf.behavior == InterfaceBehavior::contact) ++n_contact;
  auto ch9 = eng2.update(9, gaps, dmg);
  CHECK(ch9.empty());  // cadence bookkeeping: nothing changes off-cadence
  auto ch10 = eng2.update(10, gaps, dmg);
  REQUIRE(ch10.size() == n_contact);
  CHECK(eng2.directions()[contact_id].k_minus[0](0, 0) ==
        doctest::Approx(1e-6 * k_ref));
  auto ch20 = eng2.update(20, gaps, dmg);
  CHECK(ch20.empty());  // already open

  // Fixed mode never updates.
  PolicyConfig cfg3 = cfg2;
  cfg3.contact_mode = ContactMode::fixed;
  PolicyEngine eng3(cfg3, d, es);
  CHECK(eng3.update(10, gaps, dmg).empty());
}

TEST_CASE("cohesive updating strategies") {
  auto m = generate_laminate_mesh(
      20, 1, {0.25, 0.25}, 8, 1, 1,
      {CrackSpec{1, 0.0, 20.0, InterfaceBehavior::cohesive,
                 InterfaceBehavior::cohesive}});
  auto d = Decomposition::build(m, 2, 1, {});
  int coh = -1;
  for (const auto& itf : d.interfaces)
    if (itf.behavior == InterfaceBehavior::cohesive) coh = itf.id;
  REQUIRE(coh >= 0);
  std::vector<double> es(d.interfaces.size(), 135000.0);

  PolicyConfig cfg;
  cfg.cohesive_update = CohesiveStrategy::A;
  PolicyEngine engine(cfg, d, es, 1e5);
  CHECK(engine.directions()[coh].k_plus_infinite);
  CHECK(engine.directions()[coh].k_minus[0](0, 0) ==
        doctest::Approx(200000.0));

  std::vector<std::vector<double>> gaps(d.interfaces.size());
  std::vector<std::vector<DamageState>> dmg(d.interfaces.size());
  for (const auto& itf : d.interfaces) {
    gaps[itf.id].assign(itf.n_gps(), 0.0);
    dmg[itf.id].assign(itf.n_gps(), DamageState{});
  }
  for (auto& s : dmg[coh]) s.d = 0.5;

  // A never updates.
  CHECK(engine.update(100, gaps, dmg).empty());

  // C refreshes per point only at the cadence.
  PolicyConfig cfgC = cfg;
  cfgC.cohesive_update = CohesiveStrategy::C;
  PolicyEngine engC(cfgC, d, es, 1e5);
  CHECK(engC.update(99, gaps, dmg).empty());
  auto ch = engC.update(100, gaps, dmg);
  REQUIRE(ch.size() >= 1u);
  CHECK(engC.directions()[coh].k_minus[0](0, 0) ==
        doctest::Approx(2e5 * 0.5));

  // D refreshes every iteration.
  PolicyConfig cfgD = cfg;
  cfgD.cohesive_update = CohesiveStrategy::D;
  PolicyEngine engD(cfgD, d, es, 1e5);
  CHECK(!engD.update(1, gaps, dmg).empty());

  // B switches fully damaged interfaces to the open-contact value.
  PolicyConfig cfgB = cfg;
  cfgB.cohesive_update = CohesiveStrategy::B;
  PolicyEngine engB(cfgB, d, es, 1e5);
  CHECK(engB.update(1, gaps, dmg).empty());  // not fully damaged yet
  for (auto& s : dmg[coh]) s.d = 1.0;
  auto chB = engB.update(2, gaps, dmg);
  REQUIRE(chB.size() == 1u);
  double kref = engB.directions()[coh].k_ref;
  CHECK(engB.directions()[coh].k_minus[0](0, 0) ==
        doctest::Approx(1e-6 * kref));
}
