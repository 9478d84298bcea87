#include "latinfe/oracles.hpp"

#include "latinfe/types.hpp"

#include <cmath>

namespace latinfe::oracles {

namespace {
constexpr double kPi = 3.14159265358979323846;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw InputError(std::string(name) + " must be > 0");
}
}  // namespace

double euler_load(double E, double b, double h, double L) {
  require_positive(E, "E");
  require_positive(b, "b");
  require_positive(h, "h");
  require_positive(L, "L");
  double I = b * h * h * h / 12.0;
  return 4.0 * kPi * kPi * E * I / (L * L);
}

std::pair<double, double> local_global_buckling(double E, double b,
                                                double h_ply, double a0,
                                                double L0) {
  require_positive(a0, "a0");
  require_positive(L0, "L0");
  if (a0 > L0) throw InputError("a0 must not exceed L0");
  double I0 = b * h_ply * h_ply * h_ply / 12.0;
  double p_local = 2.0 * (4.0 * kPi * kPi * E * I0 / (a0 * a0));
  double p_global =
      ((L0 - a0) / L0) * (4.0 * kPi * kPi * E * 8.0 * I0 / (L0 * L0)) +
      (2.0 * a0 / L0) * (4.0 * kPi * kPi * E * I0 / (L0 * L0));
  return {p_local, p_global};
}

double bruno_propagation(double Gc, double b0, double P_local, double a0) {
  if (Gc < 0.0) throw InputError("Gc must be >= 0");
  require_positive(b0, "b0");
  require_positive(P_local, "P_local");
  require_positive(a0, "a0");
  double rhs = 4.0 * Gc * b0 / (kPi * kPi * P_local);
  // (3/16) x^2 + 2 x - rhs = 0, x = xi^2; positive root.
  double x = (-2.0 + std::sqrt(4.0 + 0.75 * rhs)) / 0.375;
  if (x < 0.0) x = 0.0;
  return a0 * std::sqrt(x);
}

double dcb_compliance(double E, double b, double h_arm, double a,
                      double k_n0) {
  double I = b * h_arm * h_arm * h_arm / 12.0;
  double kf = 2.0 * b * k_n0;  // symmetric opening: both arms deflect
  double lam = std::pow(kf / (4.0 * E * I), 0.25);
  double la = lam * a;
  return a * a * a / (3.0 * E * I) *
         (1.0 + 3.0 / la + 3.0 / (la * la) + 1.5 / (la * la * la));
}

double dcb_propagation_load(double E, double b, double h_arm, double a,
                            double k_n0, double Yc) {
  double I = b * h_arm * h_arm * h_arm / 12.0;
  double kf = 2.0 * b * k_n0;
  double lam = std::pow(kf / (4.0 * E * I), 0.25);
  // G = P^2 (a + 1/lambda)^2 / (b E I); growth at G = Yc.
  return std::sqrt(b * E * I * Yc) / (a + 1.0 / lam);
}

double dcb_force(double E, double b, double h_arm, double a0, double k_n0,
                 double Yc, double displacement) {
  require_positive(E, "E");
  require_positive(b, "b");
  require_positive(h_arm, "h_arm");
  require_positive(a0, "a0");
  require_positive(k_n0, "k_n0");
  require_positive(Yc, "Yc");
  if (displacement < 0.0) throw InputError("displacement must be >= 0");
  if (displacement == 0.0) return 0.0;

  double c0 = dcb_compliance(E, b, h_arm, a0, k_n0);
  double p_onset = dcb_propagation_load(E, b, h_arm, a0, k_n0, Yc);
  double d_onset = c0 * p_onset;
  if (displacement <= d_onset) return displacement / c0;

  // Propagation: find a >= a0 with delta = C(a) * P_prop(a); delta is
  // monotonically increasing in a.
  double lo = a0, hi = a0;
  auto delta_of = [&](double a) {
    return dcb_compliance(E, b, h_arm, a, k_n0) *
           dcb_propagation_load(E, b, h_arm, a, k_n0, Yc);
  };
  while (delta_of(hi) < displacement) {
    hi *= 2.0;
    if (hi > 1e6 * a0) throw SolverError("dcb_force: bracketing failed");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (delta_of(mid) < displacement ? lo : hi) = mid;
  }
  return dcb_propagation_load(E, b, h_arm, 0.5 * (lo + hi), k_n0, Yc);
}

}  // namespace latinfe::oracles
