#pragma once

#include "latinfe/decomposition.hpp"
#include "latinfe/interface_law.hpp"
#include "latinfe/material.hpp"

#include <string>

namespace latinfe {

enum class CohesiveStrategy { A, B, C, D };
// `fixed` keeps the initial guess forever (the wrong-guess stagnation runs).
enum class ContactMode { status_update, unified, fixed };
enum class ContactGuess { closed, open };

struct PolicyConfig {
  bool anisotropic = false;
  double slenderness = 1.0;  // L0/h0
  bool macro_continuity = false;
  ContactMode contact_mode = ContactMode::unified;
  int contact_cadence = 10;
  ContactGuess contact_guess = ContactGuess::closed;
  CohesiveStrategy cohesive_update = CohesiveStrategy::A;
  int cohesive_cadence = 100;  // strategy C refresh period
  double open_factor = 1e-6;   // "zero" search direction guard
  void validate() const;
};

// Per-interface operators. k+ couples the local stage, k- the admissibility
// stage; k-M is either equal to k- or an exact macro-continuity constraint.
struct SearchDirections {
  std::vector<Mat3> k_plus;   // per Gauss point
  std::vector<Mat3> k_minus;  // per Gauss point
  bool k_plus_infinite = false;
  bool macro_continuity = false;
  double k_ref = 0.0;  // fixed E/L_Gamma scalar for the error indicator
  long version = 0;
};

struct PolicyEvent {
  int iteration = 0;
  int interface = -1;
  std::string what;
};

SearchDirections baseline(const InterfaceGeometry& itf, double E_scale);
void anisotropic_micro(SearchDirections& dirs, const InterfaceGeometry& itf,
                       double slenderness);
void macro_continuity(SearchDirections& dirs, const InterfaceGeometry& itf);

// Policy evaluation across the decomposition.
class PolicyEngine {
 public:
  PolicyEngine(PolicyConfig cfg, const Decomposition& decomp,
               const std::vector<double>& E_scale_per_interface,
               double cohesive_k0 = 0.0);

  const PolicyConfig& config() const { return cfg_; }
  std::vector<SearchDirections>& directions() { return dirs_; }
  const std::vector<SearchDirections>& directions() const { return dirs_; }

  // Called between LATIN iterations with the cumulative iteration counter,
  // the current local-stage gaps (per interface, per gp, deformed-normal
  // component) and live damage. Returns ids of interfaces whose operators
  // changed.
  std::vector<int> update(long iteration,
                          const std::vector<std::vector<double>>& gap_hat,
                          const std::vector<std::vector<DamageState>>& damage,
                          std::vector<PolicyEvent>* events = nullptr);

 private:
  void set_contact_point(SearchDirections& d, int gp, bool open, double e_ovl);
  PolicyConfig cfg_;
  const Decomposition* decomp_;
  std::vector<double> e_scale_;
  double cohesive_k0_ = 0.0;
  std::vector<SearchDirections> dirs_;
};

}  // namespace latinfe
