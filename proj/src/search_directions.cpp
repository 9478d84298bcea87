#include <cstdlib>
#include "latinfe/search_directions.hpp"

#include <cmath>

namespace latinfe {

void PolicyConfig::validate() const {
  if (slenderness < 1.0) throw InputError("slenderness must be >= 1");
  if (contact_cadence < 1 || cohesive_cadence < 1)
    throw InputError("cadence must be >= 1");
  if (!(open_factor > 0.0)) throw InputError("open_factor must be > 0");
}

SearchDirections baseline(const InterfaceGeometry& itf, double E_scale) {
  if (!(itf.L_char > 0.0)) throw InputError("interface with zero length");
  SearchDirections d;
  double k = E_scale / itf.L_char;
  // Boundary interfaces carry the impedance of the environment: stiff for a
  // prescribed motion, the classical value for a prescribed load.
  if (itf.boundary && itf.bc_kind == BCKind::dirichlet) {
    k *= std::getenv("LATINFE_DSCALE") ? std::atof(std::getenv("LATINFE_DSCALE")) : 16.0;
  }
  if (itf.boundary && itf.bc_kind == BCKind::neumann &&
      std::getenv("LATINFE_NSCALE"))
    k *= std::atof(std::getenv("LATINFE_NSCALE"));
  d.k_ref = k;
  d.k_plus.assign(itf.n_gps(), Mat3::Identity() * k);
  d.k_minus.assign(itf.n_gps(), Mat3::Identity() * k);
  return d;
}

void anisotropic_micro(SearchDirections& dirs, const InterfaceGeometry& itf,
                       double slenderness) {
  if (slenderness < 1.0) throw InputError("slenderness must be >= 1");
  double kn = dirs.k_ref;
  double kt = kn / (slenderness * slenderness);
  Mat3 k = direction_matrix(itf.N3, kn, kt);
  for (auto& m : dirs.k_minus) m = k;
  for (auto& m : dirs.k_plus) m = k;
  ++dirs.version;
}

void macro_continuity(SearchDirections& dirs, const InterfaceGeometry& itf) {
  if (!itf.interior()) return;  // boundary conditions keep their Robin form
  dirs.macro_continuity = true;
  ++dirs.version;
}

PolicyEngine::PolicyEngine(PolicyConfig cfg, const Decomposition& decomp,
                           const std::vector<double>& E_scale,
                           double cohesive_k0)
    : cfg_(std::move(cfg)),
      decomp_(&decomp),
      e_scale_(E_scale),
      cohesive_k0_(cohesive_k0) {
  cfg_.validate();
  dirs_.reserve(decomp.interfaces.size());
  for (const auto& itf : decomp.interfaces) {
    double e = e_scale_[itf.id];
    SearchDirections d = baseline(itf, e);
    switch (itf.behavior) {
      case InterfaceBehavior::perfect:
        if (!itf.boundary && cfg_.macro_continuity) macro_continuity(d, itf);
        // Boundary interfaces transmit support reactions; they keep the
        // isotropic value.
        if (!itf.boundary && cfg_.anisotropic)
          anisotropic_micro(d, itf, cfg_.slenderness);
        break;
      case InterfaceBehavior::contact:
        if (cfg_.contact_mode == ContactMode::unified) {
          double k = d.k_ref / (cfg_.slenderness * cfg_.slenderness);
          d.k_plus.assign(itf.n_gps(), Mat3::Identity() * k);
          d.k_minus.assign(itf.n_gps(), Mat3::Identity() * k);
        } else {  // status_update and fixed start from the configured guess
          bool open = cfg_.contact_guess == ContactGuess::open;
          for (int g = 0; g < itf.n_gps(); ++g)
            set_contact_point(d, g, open, d.k_ref);
        }
        break;
      case InterfaceBehavior::cohesive: {
        // k+ infinite: the local stage evaluates the law directly. k- starts
        // from twice the undamaged interface stiffness.
        d.k_plus_infinite = true;
        if (!(cohesive_k0_ > 0.0))
          throw InputError("cohesive interfaces need k0");
        d.k_minus.assign(itf.n_gps(), Mat3::Identity() * 2.0 * cohesive_k0_);
        break;
      }
    }
    dirs_.push_back(std::move(d));
  }
}

void PolicyEngine::set_contact_point(SearchDirections& d, int gp, bool open,
                                     double e_ovl) {
  double k = open ? cfg_.open_factor * e_ovl : e_ovl;
  d.k_plus[gp] = Mat3::Identity() * k;
  d.k_minus[gp] = Mat3::Identity() * k;
}

std::vector<int> PolicyEngine::update(
    long iteration, const std::vector<std::vector<double>>& gap_hat,
    const std::vector<std::vector<DamageState>>& damage,
    std::vector<PolicyEvent>* events) {
  std::vector<int> changed;
  for (const auto& itf : decomp_->interfaces) {
    SearchDirections& d = dirs_[itf.id];
    if (itf.behavior == InterfaceBehavior::contact &&
        cfg_.contact_mode == ContactMode::status_update &&
        iteration % cfg_.contact_cadence == 0) {
      int flips = 0;
      for (int g = 0; g < itf.n_gps(); ++g) {
        bool open = gap_hat[itf.id][g] > 0.0;
        bool was_open = d.k_minus[g](0, 0) < 0.5 * d.k_ref;
        if (open != was_open) {
          set_contact_point(d, g, open, d.k_ref);
          ++flips;
        }
      }
      if (flips > 0) {
        ++d.version;
        changed.push_back(itf.id);
        if (events)
          events->push_back({static_cast<int>(iteration), itf.id,
                             "contact status update: " +
                                 std::to_string(flips) + " points"});
      }
    }
    if (itf.behavior == InterfaceBehavior::cohesive) {
      const auto& dmg = damage[itf.id];
      double floor_k = cfg_.open_factor * d.k_ref;
      auto refresh_points = [&]() {
        int n_changed = 0;
        for (int g = 0; g < itf.n_gps(); ++g) {
          double target =
              std::max(2.0 * cohesive_k0_ * (1.0 - dmg[g].d), floor_k);
          if (std::abs(d.k_minus[g](0, 0) - target) >
              1e-12 * std::max(target, floor_k)) {
            d.k_minus[g] = Mat3::Identity() * target;
            ++n_changed;
          }
        }
        return n_changed;
      };
      switch (cfg_.cohesive_update) {
        case CohesiveStrategy::A:
          break;
        case CohesiveStrategy::B: {
          bool fully = true;
          for (const auto& s : dmg) fully = fully && s.d >= 1.0;
          bool already = d.k_minus[0](0, 0) <= floor_k * (1 + 1e-9);
          if (fully && !already) {
            for (auto& m : d.k_minus) m = Mat3::Identity() * floor_k;
            ++d.version;
            changed.push_back(itf.id);
            if (events)
              events->push_back({static_cast<int>(iteration), itf.id,
                                 "fully damaged: open-contact value"});
          }
          break;
        }
        case CohesiveStrategy::C:
          if (iteration % cfg_.cohesive_cadence == 0) {
            int n = refresh_points();
            if (n > 0) {
              ++d.version;
              changed.push_back(itf.id);
              if (events)
                events->push_back({static_cast<int>(iteration), itf.id,
                                   "cohesive refresh: " + std::to_string(n) +
                                       " points"});
            }
          }
          break;
        case CohesiveStrategy::D: {
          int n = refresh_points();
          if (n > 0) {
            ++d.version;
            changed.push_back(itf.id);
            if (events)
              events->push_back({static_cast<int>(iteration), itf.id,
                                 "cohesive refresh: " + std::to_string(n) +
                                     " points"});
          }
          break;
        }
      }
    }
  }
  return changed;
}

}  // namespace latinfe
