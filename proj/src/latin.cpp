#include "latinfe/latin.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <limits>

namespace latinfe {

void LatinConfig::validate() const {
  if (!(eta_tol > 0.0)) throw InputError("eta_tol must be > 0");
  if (max_latin_iterations < 1) throw InputError("max_latin_iterations >= 1");
  if (max_newton < 1) throw InputError("max_newton >= 1");
  if (!(newton_tol > 0.0)) throw InputError("newton_tol must be > 0");
  if (!(relaxation > 0.0) || relaxation > 1.0)
    throw InputError("relaxation must be in (0, 1]");
  if (workers < 1) throw InputError("workers >= 1");
  if (max_bisection < 0) throw InputError("max_bisection >= 0");
}

namespace {

struct SideRef {
  int itf = -1;
  bool is_a = true;
  const InterfaceGeometry* geo = nullptr;
  const std::vector<int>* lnodes = nullptr;
};

// Per-interface quadrature-level operators shared by both sides.
struct ItfOps {
  MatX G;        // (3 n_inodes) x 9 plain mode-mass matrix
  MatX Gk;       // k-weighted mode loads
  MatX K9;       // 9x9, int phi^T k phi
  long k_version = -1;
};

struct Factorization {
  Eigen::SimplicialLDLT<SpMat> ldlt;
  std::unique_ptr<Eigen::SparseLU<SpMat>> lu;
  bool use_lu = false;
  VecX solve(const VecX& b) const {
    if (use_lu) return lu->solve(b);
    return ldlt.solve(b);
  }
};

struct SubData {
  std::unique_ptr<SubstructureKernel> kernel;
  std::vector<SideRef> sides;
  VecX body;

  // Tangent + Robin operator cache.
  Factorization fact;
  long fact_u_version = -1;
  long fact_k_sum = -1;
  long kernel_trip_key = -1;
  std::vector<Triplet> kernel_trips;

  // Macro continuity constraints.
  std::vector<int> cons_sides;  // indices into `sides`
  MatX Ct;                      // ndof x m_c
  MatX Zc;                      // A^{-1} C^T
  VecX beta_rows;               // augmentation weight per constraint row
  Eigen::LLT<MatX> Sllt;
  int m_c = 0;

  // Macro condensation (columns/rows over this sub's global macro slots).
  std::vector<int> slot_sides;  // side index per 9-slot group
  MatX LM;
  bool lm_valid = false;

  // Per-iteration scratch.
  VecX rhs_loads;  // side loads + body (+ volume residual subtracted later)
  VecX rhs_extra;  // macro multiplier loads
  VecX c_tot;      // constraint targets of the current solve
  VecX r0;
  VecX du0, lam0;
  VecX fm0;        // macro force at W~ = 0, per slot
  VecX du, lam;
  double res_norm = 0.0, ref_norm = 1.0;
};

}  // namespace

struct LatinSolver::Impl {
  std::vector<std::unique_ptr<SubData>> subs;
  std::vector<ItfOps> iops;
  std::vector<long> u_version;
  std::vector<double> factors;  // per schedule
  // Global macro dof layout: offset per interface, -1 for Dirichlet boundary.
  std::vector<int> macro_offset;
  int n_macro = 0;
  VecX Wt;  // last macro multiplier solution
  std::vector<std::vector<double>> gap_hat;  // contact classification input
  int step_key = 0;
};

// ---------------------------------------------------------------------------
// Construction

LatinSolver::LatinSolver(const Decomposition& decomp,
                         std::vector<MaterialLaw> materials,
                         CohesiveParams cohesive, PolicyConfig policy,
                         LatinConfig cfg)
    : decomp_(&decomp),
      materials_(std::move(materials)),
      cohesive_(cohesive),
      cfg_(cfg),
      impl_(new Impl) {
  cfg_.validate();
  if (materials_.size() != decomp.subs.size())
    throw InputError("one material per substructure required");

  bool has_cohesive = false;
  std::vector<double> e_scale(decomp.interfaces.size(), 0.0);
  for (const auto& itf : decomp.interfaces) {
    double e = materials_[itf.sub_a].stiffness_scale();
    if (itf.sub_b >= 0)
      e = std::max(e, materials_[itf.sub_b].stiffness_scale());
    e_scale[itf.id] = e;
    has_cohesive |= itf.behavior == InterfaceBehavior::cohesive;
  }
  if (has_cohesive) cohesive_.validate();
  policy_ = std::make_unique<PolicyEngine>(policy, decomp, e_scale,
                                           cohesive_.k_n0);

  state_.u.resize(decomp.subs.size());
  state_.itf.resize(decomp.interfaces.size());
  state_.committed.resize(decomp.interfaces.size());
  impl_->u_version.assign(decomp.subs.size(), 0);
  factorization_count.assign(decomp.subs.size(), 0);
  impl_->gap_hat.resize(decomp.interfaces.size());

  for (const auto& s : decomp.subs) state_.u[s.id] = VecX::Zero(s.ndof());
  for (const auto& itf : decomp.interfaces) {
    auto& st = state_.itf[itf.id];
    st.a.resize(itf.n_gps());
    if (itf.interior()) st.b.resize(itf.n_gps());
    st.mean_nodal.assign(itf.inodes.size(), Vec3::Zero());
    if (itf.behavior == InterfaceBehavior::cohesive) {
      st.damage.assign(itf.n_gps(), DamageState{});
      state_.committed[itf.id].assign(itf.n_gps(), DamageState{});
    }
    impl_->gap_hat[itf.id].assign(itf.n_gps(), 0.0);
  }

  impl_->subs.reserve(decomp.subs.size());
  for (std::size_t i = 0; i < decomp.subs.size(); ++i)
    impl_->subs.push_back(std::make_unique<SubData>());
  for (const auto& s : decomp.subs) {
    auto& sd = *impl_->subs[s.id];
    sd.kernel =
        std::make_unique<SubstructureKernel>(*decomp.mesh, s, materials_[s.id]);
    sd.body = sd.kernel->body_force(cfg_.body_force);
    for (int iid : s.interfaces) {
      const auto& itf = decomp.interfaces[iid];
      SideRef ref;
      ref.itf = iid;
      ref.geo = &itf;
      ref.is_a = (itf.sub_a == s.id);
      ref.lnodes = ref.is_a ? &itf.local_a : &itf.local_b;
      sd.sides.push_back(ref);
    }
  }

  // Interface-level mode matrices (G is geometry-only, filled once).
  impl_->iops.resize(decomp.interfaces.size());
  for (const auto& itf : decomp.interfaces) {
    auto& io = impl_->iops[itf.id];
    int ni = static_cast<int>(itf.inodes.size());
    io.G = MatX::Zero(3 * ni, 9);
    for (int g = 0; g < itf.n_gps(); ++g) {
      const auto& gp = itf.gps[g];
      const auto& fi = itf.facets[gp.facet];
      for (int m = 0; m < 9; ++m) {
        const Vec3& phi = itf.basis.modes[m][g];
        for (int a = 0; a < 4; ++a)
          io.G.block<3, 1>(3 * fi[a], m) += gp.w * gp.N[a] * phi;
      }
    }
  }

  // Global macro layout: interior and Neumann-boundary interfaces carry
  // unknowns; Dirichlet reactions are free.
  impl_->macro_offset.assign(decomp.interfaces.size(), -1);
  for (const auto& itf : decomp.interfaces) {
    bool has_dofs =
        itf.interior() || (itf.boundary && itf.bc_kind == BCKind::neumann);
    if (has_dofs) {
      impl_->macro_offset[itf.id] = impl_->n_macro;
      impl_->n_macro += 9;
    }
  }
  for (auto& sdp : impl_->subs) {
    auto& sd = *sdp;
    for (std::size_t si = 0; si < sd.sides.size(); ++si)
      if (impl_->macro_offset[sd.sides[si].itf] >= 0)
        sd.slot_sides.push_back(static_cast<int>(si));
  }

  impl_->factors.assign(8, 0.0);
}

LatinSolver::~LatinSolver() = default;

// ---------------------------------------------------------------------------
// Small helpers

namespace {

void trace_gps(const InterfaceGeometry& itf, const std::vector<int>& lnodes,
               const VecX& u, std::vector<Vec3>& out) {
  out.resize(itf.n_gps());
  for (int g = 0; g < itf.n_gps(); ++g) {
    const auto& gp = itf.gps[g];
    const auto& fi = itf.facets[gp.facet];
    Vec3 w = Vec3::Zero();
    for (int a = 0; a < 4; ++a)
      w += gp.N[a] * u.segment<3>(3 * lnodes[fi[a]]);
    out[g] = w;
  }
}

void scatter_load(const InterfaceGeometry& itf, const std::vector<int>& lnodes,
                  const std::vector<Vec3>& field, VecX& f) {
  for (int g = 0; g < itf.n_gps(); ++g) {
    const auto& gp = itf.gps[g];
    const auto& fi = itf.facets[gp.facet];
    for (int a = 0; a < 4; ++a)
      f.segment<3>(3 * lnodes[fi[a]]) += gp.w * gp.N[a] * field[g];
  }
}

VecX project_field(const InterfaceGeometry& itf,
                   const std::vector<Vec3>& field) {
  return itf.basis.project(field, itf.gps);
}

Mat3 interface_F(const InterfaceGeometry& itf, const std::vector<Vec3>& mean,
                 int g) {
  const auto& gp = itf.gps[g];
  const auto& fi = itf.facets[gp.facet];
  Mat3 F = Mat3::Identity();
  for (int a = 0; a < 4; ++a) {
    const Vec3& um = mean[fi[a]];
    F += um * (gp.dN1[a] * itf.A1 + gp.dN2[a] * itf.A2).transpose();
  }
  return F;
}

}  // namespace

// ---------------------------------------------------------------------------
// Local stage

void LatinSolver::set_load_factors(const std::vector<double>& factors) {
  if (factors.size() > impl_->factors.size())
    impl_->factors.resize(factors.size(), 0.0);
  for (std::size_t i = 0; i < factors.size(); ++i)
    impl_->factors[i] = factors[i];
}

void LatinSolver::local_stage() {
  const auto& dirs = policy_->directions();
  parallel_for(
      decomp_->interfaces.size(),
      [&](std::size_t ii) {
        const auto& itf = decomp_->interfaces[ii];
        auto& st = state_.itf[ii];
        const auto& d = dirs[ii];
        if (itf.boundary) {
          BoundaryCondition bc;
          bc.dirichlet = itf.bc_kind == BCKind::dirichlet;
          bc.mask = itf.bc_mask;
          bc.value = itf.bc_value * impl_->factors[itf.bc_schedule];
          for (int g = 0; g < itf.n_gps(); ++g) {
            auto [what, fhat] =
                boundary_local_solve(st.a.W[g], st.a.F[g], d.k_plus[g], bc);
            st.a.What[g] = what;
            st.a.Fhat[g] = fhat;
          }
          return;
        }
        switch (itf.behavior) {
          case InterfaceBehavior::perfect:
            for (int g = 0; g < itf.n_gps(); ++g) {
              SidePair s{st.a.W[g], st.b.W[g], st.a.F[g], st.b.F[g]};
              SidePairHat h = perfect_local_solve(s, d.k_plus[g], d.k_plus[g]);
              st.a.What[g] = h.What_a;
              st.b.What[g] = h.What_b;
              st.a.Fhat[g] = h.Fhat_a;
              st.b.Fhat[g] = h.Fhat_b;
            }
            break;
          case InterfaceBehavior::contact:
            for (int g = 0; g < itf.n_gps(); ++g) {
              InterfaceFrame fr =
                  interface_frame(interface_F(itf, st.mean_nodal, g), itf.N3,
                                  itf.A1, itf.A2);
              SidePair s{st.a.W[g], st.b.W[g], st.a.F[g], st.b.F[g]};
              SidePairHat h =
                  contact_local_solve(s, d.k_plus[g], d.k_plus[g], fr.n3);
              st.a.What[g] = h.What_a;
              st.b.What[g] = h.What_b;
              st.a.Fhat[g] = h.Fhat_a;
              st.b.Fhat[g] = h.Fhat_b;
              impl_->gap_hat[ii][g] = fr.n3.dot(h.What_b - h.What_a);
            }
            break;
          case InterfaceBehavior::cohesive:
            for (int g = 0; g < itf.n_gps(); ++g) {
              InterfaceFrame fr =
                  interface_frame(interface_F(itf, st.mean_nodal, g), itf.N3,
                                  itf.A1, itf.A2);
              SidePair s{st.a.W[g], st.b.W[g], st.a.F[g], st.b.F[g]};
              const DamageState& base = state_.committed[ii][g];
              CohesiveLocalResult r =
                  d.k_plus_infinite
                      ? cohesive_local_solve_infinite(s, fr, base, cohesive_)
                      : cohesive_local_solve_finite(s, d.k_plus[g],
                                                    d.k_plus[g], fr, base,
                                                    cohesive_);
              if (!r.converged)
                throw SolverError("cohesive local solve stalled at interface " +
                                  std::to_string(ii) + " gp " +
                                  std::to_string(g));
              st.a.What[g] = r.hat.What_a;
              st.b.What[g] = r.hat.What_b;
              st.a.Fhat[g] = r.hat.Fhat_a;
              st.b.Fhat[g] = r.hat.Fhat_b;
              st.damage[g] = r.damage;
              impl_->gap_hat[ii][g] = fr.n3.dot(r.hat.What_b - r.hat.What_a);
            }
            break;
        }
      },
      cfg_.workers);
}

// ---------------------------------------------------------------------------
// Admissibility stage

namespace {
// Augmentation weight for constrained interfaces. The operator with the
// micro-only Robin term is singular on rigid modes; adding beta * C^T C and
// shifting the multiplier (mu = lambda + beta c) leaves the saddle solution
// unchanged while making the block elimination well posed.
double augment_beta(const InterfaceGeometry& itf, double k_ref) {
  return k_ref * static_cast<double>(itf.inodes.size());
}

void add_robin_triplets(const InterfaceGeometry& itf,
                        const std::vector<int>& lnodes,
                        const std::vector<Mat3>& k, bool constrained,
                        double k_ref, const MatX& G, const MatX& K9,
                        std::vector<Triplet>& out) {
  for (int g = 0; g < itf.n_gps(); ++g) {
    const auto& gp = itf.gps[g];
    const auto& fi = itf.facets[gp.facet];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        Mat3 blk = gp.w * gp.N[a] * gp.N[b] * k[g];
        int ra = 3 * lnodes[fi[a]], rb = 3 * lnodes[fi[b]];
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            out.emplace_back(ra + i, rb + j, blk(i, j));
      }
  }
  if (constrained) {
    // Robin acts on the micro complement only; the macro block is replaced
    // by the augmentation beta * G G^T.
    MatX D = G * K9 * G.transpose() -
             augment_beta(itf, k_ref) * (G * G.transpose());
    int ni = static_cast<int>(itf.inodes.size());
    for (int a = 0; a < ni; ++a)
      for (int b = 0; b < ni; ++b)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            out.emplace_back(3 * lnodes[a] + i, 3 * lnodes[b] + j,
                             -D(3 * a + i, 3 * b + j));
  }
}
}  // namespace

int LatinSolver::admissibility_stage() {
  const auto& dirs = policy_->directions();
  auto& subs = impl_->subs;
  int n_sub = static_cast<int>(subs.size());
  int newton_done = 0;
  double worst_res = 0.0;

  // Refresh k-dependent interface operators.
  parallel_for(
      decomp_->interfaces.size(),
      [&](std::size_t ii) {
        const auto& itf = decomp_->interfaces[ii];
        auto& io = impl_->iops[ii];
        const auto& d = dirs[ii];
        if (io.k_version == d.version && io.K9.size() > 0) return;
        int ni = static_cast<int>(itf.inodes.size());
        io.Gk = MatX::Zero(3 * ni, 9);
        io.K9 = MatX::Zero(9, 9);
        for (int g = 0; g < itf.n_gps(); ++g) {
          const auto& gp = itf.gps[g];
          const auto& fi = itf.facets[gp.facet];
          for (int m = 0; m < 9; ++m) {
            Vec3 kphi = d.k_minus[g] * itf.basis.modes[m][g];
            for (int a = 0; a < 4; ++a)
              io.Gk.block<3, 1>(3 * fi[a], m) += gp.w * gp.N[a] * kphi;
            for (int m2 = 0; m2 < 9; ++m2)
              io.K9(m2, m) += gp.w * itf.basis.modes[m2][g].dot(kphi);
          }
        }
        io.k_version = d.version;
      },
      cfg_.workers);

  for (int newton = 0; newton < cfg_.max_newton; ++newton) {
    // (a) ensure factorized operators.
    parallel_for(
        n_sub,
        [&](std::size_t s) {
          auto& sd = *subs[s];
          long ksum = 0;
          for (const auto& side : sd.sides) ksum += dirs[side.itf].version;
          long ukey = cfg_.reuse_tangent ? impl_->step_key
                                         : impl_->u_version[s];
          if (sd.fact_u_version == ukey && sd.fact_k_sum == ksum) return;

          if (sd.kernel_trip_key != ukey) {
            sd.kernel_trips.clear();
            sd.kernel->tangent_triplets(state_.u[s], sd.kernel_trips);
            sd.kernel_trip_key = ukey;
          }
          std::vector<Triplet> trips = sd.kernel_trips;
          sd.cons_sides.clear();
          for (std::size_t si = 0; si < sd.sides.size(); ++si) {
            const auto& side = sd.sides[si];
            const auto& d = dirs[side.itf];
            bool constrained = d.macro_continuity;
            add_robin_triplets(*side.geo, *side.lnodes, d.k_minus, constrained,
                               d.k_ref, impl_->iops[side.itf].G,
                               impl_->iops[side.itf].K9, trips);
            if (constrained) sd.cons_sides.push_back(static_cast<int>(si));
          }
          int n = sd.kernel->ndof();
          SpMat A(n, n);
          A.setFromTriplets(trips.begin(), trips.end());
          sd.fact.use_lu = false;
          sd.fact.ldlt.compute(A);
          if (sd.fact.ldlt.info() != Eigen::Success) {
            sd.fact.use_lu = true;
            sd.fact.lu = std::make_unique<Eigen::SparseLU<SpMat>>();
            sd.fact.lu->compute(A);
            if (sd.fact.lu->info() != Eigen::Success)
              throw SolverError("substructure operator is singular");
          }
          ++factorization_count[s];

          // Constraint machinery.
          sd.m_c = 9 * static_cast<int>(sd.cons_sides.size());
          if (sd.m_c > 0) {
            sd.Ct = MatX::Zero(n, sd.m_c);
            sd.beta_rows = VecX::Zero(sd.m_c);
            for (std::size_t c = 0; c < sd.cons_sides.size(); ++c) {
              const auto& side = sd.sides[sd.cons_sides[c]];
              const MatX& G = impl_->iops[side.itf].G;
              const auto& ln = *side.lnodes;
              for (std::size_t in = 0; in < ln.size(); ++in)
                sd.Ct.block(3 * ln[in], 9 * c, 3, 9) +=
                    G.block(3 * in, 0, 3, 9);
              sd.beta_rows.segment(9 * c, 9).setConstant(
                  augment_beta(*side.geo, dirs[side.itf].k_ref));
            }
            sd.Zc = MatX(n, sd.m_c);
            for (int c = 0; c < sd.m_c; ++c)
              sd.Zc.col(c) = sd.fact.solve(sd.Ct.col(c));
            MatX S = sd.Ct.transpose() * sd.Zc;
            sd.Sllt.compute(S);
            if (sd.Sllt.info() != Eigen::Success)
              throw SolverError("macro constraint Schur complement singular");
          } else {
            sd.Ct.resize(0, 0);
            sd.Zc.resize(0, 0);
          }
          sd.fact_u_version = ukey;
          sd.fact_k_sum = ksum;
          sd.lm_valid = false;
        },
        cfg_.workers);

    // (b) homogenized macro operators (cached with the factorization).
    parallel_for(
        n_sub,
        [&](std::size_t s) {
          auto& sd = *subs[s];
          if (sd.lm_valid) return;
          int m = 9 * static_cast<int>(sd.slot_sides.size());
          sd.LM = MatX::Zero(m, m);
          int n = sd.kernel->ndof();
          auto cons_index = [&](int side_idx) {
            for (std::size_t c = 0; c < sd.cons_sides.size(); ++c)
              if (sd.cons_sides[c] == side_idx) return static_cast<int>(c);
            return -1;
          };
          for (int colgrp = 0; colgrp < static_cast<int>(sd.slot_sides.size());
               ++colgrp) {
            int si = sd.slot_sides[colgrp];
            const auto& side = sd.sides[si];
            int ci = cons_index(si);
            for (int mode = 0; mode < 9; ++mode) {
              VecX du, lam;
              if (ci >= 0) {
                VecX c = VecX::Zero(sd.m_c);
                c[9 * ci + mode] = 1.0;
                VecX mu = sd.Sllt.solve(c);
                du = sd.Zc * mu;
                lam = mu - sd.beta_rows.cwiseProduct(c);
              } else {
                VecX g = VecX::Zero(n);
                const MatX& Gk = impl_->iops[side.itf].Gk;
                const auto& ln = *side.lnodes;
                for (std::size_t in = 0; in < ln.size(); ++in)
                  g.segment<3>(3 * ln[in]) += Gk.block<3, 1>(3 * in, mode);
                VecX y = sd.fact.solve(g);
                if (sd.m_c > 0) {
                  lam = sd.Sllt.solve(-(sd.Zc.transpose() * g).eval());
                  du = y + sd.Zc * lam;
                } else {
                  du = y;
                }
              }
              // Rows: macro force response on every slot side.
              for (int rowgrp = 0;
                   rowgrp < static_cast<int>(sd.slot_sides.size()); ++rowgrp) {
                int sr = sd.slot_sides[rowgrp];
                const auto& rside = sd.sides[sr];
                int cr = cons_index(sr);
                if (cr >= 0) {
                  if (lam.size() > 0)
                    sd.LM.block(9 * rowgrp, 9 * colgrp + mode, 9, 1) =
                        lam.segment(9 * cr, 9);
                } else {
                  const auto& itf = *rside.geo;
                  std::vector<Vec3> dW;
                  trace_gps(itf, *rside.lnodes, du, dW);
                  std::vector<Vec3> dF(itf.n_gps());
                  const auto& d = dirs[rside.itf];
                  for (int g2 = 0; g2 < itf.n_gps(); ++g2) {
                    dF[g2] = -(d.k_minus[g2] * dW[g2]);
                    if (sr == si)
                      dF[g2] += d.k_minus[g2] * itf.basis.modes[mode][g2];
                  }
                  sd.LM.block(9 * rowgrp, 9 * colgrp + mode, 9, 1) =
                      project_field(itf, dF);
                }
              }
            }
          }
          sd.lm_valid = true;
        },
        cfg_.workers);

    // (c) condensed residual with W~ = 0.
    parallel_for(
        n_sub,
        [&](std::size_t s) {
          auto& sd = *subs[s];
          int n = sd.kernel->ndof();
          const VecX& u = state_.u[s];
          VecX loads = sd.body;
          for (const auto& side : sd.sides) {
            const auto& itf = *side.geo;
            const auto& st = state_.itf[side.itf];
            const SideFields& f = side.is_a ? st.a : st.b;
            const auto& d = dirs[side.itf];
            std::vector<Vec3> field(itf.n_gps());
            for (int g = 0; g < itf.n_gps(); ++g)
              field[g] = f.Fhat[g] + d.k_minus[g] * f.What[g];
            if (d.macro_continuity) {
              VecX pc = project_field(itf, field);
              const MatX& G = impl_->iops[side.itf].G;
              const auto& ln = *side.lnodes;
              VecX tmp = G * pc;
              scatter_load(itf, *side.lnodes, field, loads);
              for (std::size_t in = 0; in < ln.size(); ++in)
                loads.segment<3>(3 * ln[in]) -= tmp.segment<3>(3 * in);
            } else {
              scatter_load(itf, *side.lnodes, field, loads);
            }
          }
          sd.rhs_loads = loads;
          // Residual r0 = loads - f_int(u) - Robin(u).
          VecX r = loads - sd.kernel->internal_force(u);
          for (const auto& side : sd.sides) {
            const auto& itf = *side.geo;
            const auto& d = dirs[side.itf];
            std::vector<Vec3> W;
            trace_gps(itf, *side.lnodes, u, W);
            std::vector<Vec3> kW(itf.n_gps());
            for (int g = 0; g < itf.n_gps(); ++g)
              kW[g] = d.k_minus[g] * W[g];
            if (d.macro_continuity) {
              VecX projW = project_field(itf, W);
              const MatX& G = impl_->iops[side.itf].G;
              const MatX& K9 = impl_->iops[side.itf].K9;
              VecX tmp = G * (K9 * projW);
              const auto& ln = *side.lnodes;
              VecX rloc = VecX::Zero(3 * ln.size());
              for (int g = 0; g < itf.n_gps(); ++g) {
                const auto& gp = itf.gps[g];
                const auto& fi = itf.facets[gp.facet];
                for (int a = 0; a < 4; ++a)
                  rloc.segment<3>(3 * fi[a]) += gp.w * gp.N[a] * kW[g];
              }
              rloc -= tmp;
              for (std::size_t in = 0; in < ln.size(); ++in)
                r.segment<3>(3 * ln[in]) -= rloc.segment<3>(3 * in);
            } else {
              std::vector<Vec3> neg(itf.n_gps());
              for (int g = 0; g < itf.n_gps(); ++g) neg[g] = -kW[g];
              scatter_load(itf, *side.lnodes, neg, r);
            }
          }
          sd.r0 = r;

          // Saddle solve with W~ = 0.
          VecX c0;
          if (sd.m_c > 0) {
            c0 = VecX::Zero(sd.m_c);
            for (std::size_t c = 0; c < sd.cons_sides.size(); ++c) {
              const auto& side = sd.sides[sd.cons_sides[c]];
              const auto& itf = *side.geo;
              const auto& st = state_.itf[side.itf];
              const SideFields& f = side.is_a ? st.a : st.b;
              std::vector<Vec3> W;
              trace_gps(itf, *side.lnodes, u, W);
              c0.segment(9 * c, 9) =
                  project_field(itf, f.What) - project_field(itf, W);
            }
          }
          VecX y = sd.fact.solve(sd.r0);
          if (sd.m_c > 0) {
            VecX mu = sd.Sllt.solve(c0 - sd.Zc.transpose() * sd.r0);
            sd.du0 = y + sd.Zc * mu;
            sd.lam0 = mu - sd.beta_rows.cwiseProduct(c0);
          } else {
            sd.lam0.resize(0);
            sd.du0 = y;
          }
          (void)n;

          // Macro force at W~=0 on every slot.
          sd.fm0 = VecX::Zero(9 * sd.slot_sides.size());
          for (std::size_t grp = 0; grp < sd.slot_sides.size(); ++grp) {
            int si = sd.slot_sides[grp];
            const auto& side = sd.sides[si];
            int ci = -1;
            for (std::size_t c = 0; c < sd.cons_sides.size(); ++c)
              if (sd.cons_sides[c] == si) ci = static_cast<int>(c);
            if (ci >= 0) {
              sd.fm0.segment(9 * grp, 9) = sd.lam0.segment(9 * ci, 9);
            } else {
              const auto& itf = *side.geo;
              const auto& st = state_.itf[side.itf];
              const SideFields& f = side.is_a ? st.a : st.b;
              const auto& d = dirs[side.itf];
              std::vector<Vec3> W1;
              VecX u1 = u + sd.du0;
              trace_gps(itf, *side.lnodes, u1, W1);
              std::vector<Vec3> F0(itf.n_gps());
              for (int g = 0; g < itf.n_gps(); ++g)
                F0[g] = f.Fhat[g] + d.k_minus[g] * (f.What[g] - W1[g]);
              sd.fm0.segment(9 * grp, 9) = project_field(itf, F0);
            }
          }
        },
        cfg_.workers);

    // (d) global macro problem (deterministic serial assembly).
    impl_->Wt = VecX::Zero(impl_->n_macro);
    VecX& Wt = impl_->Wt;
    if (impl_->n_macro > 0) {
      std::vector<Triplet> trips;
      VecX rhs = VecX::Zero(impl_->n_macro);
      for (int s = 0; s < n_sub; ++s) {
        const auto& sd = *subs[s];
        for (std::size_t rg = 0; rg < sd.slot_sides.size(); ++rg) {
          int r_ofs = impl_->macro_offset[sd.sides[sd.slot_sides[rg]].itf];
          rhs.segment(r_ofs, 9) -= sd.fm0.segment(9 * rg, 9);
          for (std::size_t cg = 0; cg < sd.slot_sides.size(); ++cg) {
            int c_ofs = impl_->macro_offset[sd.sides[sd.slot_sides[cg]].itf];
            for (int i = 0; i < 9; ++i)
              for (int j = 0; j < 9; ++j)
                trips.emplace_back(r_ofs + i, c_ofs + j,
                                   sd.LM(9 * rg + i, 9 * cg + j));
          }
        }
      }
      // Neumann boundary rows carry the prescribed macro load.
      for (const auto& itf : decomp_->interfaces) {
        if (!itf.boundary || impl_->macro_offset[itf.id] < 0) continue;
        Vec3 fd = Vec3::Zero();
        for (int c = 0; c < 3; ++c)
          fd[c] = itf.bc_mask[c]
                      ? itf.bc_value[c] * impl_->factors[itf.bc_schedule]
                      : 0.0;
        std::vector<Vec3> field(itf.n_gps(), fd);
        rhs.segment(impl_->macro_offset[itf.id], 9) +=
            project_field(itf, field);
      }
      SpMat L(impl_->n_macro, impl_->n_macro);
      L.setFromTriplets(trips.begin(), trips.end());
      Eigen::SimplicialLDLT<SpMat> mldlt(L);
      if (mldlt.info() != Eigen::Success) {
        Eigen::SparseLU<SpMat> mlu(L);
        if (mlu.info() != Eigen::Success)
          throw SolverError(
              "macro problem singular (missing continuity or boundary "
              "constraints)");
        Wt = mlu.solve(rhs);
      } else {
        Wt = mldlt.solve(rhs);
      }
      ++macro_solve_count;
      if (std::getenv("LATINFE_DEBUG")) {
        double dmin = 1e300, dmax = 0;
        for (int i = 0; i < impl_->n_macro; ++i) {
          dmin = std::min(dmin, L.coeff(i, i));
          dmax = std::max(dmax, L.coeff(i, i));
        }
        std::fprintf(stderr, "[dbg] macro n %d diag [%.3e, %.3e] |rhs| %.3e |Wt| %.3e\n",
                     impl_->n_macro, dmin, dmax, rhs.norm(), Wt.norm());
      }
    }

    // (e) re-solve with the macro multiplier; damped Newton update. The
    // triple (du, W~, lambda) is scaled by a common line-search factor with
    // a residual-decrease test so that transiently overshooting linearized
    // states cannot leave the basin of the total-Lagrangian residual.
    std::vector<double> res(n_sub, 0.0), ref(n_sub, 1.0);
    parallel_for(
        n_sub,
        [&](std::size_t s) {
          auto& sd = *subs[s];
          int n = sd.kernel->ndof();
          const VecX& u = state_.u[s];
          sd.rhs_extra = VecX::Zero(n);
          VecX c_extra;
          if (sd.m_c > 0) c_extra = VecX::Zero(sd.m_c);
          for (std::size_t grp = 0; grp < sd.slot_sides.size(); ++grp) {
            int si = sd.slot_sides[grp];
            const auto& side = sd.sides[si];
            int ofs = impl_->macro_offset[side.itf];
            VecX wt = Wt.segment(ofs, 9);
            int ci = -1;
            for (std::size_t c = 0; c < sd.cons_sides.size(); ++c)
              if (sd.cons_sides[c] == si) ci = static_cast<int>(c);
            if (ci >= 0) {
              c_extra.segment(9 * ci, 9) += wt;
            } else {
              const MatX& Gk = impl_->iops[side.itf].Gk;
              const auto& ln = *side.lnodes;
              VecX tmp = Gk * wt;
              for (std::size_t in = 0; in < ln.size(); ++in)
                sd.rhs_extra.segment<3>(3 * ln[in]) += tmp.segment<3>(3 * in);
            }
          }
          VecX y = sd.fact.solve(sd.r0 + sd.rhs_extra);
          if (sd.m_c > 0) {
            VecX c0 = VecX::Zero(sd.m_c);
            for (std::size_t c = 0; c < sd.cons_sides.size(); ++c) {
              const auto& side = sd.sides[sd.cons_sides[c]];
              const auto& itf = *side.geo;
              const auto& st = state_.itf[side.itf];
              const SideFields& f = side.is_a ? st.a : st.b;
              std::vector<Vec3> W;
              trace_gps(itf, *side.lnodes, u, W);
              c0.segment(9 * c, 9) =
                  project_field(itf, f.What) - project_field(itf, W);
            }
            VecX mu = sd.Sllt.solve(c0 + c_extra -
                                    sd.Zc.transpose() * (sd.r0 + sd.rhs_extra));
            sd.du = y + sd.Zc * mu;
            sd.c_tot = c0 + c_extra;
            sd.lam = mu - sd.beta_rows.cwiseProduct(sd.c_tot);
            if (std::getenv("LATINFE_DEBUG2") && s == 1) {
              MatX S = sd.Ct.transpose() * sd.Zc;
              Eigen::SelfAdjointEigenSolver<MatX> es(S);
              std::fprintf(stderr,
                           "[dbg2] sub %zu |mu| %.3e |lam| %.3e |c0| %.3e "
                           "|c_extra| %.3e S eig [%.3e, %.3e] beta %.3e "
                           "cviol %.3e\n",
                           s, mu.norm(), sd.lam.norm(), c0.norm(),
                           c_extra.norm(), es.eigenvalues().minCoeff(),
                           es.eigenvalues().maxCoeff(), sd.beta_rows[0],
                           (sd.Ct.transpose() * sd.du - c0 - c_extra).norm());
            }
          } else {
            sd.lam.resize(0);
            sd.c_tot.resize(0);
            sd.du = y;
          }
        },
        cfg_.workers);

    // Global step cap: nodal increments bounded by the substructure size.
    double s_glob = 1.0;
    for (int s = 0; s < n_sub; ++s) {
      const auto& sub = decomp_->subs[s];
      double cap = 0.25 * (sub.bb_max - sub.bb_min).norm();
      double dmax = subs[s]->du.size() ? subs[s]->du.cwiseAbs().maxCoeff() : 0;
      if (dmax > cap) s_glob = std::min(s_glob, cap / dmax);
    }

    // Residual of the damped state; lambda and W~ scale with the update.
    // For a linear substructure the momentum residual is exactly (1-s) r0
    // and the constraint violation (1-s) c, so the merit decays as (1-s)^2
    // and the search only bites when geometric nonlinearity does.
    auto eval_phi = [&](double sc, bool commit) {
      std::vector<double> phi(n_sub, 0.0);
      std::vector<char> bad(n_sub, 0);
      parallel_for(
          n_sub,
          [&](std::size_t s) {
            auto& sd = *subs[s];
            VecX u1 = state_.u[s] + sc * sd.du;
            if (sd.kernel->has_inverted_element(u1)) {
              bad[s] = 1;
              return;
            }
            VecX loads = sd.rhs_loads + sc * sd.rhs_extra;
            if (sd.m_c > 0) loads += sc * (sd.Ct * sd.lam);
            VecX r = loads - sd.kernel->internal_force(u1, true);
            for (std::size_t si = 0; si < sd.sides.size(); ++si) {
              const auto& side = sd.sides[si];
              const auto& itf = *side.geo;
              const auto& d = dirs[side.itf];
              std::vector<Vec3> W;
              trace_gps(itf, *side.lnodes, u1, W);
              std::vector<Vec3> kW(itf.n_gps());
              for (int g = 0; g < itf.n_gps(); ++g)
                kW[g] = -(d.k_minus[g] * W[g]);
              if (d.macro_continuity) {
                VecX projW = project_field(itf, W);
                const MatX& G = impl_->iops[side.itf].G;
                const MatX& K9 = impl_->iops[side.itf].K9;
                VecX tmp = G * (K9 * projW);
                const auto& ln = *side.lnodes;
                scatter_load(itf, *side.lnodes, kW, r);
                for (std::size_t in = 0; in < ln.size(); ++in)
                  r.segment<3>(3 * ln[in]) += tmp.segment<3>(3 * in);
              } else {
                scatter_load(itf, *side.lnodes, kW, r);
              }
            }
            double viol = 0.0;
            if (sd.m_c > 0)
              viol = ((1.0 - sc) * sd.beta_rows.cwiseProduct(sd.c_tot)).squaredNorm();
            phi[s] = r.squaredNorm() + viol;
            if (commit) {
              res[s] = r.norm();
              ref[s] = loads.norm() + 1e-30;
              state_.u[s] = u1;
              ++impl_->u_version[s];
            }
          },
          cfg_.workers);
      double total = 0.0;
      for (int s = 0; s < n_sub; ++s) {
        if (bad[s]) return std::numeric_limits<double>::infinity();
        total += phi[s];
      }
      return total;
    };

    double phi0 = 0.0;
    for (int s = 0; s < n_sub; ++s) {
      phi0 += subs[s]->r0.squaredNorm();
      if (subs[s]->m_c > 0)
        phi0 += subs[s]->beta_rows.cwiseProduct(subs[s]->c_tot).squaredNorm();
    }
    double s_acc = s_glob;
    bool found = false;
    for (int trial = 0; trial < 12; ++trial) {
      double phi = eval_phi(s_acc, false);
      bool small_enough =
          phi <= phi0 * (1.0 - 1e-4 * s_acc) || phi <= 1e-24 * (1.0 + phi0);
      if (std::isfinite(phi) && (small_enough || trial == 11)) {
        found = true;
        break;
      }
      s_acc *= 0.5;
    }
    if (!found) throw SolverError("inverted element (det F <= 0)");
    last_line_search_ = s_acc;
    eval_phi(s_acc, true);
    Wt *= s_acc;
    for (int s = 0; s < n_sub; ++s)
      if (subs[s]->lam.size() > 0) subs[s]->lam *= s_acc;

    bool heavy_damping = s_acc < 0.25;
    worst_res = 0.0;
    int worst_sub = -1;
    for (int s = 0; s < n_sub; ++s)
      if (res[s] / ref[s] > worst_res) {
        worst_res = res[s] / ref[s];
        worst_sub = s;
      }
    ++newton_done;
    if (std::getenv("LATINFE_DEBUG") && worst_sub >= 0)
      std::fprintf(stderr,
                   "[dbg]   worst sub %d res %.3e ref %.3e |lam| %.3e\n",
                   worst_sub, res[worst_sub], ref[worst_sub],
                   subs[worst_sub]->lam.size() ? subs[worst_sub]->lam.norm()
                                               : 0.0);
    if (std::getenv("LATINFE_DEBUG")) {
      double dn = 0, d0 = 0;
      for (int s = 0; s < n_sub; ++s) {
        dn = std::max(dn, subs[s]->du.norm());
        d0 = std::max(d0, subs[s]->du0.norm());
      }
      std::fprintf(stderr,
                   "[dbg]   newton %d |du0| %.3e |du| %.3e res %.3e s %.3f\n",
                   newton_done, d0, dn, worst_res, last_line_search_);
    }
    if (!std::isfinite(worst_res))
      throw SolverError("admissibility stage diverged");
    if (worst_res < cfg_.newton_tol) break;
    // A strongly damped step means the linearization is not trustworthy;
    // let the local stage and relaxation clean the state up first.
    if (heavy_damping) break;
  }
  last_newton_residual_ = worst_res;

  // Recover interface fields from the final state.
  const auto& dirs2 = policy_->directions();
  parallel_for(
      decomp_->interfaces.size(),
      [&](std::size_t ii) {
        const auto& itf = decomp_->interfaces[ii];
        auto& st = state_.itf[ii];
        const auto& d = dirs2[ii];
        auto recover = [&](const SideRef& side, SideFields& f) {
          const auto& sd = *impl_->subs[side.is_a ? itf.sub_a : itf.sub_b];
          const VecX& u = state_.u[side.is_a ? itf.sub_a : itf.sub_b];
          std::vector<Vec3> W;
          trace_gps(itf, *side.lnodes, u, W);
          int ofs = impl_->macro_offset[ii];
          VecX wt = ofs >= 0 ? VecX(impl_->Wt.segment(ofs, 9))
                             : VecX(VecX::Zero(9));
          std::vector<Vec3> F(itf.n_gps());
          for (int g = 0; g < itf.n_gps(); ++g) {
            Vec3 wtf = Vec3::Zero();
            if (ofs >= 0)
              for (int m = 0; m < 9; ++m) wtf += wt[m] * itf.basis.modes[m][g];
            F[g] = f.Fhat[g] + d.k_minus[g] * (f.What[g] - W[g] + wtf);
          }
          if (d.macro_continuity) {
            // Micro part from the search direction, macro part = reaction.
            std::vector<Vec3> Ftmp(itf.n_gps());
            for (int g = 0; g < itf.n_gps(); ++g)
              Ftmp[g] = f.Fhat[g] + d.k_minus[g] * (f.What[g] - W[g]);
            VecX pc = project_field(itf, Ftmp);
            int ci = -1;
            for (std::size_t c = 0; c < sd.cons_sides.size(); ++c)
              if (sd.sides[sd.cons_sides[c]].itf == static_cast<int>(ii))
                ci = static_cast<int>(c);
            VecX lamc = VecX::Zero(9);
            if (ci >= 0 && sd.lam.size() > 0)
              lamc = sd.lam.segment(9 * ci, 9);
            for (int g = 0; g < itf.n_gps(); ++g) {
              Vec3 corr = Vec3::Zero();
              for (int m = 0; m < 9; ++m)
                corr += (lamc[m] - pc[m]) * itf.basis.modes[m][g];
              F[g] = Ftmp[g] + corr;
            }
          }
          f.W = W;
          f.F = F;
        };
        SideRef sa{static_cast<int>(ii), true, &itf, &itf.local_a};
        recover(sa, st.a);
        if (itf.interior()) {
          SideRef sb{static_cast<int>(ii), false, &itf, &itf.local_b};
          recover(sb, st.b);
        }
        // Mean nodal displacement for the deformed interface frames.
        for (std::size_t in = 0; in < itf.inodes.size(); ++in) {
          Vec3 ua = state_.u[itf.sub_a].segment<3>(3 * itf.local_a[in]);
          if (itf.interior()) {
            Vec3 ub = state_.u[itf.sub_b].segment<3>(3 * itf.local_b[in]);
            st.mean_nodal[in] = 0.5 * (ua + ub);
          } else {
            st.mean_nodal[in] = ua;
          }
        }
      },
      cfg_.workers);

  // Macro force residual metric.
  double scale = 0.0;
  std::vector<double> ratios(decomp_->interfaces.size(), 0.0);
  for (const auto& itf : decomp_->interfaces) {
    if (impl_->macro_offset[itf.id] < 0) continue;
    const auto& st = state_.itf[itf.id];
    VecX pa = project_field(itf, st.a.F);
    scale = std::max(scale, pa.norm());
  }
  for (const auto& itf : decomp_->interfaces) {
    if (!itf.interior() || impl_->macro_offset[itf.id] < 0) continue;
    const auto& st = state_.itf[itf.id];
    VecX pa = project_field(itf, st.a.F);
    VecX pb = project_field(itf, st.b.F);
    ratios[itf.id] = (pa + pb).norm() / std::max(pa.norm(), 1e-12 * scale + 1e-300);
  }
  last_macro_residual_ = 0.0;
  for (double r : ratios)
    last_macro_residual_ = std::max(last_macro_residual_, r);

  return newton_done;
}

// ---------------------------------------------------------------------------
// Error indicator, relaxation, step driver

double LatinSolver::latin_error() const {
  const auto& dirs = policy_->directions();
  double num = 0.0, den = 0.0;
  for (const auto& itf : decomp_->interfaces) {
    const auto& st = state_.itf[itf.id];
    double kb = dirs[itf.id].k_ref;
    double inum = 0.0, fpart = 0.0, wpart = 0.0;
    auto add = [&](const SideFields& f) {
      for (int g = 0; g < itf.n_gps(); ++g) {
        double w = itf.gps[g].w;
        double fv = w * (f.F[g] - f.Fhat[g]).squaredNorm() / kb;
        double wv = w * kb * (f.W[g] - f.What[g]).squaredNorm();
        num += fv + wv;
        inum += fv + wv;
        fpart += fv;
        wpart += wv;
        den += 0.5 * w * ((f.F[g] + f.Fhat[g]).squaredNorm() / kb +
                          kb * (f.W[g] + f.What[g]).squaredNorm());
      }
    };
    add(st.a);
    if (itf.interior()) add(st.b);
    if (std::getenv("LATINFE_DEBUG3"))
      std::fprintf(stderr, "[dbg3] itf %d beh %d bd %d num %.3e (F %.3e W %.3e)\n",
                   itf.id, (int)itf.behavior, (int)itf.boundary, inum, fpart,
                   wpart);
  }
  if (den <= 0.0)
    return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return std::sqrt(num / den);
}

void relax_fields(LatinState& current, const LatinState& previous, double mu,
                  const Decomposition& decomp) {
  if (!(mu > 0.0) || mu > 1.0) throw InputError("relaxation must be in (0,1]");
  if (mu == 1.0) return;
  for (std::size_t s = 0; s < current.u.size(); ++s)
    current.u[s] = mu * current.u[s] + (1 - mu) * previous.u[s];
  for (const auto& itf : decomp.interfaces) {
    auto& cur = current.itf[itf.id];
    const auto& prev = previous.itf[itf.id];
    for (int g = 0; g < itf.n_gps(); ++g) {
      cur.a.W[g] = mu * cur.a.W[g] + (1 - mu) * prev.a.W[g];
      cur.a.F[g] = mu * cur.a.F[g] + (1 - mu) * prev.a.F[g];
      if (itf.interior()) {
        cur.b.W[g] = mu * cur.b.W[g] + (1 - mu) * prev.b.W[g];
        cur.b.F[g] = mu * cur.b.F[g] + (1 - mu) * prev.b.F[g];
      }
    }
    for (std::size_t in = 0; in < cur.mean_nodal.size(); ++in)
      cur.mean_nodal[in] =
          mu * cur.mean_nodal[in] + (1 - mu) * prev.mean_nodal[in];
  }
}

LatinState LatinSolver::snapshot() const { return state_; }

void LatinSolver::restore(const LatinState& s) {
  state_ = s;
  for (auto& v : impl_->u_version) ++v;
}

bool LatinSolver::attempt_step(const std::vector<double>& from,
                               const std::vector<double>& to, int depth,
                               int step, StepResult& result) {
  LatinState snap = snapshot();
  set_load_factors(to);
  ++impl_->step_key;
  bool ok = false;
  std::string failure;
  try {
    for (int it = 1; it <= cfg_.max_latin_iterations; ++it) {
      auto t0 = std::chrono::steady_clock::now();
      if (total_iterations > 0) {
        std::vector<std::vector<DamageState>> dmg(decomp_->interfaces.size());
        for (const auto& itf : decomp_->interfaces)
          dmg[itf.id] = state_.itf[itf.id].damage;
        policy_->update(total_iterations, impl_->gap_hat, dmg,
                        &policy_events);
      }
      // Stash s_{n-1} for relaxation.
      LatinState prev = state_;

      local_stage();
      int newtons = admissibility_stage();
      double eta = latin_error();
      if (std::getenv("LATINFE_DEBUG")) {
        double umax = 0.0;
        for (const auto& uu : state_.u) umax = std::max(umax, uu.cwiseAbs().maxCoeff());
        std::fprintf(stderr, "[dbg] it %d eta %.3e umax %.3e newton %d res %.2e macro %.2e\n",
                     it, eta, umax, newtons, last_newton_residual_,
                     last_macro_residual_);
      }

      if (cfg_.relaxation < 1.0) {
        relax_fields(state_, prev, cfg_.relaxation, *decomp_);
        for (auto& v : impl_->u_version) ++v;
      }

      ++total_iterations;
      double ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
      result.records.push_back({step, static_cast<int>(result.records.size()) + 1,
                                eta, newtons, newtons, last_macro_residual_,
                                ms});
      result.final_eta = eta;
      if (eta < cfg_.eta_tol) {
        ok = true;
        break;
      }
    }
  } catch (const SolverError& e) {
    failure = e.what();
  }

  if (ok) return true;

  restore(snap);
  set_load_factors(from);
  if (depth >= cfg_.max_bisection) {
    result.failure = failure.empty() ? "iteration cap exceeded" : failure;
    return false;
  }
  ++result.bisections;
  std::vector<double> mid(to.size());
  for (std::size_t i = 0; i < to.size(); ++i)
    mid[i] = 0.5 * (from[i] + to[i]);
  if (!attempt_step(from, mid, depth + 1, step, result)) return false;
  // Commit the half step's damage before continuing.
  for (const auto& itf : decomp_->interfaces)
    if (itf.behavior == InterfaceBehavior::cohesive)
      state_.committed[itf.id] = state_.itf[itf.id].damage;
  return attempt_step(mid, to, depth + 1, step, result);
}

StepResult LatinSolver::run_time_step(int step,
                                      const std::vector<double>& factors,
                                      const std::vector<double>& prev) {
  StepResult result;
  result.converged = attempt_step(prev, factors, 0, step, result);
  result.iterations = static_cast<int>(result.records.size());
  if (result.converged) {
    for (const auto& itf : decomp_->interfaces)
      if (itf.behavior == InterfaceBehavior::cohesive)
        state_.committed[itf.id] = state_.itf[itf.id].damage;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Monitors

double LatinSolver::macro_jump_norm() const {
  double worst = 0.0;
  for (const auto& itf : decomp_->interfaces) {
    if (!itf.interior() || !policy_->directions()[itf.id].macro_continuity)
      continue;
    const auto& st = state_.itf[itf.id];
    std::vector<Vec3> jump(itf.n_gps());
    for (int g = 0; g < itf.n_gps(); ++g) jump[g] = st.b.W[g] - st.a.W[g];
    worst = std::max(worst, project_field(itf, jump).norm());
  }
  return worst;
}

Vec3 LatinSolver::boundary_reaction(const std::string& name) const {
  Vec3 r = Vec3::Zero();
  for (const auto& itf : decomp_->interfaces) {
    if (!itf.boundary || itf.bc_name != name) continue;
    const auto& st = state_.itf[itf.id];
    for (int g = 0; g < itf.n_gps(); ++g) r += itf.gps[g].w * st.a.F[g];
  }
  return r;
}

double LatinSolver::probe_max_abs(int ply, int comp) const {
  double v = 0.0;
  for (const auto& s : decomp_->subs) {
    if (ply >= 0 && s.ply != ply) continue;
    const VecX& u = state_.u[s.id];
    for (std::size_t n = 0; n < s.nodes.size(); ++n)
      v = std::max(v, std::abs(u[3 * n + comp]));
  }
  return v;
}

double LatinSolver::probe_min(int ply, int comp) const {
  double v = std::numeric_limits<double>::max();
  for (const auto& s : decomp_->subs) {
    if (ply >= 0 && s.ply != ply) continue;
    const VecX& u = state_.u[s.id];
    for (std::size_t n = 0; n < s.nodes.size(); ++n)
      v = std::min(v, u[3 * n + comp]);
  }
  return v;
}

Vec3 LatinSolver::probe_node(const Vec3& X) const {
  double best = std::numeric_limits<double>::max();
  Vec3 out = Vec3::Zero();
  for (const auto& s : decomp_->subs) {
    const VecX& u = state_.u[s.id];
    for (std::size_t n = 0; n < s.nodes.size(); ++n) {
      double d = (decomp_->mesh->nodes[s.nodes[n]] - X).squaredNorm();
      if (d < best - 1e-18) {
        best = d;
        out = u.segment<3>(3 * n);
      }
    }
  }
  return out;
}

double LatinSolver::dissipated_energy() const {
  double e = 0.0;
  for (const auto& itf : decomp_->interfaces) {
    if (itf.behavior != InterfaceBehavior::cohesive) continue;
    const auto& dmg = state_.committed[itf.id];
    for (int g = 0; g < itf.n_gps(); ++g)
      e += itf.gps[g].w * dmg[g].dissipated;
  }
  return e;
}

double LatinSolver::damaged_area(double threshold) const {
  double a = 0.0;
  for (const auto& itf : decomp_->interfaces) {
    if (itf.behavior != InterfaceBehavior::cohesive) continue;
    const auto& dmg = state_.committed[itf.id];
    for (int g = 0; g < itf.n_gps(); ++g)
      if (dmg[g].d >= threshold) a += itf.gps[g].w;
  }
  return a;
}

double LatinSolver::crack_front_x(int) const {
  double x = -std::numeric_limits<double>::max();
  for (const auto& itf : decomp_->interfaces) {
    if (itf.behavior != InterfaceBehavior::cohesive) continue;
    const auto& dmg = state_.committed[itf.id];
    for (int g = 0; g < itf.n_gps(); ++g)
      if (dmg[g].d >= 0.999) x = std::max(x, itf.gps[g].X.x());
  }
  return x;
}

LatinSolver::ContactCheck LatinSolver::contact_check() const {
  ContactCheck c;
  c.min_gap = c.min_gap_hat = std::numeric_limits<double>::max();
  double scale = 0.0;
  for (const auto& itf : decomp_->interfaces) {
    if (itf.behavior != InterfaceBehavior::contact) continue;
    const auto& st = state_.itf[itf.id];
    for (int g = 0; g < itf.n_gps(); ++g) {
      InterfaceFrame fr = interface_frame(interface_F(itf, st.mean_nodal, g),
                                          itf.N3, itf.A1, itf.A2);
      double ghat = fr.n3.dot(st.b.What[g] - st.a.What[g]);
      double gw = fr.n3.dot(st.b.W[g] - st.a.W[g]);
      double p = -fr.n3.dot(st.a.Fhat[g]);  // pressure >= 0 when closed
      c.min_gap_hat = std::min(c.min_gap_hat, ghat);
      c.min_gap = std::min(c.min_gap, gw);
      c.min_pressure_hat = std::min(c.min_pressure_hat, p);
      scale = std::max({scale, std::abs(ghat) * std::abs(p), 1e-300});
      c.max_complementarity =
          std::max(c.max_complementarity, std::abs(ghat * p));
    }
  }
  if (scale > 0.0) c.max_complementarity /= scale;
  if (c.min_gap == std::numeric_limits<double>::max())
    c.min_gap = c.min_gap_hat = 0.0;
  return c;
}

}  // namespace latinfe
