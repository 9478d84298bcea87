#pragma once

// Test-only brute-force oracle: a 1D Euler-Bernoulli FE model of one DCB arm
// resting on an elastic foundation ahead of the crack tip. Used to check the
// closed-form compliance and the compliance-differentiation propagation load
// independently of any production code path.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>

namespace testsupport {

struct BeamFoundation {
  double E, b, h, k_n0, length;
  int n_elem;

  // Per-arm compliance for crack length a (foundation active for x > a).
  double compliance(double a) const {
    using Eigen::VectorXd;
    double I = b * h * h * h / 12.0;
    double kf = 2.0 * b * k_n0;
    double le = length / n_elem;
    int ndof = 2 * (n_elem + 1);
    std::vector<Eigen::Triplet<double>> trips;
    auto add4 = [&](int e, const Eigen::Matrix4d& ke) {
      int base = 2 * e;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          trips.emplace_back(base + i, base + j, ke(i, j));
    };
    Eigen::Matrix4d kb;
    double c = E * I / (le * le * le);
    kb << 12, 6 * le, -12, 6 * le,                      //
        6 * le, 4 * le * le, -6 * le, 2 * le * le,      //
        -12, -6 * le, 12, -6 * le,                      //
        6 * le, 2 * le * le, -6 * le, 4 * le * le;
    kb *= c;
    Eigen::Matrix4d kfm;
    kfm << 156, 22 * le, 54, -13 * le,                    //
        22 * le, 4 * le * le, 13 * le, -3 * le * le,      //
        54, 13 * le, 156, -22 * le,                       //
        -13 * le, -3 * le * le, -22 * le, 4 * le * le;
    kfm *= kf * le / 420.0;
    for (int e = 0; e < n_elem; ++e) {
      add4(e, kb);
      double x0 = e * le;
      if (x0 >= a - 1e-12) add4(e, kfm);
    }
    VectorXd f = VectorXd::Zero(ndof);
    f(0) = 1.0;  // unit tip load
    // Clamp the far end by dropping its two dofs.
    int nf = ndof - 2;
    Eigen::SparseMatrix<double> K(nf, nf);
    std::vector<Eigen::Triplet<double>> red;
    for (const auto& t : trips)
      if (t.row() < nf && t.col() < nf) red.push_back(t);
    K.setFromTriplets(red.begin(), red.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
    VectorXd w = ldlt.solve(f.head(nf));
    return w(0);
  }

  // Propagation load from numeric differentiation of the compliance,
  // G = P^2/b * dC/da (total opening is twice the per-arm one).
  double propagation_load(double a, double Yc) const {
    double da = 2.0 * length / n_elem;
    double dCda = (compliance(a + da) - compliance(a - da)) / (2.0 * da);
    if (dCda <= 0.0) throw std::runtime_error("non-positive dC/da");
    return std::sqrt(b * Yc / dCda);
  }
};

}  // namespace testsupport
