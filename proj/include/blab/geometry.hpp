#pragma once

#include <span>
#include <vector>

#include "blab/bubble.hpp"
#include "blab/poly.hpp"

namespace blab {

/// Quintic-smoothstep cutoff: 1 on [0, r/2], 0 beyond r, C^2, |chi'| <= 2/r.
struct Cutoff {
  double radius = 1.0;
  double value(double rho) const;
  double d1(double rho) const;
  double d2(double rho) const;
};

/// Chart-level model of (M, g) at a point xi_0, in normal coordinates:
/// the metric enters only through its inverse-metric second derivatives
/// H[i][j][r][k] = d^2 g^{ij} / dy_r dy_k (0); the weight a through its
/// 2-jet, the potential through h(xi_0).
class ManifoldModel {
 public:
  ManifoldModel(int m, std::vector<double> metric_hessian, double a0,
                std::vector<double> a_grad, std::vector<double> a_hess,
                double h0, double injectivity_radius);

  int dim() const { return m_; }
  double H(int i, int j, int r, int k) const {
    return H_[((size_t(i) * m_ + j) * m_ + r) * m_ + k];
  }
  double a0() const { return a0_; }
  double h0() const { return h0_; }
  const std::vector<double>& a_grad() const { return a_grad_; }
  const std::vector<double>& a_hess() const { return a_hess_; }
  double injectivity_radius() const { return r_; }
  const Cutoff& cutoff() const { return cutoff_; }

  bool a_critical(double tol = 0.0) const;
  double a_laplacian() const;  // tr a_hess

  /// delta_ij + (1/2) H[i][j][r][k] y_r y_k ; throws outside the chart.
  std::vector<double> metric_inverse_at(std::span<const double> y) const;
  /// 1 - (1/4) sum_s H[s][s][r][k] y_r y_k
  double sqrt_det_g(std::span<const double> y) const;
  /// sum H[i][i][j][j] - sum H[i][j][i][j]
  double scalar_curvature() const;

  // contractions used by the energy expansion
  double contraction_iikk() const;  // sum_{i,k} H[i][i][k][k]
  double contraction_ijij() const;  // sum_{i,j} H[i][j][i][j]
  /// eta^T Hb eta with Hb_{rk} = sum_s H[s][s][r][k]
  double hb_quadratic(std::span<const double> eta) const;
  double a_hess_quadratic(std::span<const double> eta) const;

 private:
  void check_chart(std::span<const double> y) const;
  int m_;
  std::vector<double> H_;
  double a0_;
  std::vector<double> a_grad_, a_hess_;
  double h0_;
  double r_;
  Cutoff cutoff_;
};

// model catalog
ManifoldModel flat_model(int m, double a0 = 1.0,
                         std::vector<double> a_hess = {}, double h0 = 0.0,
                         double inj_radius = 1.0);
/// Round sphere of radius rho: H[i][j][r][k] = (2 d_ij d_rk - d_ir d_jk
/// - d_ik d_jr) / (3 rho^2).
ManifoldModel round_sphere_model(int m, double radius = 1.0, double h0 = 0.0,
                                 double inj_radius = 1.0);
/// Randomized symmetric jet, magnitudes ~ scale; deterministic in seed.
ManifoldModel random_jet_model(int m, unsigned seed, double scale = 0.3,
                               double h0 = 0.0);

/// Warped product M x_omega K: base jet data for omega plus fiber dim.
struct WarpedProduct {
  int m;                         // dim of the base M
  int fiber_dim;                 // dim of K
  double omega0;                 // omega(xi_0) > 0
  std::vector<double> omega_grad;
  std::vector<double> omega_hess;
  bool h_invariant = true;
  double h0 = 0.0;
  double base_h0() const { return h0; }

  bool minimal_fiber(double tol = 0.0) const;
  /// max |induced-a identity defect| over value/grad/hess entries for the
  /// weight a = omega^m (the convention used throughout this project).
  double weight_consistency_error() const;
};

/// Jet of a = omega^m at xi_0: (a0, a_grad, a_hess). Throws when h is not
/// fiber-invariant.
ManifoldModel reduce_to_anisotropic(const WarpedProduct& wp,
                                    double inj_radius = 1.0);

/// Exact polynomial identity div(omega^p grad v) = omega^p (Lap v +
/// (p/omega) grad omega . grad v): returns the max |coefficient| of the
/// defect polynomial (0 means the identity holds exactly).
double divergence_form_identity_defect(const Poly& omega, const Poly& v,
                                       int nvars, int p);

/// Discretized product-chart check of the warped-Laplacian reduction with a
/// fiber of dimension k: max over interior base nodes of
///   | FD[ Lap_{g + omega^2 kappa} u ] - (Lap u + (coeff/omega) grad omega .
///   grad u) |
/// for fiber-invariant polynomial u on a flat base chart of dimension
/// base_dim. FD is a second-order conservative stencil; fiber directions of
/// the product stencil vanish identically for invariant u, leaving the
/// omega^k-weighted base operator.
double warped_laplacian_check(const Poly& omega, const Poly& u, int base_dim,
                              int fiber_dim, double coeff, int n_per_axis,
                              double box = 0.5);

}  // namespace blab
