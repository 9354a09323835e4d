#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "blab/geometry.hpp"

namespace blab {

/// Radial restriction of a chart model: weight profile a(rho) that matches
/// the jet a0 + (tr a_hess / (2m)) |y|^2 ... inside the chart and tapers to a
/// constant before the domain edge, plus a constant potential h. Requires an
/// isotropic weight Hessian and a flat metric jet (the radialized solver's
/// symmetry assumption).
struct RadialChartModel {
  int m;
  double a0, a_quad;  // a(rho) = a0 + 0.5*a_quad*rho^2*taper(rho)
  double h0;
  double r_cut;       // cutoff radius (= injectivity radius of the chart)
  double L;           // outer radius of the computational ball
  double taper_lo, taper_hi;

  static RadialChartModel from_model(const ManifoldModel& model, double L);

  double a(double rho) const;
  double a_deriv(double rho) const;
  double chi(double rho) const;
  double chi_d1(double rho) const;
  double chi_d2(double rho) const;
};

/// Uniform radial grid on [0, L) with Dirichlet closure at L.
/// Finite-volume cell weights vol[] define the discrete operator's inner
/// product; Simpson weights wq[] (both including rho^{m-1}) are the
/// higher-order measurement quadrature.
struct RadialGrid {
  RadialChartModel model;
  int n = 0;
  double d = 0.0;
  std::vector<double> rho, vol, wq, a_node, flux_coeff;  // flux at i+1/2

  RadialGrid(const RadialChartModel& mod, int n_nodes);

  /// -(1/rho^{m-1}) d/drho (a rho^{m-1} u') + a h u, conservative stencil.
  std::vector<double> apply_operator(const std::vector<double>& u) const;
  /// V-weighted dot; the discrete operator is self-adjoint under it.
  double dot_cells(const std::vector<double>& u,
                   const std::vector<double>& v) const;
  /// Simpson-weighted dot for measurements.
  double dot_quad(const std::vector<double>& u,
                  const std::vector<double>& v) const;
  double inner_H(const std::vector<double>& u,
                 const std::vector<double>& v) const;
  double norm_H(const std::vector<double>& u) const;
  double norm_Ls(const std::vector<double>& u, double s) const;

  /// Solves (A + diag(shift)) x = rhs for several right-hand sides.
  /// Tridiagonal LU with partial pivoting.
  std::vector<std::vector<double>> solve_shifted(
      const std::vector<double>& diag_shift,
      const std::vector<std::vector<double>>& rhs) const;
};

/// Field on a radial grid (the l = 0 sector of a chart field).
struct RadialField {
  std::shared_ptr<const RadialGrid> grid;
  std::vector<double> v;
};

/// Bubble ansatz profiles and their analytic derivatives on the chart.
struct AnsatzProfile {
  // value, first and second radial derivative of chi(rho) s F(rho/delta)
  std::function<double(double)> f, f1, f2;
};
AnsatzProfile make_bubble_ansatz(const RadialChartModel& mod, int m,
                                 double delta);
AnsatzProfile make_kernel0_ansatz(const RadialChartModel& mod, int m,
                                  double delta);

/// (-a Lap - a' d/drho + a h) applied to an analytic profile, nodal values.
std::vector<double> apply_operator_analytic(const RadialGrid& g,
                                            const AnsatzProfile& p);

}  // namespace blab
