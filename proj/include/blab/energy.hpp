#pragma once

#include <optional>
#include <span>
#include <vector>

#include "blab/geometry.hpp"
#include "blab/radial.hpp"

namespace blab {

// Closed-form constants of the expansion scale.
double a_m_constant(int m);  // K_m^{-m} / m, the leading energy level
double b_m_constant(int m);  // a_m (m-2)^2 / 8, the eps log|eps| level

/// Weight of Lap a / a inside the concentration threshold. The quadrature
/// value of the underlying moment bracket fixes this to 3(m-2)/(4(m-1));
/// see laplacian_moment_bracket.
double laplacian_threshold_weight(int m);

/// Geometric threshold Theta(xi_0) = h - (m-2)/(4(m-1)) S_g
///   + laplacian_threshold_weight * Lap a / a. Requires grad a(xi_0) = 0.
double concentration_threshold(const ManifoldModel& model);

/// Reduced concentration energy: Phi(t, eta) = {c_lin(theta) +
/// (1/2) eta . (D^2 a / a) eta} t - sign_eps (m-2)^2/8 log t.
struct ReducedEnergyFn {
  int m;
  double theta;
  std::vector<double> a_hess_normalized;  // D^2 a (xi_0) / a(xi_0), m x m
  int sign_eps;                            // +1 subcritical, -1 supercritical

  static ReducedEnergyFn from_model(const ManifoldModel& model, int sign_eps);
  double linear_coeff(std::span<const double> eta) const;
  double eval(double t, std::span<const double> eta) const;
  std::vector<double> gradient(double t, std::span<const double> eta) const;
};

struct CriticalPoint {
  double t0;
  std::vector<double> eta0;  // always 0
  bool nondegenerate;
};
/// Interior critical point of Phi; throws when the signs of theta and eps
/// are incompatible (no blow-up regime).
CriticalPoint critical_point(const ReducedEnergyFn& fn);

/// Solve/refuse decision of the regime logic: true iff sign(theta) matches
/// sign_eps (subcritical needs theta > 0, supercritical theta < 0).
bool regime_admits_solution(double theta, int sign_eps);

// ---- moment brackets (radial quadrature; adjudicate the expansion) -------

/// (m-2)/(8m) int U^{2*} + (1/4) int (U'/|z|)^2 z_i^2 - (1/8) int (U')^2;
/// vanishes identically.
double vanishing_eta_bracket(int m);
/// (1/(4m)) int |z|^2 |grad U|^2 - ((m-2)/(4m^2)) int |z|^2 U^{2*}.
/// Quadrature value; equals 3 K_m^{-m} / (2 m (m-4)).
double laplacian_moment_bracket(int m);
/// (1/4) int |grad U|^2 - ((m-2)/(4m)) int U^{2*} = K_m^{-m} / (2m).
double hessian_moment_bracket(int m);

// ---- energies --------------------------------------------------------------

struct EnergyBreakdown {
  double total;
  double level;      // a0 * (kinetic+potential at eps order 0)
};

/// High-accuracy chart energy of the bubble ansatz W_{delta(eps,t), eta} for
/// a jet model (metric jet + quadratic weight + constant h), by adaptive
/// radial quadrature with exact angular contractions. Exact in the eps
/// powers; truncation O(delta^4) from jets beyond second order.
double ansatz_energy(const ManifoldModel& model, double eps, double t,
                     std::span<const double> eta);

/// Grid-quadrature energy of an arbitrary radial field (Simpson weights).
double energy_exact(const RadialGrid& grid, const std::vector<double>& w,
                    double eps);

/// Bubble ansatz on a radial grid; enforces the resolution guard
/// (>= 8 nodes per delta) and the t-window.
RadialField build_W(const ManifoldModel& model, double eps, double t,
                    int nodes_per_delta = 16, double L = 2.0,
                    double t_lo = 0.05, double t_hi = 8.0);

// ---- expansion fit ----------------------------------------------------------

struct ExpansionCoeffs {
  double a_m, b_m, c_m, d_m_phi;  // d_m_phi = |eps|-column (d_m * Phi-linear)
  double max_residual;            // worst |fit - data| over the ladder
  double rel_residual;
};

struct ExpansionReport {
  std::vector<double> eps;
  std::vector<double> energy;
  std::vector<double> fit_residual;
  ExpansionCoeffs coeffs;   // per unit a(xi_0)
  double t, a0;
};

/// Least-squares fit of the ansatz energy against {1, e log|e|, e, |e|}
/// (nuisance columns of the next order absorb the e^2 log^2 remainder;
/// weights 1/e^2). eps_ladder may be one- or two-sided.
ExpansionReport expansion_fit(const ManifoldModel& model, double t,
                              std::span<const double> eta,
                              std::span<const double> eps_ladder);

/// d_m extracted from the eps-column's log t structure at two t values.
double fit_d_m(const ManifoldModel& model, std::span<const double> eps_ladder,
               double t1 = 1.0, double t2 = 2.0);

}  // namespace blab
