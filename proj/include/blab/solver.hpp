#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blab/energy.hpp"
#include "blab/geometry.hpp"
#include "blab/radial.hpp"
#include "blab/tensor.hpp"

namespace blab {

struct SolveOptions {
  int nodes_per_delta = 64;
  double max_spacing = 1.0e-3;
  double L = 2.0;
  double fp_tol = 1e-11;
  int fp_max_iter = 80;
  double newton_tol = 1e-8;   // on the reduced gradient scale
  double t_lo = 0.05, t_hi = 8.0;
};

/// State of one kernel-orthogonal correction solve at fixed (eps, t).
struct LSState {
  double eps = 0.0, t = 0.0;
  std::vector<double> eta;               // radialized runs: identically 0
  std::vector<double> correction;        // the orthogonal correction Phi
  std::vector<double> multipliers;       // lambda_j (radial sector: j = 0)
  double residual_H = 0.0;               // K-perp strong residual, V-norm
  int iterations = 0;
  double contraction_ratio = 0.0;        // max measured step ratio
  double norm_phi_H = 0.0;
  double norm_R = 0.0;                   // strong defect of the ansatz alone
  double orthogonality_rel = 0.0;        // |<Phi, Z0>_H| / (|Phi| |Z0|)
  double reduced_energy = 0.0;           // J_eps(W + Phi), hybrid quadrature
  double reduced_gradient_t = 0.0;       // dJ/dt via the multiplier identity
  bool converged = false;
};

/// Radialized Lyapunov-Schmidt reduction on a single normal-coordinate
/// chart: rotationally symmetric models, l = 0 sector, center offset 0.
class RadialReduction {
 public:
  RadialReduction(const ManifoldModel& model, SolveOptions opt = {});

  const RadialChartModel& chart() const { return chart_; }
  const SolveOptions& options() const { return opt_; }

  /// Contraction fixed point for the correction at fixed (eps, t).
  LSState correction_fixed_point(double eps, double t) const;

  /// Locates t_eps where the multiplier vanishes (secant), starting from
  /// the closed-form critical point. Returns the converged state at t_eps.
  struct ReducedSolve {
    double t_eps;
    LSState state;
    std::vector<double> u;  // assembled solution W + Phi
    int evaluations;
  };
  ReducedSolve reduced_solve(double eps, std::optional<double> t_guess = {}) const;

  struct ResidualReport {
    double residual_rel;        // |Au - a f_eps(u)| / |a f_eps(u)|, V-norms
    double argmax_rho;          // location of the solution maximum
    double width_over_sqrt_eps; // half-max width estimator / sqrt|eps|
    double min_value;           // positivity check
  };
  ResidualReport verify_solution(double eps, const std::vector<double>& u,
                                 const RadialGrid& grid) const;

  /// |grad a . grad W|_{L^q} with q = m s_eps / (m + 2 s_eps).
  double grad_weight_defect_norm(double eps, double t) const;

  std::shared_ptr<const RadialGrid> grid_for(double eps, double t) const;

 private:
  struct Scalars;  // per-(eps,t) analytic quadrature bundle
  Scalars make_scalars(const RadialGrid& g, double eps, double t) const;
  LSState fixed_point_on(const RadialGrid& g, const Scalars& sc, double eps,
                         double t) const;

  ManifoldModel model_;
  RadialChartModel chart_;
  SolveOptions opt_;
};

double s_epsilon(int m, double eps);  // L^{s_eps} exponent of the norm pair

/// f minus its H-orthogonal projection onto span{Z_0, ..., Z_k}, via the
/// Gram system in the grid's cell inner product.
std::vector<double> project_perp(const RadialGrid& grid,
                                 const std::vector<std::vector<double>>& zs,
                                 const std::vector<double>& f);

/// Full tensor-grid reduction demo at fixed (eps, t): kernel-orthogonal
/// fixed point with a bordered MINRES solve per iteration.
struct TensorDemo {
  int iterations = 0;
  double contraction_ratio = 0.0;
  double phi_norm_H = 0.0;
  std::vector<double> multipliers;
  double residual_rel = 0.0;       // strong residual of W + Phi
  double argmax_offset_cells = 0.0;
  double min_u = 0.0, max_u = 0.0;
  bool converged = false;
  int minres_iterations = 0;
};
TensorDemo run_tensor_demo(const ManifoldModel& model,
                           const TensorChartSpec& spec, double eps, double t,
                           double fp_tol = 1e-7, int max_iter = 60);

}  // namespace blab
