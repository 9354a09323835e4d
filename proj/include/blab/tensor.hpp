#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "blab/geometry.hpp"

namespace blab {

/// Full tensor-product chart in m dimensions. Coordinates are sinh-graded
/// per axis (kappa > 0) so the concentration scale stays resolved near the
/// origin, with homogeneous Dirichlet closure at the box edge; kappa = 0
/// gives a uniform grid. Node count n per axis (no node sits at the origin
/// when n is even, which keeps the l=1 kernel formulas regular).
struct TensorChartSpec {
  int m = 5;
  int n = 24;
  double L = 0.9;
  double kappa = 3.8;
  double r_cut = 0.72;
};

class TensorChart {
 public:
  TensorChart(const TensorChartSpec& spec, const ManifoldModel& model);

  const TensorChartSpec& spec() const { return spec_; }
  size_t size() const { return total_; }
  double min_spacing() const { return min_dy_; }

  double coord(int j) const { return y_[j + 1]; }
  void node_point(size_t idx, std::vector<double>& y) const;

  double weight_at(const std::vector<double>& y) const;   // a(y), tapered
  double cell_volume(size_t idx) const;

  /// -div(a grad u) + a h u, conservative mapped stencil, Dirichlet edges.
  void apply_operator(const std::vector<double>& u,
                      std::vector<double>& out) const;
  double dot_cells(const std::vector<double>& u,
                   const std::vector<double>& v) const;
  double inner_H(const std::vector<double>& u,
                 const std::vector<double>& v) const;
  double norm_H(const std::vector<double>& u) const;

  /// Nodal samples of a radial profile f(|y|).
  std::vector<double> sample_radial(const std::function<double(double)>& f) const;
  /// Nodal samples of f(|y|) * y_i/|y| (the l = 1 sector).
  std::vector<double> sample_l1(const std::function<double(double)>& f,
                                int axis) const;

  /// Preconditioned MINRES on the bordered system
  ///   [A + diag(shift)] x - sum_j lambda_j c_j = rhs,  c_j . x = 0,
  /// all in the sqrt(cell)-symmetrized variables. Returns (x, lambda).
  struct BorderedResult {
    std::vector<double> x;
    std::vector<double> lambda;
    int iterations;
    double rel_residual;
  };
  BorderedResult solve_bordered(const std::vector<double>& diag_shift,
                                const std::vector<double>& rhs,
                                const std::vector<std::vector<double>>& border,
                                double rel_tol, int max_iter,
                                const std::vector<double>* x0 = nullptr) const;

 private:
  void build_caches();
  TensorChartSpec spec_;
  int m_, n_;
  size_t total_;
  std::vector<double> y_;      // n+2 node coords incl. Dirichlet ghosts
  std::vector<double> cellw_;  // per-axis cell widths (n entries)
  std::vector<double> dyp_;    // y_{j+1} - y_j for j = -1..n-1 (n+1 entries)
  double min_dy_;
  double a0_, h0_;
  std::vector<double> a_hess_;
  double taper_lo_, taper_hi_;
  // operator caches: upper-face flux coefficients per axis, node weights,
  // cell volumes, and the lower-edge faces of the first layer
  std::vector<std::vector<double>> cup_;
  std::vector<std::vector<double>> cdown0_;
  std::vector<double> anode_, vol_;
};

/// Streamed midpoint quadrature of the bubble-ansatz energy on a uniform
/// m-dimensional box (no field storage); flat metric, quadratic weight.
double tensor_ansatz_energy(const ManifoldModel& model, double eps, double t,
                            std::span<const double> eta, int n_per_axis,
                            double box_half_width);

/// Periodic uniform-grid operator -div(a grad u) + a h u with constant a, h
/// (the spectral closure used by the adjoint oracle test), plus a CG solve.
struct PeriodicBox {
  int m, n;
  double L;  // box is [0, L)^m
  double a, h;
  void apply(const std::vector<double>& u, std::vector<double>& out) const;
  std::vector<double> solve(const std::vector<double>& rhs, double rel_tol,
                            int max_iter) const;
  double symbol(const std::vector<int>& k) const;  // discrete eigenvalue
  size_t size() const;
};

}  // namespace blab
