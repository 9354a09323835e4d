#pragma once

#include <functional>
#include <vector>

namespace blab {

/// Adaptive Gauss-Kronrod 15(7) quadrature on [a,b].
/// Splits the worst interval until the summed error estimate meets
/// abs_tol + rel_tol*|integral|.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, double abs_tol = 0.0,
                 int max_intervals = 4000);

/// Integrate over [pts.front(), pts.back()] with interior breakpoints
/// (peaks, cutoff corners).
double integrate_segmented(const std::function<double(double)>& f,
                           const std::vector<double>& pts,
                           double rel_tol = 1e-12, double abs_tol = 0.0);

/// Radial integral on [0, infinity) of an integrand that decays like
/// r^{-decay} for large r: integrates on [0,R] where R doubles until the
/// analytic tail bound |f(R)|*R/(decay-1) is below tail_tol relative to
/// the partial sum. Requires decay > 1.
double integrate_radial_tail(const std::function<double(double)>& f,
                             const std::vector<double>& inner_pts,
                             double decay, double r_start = 64.0,
                             double rel_tol = 1e-12, double tail_tol = 1e-14);

}  // namespace blab
