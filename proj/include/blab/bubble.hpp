#pragma once

#include <span>
#include <vector>

namespace blab {

/// Base-manifold dimension. Bubble formulas need m >= 3; the asymptotic
/// machinery further restricts (see require_at_least).
struct Dimension {
  int m;
  explicit Dimension(int m_);
  double two_star() const { return 2.0 * m / (m - 2.0); }
  double alpha() const;  // (m(m-2))^{(m-2)/4}
  void require_at_least(int mmin, const char* what) const;
};

/// Concentration parameters of a rescaled bubble: scale delta and center
/// offset eta (in rescaled coordinates, so the physical center is delta*eta).
struct BubbleParams {
  double delta;
  std::vector<double> eta;
  BubbleParams(double delta_, std::vector<double> eta_);
};

/// One radial moment integral I^q_p = int_0^inf r^q/(1+r)^p dr, computed by
/// the Gamma closed form and independently by adaptive quadrature.
struct MomentIntegral {
  double p, q;
  double value;            // Gamma-function route
  double value_quadrature; // adaptive quadrature route
  bool recurrences_ok;     // both shift identities to 1e-12
};

// ---- closed-form bubble profiles -----------------------------------------

double bubble_profile(const Dimension& m, double r);        // U(r)
double bubble_profile_d1(const Dimension& m, double r);     // U'(r)
double bubble_profile_d2(const Dimension& m, double r);     // U''(r)
double bubble_profile_d3(const Dimension& m, double r);     // U'''(r)
double bubble_dprofile_over_r(const Dimension& m, double r);// U'(r)/r, regular at 0
double bubble_laplacian(const Dimension& m, double r);      // U'' + (m-1)U'/r

double kernel0_profile(const Dimension& m, double r);       // V_0(r)
double kernel0_profile_d1(const Dimension& m, double r);
double kernel0_profile_d2(const Dimension& m, double r);

// ---- point evaluations ----------------------------------------------------

double bubble_eval(const Dimension& m, std::span<const double> z);
double bubble_rescaled(const Dimension& m, const BubbleParams& p,
                       std::span<const double> z);
/// V_i at a point; i = 0 is the dilation kernel, 1..m the translations.
double kernel_eval(const Dimension& m, int i, std::span<const double> z);
/// Cartesian gradient of V_i at a point.
std::vector<double> kernel_gradient(const Dimension& m, int i,
                                    std::span<const double> z);

// ---- residuals ------------------------------------------------------------

/// max_j |Lap U + U^{2*-1}| / max U^{2*-1} over n uniform radial nodes on
/// [0, r_max], all derivatives analytic.
double bubble_residual(const Dimension& m, int n_nodes, double r_max);

/// Same contract for the linearized equation -Lap psi = (2*-1) U^{2*-2} psi
/// with psi = V_i.
double kernel_residual(const Dimension& m, int i, int n_nodes, double r_max);

// ---- moments and constants ------------------------------------------------

MomentIntegral moment_integral(double p, double q);

struct SphereConstants {
  double omega_m;        // volume of the unit m-sphere S^m
  double omega_m_minus_1;
  double K_m;            // sqrt(4/(m(m-2) omega_m^{2/m}))
  double K_pow_minus_m;  // K_m^{-m}
};
SphereConstants sphere_constants(const Dimension& m);

/// Whole-space moments of the bubble. Every field carries two routes:
/// Gamma closed form (value) and adaptive radial quadrature (quadrature).
struct BubbleMoments {
  double grad2;        // int |grad U|^2
  double pow2s;        // int U^{2*}
  double grad2_r2;     // int |z|^2 |grad U|^2      (m >= 5)
  double pow2s_r2;     // int |z|^2 U^{2*}
  double sq;           // int U^2                   (m >= 5)
  double quartic_iiii; // int (U'/|z|)^2 z_1^4      (m >= 5)
  double quartic_iijj; // int (U'/|z|)^2 z_1^2 z_2^2
};
BubbleMoments bubble_moments(const Dimension& m);            // closed forms
BubbleMoments bubble_moments_quadrature(const Dimension& m); // GK route

/// D^{1,2} norm squared of the kernel V_i, by quadrature.
double kernel_d12_norm2(const Dimension& m, int i);

/// Angular fourth moment over S^{m-1} by nested quadrature:
/// pattern 0 -> E[w_1^4], 1 -> E[w_1^2 w_2^2], 2 -> E[w_1^3 w_2] (odd, = 0).
double sphere_fourth_moment(const Dimension& m, int pattern);

struct FourthMomentReport {
  double quartic_ratio;        // quartic_iiii / quartic_iijj, want 3
  double decomposition_err;    // max rel error of the isotropic decomposition
  double trace_identity_err;   // (c) rel error
  double odd_pattern;          // |E[w^3 w]| (want ~0)
  bool all_pass(double tol) const;
};
/// Verifies the fourth-moment identities used by the energy expansion, by
/// radial + angular quadrature. Requires m >= 5 (integrability).
FourthMomentReport fourth_moment_checks(const Dimension& m, double tol = 1e-9);

}  // namespace blab
