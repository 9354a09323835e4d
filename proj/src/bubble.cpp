#include "blab/bubble.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "blab/quadrature.hpp"

namespace blab {

namespace {
constexpr double kPi = std::numbers::pi;

double norm2(std::span<const double> z) {
  double s = 0.0;
  for (double v : z) s += v * v;
  return s;
}

// 1/2 * I^{(s-1)/2}_w  =  int_0^inf r^s (1+r^2)^{-w} dr
double radial_power_integral(double s, double w) {
  const double q = 0.5 * (s - 1.0);
  if (!(w - q > 1.0) || !(q > -1.0))
    throw std::domain_error("radial power integral diverges");
  return 0.5 * std::exp(std::lgamma(q + 1.0) + std::lgamma(w - q - 1.0) -
                        std::lgamma(w));
}

}  // namespace

Dimension::Dimension(int m_) : m(m_) {
  if (m < 3)
    throw std::domain_error("dimension must be at least 3, got " +
                            std::to_string(m));
}

double Dimension::alpha() const {
  return std::pow(double(m) * (m - 2), 0.25 * (m - 2));
}

void Dimension::require_at_least(int mmin, const char* what) const {
  if (m < mmin)
    throw std::domain_error(std::string(what) + " requires dimension >= " +
                            std::to_string(mmin) + ", got " + std::to_string(m));
}

BubbleParams::BubbleParams(double delta_, std::vector<double> eta_)
    : delta(delta_), eta(std::move(eta_)) {
  if (!(delta > 0.0)) throw std::domain_error("bubble scale must be positive");
}

// U(r) = alpha (1+r^2)^{-(m-2)/2}; all derivatives in closed form. The
// apparent 1/r singularities cancel analytically (U'/r is smooth).
double bubble_profile(const Dimension& d, double r) {
  return d.alpha() * std::pow(1.0 + r * r, -0.5 * (d.m - 2));
}
double bubble_profile_d1(const Dimension& d, double r) {
  return -d.alpha() * (d.m - 2) * r * std::pow(1.0 + r * r, -0.5 * d.m);
}
double bubble_profile_d2(const Dimension& d, double r) {
  const double r2 = r * r;
  return -d.alpha() * (d.m - 2) * std::pow(1.0 + r2, -0.5 * d.m - 1.0) *
         (1.0 + (1.0 - d.m) * r2);
}
double bubble_profile_d3(const Dimension& d, double r) {
  const double r2 = r * r;
  return -d.alpha() * (d.m - 2) *
         (std::pow(1.0 + r2, -0.5 * d.m - 1.0) * 2.0 * (1.0 - d.m) * r +
          (-0.5 * d.m - 1.0) * std::pow(1.0 + r2, -0.5 * d.m - 2.0) * 2.0 * r *
              (1.0 + (1.0 - d.m) * r2));
}
double bubble_dprofile_over_r(const Dimension& d, double r) {
  return -d.alpha() * (d.m - 2) * std::pow(1.0 + r * r, -0.5 * d.m);
}
double bubble_laplacian(const Dimension& d, double r) {
  return bubble_profile_d2(d, r) + (d.m - 1) * bubble_dprofile_over_r(d, r);
}

double kernel0_profile(const Dimension& d, double r) {
  const double r2 = r * r;
  return 0.5 * (d.m - 2) * d.alpha() * (r2 - 1.0) *
         std::pow(1.0 + r2, -0.5 * d.m);
}
double kernel0_profile_d1(const Dimension& d, double r) {
  const double r2 = r * r;
  const double A = d.m + 2.0, B = 2.0 - d.m;
  return 0.5 * (d.m - 2) * d.alpha() * r *
         std::pow(1.0 + r2, -0.5 * d.m - 1.0) * (A + B * r2);
}
double kernel0_profile_d2(const Dimension& d, double r) {
  const double r2 = r * r;
  const double A = d.m + 2.0, B = 2.0 - d.m;
  const double q2 = d.m + 2.0;  // 2*(m/2+1)
  return 0.5 * (d.m - 2) * d.alpha() * std::pow(1.0 + r2, -0.5 * d.m - 2.0) *
         ((1.0 + r2) * (A + 3.0 * B * r2) - q2 * r2 * (A + B * r2));
}

double bubble_eval(const Dimension& d, std::span<const double> z) {
  return bubble_profile(d, std::sqrt(norm2(z)));
}

double bubble_rescaled(const Dimension& d, const BubbleParams& p,
                       std::span<const double> z) {
  if (p.eta.size() != size_t(d.m))
    throw std::invalid_argument("center offset has wrong dimension");
  double s = 0.0;
  for (int i = 0; i < d.m; ++i) {
    const double u = z[i] / p.delta - p.eta[i];
    s += u * u;
  }
  return std::pow(p.delta, -0.5 * (d.m - 2)) * bubble_profile(d, std::sqrt(s));
}

double kernel_eval(const Dimension& d, int i, std::span<const double> z) {
  if (i < 0 || i > d.m)
    throw std::out_of_range("kernel index must lie in 0..m");
  const double r = std::sqrt(norm2(z));
  if (i == 0) return kernel0_profile(d, r);
  return bubble_dprofile_over_r(d, r) * z[i - 1];
}

std::vector<double> kernel_gradient(const Dimension& d, int i,
                                    std::span<const double> z) {
  if (i < 0 || i > d.m)
    throw std::out_of_range("kernel index must lie in 0..m");
  const double r2 = norm2(z), r = std::sqrt(r2);
  std::vector<double> g(d.m, 0.0);
  if (i == 0) {
    // V_0' vanishes linearly at 0, so V_0'(r)/r stays bounded and z -> 0
    const double c = r > 0 ? kernel0_profile_d1(d, r) / r : 0.0;
    for (int k = 0; k < d.m; ++k) g[k] = c * z[k];
    return g;
  }
  // grad(U' z_i / r) = (U''/r^2 - U'/r^3) z_i z + (U'/r) e_i, regular at 0
  const double uor = bubble_dprofile_over_r(d, r);
  double c1 = 0.0;
  if (r > 0.0) c1 = (bubble_profile_d2(d, r) - uor) / r2;
  // r -> 0: (U'' - U'/r)/r^2 -> 0 since U' = U''(0) r + O(r^3) with the same
  // leading coefficient; the limit of c1 is finite (equals U''''..), but the
  // z_i z factor is O(r^2) so the product vanishes anyway.
  for (int k = 0; k < d.m; ++k) g[k] = c1 * z[i - 1] * z[k];
  g[i - 1] += uor;
  return g;
}

double bubble_residual(const Dimension& d, int n_nodes, double r_max) {
  const double p = d.two_star() - 1.0;
  double worst = 0.0, scale = 0.0;
  for (int j = 0; j < n_nodes; ++j) {
    const double r = r_max * j / (n_nodes - 1.0);
    const double rhs = std::pow(bubble_profile(d, r), p);
    const double res = std::abs(-bubble_laplacian(d, r) - rhs);
    worst = std::max(worst, res);
    scale = std::max(scale, rhs);
  }
  return worst / scale;
}

double kernel_residual(const Dimension& d, int i, int n_nodes, double r_max) {
  const double c = d.two_star() - 1.0;
  double worst = 0.0, scale = 0.0;
  for (int j = 0; j < n_nodes; ++j) {
    const double r = r_max * j / (n_nodes - 1.0);
    const double upow = std::pow(bubble_profile(d, r), d.two_star() - 2.0);
    double lap, psi;
    if (i == 0) {
      psi = kernel0_profile(d, r);
      const double d1 = kernel0_profile_d1(d, r);
      // V_0' vanishes linearly at 0, so (m-1)V_0'/r has a finite limit
      const double d1_over_r =
          r > 0 ? d1 / r
                : 0.5 * (d.m - 2) * d.alpha() * (d.m + 2.0);  // V_0''(0) share
      lap = kernel0_profile_d2(d, r) + (d.m - 1) * d1_over_r;
    } else {
      // psi = f(r) w_i with f = U'; Lap = f'' + (m-1)f'/r - (m-1)f/r^2,
      // evaluated on the ray z = r e_i where w_i = 1
      psi = bubble_profile_d1(d, r);
      const double f = psi;
      const double fp = bubble_profile_d2(d, r);
      double ang;  // (m-1)(f'/r - f/r^2)
      if (r > 0) {
        ang = (d.m - 1) * (fp / r - f / (r * r));
      } else {
        ang = 0.0;  // f ~ U''(0) r: f'/r - f/r^2 -> 0
      }
      lap = bubble_profile_d3(d, r) + ang;
    }
    const double rhs = c * upow * psi;
    worst = std::max(worst, std::abs(-lap - rhs));
    scale = std::max(scale, std::abs(rhs));
  }
  return worst / scale;
}

MomentIntegral moment_integral(double p, double q) {
  if (!(p - q > 1.0) || !(q > -1.0))
    throw std::domain_error("moment integral diverges: need p-q>1 and q>-1");
  MomentIntegral out;
  out.p = p;
  out.q = q;
  out.value =
      std::exp(std::lgamma(q + 1.0) + std::lgamma(p - q - 1.0) - std::lgamma(p));
  // Quadrature route via x = r/(1+r): int_0^1 x^q (1-x)^{beta-1} dx with
  // beta = p-q-1; both endpoints power-mapped so the integrands are regular
  // even for slowly decaying tails.
  {
    const double beta = p - q - 1.0;
    const double a = std::pow(0.5, q + 1.0), b = std::pow(0.5, beta);
    const double left =
        integrate([&](double s) {
          return std::pow(1.0 - std::pow(s, 1.0 / (q + 1.0)), beta - 1.0);
        }, 0.0, a, 1e-13) / (q + 1.0);
    const double right =
        integrate([&](double w) {
          return std::pow(1.0 - std::pow(w, 1.0 / beta), q);
        }, 0.0, b, 1e-13) / beta;
    out.value_quadrature = left + right;
  }
  auto closed = [](double pp, double qq) {
    return std::exp(std::lgamma(qq + 1.0) + std::lgamma(pp - qq - 1.0) -
                    std::lgamma(pp));
  };
  const double r1 = closed(p + 1.0, q) / out.value - (p - q - 1.0) / p;
  const double r2 =
      closed(p + 1.0, q + 1.0) / closed(p + 1.0, q) - (q + 1.0) / (p - q - 1.0);
  out.recurrences_ok = std::abs(r1) * p / (p - q - 1.0) < 1e-12 &&
                       std::abs(r2) * (p - q - 1.0) / (q + 1.0) < 1e-12;
  return out;
}

SphereConstants sphere_constants(const Dimension& d) {
  SphereConstants c;
  auto sphere_vol = [](double k) {
    return 2.0 * std::pow(kPi, 0.5 * (k + 1.0)) / std::tgamma(0.5 * (k + 1.0));
  };
  c.omega_m = sphere_vol(d.m);
  c.omega_m_minus_1 = sphere_vol(d.m - 1.0);
  c.K_m = std::sqrt(4.0 / (d.m * (d.m - 2.0) * std::pow(c.omega_m, 2.0 / d.m)));
  c.K_pow_minus_m = std::pow(0.25 * d.m * (d.m - 2.0), 0.5 * d.m) * c.omega_m;
  return c;
}

BubbleMoments bubble_moments(const Dimension& d) {
  const double m = d.m;
  const auto sc = sphere_constants(d);
  const double om = sc.omega_m_minus_1;
  const double a2 = std::pow(m * (m - 2.0), 0.5 * (m - 2.0));
  const double a2s = a2 * m * (m - 2.0);  // alpha^{2*}
  const double g2 = a2 * (m - 2.0) * (m - 2.0);
  BubbleMoments mo;
  mo.grad2 = om * g2 * radial_power_integral(m + 1.0, m);
  mo.pow2s = om * a2s * radial_power_integral(m - 1.0, m);
  if (d.m >= 5) {
    mo.grad2_r2 = om * g2 * radial_power_integral(m + 3.0, m);
    mo.sq = om * a2 * radial_power_integral(m - 1.0, m - 2.0);
    const double quart = om * g2 * radial_power_integral(m + 3.0, m);
    mo.quartic_iiii = quart * 3.0 / (m * (m + 2.0));
    mo.quartic_iijj = quart / (m * (m + 2.0));
  } else {
    mo.grad2_r2 = mo.sq = mo.quartic_iiii = mo.quartic_iijj = 0.0;
  }
  mo.pow2s_r2 = om * a2s * radial_power_integral(m + 1.0, m);
  return mo;
}

BubbleMoments bubble_moments_quadrature(const Dimension& d) {
  const double m = d.m;
  const auto sc = sphere_constants(d);
  const double om = sc.omega_m_minus_1;
  auto up2 = [&](double r) {
    const double u = bubble_profile_d1(d, r);
    return u * u;
  };
  auto u2s = [&](double r) { return std::pow(bubble_profile(d, r), d.two_star()); };
  auto rad = [&](auto f, double extra_pow, double decay) {
    auto g = [&, extra_pow](double r) {
      return f(r) * std::pow(r, m - 1.0 + extra_pow);
    };
    return integrate_radial_tail(g, {0.0, 1.0, 8.0}, decay);
  };
  BubbleMoments mo;
  mo.grad2 = om * rad(up2, 0.0, 2.0 * (m - 1.0) - (m - 1.0));
  mo.pow2s = om * rad(u2s, 0.0, 2.0 * m - (m - 1.0));
  if (d.m >= 5) {
    mo.grad2_r2 = om * rad(up2, 2.0, 2.0 * (m - 1.0) - (m + 1.0));
    auto u2 = [&](double r) {
      const double u = bubble_profile(d, r);
      return u * u;
    };
    mo.sq = om * rad(u2, 0.0, 2.0 * (m - 2.0) - (m - 1.0));
    auto uor2 = [&](double r) {
      const double u = bubble_dprofile_over_r(d, r);
      return u * u;
    };
    const double quart = om * rad(uor2, 4.0, 2.0 * m - (m + 3.0));
    mo.quartic_iiii = quart * 3.0 / (m * (m + 2.0));
    mo.quartic_iijj = quart / (m * (m + 2.0));
  } else {
    mo.grad2_r2 = mo.sq = mo.quartic_iiii = mo.quartic_iijj = 0.0;
  }
  mo.pow2s_r2 = om * rad(u2s, 2.0, 2.0 * m - (m + 1.0));
  return mo;
}

double kernel_d12_norm2(const Dimension& d, int i) {
  const auto sc = sphere_constants(d);
  const double m = d.m;
  if (i == 0) {
    auto f = [&](double r) {
      const double v = kernel0_profile_d1(d, r);
      return v * v * std::pow(r, m - 1.0);
    };
    return sc.omega_m_minus_1 * integrate_radial_tail(f, {0.0, 1.0, 8.0}, m + 1.0);
  }
  // |grad(f w_i)|^2 = f'^2 w_i^2 + (f/r)^2 (1 - w_i^2), f = U'
  auto f = [&](double r) {
    const double fp = bubble_profile_d2(d, r);
    const double for_ = bubble_dprofile_over_r(d, r);
    return (fp * fp / m + for_ * for_ * (1.0 - 1.0 / m)) * std::pow(r, m - 1.0);
  };
  return sc.omega_m_minus_1 * integrate_radial_tail(f, {0.0, 1.0, 8.0}, m + 1.0);
}

double sphere_fourth_moment(const Dimension& d, int pattern) {
  // w_1 = cos t1, w_2 = sin t1 cos t2; measure sin^{m-2}t1 dt1 sin^{m-3}t2 dt2
  const double m = d.m;
  auto s1int = [&](auto g) {
    return integrate([&](double t) { return g(t) * std::pow(std::sin(t), m - 2.0); },
                     0.0, kPi, 1e-13);
  };
  const double total = s1int([](double) { return 1.0; });
  if (pattern == 0)
    return s1int([](double t) { return std::pow(std::cos(t), 4.0); }) / total;
  // patterns needing the second angle
  const double inner_total =
      integrate([&](double t) { return std::pow(std::sin(t), m - 3.0); }, 0.0,
                kPi, 1e-13);
  if (pattern == 1) {
    const double inner =
        integrate([&](double t) { return std::cos(t) * std::cos(t) *
                                         std::pow(std::sin(t), m - 3.0); },
                  0.0, kPi, 1e-13);
    const double outer = s1int([](double t) {
      const double c = std::cos(t), s = std::sin(t);
      return c * c * s * s;
    });
    return outer / total * inner / inner_total;
  }
  // odd pattern w_1^3 w_2
  const double inner =
      integrate([&](double t) { return std::cos(t) * std::pow(std::sin(t), m - 3.0); },
                0.0, kPi, 1e-13);
  const double outer = s1int([](double t) {
    const double c = std::cos(t), s = std::sin(t);
    return c * c * c * s;
  });
  return outer / total * inner / inner_total;
}

FourthMomentReport fourth_moment_checks(const Dimension& d, double tol) {
  d.require_at_least(5, "fourth-moment integrability");
  const auto mq = bubble_moments_quadrature(d);
  const double m = d.m;
  FourthMomentReport rep;

  // radial factor int (U'/r)^2 r^{m+3} dr, shared by all fourth moments
  const auto sc = sphere_constants(d);
  auto uor2 = [&](double r) {
    const double u = bubble_dprofile_over_r(d, r);
    return u * u * std::pow(r, m + 3.0);
  };
  const double rad =
      sc.omega_m_minus_1 * integrate_radial_tail(uor2, {0.0, 1.0, 8.0}, m - 3.0);

  // (a) ratio of angular moments, both by quadrature on the sphere
  const double e4 = sphere_fourth_moment(d, 0);
  const double e22 = sphere_fourth_moment(d, 1);
  rep.quartic_ratio = e4 / e22;

  // (b) isotropic decomposition T_{ijkh} = lambda (d d + d d + d d) with
  // lambda = int (U'/r)^2 z_1^2 z_2^2; check the three index patterns
  const double lambda = rad * e22;
  const double t_iiii = rad * e4;           // want 3 lambda
  const double t_iijj = rad * e22;          // want 1 lambda
  rep.odd_pattern = std::abs(sphere_fourth_moment(d, 2));
  const double err_iiii = std::abs(t_iiii - 3.0 * lambda) / (3.0 * lambda);
  const double err_iijj = std::abs(t_iijj - lambda) / lambda;
  rep.decomposition_err = std::max({err_iiii, err_iijj, rep.odd_pattern});

  // (c) (1/2) int |grad U|^2 z_i^2 - (1/2*) int U^{2*} z_i^2
  //     = int (dU/dz_i)^2 z_i^2
  const double lhs = 0.5 * mq.grad2_r2 / m - (1.0 / d.two_star()) * mq.pow2s_r2 / m;
  const double rhs = rad * e4;
  rep.trace_identity_err = std::abs(lhs - rhs) / std::abs(rhs);

  (void)t_iijj;
  (void)tol;
  return rep;
}

bool FourthMomentReport::all_pass(double tol) const {
  return std::abs(quartic_ratio - 3.0) < 3.0 * tol &&
         decomposition_err < tol && trace_identity_err < tol;
}

}  // namespace blab
