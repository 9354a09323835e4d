#include "blab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "blab/bubble.hpp"
#include "blab/quadrature.hpp"

namespace blab {

namespace {

// weighted least squares with column scaling; X row-major n x p
std::vector<double> wls(const std::vector<double>& X,
                        const std::vector<double>& y,
                        const std::vector<double>& w, int n, int p) {
  std::vector<double> scale(p, 0.0);
  for (int j = 0; j < p; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += w[i] * X[i * p + j] * X[i * p + j];
    scale[j] = s > 0 ? 1.0 / std::sqrt(s) : 1.0;
  }
  std::vector<double> A(size_t(p) * p, 0.0), b(p, 0.0);
  for (int j = 0; j < p; ++j) {
    for (int k = 0; k < p; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += w[i] * X[i * p + j] * X[i * p + k];
      A[j * p + k] = s * scale[j] * scale[k];
    }
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += w[i] * X[i * p + j] * y[i];
    b[j] = s * scale[j];
  }
  // Gaussian elimination with partial pivoting
  std::vector<int> perm(p);
  for (int i = 0; i < p; ++i) perm[i] = i;
  for (int c = 0; c < p; ++c) {
    int piv = c;
    for (int r = c + 1; r < p; ++r)
      if (std::abs(A[r * p + c]) > std::abs(A[piv * p + c])) piv = r;
    if (piv != c) {
      for (int k = 0; k < p; ++k) std::swap(A[c * p + k], A[piv * p + k]);
      std::swap(b[c], b[piv]);
    }
    if (A[c * p + c] == 0.0) throw std::runtime_error("singular fit system");
    for (int r = c + 1; r < p; ++r) {
      const double f = A[r * p + c] / A[c * p + c];
      for (int k = c; k < p; ++k) A[r * p + k] -= f * A[c * p + k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> beta(p);
  for (int c = p - 1; c >= 0; --c) {
    double s = b[c];
    for (int k = c + 1; k < p; ++k) s -= A[c * p + k] * beta[k];
    beta[c] = s / A[c * p + c];
  }
  for (int j = 0; j < p; ++j) beta[j] *= scale[j];
  return beta;
}

}  // namespace

double a_m_constant(int m) {
  return sphere_constants(Dimension(m)).K_pow_minus_m / m;
}

double b_m_constant(int m) {
  return a_m_constant(m) * (m - 2.0) * (m - 2.0) / 8.0;
}

double laplacian_threshold_weight(int m) {
  return 3.0 * (m - 2.0) / (4.0 * (m - 1.0));
}

double concentration_threshold(const ManifoldModel& model) {
  if (!model.a_critical(1e-12))
    throw std::invalid_argument(
        "threshold needs a critical point of the weight");
  const int m = model.dim();
  return model.h0() - (m - 2.0) / (4.0 * (m - 1.0)) * model.scalar_curvature() +
         laplacian_threshold_weight(m) * model.a_laplacian() / model.a0();
}

ReducedEnergyFn ReducedEnergyFn::from_model(const ManifoldModel& model,
                                            int sign_eps) {
  Dimension(model.dim()).require_at_least(5, "the reduced energy");
  ReducedEnergyFn fn;
  fn.m = model.dim();
  fn.theta = concentration_threshold(model);
  fn.sign_eps = sign_eps;
  fn.a_hess_normalized.resize(size_t(fn.m) * fn.m);
  for (size_t i = 0; i < fn.a_hess_normalized.size(); ++i)
    fn.a_hess_normalized[i] = model.a_hess()[i] / model.a0();
  return fn;
}

double ReducedEnergyFn::linear_coeff(std::span<const double> eta) const {
  double quad = 0.0;
  if (!eta.empty()) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        quad += a_hess_normalized[i * m + j] * eta[i] * eta[j];
  }
  return 2.0 * (m - 1.0) / ((m - 2.0) * (m - 4.0)) * theta + 0.5 * quad;
}

double ReducedEnergyFn::eval(double t, std::span<const double> eta) const {
  if (!(t > 0.0)) throw std::domain_error("Phi needs t > 0");
  return linear_coeff(eta) * t -
         sign_eps * (m - 2.0) * (m - 2.0) / 8.0 * std::log(t);
}

std::vector<double> ReducedEnergyFn::gradient(double t,
                                              std::span<const double> eta) const {
  if (!(t > 0.0)) throw std::domain_error("Phi needs t > 0");
  std::vector<double> g(1 + eta.size(), 0.0);
  g[0] = linear_coeff(eta) - sign_eps * (m - 2.0) * (m - 2.0) / (8.0 * t);
  for (size_t k = 0; k < eta.size(); ++k) {
    double s = 0.0;
    for (int j = 0; j < m; ++j)
      s += a_hess_normalized[k * m + j] * eta[j];
    g[1 + k] = t * s;
  }
  return g;
}

bool regime_admits_solution(double theta, int sign_eps) {
  return (theta > 0.0 && sign_eps > 0) || (theta < 0.0 && sign_eps < 0);
}

CriticalPoint critical_point(const ReducedEnergyFn& fn) {
  const double beta = (fn.m - 2.0) * (fn.m - 2.0) / 8.0;
  std::vector<double> zero(fn.m, 0.0);
  const double c_lin = fn.linear_coeff(zero);
  if (fn.theta == 0.0)
    throw std::domain_error("degenerate threshold: Theta = 0");
  if (!regime_admits_solution(fn.theta, fn.sign_eps))
    throw std::domain_error(
        "regime mismatch: no interior critical point for this sign of eps");
  double t0 = fn.sign_eps * beta / c_lin;
  // Newton polish of Phi'(t) = c_lin - sign*beta/t (exact already; the
  // iteration certifies |Phi'| <= 1e-12 * scale)
  for (int it = 0; it < 4; ++it) {
    const double g = c_lin - fn.sign_eps * beta / t0;
    const double h = fn.sign_eps * beta / (t0 * t0);
    t0 -= g / h;
  }
  if (std::abs(c_lin - fn.sign_eps * beta / t0) > 1e-12 * std::abs(c_lin))
    throw std::runtime_error("critical point refinement failed");
  CriticalPoint cp;
  cp.t0 = t0;
  cp.eta0.assign(fn.m, 0.0);
  // nondegeneracy: t-curvature nonzero and Hessian block nonsingular
  const double phi_tt = fn.sign_eps * beta / (t0 * t0);
  double det_ok = true;
  {
    std::vector<double> M = fn.a_hess_normalized;
    const int m = fn.m;
    for (int c = 0; c < m; ++c) {
      int piv = c;
      for (int r = c + 1; r < m; ++r)
        if (std::abs(M[r * m + c]) > std::abs(M[piv * m + c])) piv = r;
      if (std::abs(M[piv * m + c]) < 1e-12) {
        det_ok = false;
        break;
      }
      if (piv != c)
        for (int k = 0; k < m; ++k) std::swap(M[c * m + k], M[piv * m + k]);
      for (int r = c + 1; r < m; ++r) {
        const double f = M[r * m + c] / M[c * m + c];
        for (int k = c; k < m; ++k) M[r * m + k] -= f * M[c * m + k];
      }
    }
  }
  cp.nondegenerate = (std::abs(phi_tt) > 0.0) && det_ok;
  return cp;
}

double vanishing_eta_bracket(int m) {
  const auto mo = bubble_moments_quadrature(Dimension(m));
  return (m - 2.0) / (8.0 * m) * mo.pow2s + 0.25 * mo.grad2 / m -
         0.125 * mo.grad2;
}

double laplacian_moment_bracket(int m) {
  const auto mo = bubble_moments_quadrature(Dimension(m));
  return mo.grad2_r2 / (4.0 * m) - (m - 2.0) / (4.0 * m * m) * mo.pow2s_r2;
}

double hessian_moment_bracket(int m) {
  const auto mo = bubble_moments_quadrature(Dimension(m));
  return 0.25 * mo.grad2 - (m - 2.0) / (4.0 * m) * mo.pow2s;
}

double ansatz_energy(const ManifoldModel& model, double eps, double t,
                     std::span<const double> eta) {
  if (eps == 0.0) throw std::domain_error("ansatz energy needs eps != 0");
  if (!(t > 0.0)) throw std::domain_error("ansatz energy needs t > 0");
  const int m = model.dim();
  Dimension dim(m);
  const double delta = std::sqrt(std::abs(eps) * t);
  const double two_star = dim.two_star();
  const double pw = two_star - eps;
  const double r = model.injectivity_radius();
  const Cutoff& chi = model.cutoff();

  auto F = [&](double z) { return chi.value(delta * z) * bubble_profile(dim, z); };
  auto F1 = [&](double z) {
    return delta * chi.d1(delta * z) * bubble_profile(dim, z) +
           chi.value(delta * z) * bubble_profile_d1(dim, z);
  };
  const double zmax = r / delta;
  std::vector<double> seg = {0.0, 1.0, 8.0, 0.5 * zmax, zmax};
  for (double& s : seg) s = std::min(s, zmax);
  std::sort(seg.begin(), seg.end());
  seg.erase(std::unique(seg.begin(), seg.end()), seg.end());
  auto rad = [&](auto g) { return integrate_segmented(g, seg, 1e-12); };

  const double R0 = rad([&](double z) { return F1(z) * F1(z) * std::pow(z, m - 1.0); });
  const double R2 = rad([&](double z) { return F1(z) * F1(z) * std::pow(z, m + 1.0); });
  const double M0 = rad([&](double z) { return F(z) * F(z) * std::pow(z, m - 1.0); });
  const double P0e = rad([&](double z) { return std::pow(F(z), pw) * std::pow(z, m - 1.0); });
  const double P2e = rad([&](double z) { return std::pow(F(z), pw) * std::pow(z, m + 1.0); });

  const double Hc1 = model.contraction_iikk();
  const double Hc2 = model.contraction_ijij();
  const double hbq = eta.empty() ? 0.0 : model.hb_quadratic(eta);
  const double d2aq = eta.empty() ? 0.0 : model.a_hess_quadratic(eta);
  const double trD2 = model.a_laplacian();
  const double d2 = delta * delta;
  const double pot_pref = std::pow(delta, eps * 0.5 * (m - 2.0)) / pw;

  double J = model.a0() *
             (0.5 * R0 + 0.5 * d2 * model.h0() * M0 +
              d2 * ((Hc1 + 2.0 * Hc2) * R2 / (4.0 * m * (m + 2.0)) +
                    hbq * R0 / (4.0 * m) - Hc1 * R2 / (8.0 * m) -
                    hbq * R0 / 8.0) -
              pot_pref * (P0e - 0.25 * d2 * (Hc1 * P2e / m + hbq * P0e)));
  J += 0.25 * d2 * (trD2 * R2 / m + d2aq * R0) -
       pot_pref * 0.5 * d2 * (trD2 * P2e / m + d2aq * P0e);
  return sphere_constants(dim).omega_m_minus_1 * J;
}

double energy_exact(const RadialGrid& g, const std::vector<double>& w,
                    double eps) {
  const int n = g.n;
  const double two_star = Dimension(g.model.m).two_star();
  const double pw = two_star - eps;
  std::vector<double> du(n, 0.0);
  // 4th-order central derivative; even reflection at the axis, one-sided
  // near the outer edge (fields vanish there)
  auto at = [&](int i) -> double {
    if (i >= n) return 0.0;
    return w[size_t(std::abs(i))];
  };
  for (int i = 0; i < n; ++i)
    du[i] = (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) /
            (12.0 * g.d);
  double J = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = g.a_node[i];
    const double up = std::max(w[i], 0.0);
    J += g.wq[i] * (0.5 * a * (du[i] * du[i] + g.model.h0 * w[i] * w[i]) -
                    a * std::pow(up, pw) / pw);
  }
  if (!std::isfinite(J)) throw std::runtime_error("energy quadrature failed");
  return sphere_constants(Dimension(g.model.m)).omega_m_minus_1 * J;
}

RadialField build_W(const ManifoldModel& model, double eps, double t,
                    int nodes_per_delta, double L, double t_lo, double t_hi) {
  if (eps == 0.0) throw std::domain_error("blow-up ansatz needs eps != 0");
  if (t < t_lo || t > t_hi)
    throw std::domain_error("concentration parameter t outside the window");
  const double delta = std::sqrt(std::abs(eps) * t);
  if (nodes_per_delta < 8)
    throw std::domain_error("grid must resolve the concentration scale "
                            "(need at least 8 nodes per delta)");
  const auto rm = RadialChartModel::from_model(model, L);
  const double d = delta / nodes_per_delta;
  const int n = int(std::ceil(L / d));
  auto grid = std::make_shared<RadialGrid>(rm, n);
  const auto prof = make_bubble_ansatz(rm, model.dim(), delta);
  RadialField f;
  f.grid = grid;
  f.v.resize(n);
  for (int i = 0; i < n; ++i) f.v[i] = prof.f(grid->rho[i]);
  return f;
}

ExpansionReport expansion_fit(const ManifoldModel& model, double t,
                              std::span<const double> eta,
                              std::span<const double> eps_ladder) {
  const int n = int(eps_ladder.size());
  if (n < 6) throw std::invalid_argument("ladder too short for the fit");
  bool has_plus = false, has_minus = false;
  for (double e : eps_ladder) (e > 0 ? has_plus : has_minus) = true;
  const bool two_sided = has_plus && has_minus;
  const int p = two_sided ? 8 : 6;

  ExpansionReport rep;
  rep.t = t;
  rep.a0 = model.a0();
  rep.eps.assign(eps_ladder.begin(), eps_ladder.end());
  rep.energy.resize(n);
  for (int i = 0; i < n; ++i)
    rep.energy[i] = ansatz_energy(model, eps_ladder[i], t, eta);

  std::vector<double> X(size_t(n) * p), wts(n);
  for (int i = 0; i < n; ++i) {
    const double e = eps_ladder[i];
    const double ae = std::abs(e), le = std::log(ae);
    double* row = &X[size_t(i) * p];
    row[0] = 1.0;
    row[1] = e * le;
    row[2] = e;
    int c = 3;
    if (two_sided) row[c++] = ae;
    row[c++] = e * e * le * le;
    row[c++] = e * e * le;
    row[c++] = e * e;
    if (two_sided) row[c++] = ae * e * le;
    wts[i] = 1.0 / (ae * ae);
  }
  const auto beta = wls(X, rep.energy, wts, n, p);
  rep.coeffs.a_m = beta[0] / model.a0();
  rep.coeffs.b_m = -beta[1] / model.a0();
  rep.coeffs.c_m = beta[2] / model.a0();
  rep.coeffs.d_m_phi = two_sided ? beta[3] / model.a0() : 0.0;

  rep.fit_residual.resize(n);
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i) {
    double fit = 0.0;
    for (int j = 0; j < p; ++j) fit += X[size_t(i) * p + j] * beta[j];
    rep.fit_residual[i] = fit - rep.energy[i];
    worst = std::max(worst, std::abs(rep.fit_residual[i]));
    scale = std::max(scale, std::abs(rep.energy[i]));
  }
  rep.coeffs.max_residual = worst;
  rep.coeffs.rel_residual = worst / scale;
  return rep;
}

double fit_d_m(const ManifoldModel& model, std::span<const double> eps_ladder,
               double t1, double t2) {
  std::vector<double> eta;
  const auto r1 = expansion_fit(model, t1, eta, eps_ladder);
  const auto r2 = expansion_fit(model, t2, eta, eps_ladder);
  const int m = model.dim();
  return -(r2.coeffs.c_m - r1.coeffs.c_m) * 8.0 /
         ((m - 2.0) * (m - 2.0) * std::log(t2 / t1));
}

}  // namespace blab
