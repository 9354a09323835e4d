#include "blab/geometry.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace blab {

namespace {
double smoothstep5(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return ((6.0 * x - 15.0) * x + 10.0) * x * x * x;
}
double smoothstep5_d1(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return ((30.0 * x - 60.0) * x + 30.0) * x * x;
}
double smoothstep5_d2(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return ((120.0 * x - 180.0) * x + 60.0) * x;
}
}  // namespace

double Cutoff::value(double rho) const {
  return 1.0 - smoothstep5((rho - 0.5 * radius) / (0.5 * radius));
}
double Cutoff::d1(double rho) const {
  return -smoothstep5_d1((rho - 0.5 * radius) / (0.5 * radius)) / (0.5 * radius);
}
double Cutoff::d2(double rho) const {
  return -smoothstep5_d2((rho - 0.5 * radius) / (0.5 * radius)) /
         (0.25 * radius * radius);
}

ManifoldModel::ManifoldModel(int m, std::vector<double> metric_hessian,
                             double a0, std::vector<double> a_grad,
                             std::vector<double> a_hess, double h0,
                             double injectivity_radius)
    : m_(m),
      H_(std::move(metric_hessian)),
      a0_(a0),
      a_grad_(std::move(a_grad)),
      a_hess_(std::move(a_hess)),
      h0_(h0),
      r_(injectivity_radius) {
  Dimension dim(m);  // validates m >= 3
  const size_t n4 = size_t(m) * m * m * m;
  if (H_.empty()) H_.assign(n4, 0.0);
  if (H_.size() != n4) throw std::invalid_argument("metric hessian size");
  if (a_grad_.empty()) a_grad_.assign(m, 0.0);
  if (a_hess_.empty()) a_hess_.assign(size_t(m) * m, 0.0);
  if (a_grad_.size() != size_t(m) || a_hess_.size() != size_t(m) * m)
    throw std::invalid_argument("weight jet size");
  if (!(a0_ > 0.0)) throw std::invalid_argument("weight must be positive");
  if (!(r_ > 0.0)) throw std::invalid_argument("injectivity radius");
  cutoff_.radius = r_;
  // normal-coordinate gauge symmetries
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int r = 0; r < m; ++r)
        for (int k = 0; k < m; ++k) {
          if (std::abs(H(i, j, r, k) - H(j, i, r, k)) > 1e-14 ||
              std::abs(H(i, j, r, k) - H(i, j, k, r)) > 1e-14)
            throw std::invalid_argument("metric hessian not symmetric");
        }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (std::abs(a_hess_[i * m + j] - a_hess_[j * m + i]) > 1e-14)
        throw std::invalid_argument("weight hessian not symmetric");
}

bool ManifoldModel::a_critical(double tol) const {
  for (double g : a_grad_)
    if (std::abs(g) > tol) return false;
  return true;
}

double ManifoldModel::a_laplacian() const {
  double t = 0.0;
  for (int i = 0; i < m_; ++i) t += a_hess_[i * m_ + i];
  return t;
}

void ManifoldModel::check_chart(std::span<const double> y) const {
  if (y.size() != size_t(m_)) throw std::invalid_argument("point dimension");
  double s = 0.0;
  for (double v : y) s += v * v;
  if (s >= r_ * r_)
    throw std::domain_error("point outside the normal-coordinate chart");
}

std::vector<double> ManifoldModel::metric_inverse_at(
    std::span<const double> y) const {
  check_chart(y);
  std::vector<double> g(size_t(m_) * m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    for (int j = 0; j < m_; ++j) {
      double s = (i == j) ? 1.0 : 0.0;
      for (int r = 0; r < m_; ++r)
        for (int k = 0; k < m_; ++k) s += 0.5 * H(i, j, r, k) * y[r] * y[k];
      g[i * m_ + j] = s;
    }
  }
  return g;
}

double ManifoldModel::sqrt_det_g(std::span<const double> y) const {
  check_chart(y);
  double s = 0.0;
  for (int ss = 0; ss < m_; ++ss)
    for (int r = 0; r < m_; ++r)
      for (int k = 0; k < m_; ++k) s += H(ss, ss, r, k) * y[r] * y[k];
  return 1.0 - 0.25 * s;
}

double ManifoldModel::scalar_curvature() const {
  return contraction_iikk() - contraction_ijij();
}

double ManifoldModel::contraction_iikk() const {
  double s = 0.0;
  for (int i = 0; i < m_; ++i)
    for (int k = 0; k < m_; ++k) s += H(i, i, k, k);
  return s;
}

double ManifoldModel::contraction_ijij() const {
  double s = 0.0;
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j) s += H(i, j, i, j);
  return s;
}

double ManifoldModel::hb_quadratic(std::span<const double> eta) const {
  double s = 0.0;
  for (int ss = 0; ss < m_; ++ss)
    for (int r = 0; r < m_; ++r)
      for (int k = 0; k < m_; ++k) s += H(ss, ss, r, k) * eta[r] * eta[k];
  return s;
}

double ManifoldModel::a_hess_quadratic(std::span<const double> eta) const {
  double s = 0.0;
  for (int r = 0; r < m_; ++r)
    for (int k = 0; k < m_; ++k) s += a_hess_[r * m_ + k] * eta[r] * eta[k];
  return s;
}

ManifoldModel flat_model(int m, double a0, std::vector<double> a_hess,
                         double h0, double inj_radius) {
  return ManifoldModel(m, {}, a0, {}, std::move(a_hess), h0, inj_radius);
}

ManifoldModel round_sphere_model(int m, double radius, double h0,
                                 double inj_radius) {
  std::vector<double> H(size_t(m) * m * m * m, 0.0);
  const double c = 1.0 / (3.0 * radius * radius);
  auto at = [&](int i, int j, int r, int k) -> double& {
    return H[((size_t(i) * m + j) * m + r) * m + k];
  };
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int r = 0; r < m; ++r)
        for (int k = 0; k < m; ++k)
          at(i, j, r, k) = c * (2.0 * (i == j) * (r == k) -
                                double((i == r) * (j == k)) -
                                double((i == k) * (j == r)));
  return ManifoldModel(m, std::move(H), 1.0, {}, {}, h0, inj_radius);
}

ManifoldModel random_jet_model(int m, unsigned seed, double scale, double h0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> H(size_t(m) * m * m * m, 0.0);
  auto at = [&](int i, int j, int r, int k) -> double& {
    return H[((size_t(i) * m + j) * m + r) * m + k];
  };
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j)
      for (int r = 0; r < m; ++r)
        for (int k = r; k < m; ++k) {
          const double v = u(rng);
          at(i, j, r, k) = at(j, i, r, k) = at(i, j, k, r) = at(j, i, k, r) = v;
        }
  std::vector<double> ah(size_t(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) ah[i * m + j] = ah[j * m + i] = u(rng);
    ah[i * m + i] += 2.0 * scale + 1.0;  // keep positive definite-ish
  }
  return ManifoldModel(m, std::move(H), 1.0, {}, std::move(ah), h0, 1.0);
}

bool WarpedProduct::minimal_fiber(double tol) const {
  for (double g : omega_grad)
    if (std::abs(g) > tol) return false;
  return true;
}

double WarpedProduct::weight_consistency_error() const {
  // Chain-rule jet of a = omega^m versus exact polynomial powers of the
  // quadratic representative, restricted pairwise to coordinate planes.
  const double w0 = omega0;
  double err = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      Poly phi = Poly::constant(w0) + Poly::var(0, omega_grad[i]) +
                 Poly::var(1, omega_grad[j]) +
                 0.5 * omega_hess[i * m + i] * Poly::var(0) * Poly::var(0) +
                 0.5 * omega_hess[j * m + j] * Poly::var(1) * Poly::var(1) +
                 omega_hess[i * m + j] * Poly::var(0) * Poly::var(1);
      if (i == j)
        phi = Poly::constant(w0) + Poly::var(0, omega_grad[i]) +
              0.5 * omega_hess[i * m + i] * Poly::var(0) * Poly::var(0);
      const Poly A = phi.pow(m);
      const double zero[4] = {0, 0, 0, 0};
      const double scale = std::pow(w0, m);
      err = std::max(err, std::abs(A.eval(zero) - scale) / scale);
      const double gi_pred = m * std::pow(w0, m - 1) * omega_grad[i];
      err = std::max(err, std::abs(A.deriv(0).eval(zero) - gi_pred) /
                              std::max(scale, std::abs(gi_pred)));
      const double hij_pred =
          m * std::pow(w0, m - 1) * omega_hess[i * m + j] +
          m * (m - 1.0) * std::pow(w0, m - 2) * omega_grad[i] * omega_grad[j];
      const Poly hij = (i == j) ? A.deriv(0).deriv(0) : A.deriv(0).deriv(1);
      err = std::max(err, std::abs(hij.eval(zero) - hij_pred) /
                              std::max(scale, std::abs(hij_pred)));
    }
  }
  return err;
}

ManifoldModel reduce_to_anisotropic(const WarpedProduct& wp, double inj_radius) {
  if (!wp.h_invariant)
    throw std::invalid_argument("potential must be invariant along the fiber");
  if (!(wp.omega0 > 0.0))
    throw std::invalid_argument("warping function must be positive");
  const int m = wp.m;
  const double w0 = wp.omega0;
  const double a0 = std::pow(w0, m);
  std::vector<double> a_grad(m), a_hess(size_t(m) * m);
  for (int i = 0; i < m; ++i)
    a_grad[i] = m * std::pow(w0, m - 1) * wp.omega_grad[i];
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      a_hess[i * m + j] =
          m * std::pow(w0, m - 1) * wp.omega_hess[i * m + j] +
          m * (m - 1.0) * std::pow(w0, m - 2) * wp.omega_grad[i] *
              wp.omega_grad[j];
  return ManifoldModel(m, {}, a0, std::move(a_grad), std::move(a_hess), wp.h0,
                       inj_radius);
}

double divergence_form_identity_defect(const Poly& omega, const Poly& v,
                                       int nvars, int p) {
  const Poly wp = omega.pow(p);
  const Poly wpm1 = omega.pow(p - 1);
  Poly lhs, lap, cross;
  for (int i = 0; i < nvars; ++i) {
    lhs = lhs + (wp * v.deriv(i)).deriv(i);
    lap = lap + v.deriv(i).deriv(i);
    cross = cross + omega.deriv(i) * v.deriv(i);
  }
  const Poly rhs = wp * lap + double(p) * wpm1 * cross;
  return (lhs - rhs).max_abs_coeff();
}

double warped_laplacian_check(const Poly& omega, const Poly& u, int base_dim,
                              int fiber_dim, double coeff, int n, double box) {
  // For fiber-invariant u the fiber directions of the conservative product-
  // chart stencil cancel node-by-node, so the discrete Lap_{g+omega^2 kappa}
  // reduces to the omega^{fiber_dim}-weighted base operator.
  if (base_dim > 4 || base_dim < 1) throw std::invalid_argument("base dim");
  const double h = 2.0 * box / (n - 1);
  auto weight = [&](std::span<const double> y) {
    return std::pow(omega.eval(y), fiber_dim);
  };
  double worst = 0.0;
  std::vector<int> idx(base_dim, 1);
  std::vector<double> y(4, 0.0), yp(4, 0.0), ym(4, 0.0);
  // iterate interior nodes
  while (true) {
    for (int d = 0; d < base_dim; ++d) y[d] = -box + idx[d] * h;
    const double w0 = weight(y);
    double fd = 0.0;
    for (int d = 0; d < base_dim; ++d) {
      yp.assign(y.begin(), y.end());
      ym.assign(y.begin(), y.end());
      yp[d] += 0.5 * h;
      ym[d] -= 0.5 * h;
      const double wp = weight(yp), wm = weight(ym);
      yp[d] += 0.5 * h;
      ym[d] -= 0.5 * h;
      fd += (wp * (u.eval(yp) - u.eval(y)) - wm * (u.eval(y) - u.eval(ym))) /
            (h * h);
    }
    fd /= w0;
    double exact = 0.0;
    for (int d = 0; d < base_dim; ++d)
      exact += u.deriv(d).deriv(d).eval(y) +
               coeff / omega.eval(y) * omega.deriv(d).eval(y) *
                   u.deriv(d).eval(y);
    worst = std::max(worst, std::abs(fd - exact));
    // advance multi-index over interior nodes
    int d = 0;
    while (d < base_dim) {
      if (++idx[d] <= n - 2) break;
      idx[d] = 1;
      ++d;
    }
    if (d == base_dim) break;
  }
  return worst;
}

}  // namespace blab
