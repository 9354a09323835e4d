#include "blab/radial.hpp"

#include <cmath>
#include <stdexcept>

#include "blab/bubble.hpp"

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
}  // namespace

RadialChartModel RadialChartModel::from_model(const ManifoldModel& model,
                                              double L) {
  const int m = model.dim();
  if (model.contraction_iikk() != 0.0 || model.contraction_ijij() != 0.0)
    throw std::invalid_argument("radial chart needs a flat metric jet");
  if (!model.a_critical(1e-14))
    throw std::invalid_argument("radial chart needs a critical weight point");
  const double tr = model.a_laplacian();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double want = (i == j) ? tr / m : 0.0;
      if (std::abs(model.a_hess()[i * m + j] - want) > 1e-12 * (1.0 + std::abs(tr)))
        throw std::invalid_argument("radial chart needs an isotropic weight");
    }
  RadialChartModel rm;
  rm.m = m;
  rm.a0 = model.a0();
  rm.a_quad = tr / m;  // a = a0 + (tr/2m)|y|^2 near the center
  rm.h0 = model.h0();
  rm.r_cut = model.injectivity_radius();
  rm.L = L;
  rm.taper_lo = 1.2 * rm.r_cut;
  rm.taper_hi = 0.95 * L;
  if (rm.taper_hi <= rm.taper_lo)
    throw std::invalid_argument("domain too small for the weight taper");
  return rm;
}

double RadialChartModel::a(double rho) const {
  const double psi =
      1.0 - smoothstep5((rho - taper_lo) / (taper_hi - taper_lo));
  return a0 + 0.5 * a_quad * rho * rho * psi;
}
double RadialChartModel::a_deriv(double rho) const {
  const double x = (rho - taper_lo) / (taper_hi - taper_lo);
  const double psi = 1.0 - smoothstep5(x);
  const double dpsi = -smoothstep5_d1(x) / (taper_hi - taper_lo);
  return a_quad * rho * psi + 0.5 * a_quad * rho * rho * dpsi;
}
double RadialChartModel::chi(double rho) const {
  return 1.0 - smoothstep5((rho - 0.5 * r_cut) / (0.5 * r_cut));
}
double RadialChartModel::chi_d1(double rho) const {
  return -smoothstep5_d1((rho - 0.5 * r_cut) / (0.5 * r_cut)) / (0.5 * r_cut);
}
double RadialChartModel::chi_d2(double rho) const {
  const double x = (rho - 0.5 * r_cut) / (0.5 * r_cut);
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -(((120.0 * x - 180.0) * x + 60.0) * x) / (0.25 * r_cut * r_cut);
}

RadialGrid::RadialGrid(const RadialChartModel& mod, int n_nodes)
    : model(mod), n(n_nodes) {
  if (n < 16) throw std::invalid_argument("radial grid too coarse");
  d = mod.L / n;
  rho.resize(n);
  vol.resize(n);
  wq.resize(n);
  a_node.resize(n);
  flux_coeff.resize(n);
  const double m = mod.m;
  for (int i = 0; i < n; ++i) {
    rho[i] = i * d;
    const double rp = rho[i] + 0.5 * d;
    const double rm = std::max(rho[i] - 0.5 * d, 0.0);
    vol[i] = (std::pow(rp, m) - std::pow(rm, m)) / m;
    a_node[i] = mod.a(rho[i]);
    flux_coeff[i] = mod.a(rp) * std::pow(rp, m - 1.0);
    wq[i] = std::pow(rho[i], m - 1.0) * d / 3.0;
  }
  // composite Simpson pattern 1,4,2,4,...,1
  for (int i = 1; i + 1 < n; ++i) wq[i] *= (i % 2 == 1) ? 4.0 : 2.0;
}

std::vector<double> RadialGrid::apply_operator(
    const std::vector<double>& u) const {
  std::vector<double> out(n);
  const double inv_d = 1.0 / d;
  double flux_prev = 0.0;  // zero flux through the axis
  for (int i = 0; i < n; ++i) {
    const double up = (i + 1 < n) ? u[i + 1] : 0.0;  // Dirichlet at L
    const double flux = flux_coeff[i] * (up - u[i]) * inv_d;
    out[i] = (flux_prev - flux) / vol[i] + a_node[i] * model.h0 * u[i];
    flux_prev = flux;
  }
  return out;
}

double RadialGrid::dot_cells(const std::vector<double>& u,
                             const std::vector<double>& v) const {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += vol[i] * u[i] * v[i];
  return s;
}

double RadialGrid::dot_quad(const std::vector<double>& u,
                            const std::vector<double>& v) const {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += wq[i] * u[i] * v[i];
  return s;
}

double RadialGrid::inner_H(const std::vector<double>& u,
                           const std::vector<double>& v) const {
  return dot_cells(apply_operator(u), v);
}

double RadialGrid::norm_H(const std::vector<double>& u) const {
  return std::sqrt(std::max(inner_H(u, u), 0.0));
}

double RadialGrid::norm_Ls(const std::vector<double>& u, double s) const {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += vol[i] * std::pow(std::abs(u[i]), s);
  return std::pow(acc, 1.0 / s);
}

std::vector<std::vector<double>> RadialGrid::solve_shifted(
    const std::vector<double>& diag_shift,
    const std::vector<std::vector<double>>& rhs) const {
  // assemble tridiagonal (lower, diag, upper)
  std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double cp = flux_coeff[i] / d;
    const double cm = (i > 0) ? flux_coeff[i - 1] / d : 0.0;
    di[i] = (cp + cm) / vol[i] + a_node[i] * model.h0 + diag_shift[i];
    if (i + 1 < n) up[i] = -cp / vol[i];
    if (i > 0) lo[i] = -cm / vol[i];
  }
  // LU with partial pivoting on a tridiagonal (fill-in one superdiagonal)
  std::vector<double> dd = di, uu = up, ww(n, 0.0), ll(n, 0.0);
  std::vector<int> piv(n, 0);
  for (int k = 0; k + 1 < n; ++k) {
    if (std::abs(lo[k + 1]) > std::abs(dd[k])) {
      piv[k] = 1;
      std::swap(dd[k], lo[k + 1]);
      const double tmp_u = uu[k];
      uu[k] = dd[k + 1];
      dd[k + 1] = tmp_u;
      ww[k] = (k + 2 < n) ? uu[k + 1] : 0.0;
      if (k + 2 < n) uu[k + 1] = 0.0;
    }
    const double f = lo[k + 1] / dd[k];
    ll[k + 1] = f;
    dd[k + 1] -= f * uu[k];
    if (k + 2 < n) uu[k + 1] -= f * ww[k];
  }
  std::vector<std::vector<double>> out;
  out.reserve(rhs.size());
  for (const auto& b0 : rhs) {
    std::vector<double> b = b0;
    for (int k = 0; k + 1 < n; ++k) {
      if (piv[k]) std::swap(b[k], b[k + 1]);
      b[k + 1] -= ll[k + 1] * b[k];
    }
    for (int k = n - 1; k >= 0; --k) {
      double s = b[k];
      if (k + 1 < n) s -= uu[k] * b[k + 1];
      if (k + 2 < n) s -= ww[k] * b[k + 2];
      b[k] = s / dd[k];
    }
    out.push_back(std::move(b));
  }
  return out;
}

AnsatzProfile make_bubble_ansatz(const RadialChartModel& mod, int m,
                                 double delta) {
  Dimension dim(m);
  const double s = std::pow(delta, -0.5 * (m - 2));
  AnsatzProfile p;
  p.f = [mod, dim, s, delta](double r) {
    return mod.chi(r) * s * bubble_profile(dim, r / delta);
  };
  p.f1 = [mod, dim, s, delta](double r) {
    return mod.chi_d1(r) * s * bubble_profile(dim, r / delta) +
           mod.chi(r) * s / delta * bubble_profile_d1(dim, r / delta);
  };
  p.f2 = [mod, dim, s, delta](double r) {
    return mod.chi_d2(r) * s * bubble_profile(dim, r / delta) +
           2.0 * mod.chi_d1(r) * s / delta * bubble_profile_d1(dim, r / delta) +
           mod.chi(r) * s / (delta * delta) * bubble_profile_d2(dim, r / delta);
  };
  return p;
}

AnsatzProfile make_kernel0_ansatz(const RadialChartModel& mod, int m,
                                  double delta) {
  Dimension dim(m);
  const double s = std::pow(delta, -0.5 * (m - 2));
  AnsatzProfile p;
  p.f = [mod, dim, s, delta](double r) {
    return mod.chi(r) * s * kernel0_profile(dim, r / delta);
  };
  p.f1 = [mod, dim, s, delta](double r) {
    return mod.chi_d1(r) * s * kernel0_profile(dim, r / delta) +
           mod.chi(r) * s / delta * kernel0_profile_d1(dim, r / delta);
  };
  p.f2 = [mod, dim, s, delta](double r) {
    return mod.chi_d2(r) * s * kernel0_profile(dim, r / delta) +
           2.0 * mod.chi_d1(r) * s / delta *
               kernel0_profile_d1(dim, r / delta) +
           mod.chi(r) * s / (delta * delta) *
               kernel0_profile_d2(dim, r / delta);
  };
  return p;
}

std::vector<double> apply_operator_analytic(const RadialGrid& g,
                                            const AnsatzProfile& p) {
  const int m = g.model.m;
  std::vector<double> out(g.n);
  for (int i = 0; i < g.n; ++i) {
    const double r = g.rho[i];
    const double lap =
        (r > 0.0) ? p.f2(r) + (m - 1) * p.f1(r) / r : m * p.f2(0.0);
    out[i] = -g.model.a(r) * lap - g.model.a_deriv(r) * p.f1(r) +
             g.model.a(r) * g.model.h0 * p.f(r);
  }
  return out;
}

}  // namespace blab
