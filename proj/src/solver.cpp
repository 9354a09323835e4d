#include "blab/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "blab/bubble.hpp"
#include "blab/quadrature.hpp"

namespace blab {

namespace {

double fpow(double u, double p) { return u > 0.0 ? std::pow(u, p) : 0.0; }

}  // namespace

double s_epsilon(int m, double eps) {
  const double two_star = 2.0 * m / (m - 2.0);
  return eps < 0.0 ? two_star - 0.5 * m * eps : two_star;
}

RadialReduction::RadialReduction(const ManifoldModel& model, SolveOptions opt)
    : model_(model),
      chart_(RadialChartModel::from_model(model, opt.L)),
      opt_(opt) {}

std::shared_ptr<const RadialGrid> RadialReduction::grid_for(double eps,
                                                            double t) const {
  const double delta = std::sqrt(std::abs(eps) * t);
  const double d = std::min(delta / opt_.nodes_per_delta, opt_.max_spacing);
  const int n = int(std::ceil(opt_.L / d));
  return std::make_shared<RadialGrid>(chart_, n);
}

struct RadialReduction::Scalars {
  double delta;
  std::vector<double> W, Z, AW, AZ;  // nodal ansatz data, analytic derivatives
  double WZ_H, ZZ_H, fWZ, JW;        // adaptive-quadrature scalars
};

RadialReduction::Scalars RadialReduction::make_scalars(const RadialGrid& g,
                                                       double eps,
                                                       double t) const {
  Scalars sc;
  const int m = chart_.m;
  sc.delta = std::sqrt(std::abs(eps) * t);
  const auto W = make_bubble_ansatz(chart_, m, sc.delta);
  const auto Z = make_kernel0_ansatz(chart_, m, sc.delta);
  sc.W.resize(g.n);
  sc.Z.resize(g.n);
  for (int i = 0; i < g.n; ++i) {
    sc.W[i] = W.f(g.rho[i]);
    sc.Z[i] = Z.f(g.rho[i]);
  }
  sc.AW = apply_operator_analytic(g, W);
  sc.AZ = apply_operator_analytic(g, Z);

  const double two_star = Dimension(m).two_star();
  const double fp = two_star - 1.0 - eps;
  auto a = [&](double r) { return chart_.a(r); };
  const double h0 = chart_.h0;
  const std::vector<double> seg = {0.0, 2.0 * sc.delta, 8.0 * sc.delta,
                                   0.5 * chart_.r_cut, chart_.r_cut, chart_.L};
  auto rad = [&](auto f) {
    return integrate_segmented(f, seg, 1e-13);
  };
  auto w8 = [&](double r) { return std::pow(r, m - 1.0); };
  sc.WZ_H = rad([&](double r) {
    return (a(r) * W.f1(r) * Z.f1(r) + a(r) * h0 * W.f(r) * Z.f(r)) * w8(r);
  });
  sc.ZZ_H = rad([&](double r) {
    const double z1 = Z.f1(r), z0 = Z.f(r);
    return (a(r) * z1 * z1 + a(r) * h0 * z0 * z0) * w8(r);
  });
  sc.fWZ = rad([&](double r) {
    return a(r) * fpow(W.f(r), fp) * Z.f(r) * w8(r);
  });
  sc.JW = rad([&](double r) {
    const double w = W.f(r), w1 = W.f1(r);
    return (0.5 * a(r) * (w1 * w1 + h0 * w * w) -
            a(r) * fpow(w, two_star - eps) / (two_star - eps)) *
           w8(r);
  });
  return sc;
}

LSState RadialReduction::fixed_point_on(const RadialGrid& g, const Scalars& sc,
                                        double eps, double t) const {
  const int n = g.n;
  const int m = chart_.m;
  const double two_star = Dimension(m).two_star();
  const double p1 = two_star - 1.0 - eps;
  const double p2 = two_star - 2.0 - eps;
  const double dfc = p1;

  LSState st;
  st.eps = eps;
  st.t = t;
  st.eta.assign(m, 0.0);

  std::vector<double> R_strong(n), shift(n), phi(n, 0.0);
  for (int i = 0; i < n; ++i) {
    R_strong[i] = -(sc.AW[i] - g.a_node[i] * fpow(sc.W[i], p1));
    shift[i] = -g.a_node[i] * dfc * fpow(sc.W[i], p2);
  }
  st.norm_R = std::sqrt(g.dot_cells(R_strong, R_strong));

  const auto AZ_h = g.apply_operator(sc.Z);
  double prev_dn = -1.0, lam = 0.0;
  bool converged = false;
  for (int it = 0; it < opt_.fp_max_iter; ++it) {
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) {
      const double nl = g.a_node[i] * (fpow(sc.W[i] + phi[i], p1) -
                                       fpow(sc.W[i], p1) -
                                       dfc * fpow(sc.W[i], p2) * phi[i]);
      rhs[i] = R_strong[i] + nl;
      if (!std::isfinite(rhs[i]))
        throw std::runtime_error(
            "correction iterates diverged: eps outside the contraction regime");
    }
    auto sols = g.solve_shifted(shift, {rhs, AZ_h});
    const auto& xr = sols[0];
    const auto& xz = sols[1];
    lam = -g.dot_cells(AZ_h, xr) / g.dot_cells(AZ_h, xz);
    std::vector<double> phi_new(n);
    for (int i = 0; i < n; ++i) phi_new[i] = xr[i] + lam * xz[i];
    std::vector<double> diff(n);
    for (int i = 0; i < n; ++i) diff[i] = phi_new[i] - phi[i];
    const double dn = g.norm_H(diff);
    if (prev_dn > 0.0)
      st.contraction_ratio = std::max(st.contraction_ratio, dn / prev_dn);
    prev_dn = dn;
    phi = std::move(phi_new);
    st.iterations = it + 1;
    if (dn < opt_.fp_tol * std::max(1.0, g.norm_H(phi))) {
      converged = true;
      break;
    }
  }
  st.converged = converged;
  st.norm_phi_H = g.norm_H(phi);

  // multiplier via the hybrid projection: the bubble part of the defect by
  // adaptive quadrature, the correction part by the Simpson weights
  std::vector<double> nl_full(n);
  for (int i = 0; i < n; ++i)
    nl_full[i] = g.a_node[i] * (fpow(sc.W[i] + phi[i], p1) - fpow(sc.W[i], p1));
  const double mu = (sc.WZ_H - sc.fWZ - g.dot_quad(nl_full, sc.Z)) / sc.ZZ_H;
  st.multipliers.assign(m + 1, 0.0);
  st.multipliers[0] = mu;
  st.reduced_gradient_t = mu * sc.ZZ_H / (2.0 * t);

  // K-perp strong residual: defect minus its multiplier component
  {
    std::vector<double> res(n);
    const auto Aphi = g.apply_operator(phi);
    for (int i = 0; i < n; ++i)
      res[i] = sc.AW[i] + Aphi[i] -
               g.a_node[i] * fpow(sc.W[i] + phi[i], p1) - lam * AZ_h[i];
    st.residual_H = std::sqrt(g.dot_cells(res, res));
  }
  st.orthogonality_rel =
      std::abs(g.dot_cells(AZ_h, phi)) /
      std::max(1e-300, g.norm_H(phi) * g.norm_H(sc.Z));

  // hybrid reduced energy J(W + phi)
  {
    const double pw = Dimension(m).two_star() - eps;
    std::vector<double> ones(n, 1.0), nlJ(n), fW(n);
    for (int i = 0; i < n; ++i) {
      fW[i] = g.a_node[i] * fpow(sc.W[i], p1);
      nlJ[i] = g.a_node[i] * (fpow(sc.W[i] + phi[i], pw) - fpow(sc.W[i], pw) -
                              pw * fpow(sc.W[i], p1) * phi[i]) /
               pw;
    }
    const double JpW_phi = g.dot_quad(sc.AW, phi) - g.dot_quad(fW, phi);
    const double half_phi = 0.5 * g.inner_H(phi, phi);
    st.reduced_energy = sphere_constants(Dimension(m)).omega_m_minus_1 *
                            (sc.JW + JpW_phi + half_phi - g.dot_quad(nlJ, ones)) /
                        1.0;
  }
  st.correction = std::move(phi);
  return st;
}

LSState RadialReduction::correction_fixed_point(double eps, double t) const {
  if (t < opt_.t_lo || t > opt_.t_hi)
    throw std::domain_error("t outside the admissible window");
  const auto g = grid_for(eps, t);
  const auto sc = make_scalars(*g, eps, t);
  return fixed_point_on(*g, sc, eps, t);
}

RadialReduction::ReducedSolve RadialReduction::reduced_solve(
    double eps, std::optional<double> t_guess) const {
  const int sign_eps = eps > 0 ? 1 : -1;
  double t0;
  if (t_guess) {
    t0 = *t_guess;
  } else {
    const auto fn = ReducedEnergyFn::from_model(model_, sign_eps);
    t0 = critical_point(fn).t0;  // throws on regime mismatch
  }
  double ta = 0.85 * t0, tb = 1.15 * t0;
  auto mu_at = [&](double t) {
    return correction_fixed_point(eps, t).multipliers[0];
  };
  int evals = 2;
  double fa = mu_at(ta), fb = mu_at(tb);
  for (int it = 0; it < 40; ++it) {
    if (fb == fa) break;
    double tc = tb - fb * (tb - ta) / (fb - fa);
    tc = std::min(std::max(tc, 0.25 * t0), 4.0 * t0);
    const double fc = mu_at(tc);
    ++evals;
    ta = tb;
    fa = fb;
    tb = tc;
    fb = fc;
    if (std::abs(tb - ta) < 1e-6 * tb) break;
  }
  ReducedSolve rs;
  rs.t_eps = tb;
  rs.state = correction_fixed_point(eps, tb);
  ++evals;
  rs.evaluations = evals + rs.state.iterations;
  const auto g = grid_for(eps, tb);
  const auto sc = make_scalars(*g, eps, tb);
  rs.u.resize(g->n);
  for (int i = 0; i < g->n; ++i) rs.u[i] = sc.W[i] + rs.state.correction[i];
  return rs;
}

RadialReduction::ResidualReport RadialReduction::verify_solution(
    double eps, const std::vector<double>& u, const RadialGrid& g) const {
  const int m = chart_.m;
  const double p1 = Dimension(m).two_star() - 1.0 - eps;
  ResidualReport rep;
  const auto Au = g.apply_operator(u);
  std::vector<double> rhs(g.n), res(g.n);
  for (int i = 0; i < g.n; ++i) {
    rhs[i] = g.a_node[i] * fpow(u[i], p1);
    res[i] = Au[i] - rhs[i];
  }
  rep.residual_rel = std::sqrt(g.dot_cells(res, res)) /
                     std::sqrt(g.dot_cells(rhs, rhs));
  int imax = 0;
  double umin = u[0];
  for (int i = 0; i < g.n; ++i) {
    if (u[i] > u[imax]) imax = i;
    umin = std::min(umin, u[i]);
  }
  rep.argmax_rho = g.rho[imax];
  rep.min_value = umin;
  // half-max radius, normalized by the bubble's own half-max radius
  const double half = u[imax] / 2.0;
  double r_half = g.rho[g.n - 1];
  for (int i = imax; i < g.n; ++i) {
    if (u[i] <= half) {
      const double f = (half - u[i - 1]) / (u[i] - u[i - 1]);
      r_half = g.rho[i - 1] + f * g.d;
      break;
    }
  }
  const double z_half =
      std::sqrt(std::pow(2.0, 2.0 / (m - 2.0)) - 1.0);  // U(z)/U(0)=1/2
  rep.width_over_sqrt_eps = r_half / z_half / std::sqrt(std::abs(eps));
  return rep;
}

std::vector<double> project_perp(const RadialGrid& g,
                                 const std::vector<std::vector<double>>& zs,
                                 const std::vector<double>& f) {
  const size_t k = zs.size();
  std::vector<std::vector<double>> az(k);
  for (size_t j = 0; j < k; ++j) az[j] = g.apply_operator(zs[j]);
  // Gram system G c = <f, Z_j>_H
  std::vector<double> G(k * k), rhs(k);
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < k; ++j) G[i * k + j] = g.dot_cells(az[i], zs[j]);
    rhs[i] = g.dot_cells(az[i], f);
  }
  for (size_t c = 0; c < k; ++c) {  // small Gaussian elimination
    size_t piv = c;
    for (size_t r = c + 1; r < k; ++r)
      if (std::abs(G[r * k + c]) > std::abs(G[piv * k + c])) piv = r;
    if (std::abs(G[piv * k + c]) < 1e-14 * std::abs(G[0]))
      throw std::runtime_error("kernel basis degenerate on this grid");
    if (piv != c) {
      for (size_t j = 0; j < k; ++j) std::swap(G[c * k + j], G[piv * k + j]);
      std::swap(rhs[c], rhs[piv]);
    }
    for (size_t r = c + 1; r < k; ++r) {
      const double fscale = G[r * k + c] / G[c * k + c];
      for (size_t j = c; j < k; ++j) G[r * k + j] -= fscale * G[c * k + j];
      rhs[r] -= fscale * rhs[c];
    }
  }
  std::vector<double> coef(k);
  for (size_t c = k; c-- > 0;) {
    double s = rhs[c];
    for (size_t j = c + 1; j < k; ++j) s -= G[c * k + j] * coef[j];
    coef[c] = s / G[c * k + c];
  }
  std::vector<double> out = f;
  for (size_t j = 0; j < k; ++j)
    for (size_t i = 0; i < out.size(); ++i) out[i] -= coef[j] * zs[j][i];
  return out;
}

TensorDemo run_tensor_demo(const ManifoldModel& model,
                           const TensorChartSpec& spec, double eps, double t,
                           double fp_tol, int max_iter) {
  const int m = model.dim();
  Dimension dim(m);
  TensorChart chart(spec, model);
  const double delta = std::sqrt(std::abs(eps) * t);
  if (chart.min_spacing() > delta / 8.0)
    throw std::domain_error("tensor grid must resolve the concentration "
                            "scale (need at least 8 nodes per delta)");
  const double s = std::pow(delta, -0.5 * (m - 2));
  const double two_star = dim.two_star();
  const double p1 = two_star - 1.0 - eps;
  const double p2 = two_star - 2.0 - eps;

  const Cutoff& chi = model.cutoff();
  Cutoff cut = chi;
  cut.radius = spec.r_cut;  // chart cutoff, kept inside the demo box
  auto chi_v = [&](double r) { return cut.value(r); };
  auto chi_1 = [&](double r) { return cut.d1(r); };
  auto chi_2 = [&](double r) { return cut.d2(r); };

  // radial profiles of the ansatz and kernels with analytic derivatives
  auto Wp = [&](double r) { return chi_v(r) * s * bubble_profile(dim, r / delta); };
  auto Wp1 = [&](double r) {
    return chi_1(r) * s * bubble_profile(dim, r / delta) +
           chi_v(r) * s / delta * bubble_profile_d1(dim, r / delta);
  };
  auto Wp2 = [&](double r) {
    return chi_2(r) * s * bubble_profile(dim, r / delta) +
           2.0 * chi_1(r) * s / delta * bubble_profile_d1(dim, r / delta) +
           chi_v(r) * s / (delta * delta) * bubble_profile_d2(dim, r / delta);
  };
  auto Z0p = [&](double r) { return chi_v(r) * s * kernel0_profile(dim, r / delta); };
  auto Z0p1 = [&](double r) {
    return chi_1(r) * s * kernel0_profile(dim, r / delta) +
           chi_v(r) * s / delta * kernel0_profile_d1(dim, r / delta);
  };
  auto Z0p2 = [&](double r) {
    return chi_2(r) * s * kernel0_profile(dim, r / delta) +
           2.0 * chi_1(r) * s / delta * kernel0_profile_d1(dim, r / delta) +
           chi_v(r) * s / (delta * delta) * kernel0_profile_d2(dim, r / delta);
  };
  auto Gp = [&](double r) { return chi_v(r) * s * bubble_profile_d1(dim, r / delta); };
  auto Gp1 = [&](double r) {
    return chi_1(r) * s * bubble_profile_d1(dim, r / delta) +
           chi_v(r) * s / delta * bubble_profile_d2(dim, r / delta);
  };
  auto Gp2 = [&](double r) {
    return chi_2(r) * s * bubble_profile_d1(dim, r / delta) +
           2.0 * chi_1(r) * s / delta * bubble_profile_d2(dim, r / delta) +
           chi_v(r) * s / (delta * delta) * bubble_profile_d3(dim, r / delta);
  };

  // isotropic radial weight and its derivative (matches chart.weight_at)
  const double aq = model.a_laplacian() / m;
  const double tl = 1.05 * spec.r_cut,
               th = 0.98 * spec.L * std::sqrt(double(m));
  auto sm5 = [](double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return ((6.0 * x - 15.0) * x + 10.0) * x * x * x;
  };
  auto sm5d = [](double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return ((30.0 * x - 60.0) * x + 30.0) * x * x;
  };
  auto a_rad = [&](double r) {
    return model.a0() + 0.5 * aq * r * r * (1.0 - sm5((r - tl) / (th - tl)));
  };
  auto a_rad1 = [&](double r) {
    const double x = (r - tl) / (th - tl);
    return aq * r * (1.0 - sm5(x)) -
           0.5 * aq * r * r * sm5d(x) / (th - tl);
  };
  const double h0 = model.h0();

  const size_t N = chart.size();
  std::vector<double> W = chart.sample_radial(Wp);
  std::vector<std::vector<double>> Z(m + 1);
  Z[0] = chart.sample_radial(Z0p);
  for (int i = 1; i <= m; ++i) Z[i] = chart.sample_l1(Gp, i - 1);

  // analytic nodal operator values
  auto apply_radial_analytic = [&](auto f, auto f1, auto f2) {
    return chart.sample_radial([&](double r) {
      const double lap = r > 0 ? f2(r) + (m - 1) * f1(r) / r : m * f2(0.0);
      return -a_rad(r) * lap - a_rad1(r) * f1(r) + a_rad(r) * h0 * f(r);
    });
  };
  std::vector<double> AW = apply_radial_analytic(Wp, Wp1, Wp2);
  std::vector<std::vector<double>> AZ(m + 1);
  AZ[0] = apply_radial_analytic(Z0p, Z0p1, Z0p2);
  for (int i = 1; i <= m; ++i)
    AZ[i] = chart.sample_l1(
        [&](double r) {
          const double lap =
              Gp2(r) + (m - 1) * (Gp1(r) / r - Gp(r) / (r * r));
          return -a_rad(r) * lap - a_rad1(r) * Gp1(r) + a_rad(r) * h0 * Gp(r);
        },
        i - 1);

  std::vector<double> aw(N);
  {
    std::vector<double> y(m);
    for (size_t i = 0; i < N; ++i) {
      chart.node_point(i, y);
      double r2 = 0;
      for (double c : y) r2 += c * c;
      aw[i] = a_rad(std::sqrt(r2));
    }
  }

  std::vector<double> R_strong(N), shift(N), phi(N, 0.0);
  for (size_t i = 0; i < N; ++i) {
    R_strong[i] = -(AW[i] - aw[i] * fpow(W[i], p1));
    shift[i] = -aw[i] * p1 * fpow(W[i], p2);
  }

  TensorDemo out;
  double prev_dn = -1.0;
  std::vector<double> lam(m + 1, 0.0);
  std::vector<double> x_prev;
  for (int it = 0; it < max_iter; ++it) {
    std::vector<double> rhs(N);
    for (size_t i = 0; i < N; ++i) {
      const double nl = aw[i] * (fpow(W[i] + phi[i], p1) - fpow(W[i], p1) -
                                 p1 * fpow(W[i], p2) * phi[i]);
      rhs[i] = R_strong[i] + nl;
      if (!std::isfinite(rhs[i]))
        throw std::runtime_error("tensor iterates diverged");
    }
    const double inner_tol =
        (prev_dn < 0) ? 1e-6
                      : std::min(1e-6, std::max(1e-10, 1e-3 * prev_dn /
                                                           (out.phi_norm_H + 1.0)));
    auto sol = chart.solve_bordered(shift, rhs, AZ, inner_tol, 2000,
                                    x_prev.empty() ? nullptr : &x_prev);
    out.minres_iterations += sol.iterations;
    lam = sol.lambda;
    std::vector<double> diff(N);
    for (size_t i = 0; i < N; ++i) diff[i] = sol.x[i] - phi[i];
    const double dn = chart.norm_H(diff);
    if (prev_dn > 0.0)
      out.contraction_ratio = std::max(out.contraction_ratio, dn / prev_dn);
    prev_dn = dn;
    phi = sol.x;
    x_prev = sol.x;
    out.iterations = it + 1;
    out.phi_norm_H = chart.norm_H(phi);
    if (dn < fp_tol * std::max(1.0, out.phi_norm_H)) {
      out.converged = true;
      break;
    }
  }
  out.multipliers = lam;

  // strong residual and concentration diagnostics of u = W + phi
  std::vector<double> u(N), Au;
  for (size_t i = 0; i < N; ++i) u[i] = W[i] + phi[i];
  chart.apply_operator(u, Au);
  double rnum = 0.0, rden = 0.0;
  size_t imax = 0;
  out.min_u = u[0];
  for (size_t i = 0; i < N; ++i) {
    const double f = aw[i] * fpow(u[i], p1);
    const double r = Au[i] - f;
    const double v = chart.cell_volume(i);
    rnum += v * r * r;
    rden += v * f * f;
    if (u[i] > u[imax]) imax = i;
    out.min_u = std::min(out.min_u, u[i]);
    out.max_u = std::max(out.max_u, u[i]);
  }
  out.residual_rel = std::sqrt(rnum / rden);
  std::vector<double> ymax(m);
  chart.node_point(imax, ymax);
  double off = 0.0;
  for (double c : ymax) off = std::max(off, std::abs(c));
  out.argmax_offset_cells = off / chart.min_spacing();
  return out;
}

double RadialReduction::grad_weight_defect_norm(double eps, double t) const {
  const int m = chart_.m;
  const double delta = std::sqrt(std::abs(eps) * t);
  const double s = s_epsilon(m, eps);
  const double q = m * s / (m + 2.0 * s);
  const auto W = make_bubble_ansatz(chart_, m, delta);
  const std::vector<double> seg = {0.0, 2.0 * delta, 8.0 * delta,
                                   0.5 * chart_.r_cut, chart_.r_cut};
  const double val = integrate_segmented(
      [&](double r) {
        return std::pow(std::abs(chart_.a_deriv(r) * W.f1(r)), q) *
               std::pow(r, m - 1.0);
      },
      seg, 1e-11);
  return std::pow(sphere_constants(Dimension(m)).omega_m_minus_1 * val,
                  1.0 / q);
}

}  // namespace blab
