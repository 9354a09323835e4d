#include "blab/tensor.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "blab/bubble.hpp"

namespace blab {

namespace {
double smoothstep5(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return ((6.0 * x - 15.0) * x + 10.0) * x * x * x;
}
}  // namespace

TensorChart::TensorChart(const TensorChartSpec& spec, const ManifoldModel& model)
    : spec_(spec), m_(spec.m), n_(spec.n) {
  if (m_ < 2 || m_ > 5) throw std::invalid_argument("tensor chart dimension");
  if (model.dim() != m_) throw std::invalid_argument("model dimension");
  if (model.contraction_iikk() != 0.0)
    throw std::invalid_argument("tensor chart supports flat metric jets");
  total_ = 1;
  for (int d = 0; d < m_; ++d) total_ *= size_t(n_);
  y_.resize(n_ + 2);
  for (int j = 0; j <= n_ + 1; ++j) {
    const double xi = -1.0 + 2.0 * j / (n_ + 1);
    y_[j] = spec.kappa > 0.0
                ? spec.L * std::sinh(spec.kappa * xi) / std::sinh(spec.kappa)
                : spec.L * xi;
  }
  dyp_.resize(n_ + 1);
  for (int j = 0; j <= n_; ++j) dyp_[j] = y_[j + 1] - y_[j];
  cellw_.resize(n_);
  min_dy_ = 1e300;
  for (int j = 0; j < n_; ++j) {
    cellw_[j] = 0.5 * (y_[j + 2] - y_[j]);
    min_dy_ = std::min(min_dy_, dyp_[j]);
  }
  a0_ = model.a0();
  h0_ = model.h0();
  a_hess_ = model.a_hess();
  taper_lo_ = 1.05 * spec.r_cut;
  taper_hi_ = 0.98 * spec.L * std::sqrt(double(m_));
  build_caches();
}

void TensorChart::build_caches() {
  cup_.assign(m_, {});
  cdown0_.assign(m_, {});
  anode_.resize(total_);
  vol_.resize(total_);
  std::vector<double> y(m_);
  for (int d = 0; d < m_; ++d) {
    cup_[d].resize(total_);
    cdown0_[d].resize(total_ / n_);
  }
  for (size_t idx = 0; idx < total_; ++idx) {
    size_t t = idx;
    double v = 1.0;
    for (int d = 0; d < m_; ++d) {
      const int j = int(t % n_);
      y[d] = y_[j + 1];
      v *= cellw_[j];
      t /= n_;
    }
    anode_[idx] = weight_at(y);
    vol_[idx] = v;
  }
  std::vector<double> ymid(m_);
  for (int d = 0; d < m_; ++d) {
    size_t stride = 1;
    for (int e = 0; e < d; ++e) stride *= n_;
    size_t down_count = 0;
    for (size_t idx = 0; idx < total_; ++idx) {
      size_t t = idx;
      for (int e = 0; e < m_; ++e) {
        ymid[e] = y_[int(t % n_) + 1];
        t /= n_;
      }
      const int j = int((idx / stride) % n_);
      const double yc = ymid[d];
      ymid[d] = 0.5 * (y_[j + 1] + y_[j + 2]);
      cup_[d][idx] = weight_at(ymid) / dyp_[j + 1];
      if (j == 0) {
        ymid[d] = 0.5 * (y_[0] + y_[1]);
        cdown0_[d][down_count++] = weight_at(ymid) / dyp_[0];
      }
      ymid[d] = yc;
    }
  }
}

void TensorChart::node_point(size_t idx, std::vector<double>& y) const {
  y.resize(m_);
  for (int d = 0; d < m_; ++d) {
    y[d] = y_[int(idx % n_) + 1];
    idx /= n_;
  }
}

double TensorChart::weight_at(const std::vector<double>& y) const {
  double q = 0.0, r2 = 0.0;
  for (int i = 0; i < m_; ++i) {
    r2 += y[i] * y[i];
    for (int j = 0; j < m_; ++j) q += a_hess_[i * m_ + j] * y[i] * y[j];
  }
  const double r = std::sqrt(r2);
  const double psi = 1.0 - smoothstep5((r - taper_lo_) / (taper_hi_ - taper_lo_));
  return a0_ + 0.5 * q * psi;
}

double TensorChart::cell_volume(size_t idx) const { return vol_[idx]; }

void TensorChart::apply_operator(const std::vector<double>& u,
                                 std::vector<double>& out) const {
  out.assign(total_, 0.0);
  std::vector<size_t> stride(m_);
  stride[0] = 1;
  for (int d = 1; d < m_; ++d) stride[d] = stride[d - 1] * n_;
  std::vector<size_t> down_counts(m_, 0);
  std::vector<int> ji(m_);
  for (size_t idx = 0; idx < total_; ++idx) {
    size_t t = idx;
    for (int d = 0; d < m_; ++d) {
      ji[d] = int(t % n_);
      t /= n_;
    }
    const double uc = u[idx];
    double acc = 0.0;
    for (int d = 0; d < m_; ++d) {
      const int j = ji[d];
      const double up = (j + 1 < n_) ? u[idx + stride[d]] : 0.0;
      const double fluxp = cup_[d][idx] * (up - uc);
      double fluxm;
      if (j > 0) {
        fluxm = cup_[d][idx - stride[d]] * (uc - u[idx - stride[d]]);
      } else {
        fluxm = cdown0_[d][down_counts[d]++] * uc;
      }
      acc += (fluxm - fluxp) / cellw_[j];
    }
    out[idx] = acc + anode_[idx] * h0_ * uc;
  }
}

double TensorChart::dot_cells(const std::vector<double>& u,
                              const std::vector<double>& v) const {
  double s = 0.0;
  for (size_t idx = 0; idx < total_; ++idx)
    s += cell_volume(idx) * u[idx] * v[idx];
  return s;
}

double TensorChart::inner_H(const std::vector<double>& u,
                            const std::vector<double>& v) const {
  std::vector<double> Au;
  apply_operator(u, Au);
  return dot_cells(Au, v);
}

double TensorChart::norm_H(const std::vector<double>& u) const {
  return std::sqrt(std::max(inner_H(u, u), 0.0));
}

std::vector<double> TensorChart::sample_radial(
    const std::function<double(double)>& f) const {
  std::vector<double> out(total_);
  std::vector<double> y(m_);
  for (size_t idx = 0; idx < total_; ++idx) {
    node_point(idx, y);
    double r2 = 0.0;
    for (double c : y) r2 += c * c;
    out[idx] = f(std::sqrt(r2));
  }
  return out;
}

std::vector<double> TensorChart::sample_l1(
    const std::function<double(double)>& f, int axis) const {
  std::vector<double> out(total_);
  std::vector<double> y(m_);
  for (size_t idx = 0; idx < total_; ++idx) {
    node_point(idx, y);
    double r2 = 0.0;
    for (double c : y) r2 += c * c;
    const double r = std::sqrt(r2);
    out[idx] = r > 0 ? f(r) * y[axis] / r : 0.0;
  }
  return out;
}

TensorChart::BorderedResult TensorChart::solve_bordered(
    const std::vector<double>& diag_shift, const std::vector<double>& rhs,
    const std::vector<std::vector<double>>& border, double rel_tol,
    int max_iter, const std::vector<double>* x0) const {
  const size_t N = total_;
  const size_t nb = border.size();
  const size_t NN = N + nb;

  // sqrt(cell) symmetrization
  std::vector<double> sq(N), isq(N);
  for (size_t i = 0; i < N; ++i) {
    sq[i] = std::sqrt(cell_volume(i));
    isq[i] = 1.0 / sq[i];
  }
  // Jacobi preconditioner from the positive part of the operator diagonal
  std::vector<double> pd(NN, 1.0);
  {
    std::vector<double> y(m_);
    std::vector<int> ji(m_);
    for (size_t idx = 0; idx < N; ++idx) {
      size_t t = idx;
      double diag = 0.0;
      for (int d = 0; d < m_; ++d) {
        ji[d] = int(t % n_);
        y[d] = y_[ji[d] + 1];
        t /= n_;
      }
      for (int d = 0; d < m_; ++d) {
        const int j = ji[d];
        diag += a0_ * (1.0 / dyp_[j + 1] + 1.0 / dyp_[j]) / cellw_[j];
      }
      diag += a0_ * h0_;
      pd[idx] = 1.0 / diag;  // scale-invariant under symmetrization
    }
  }

  auto apply_big = [&](const std::vector<double>& x, std::vector<double>& out) {
    // field part
    std::vector<double> u(N), Au;
    for (size_t i = 0; i < N; ++i) u[i] = x[i] * isq[i];
    apply_operator(u, Au);
    out.assign(NN, 0.0);
    for (size_t i = 0; i < N; ++i)
      out[i] = sq[i] * (Au[i] + 0.0) + diag_shift[i] * x[i];
    for (size_t b = 0; b < nb; ++b) {
      const double lam = x[N + b];
      double dot = 0.0;
      for (size_t i = 0; i < N; ++i) {
        out[i] -= lam * border[b][i] * sq[i];
        dot += border[b][i] * sq[i] * x[i];
      }
      out[N + b] = -dot;
    }
  };
  auto precond = [&](const std::vector<double>& r, std::vector<double>& z) {
    z.resize(NN);
    for (size_t i = 0; i < NN; ++i) z[i] = r[i] * pd[i];
  };

  std::vector<double> b(NN, 0.0);
  for (size_t i = 0; i < N; ++i) b[i] = rhs[i] * sq[i];

  // preconditioned MINRES (Paige-Saunders recurrences)
  std::vector<double> x(NN, 0.0);
  if (x0) {
    for (size_t i = 0; i < N && i < x0->size(); ++i) x[i] = (*x0)[i] * sq[i];
  }
  std::vector<double> r1(NN), r2(NN), y(NN), v(NN), w1(NN, 0.0),
      w2(NN, 0.0), tmp(NN);
  apply_big(x, tmp);
  for (size_t i = 0; i < NN; ++i) r1[i] = b[i] - tmp[i];
  precond(r1, y);
  double beta1 = 0.0;
  for (size_t i = 0; i < NN; ++i) beta1 += r1[i] * y[i];
  if (beta1 < 0) throw std::runtime_error("preconditioner lost definiteness");
  beta1 = std::sqrt(std::max(beta1, 0.0));
  int iters = 0;
  double rel = beta1 == 0.0 ? 0.0 : 1.0;
  if (beta1 > 0.0) {
    double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
    double cs = -1.0, sn = 0.0;
    r2 = r1;
    for (int it = 0; it < max_iter; ++it) {
      for (size_t i = 0; i < NN; ++i) v[i] = y[i] / beta;
      apply_big(v, tmp);
      if (it > 0)
        for (size_t i = 0; i < NN; ++i) tmp[i] -= (beta / oldb) * r1[i];
      double alfa = 0.0;
      for (size_t i = 0; i < NN; ++i) alfa += v[i] * tmp[i];
      for (size_t i = 0; i < NN; ++i) tmp[i] -= (alfa / beta) * r2[i];
      r1 = r2;
      r2 = tmp;
      precond(r2, y);
      oldb = beta;
      double bb = 0.0;
      for (size_t i = 0; i < NN; ++i) bb += r2[i] * y[i];
      beta = std::sqrt(std::max(bb, 0.0));
      const double oldeps = epsln;
      const double delta = cs * dbar + sn * alfa;
      const double gbar = sn * dbar - cs * alfa;
      epsln = sn * beta;
      dbar = -cs * beta;
      double gamma = std::sqrt(gbar * gbar + beta * beta);
      gamma = std::max(gamma, 1e-300);
      cs = gbar / gamma;
      sn = beta / gamma;
      const double phi = cs * phibar;
      phibar = sn * phibar;
      for (size_t i = 0; i < NN; ++i) {
        const double wn = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        w1[i] = w2[i];
        w2[i] = wn;
        x[i] += phi * wn;
      }
      iters = it + 1;
      rel = phibar / beta1;
      if (rel < rel_tol || beta == 0.0) break;
    }
  }

  BorderedResult res;
  res.iterations = iters;
  res.rel_residual = rel;
  res.x.resize(N);
  for (size_t i = 0; i < N; ++i) res.x[i] = x[i] * isq[i];
  res.lambda.assign(nb, 0.0);
  for (size_t bix = 0; bix < nb; ++bix) res.lambda[bix] = x[N + bix];
  return res;
}

double tensor_ansatz_energy(const ManifoldModel& model, double eps, double t,
                            std::span<const double> eta, int n_per_axis,
                            double box) {
  const int m = model.dim();
  Dimension dim(m);
  const double delta = std::sqrt(std::abs(eps) * t);
  const double s = std::pow(delta, -0.5 * (m - 2));
  const double pw = dim.two_star() - eps;
  const Cutoff& chi = model.cutoff();
  const double h = 2.0 * box / n_per_axis;
  const auto& ah = model.a_hess();

  std::vector<double> y(m);
  std::vector<int> ji(m, 0);
  double J = 0.0;
  while (true) {
    double r2 = 0.0;
    for (int d = 0; d < m; ++d) {
      y[d] = -box + (ji[d] + 0.5) * h;
      r2 += y[d] * y[d];
    }
    const double r = std::sqrt(r2);
    double q = 0.0, zb2 = 0.0;
    for (int i = 0; i < m; ++i) {
      const double zi = y[i] / delta - eta[i];
      zb2 += zi * zi;
      for (int j = 0; j < m; ++j) q += ah[i * m + j] * y[i] * y[j];
    }
    const double a = model.a0() + 0.5 * q;
    const double W = chi.value(r) * s * bubble_profile(dim, std::sqrt(zb2));
    // exact gradient of chi(|y|) U(|y/delta - eta|), assembled per axis
    double g2 = 0.0;
    for (int d = 0; d < m; ++d) {
      const double zi = y[d] / delta - eta[d];
      const double rr = r > 0 ? y[d] / r : 0.0;
      const double zr = std::sqrt(zb2);
      const double dUdz = bubble_dprofile_over_r(dim, zr) * zi / delta;
      const double g = chi.d1(r) * rr * s * bubble_profile(dim, zr) +
                       chi.value(r) * s * dUdz;
      g2 += g * g;
    }
    J += std::pow(h, m) *
         (0.5 * a * (g2 + model.h0() * W * W) - a * std::pow(W, pw) / pw);
    int d = 0;
    while (d < m) {
      if (++ji[d] < n_per_axis) break;
      ji[d] = 0;
      ++d;
    }
    if (d == m) break;
  }
  return J;
}

void PeriodicBox::apply(const std::vector<double>& u,
                        std::vector<double>& out) const {
  const double d = L / n;
  out.assign(u.size(), 0.0);
  std::vector<size_t> stride(m);
  stride[0] = 1;
  for (int dd = 1; dd < m; ++dd) stride[dd] = stride[dd - 1] * n;
  for (size_t idx = 0; idx < u.size(); ++idx) {
    double lap = 0.0;
    size_t t = idx;
    for (int dd = 0; dd < m; ++dd) {
      const int j = int(t % n);
      t /= n;
      const size_t jp = (j + 1 < n) ? idx + stride[dd] : idx - size_t(n - 1) * stride[dd];
      const size_t jm = (j > 0) ? idx - stride[dd] : idx + size_t(n - 1) * stride[dd];
      lap += (u[jp] - 2.0 * u[idx] + u[jm]) / (d * d);
    }
    out[idx] = -a * lap + a * h * u[idx];
  }
}

std::vector<double> PeriodicBox::solve(const std::vector<double>& rhs,
                                       double rel_tol, int max_iter) const {
  std::vector<double> x(rhs.size(), 0.0), r = rhs, p = rhs, Ap;
  double rs = 0.0;
  for (double v : r) rs += v * v;
  const double rs0 = rs;
  for (int it = 0; it < max_iter && rs > rel_tol * rel_tol * rs0; ++it) {
    apply(p, Ap);
    double pAp = 0.0;
    for (size_t i = 0; i < p.size(); ++i) pAp += p[i] * Ap[i];
    const double alpha = rs / pAp;
    for (size_t i = 0; i < p.size(); ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    double rs_new = 0.0;
    for (double v : r) rs_new += v * v;
    for (size_t i = 0; i < p.size(); ++i) p[i] = r[i] + rs_new / rs * p[i];
    rs = rs_new;
  }
  return x;
}

double PeriodicBox::symbol(const std::vector<int>& k) const {
  const double d = L / n;
  double s = 0.0;
  for (int dd = 0; dd < m; ++dd)
    s += (2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * k[dd] * d / L)) / (d * d);
  return a * s + a * h;
}

size_t PeriodicBox::size() const {
  size_t s = 1;
  for (int dd = 0; dd < m; ++dd) s *= size_t(n);
  return s;
}

}  // namespace blab
