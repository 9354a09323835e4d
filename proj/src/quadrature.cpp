#include "blab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace blab {

namespace {

// Gauss-Kronrod 15-point nodes/weights on [-1,1] (7-point Gauss embedded).
constexpr double xgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double wgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Piece {
  double a, b, integral, error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

Piece gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = wgk[7] * fc, resg = wg[3] * fc;
  double resabs = std::abs(resk);
  for (int j = 0; j < 7; ++j) {
    const double fx1 = f(c - h * xgk[j]);
    const double fx2 = f(c + h * xgk[j]);
    resk += wgk[j] * (fx1 + fx2);
    resabs += wgk[j] * (std::abs(fx1) + std::abs(fx2));
    if (j % 2 == 1) resg += wg[j / 2] * (fx1 + fx2);
  }
  double err = std::abs((resk - resg) * h);
  // quadpack-style error sharpening
  if (resabs > 0.0 && err > 0.0)
    err = resabs * h * std::min(1.0, std::pow(200.0 * err / (resabs * h), 1.5));
  return {a, b, resk * h, err};
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double abs_tol, int max_intervals) {
  if (a == b) return 0.0;
  std::priority_queue<Piece> heap;
  Piece p0 = gk15(f, a, b);
  double total = p0.integral, toterr = p0.error;
  heap.push(p0);
  int n = 1;
  while (toterr > abs_tol + rel_tol * std::abs(total) && n < max_intervals) {
    Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) break;  // interval exhausted
    Piece l = gk15(f, worst.a, mid), r = gk15(f, mid, worst.b);
    total += l.integral + r.integral - worst.integral;
    toterr += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
    ++n;
  }
  return total;
}

double integrate_segmented(const std::function<double(double)>& f,
                           const std::vector<double>& pts, double rel_tol,
                           double abs_tol) {
  double s = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    s += integrate(f, pts[i], pts[i + 1], rel_tol, abs_tol);
  return s;
}

double integrate_radial_tail(const std::function<double(double)>& f,
                             const std::vector<double>& inner_pts, double decay,
                             double r_start, double rel_tol, double tail_tol) {
  if (decay <= 1.0) throw std::invalid_argument("tail decay must exceed 1");
  std::vector<double> pts = inner_pts;
  double R = std::max(r_start, pts.empty() ? 1.0 : 2.0 * pts.back());
  pts.push_back(R);
  std::sort(pts.begin(), pts.end());
  double total = integrate_segmented(f, pts, rel_tol);
  for (int it = 0; it < 60; ++it) {
    const double tail_bound = std::abs(f(R)) * R / (decay - 1.0);
    if (tail_bound <= tail_tol * std::max(std::abs(total), 1e-300)) return total;
    const double R2 = 2.0 * R;
    total += integrate(f, R, R2, rel_tol);
    R = R2;
  }
  return total;
}

}  // namespace blab
