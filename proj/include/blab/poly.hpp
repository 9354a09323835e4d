#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>

namespace blab {

/// Sparse multivariate polynomial in up to 4 variables, double coefficients.
/// Just enough for exact operator-identity checks on polynomial data.
class Poly {
 public:
  using Key = std::array<uint8_t, 4>;

  Poly() = default;
  static Poly constant(double c) {
    Poly p;
    if (c != 0.0) p.c_[{0, 0, 0, 0}] = c;
    return p;
  }
  static Poly var(int i, double coeff = 1.0) {
    Poly p;
    Key k{0, 0, 0, 0};
    k[i] = 1;
    p.c_[k] = coeff;
    return p;
  }

  Poly operator+(const Poly& o) const {
    Poly r = *this;
    for (auto& [k, v] : o.c_) r.c_[k] += v;
    r.prune();
    return r;
  }
  Poly operator-(const Poly& o) const {
    Poly r = *this;
    for (auto& [k, v] : o.c_) r.c_[k] -= v;
    r.prune();
    return r;
  }
  Poly operator*(const Poly& o) const {
    Poly r;
    for (auto& [ka, va] : c_)
      for (auto& [kb, vb] : o.c_) {
        Key k;
        for (int i = 0; i < 4; ++i) k[i] = uint8_t(ka[i] + kb[i]);
        r.c_[k] += va * vb;
      }
    r.prune();
    return r;
  }
  Poly operator*(double s) const {
    Poly r = *this;
    for (auto& [k, v] : r.c_) v *= s;
    r.prune();
    return r;
  }

  Poly deriv(int i) const {
    Poly r;
    for (auto& [k, v] : c_) {
      if (k[i] == 0) continue;
      Key kk = k;
      kk[i] -= 1;
      r.c_[kk] += v * k[i];
    }
    return r;
  }

  Poly pow(int n) const {
    Poly r = constant(1.0);
    for (int i = 0; i < n; ++i) r = r * (*this);
    return r;
  }

  double eval(std::span<const double> x) const {
    double s = 0.0;
    for (auto& [k, v] : c_) {
      double t = v;
      for (int i = 0; i < 4; ++i)
        for (int e = 0; e < k[i]; ++e) t *= x[i];
      s += t;
    }
    return s;
  }

  double max_abs_coeff() const {
    double s = 0.0;
    for (auto& [k, v] : c_) s = std::max(s, std::abs(v));
    return s;
  }
  bool empty() const { return c_.empty(); }

 private:
  void prune() {
    for (auto it = c_.begin(); it != c_.end();)
      it = (it->second == 0.0) ? c_.erase(it) : std::next(it);
  }
  std::map<Key, double> c_;
};

inline Poly operator*(double s, const Poly& p) { return p * s; }

}  // namespace blab
