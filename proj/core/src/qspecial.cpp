#include "expjump/qspecial.hpp"

#include <cmath>
#include <string>

#include "expjump/errors.hpp"
#include "expjump/numerics.hpp"

namespace expjump {

QParam::QParam(double q) : q_(q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("q must lie in (0,1), got " + std::to_string(q));
  }
}

namespace qspecial {

namespace {

template <class T>
T pochhammer_impl(T z, double q, int m, double rel_tol) {
  T prod = 1.0;
  double qk = 1.0;
  for (int k = 0; k < m; ++k) {
    const double a = std::abs(z) * qk;
    // log|tail| <= sum_{j>=k} 2|z|q^j once |z q^k| <= 1/2
    if (m == kInfinity && a <= 0.5 && 2.0 * a / (1.0 - q) < rel_tol) break;
    prod *= (T(1.0) - z * qk);
    qk *= q;
    if (qk == 0.0) break;
  }
  return prod;
}

// Bound on |r_n(u)| / |u| valid for |u| <= 1/2.
constexpr double kTermBound[4] = {2.0, 4.0, 12.0, 52.0};

template <class T>
T term(int n, T u) {
  const T one(1.0);
  const T d = one - u;
  switch (n) {
    case 0:
      return u / d;
    case 1:
      return u / (d * d);
    case 2:
      return u * (one + u) / (d * d * d);
    default: {
      const T d2 = d * d;
      return u * (one + 4.0 * u + u * u) / (d2 * d2);
    }
  }
}

template <class T>
T phi_impl(int n, T w, double q, const SeriesOptions& opt) {
  if (n < 0 || n > 3) throw DomainError("phi_n: n must be in 0..3");
  if (w == T(0.0)) return T(0.0);
  T sum(0.0);
  T u = w;
  for (int k = 0; k < 100000; ++k) {
    const double au = std::abs(u);
    if (au <= 0.5 && kTermBound[n] * au / (1.0 - q) <= opt.rel_tol * std::abs(sum)) break;
    if (au < 1e-300) break;
    if (std::abs(T(1.0) - u) < opt.pole_guard) {
      throw PoleError("phi_" + std::to_string(n) + ": argument within pole guard of q^-" +
                      std::to_string(k));
    }
    sum += term(n, u);
    u *= q;
  }
  return sum;
}

}  // namespace

cplx q_pochhammer(cplx z, QParam q, int m, double rel_tol) {
  if (m < 0) throw DomainError("q_pochhammer: m must be nonnegative");
  return pochhammer_impl<cplx>(z, q, m, rel_tol);
}

double q_pochhammer(double z, QParam q, int m, double rel_tol) {
  if (m < 0) throw DomainError("q_pochhammer: m must be nonnegative");
  return pochhammer_impl<double>(z, q, m, rel_tol);
}

double phi_n(int n, double w, QParam q, const SeriesOptions& opt) {
  return phi_impl<double>(n, w, q, opt);
}

cplx phi_n(int n, cplx w, QParam q, const SeriesOptions& opt) {
  return phi_impl<cplx>(n, w, q, opt);
}

double phi3_minus_phi2(double w, QParam q, const SeriesOptions& opt) {
  if (!(w >= 0.0 && w < 1.0)) throw DomainError("phi3_minus_phi2: w must lie in [0,1)");
  if (w == 0.0) return 0.0;
  double sum = 0.0;
  double u = w;
  while (true) {
    // 2u^2(2+u)/(1-u)^4 <= 80 u^2 for u <= 1/2
    if (u <= 0.5 && 80.0 * u * u / (1.0 - q * q) <= opt.rel_tol * sum) break;
    if (1.0 - u < opt.pole_guard) throw PoleError("phi3_minus_phi2: w too close to 1");
    const double d = 1.0 - u;
    sum += 2.0 * u * u * (2.0 + u) / (d * d * d * d);
    u *= q;
    if (u < 1e-300) break;
  }
  return sum;
}

double phi1_inverse(double rho, QParam q) {
  if (!(rho >= 0.0)) throw DomainError("phi1_inverse: rho must be nonnegative");
  if (rho == 0.0) return 0.0;
  auto f = [&](double w) { return phi_n(1, w, q) - rho; };
  double hi = 0.5;
  double gap = 0.5;
  while (f(hi) < 0.0) {
    gap *= 0.1;
    if (gap < 1e-8) throw DomainError("phi1_inverse: rho too large to resolve");
    hi = 1.0 - gap;
  }
  return numerics::bisect_increasing(f, 0.0, hi);
}

}  // namespace qspecial
}  // namespace expjump
