#pragma once

#include <complex>
#include <limits>

namespace expjump {

using cplx = std::complex<double>;

// Validated q in the open interval (0,1).
class QParam {
 public:
  QParam(double q);  // NOLINT(google-explicit-constructor): throws DomainError
  double value() const noexcept { return q_; }
  operator double() const noexcept { return q_; }  // NOLINT

 private:
  double q_;
};

namespace qspecial {

inline constexpr double kDefaultTol = 1e-14;
inline constexpr double kDefaultPoleGuard = 1e-8;

struct SeriesOptions {
  double rel_tol = kDefaultTol;
  // Relative distance |w - q^{-k}| / q^{-k} below which PoleError is raised.
  double pole_guard = kDefaultPoleGuard;
};

inline constexpr int kInfinity = std::numeric_limits<int>::max();

// (z;q)_m = prod_{i<m} (1 - z q^i); m = kInfinity gives the infinite product,
// truncated once the multiplicative tail is below rel_tol.
cplx q_pochhammer(cplx z, QParam q, int m, double rel_tol = kDefaultTol);
double q_pochhammer(double z, QParam q, int m, double rel_tol = kDefaultTol);

// phi_n(w) = sum_{k>=0} r_n(q^k w) with
//   r_0(u) = u/(1-u), r_1(u) = u/(1-u)^2,
//   r_2(u) = u(1+u)/(1-u)^3, r_3(u) = u(1+4u+u^2)/(1-u)^4.
double phi_n(int n, double w, QParam q, const SeriesOptions& opt = {});
cplx phi_n(int n, cplx w, QParam q, const SeriesOptions& opt = {});

// phi_3 - phi_2 summed termwise (all terms positive on (0,1)).
double phi3_minus_phi2(double w, QParam q, const SeriesOptions& opt = {});

// Inverse of the increasing bijection phi_1 : [0,1) -> [0,inf).
double phi1_inverse(double rho, QParam q);

}  // namespace qspecial
}  // namespace expjump
