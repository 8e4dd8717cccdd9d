#include "expjump/distributions.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <boost/math/special_functions/airy.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "expjump/errors.hpp"
#include "expjump/numerics.hpp"
#include "expjump/rng.hpp"

namespace expjump::dist {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

double checked_probability(double raw, const char* what) {
  if (!(raw >= -1e-8 && raw <= 1.0 + 1e-8)) {
    throw ConvergenceError(std::string(what) + ": determinant " + std::to_string(raw) +
                           " outside [0,1]");
  }
  return std::clamp(raw, 0.0, 1.0);
}

// Complex nodes and weights (dz) for a contour made of two rays meeting at `vertex`:
// in along angle -theta, out along angle +theta.
struct Ray {
  std::vector<cplx> z;
  std::vector<cplx> dz;
};

Ray two_rays(double vertex, double theta, int n, double length) {
  const auto gl = numerics::gauss_legendre(n, 0.0, length);
  const cplx in = std::polar(1.0, -theta), out = std::polar(1.0, theta);
  Ray r;
  for (int k = 0; k < n; ++k) {
    r.z.push_back(vertex + gl.nodes[k] * in);
    r.dz.push_back(-gl.weights[k] * in);
    r.z.push_back(vertex + gl.nodes[k] * out);
    r.dz.push_back(gl.weights[k] * out);
  }
  return r;
}

double fredholm_det_minus(const KernelQuadrature& quad, const Eigen::MatrixXd& kernel) {
  const int n = quad.node_count;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a(i, j) = (i == j ? 1.0 : 0.0) -
                std::sqrt(quad.weights[i]) * kernel(i, j) * std::sqrt(quad.weights[j]);
    }
  }
  return a.partialPivLu().determinant();
}

}  // namespace

KernelQuadrature KernelQuadrature::make(double r, int n, double scale) {
  if (n < 2) throw DomainError("kernel quadrature needs at least two nodes");
  const auto gl = numerics::gauss_legendre(n, 0.0, 1.0);
  KernelQuadrature q;
  q.node_count = n;
  q.r = r;
  q.scale = scale;
  for (int i = 0; i < n; ++i) {
    const double s = gl.nodes[i];
    q.nodes.push_back(r - scale * std::log1p(-s));
    q.weights.push_back(gl.weights[i] * scale / (1.0 - s));
  }
  return q;
}

double F2_airy(double r, int nodes) {
  const auto quad = KernelQuadrature::make(r, nodes);
  std::vector<double> ai(nodes), aip(nodes);
  for (int i = 0; i < nodes; ++i) {
    ai[i] = boost::math::airy_ai(quad.nodes[i]);
    aip[i] = boost::math::airy_ai_prime(quad.nodes[i]);
  }
  Eigen::MatrixXd k(nodes, nodes);
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      const double x = quad.nodes[i], y = quad.nodes[j];
      k(i, j) = (i == j) ? aip[i] * aip[i] - x * ai[i] * ai[i]
                         : (ai[i] * aip[j] - aip[i] * ai[j]) / (x - y);
    }
  }
  return fredholm_det_minus(quad, k);
}

double F2(double r, const F2Options& opt) {
  if (!std::isfinite(r)) throw DomainError("F2: r must be finite");
  const double v1 = F2_airy(r, opt.nodes);
  if (!opt.check_doubling) return checked_probability(v1, "F2");
  const double v2 = F2_airy(r, 2 * opt.nodes);
  if (std::abs(v1 - v2) > opt.doubling_tol) {
    throw ConvergenceError("F2: node doubling changed the determinant by " +
                           std::to_string(std::abs(v1 - v2)));
  }
  return checked_probability(v2, "F2");
}

namespace {

double bbp_once(double r, const std::vector<double>& b, const ContourKernelOptions& opt) {
  // The w vertex stays right of every b and no further left than -1/2.
  double wv = -0.5;
  for (double x : b) wv = std::max(wv, x + opt.separation);
  const double zv = wv + opt.gap;
  // The cubic decays along the rays only once they pass Re = 0; lengthen them for
  // vertices to the right of the origin.
  const Ray zr = two_rays(zv, kPi / 3.0, opt.nodes_per_ray, opt.ray_length + std::max(zv, 0.0));
  const Ray wr =
      two_rays(wv, 2.0 * kPi / 3.0, opt.nodes_per_ray, opt.ray_length + 2.0 * std::max(wv, 0.0));
  // Conjugating by e^{c(x-y)} with c between the contours keeps every factor decaying
  // in x and y; the determinant is unchanged.
  const double c = wv + 0.5 * opt.gap;
  const auto quad = KernelQuadrature::make(r, opt.nodes);
  const int nv = opt.nodes;
  const auto nz = static_cast<int>(zr.z.size());
  const auto nw = static_cast<int>(wr.z.size());
  const cplx two_pi_i(0.0, 2.0 * kPi);

  Eigen::MatrixXcd zmat(nv, nz), mid(nz, nw), wmat(nw, nv);
  for (int k = 0; k < nz; ++k) {
    const cplx z = zr.z[k];
    cplx pz = 1.0;
    for (double bi : b) pz *= (z - bi);
    const cplx front = z * z * z / 3.0;
    for (int i = 0; i < nv; ++i) {
      zmat(i, k) = std::exp(front - (z - c) * quad.nodes[i]) * zr.dz[k] * pz / two_pi_i;
    }
  }
  for (int l = 0; l < nw; ++l) {
    const cplx w = wr.z[l];
    cplx pw = 1.0;
    for (double bi : b) pw *= (w - bi);
    const cplx front = -w * w * w / 3.0;
    for (int j = 0; j < nv; ++j) {
      wmat(l, j) = std::exp(front + (w - c) * quad.nodes[j]) * wr.dz[l] / (pw * two_pi_i);
    }
  }
  for (int k = 0; k < nz; ++k) {
    for (int l = 0; l < nw; ++l) mid(k, l) = 1.0 / (zr.z[k] - wr.z[l]);
  }
  const Eigen::MatrixXcd kc = zmat * mid * wmat;
  const Eigen::MatrixXd kernel = kc.real();
  return fredholm_det_minus(quad, kernel);
}

}  // namespace

double BBP(double r, int m, const std::vector<double>& b, const ContourKernelOptions& opt) {
  if (!std::isfinite(r)) throw DomainError("BBP: r must be finite");
  if (m < 0 || static_cast<std::size_t>(m) != b.size()) {
    throw DomainError("BBP: b must have exactly m entries");
  }
  const double v1 = bbp_once(r, b, opt);
  if (!opt.check_doubling) return checked_probability(v1, "BBP");
  ContourKernelOptions fine = opt;
  fine.nodes *= 2;
  fine.nodes_per_ray *= 2;
  const double v2 = bbp_once(r, b, fine);
  if (!(std::abs(v1 - v2) <= opt.doubling_tol)) {
    throw ConvergenceError("BBP: node doubling changed the determinant by " +
                           std::to_string(std::abs(v1 - v2)));
  }
  return checked_probability(v2, "BBP");
}

double F2_contour(double r, const ContourKernelOptions& opt) {
  return BBP(r, 0, {}, opt);
}

double normal_cdf(double r) { return 0.5 * std::erfc(-r / std::numbers::sqrt2); }

double gue_largest_cdf_exact(double r, int m) {
  if (m < 1 || m > 3) throw DomainError("exact GUE largest-eigenvalue law implemented for m <= 3");
  if (m == 1) return normal_cdf(r);
  if (r == -INFINITY) return 0.0;
  if (r == INFINITY) return 1.0;
  // Truncated Gaussian moments I_k = int_{-inf}^r x^k e^{-x^2/2} dx and full moments.
  const int kmax = 2 * (m - 1);
  std::vector<double> trunc(kmax + 1), full(kmax + 1);
  const double g = std::exp(-0.5 * r * r);
  const double root = std::sqrt(2.0 * kPi);
  trunc[0] = root * normal_cdf(r);
  full[0] = root;
  if (kmax >= 1) {
    trunc[1] = -g;
    full[1] = 0.0;
  }
  for (int k = 2; k <= kmax; ++k) {
    trunc[k] = -std::pow(r, k - 1) * g + (k - 1) * trunc[k - 2];
    full[k] = (k - 1) * full[k - 2];
  }
  Eigen::MatrixXd a(m, m), f(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      a(i, j) = trunc[i + j];
      f(i, j) = full[i + j];
    }
  }
  return checked_probability(a.determinant() / f.determinant(), "G_m");
}

namespace {

double gue_largest(int m, Rng& rng) {
  std::normal_distribution<double> diag(0.0, 1.0), off(0.0, std::sqrt(0.5));
  if (m == 1) return diag(rng);
  Eigen::MatrixXcd h(m, m);
  for (int i = 0; i < m; ++i) {
    h(i, i) = diag(rng);
    for (int j = i + 1; j < m; ++j) {
      const double re = off(rng);
      const double im = off(rng);
      h(i, j) = cplx(re, im);
      h(j, i) = cplx(re, -im);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

double sample_gue_largest(int m, std::uint64_t seed) {
  if (m < 1) throw DomainError("GUE size must be positive");
  Rng rng(seed);
  return gue_largest(m, rng);
}

MCValue gue_largest_cdf_mc(double r, int m, int samples, std::uint64_t seed) {
  if (m < 1) throw DomainError("GUE size must be positive");
  if (samples < 2) throw DomainError("need at least two samples");
  Rng rng(seed);
  std::int64_t hits = 0;
  for (int i = 0; i < samples; ++i) hits += gue_largest(m, rng) <= r ? 1 : 0;
  const double p = static_cast<double>(hits) / samples;
  return {p, std::sqrt(p * (1.0 - p) / samples)};
}

MCValue G_m(double r, int m, int samples, std::uint64_t seed) {
  if (m < 1) throw DomainError("G_m: m must be positive");
  if (m <= 3) return {gue_largest_cdf_exact(r, m), 0.0};
  return gue_largest_cdf_mc(r, m, samples, seed);
}

}  // namespace expjump::dist
