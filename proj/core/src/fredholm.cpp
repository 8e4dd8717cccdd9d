#include "expjump/fredholm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "expjump/errors.hpp"
#include "expjump/limitshape.hpp"
#include "expjump/numerics.hpp"
#include "expjump/parallel.hpp"
#include "expjump/rng.hpp"

namespace expjump::fredholm {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kTwoPiI(0.0, 2.0 * kPi);

// Discretized outer contour: nodes w and weights dw / (2 pi i).
struct OuterRule {
  std::vector<cplx> w;
  std::vector<cplx> weight;
};

// Discretized inner integral for one outer node: K(w, w') = sum_k coef_k / (v_k - w').
struct InnerRule {
  std::vector<cplx> v;
  std::vector<cplx> coef;
};

// Panels double in length but never exceed half the distance to the singular
// half-line [singular_from, inf), so nearby poles stay resolved.
OuterRule outer_rule(const ContourSpec& c, double decay_rate, double singular_from,
                     int nodes_per_panel) {
  const double cosphi = std::cos(c.phi);
  const double rate = decay_rate * cosphi;  // decay per unit arc length
  double length = c.ray_length;
  if (length <= 0.0) length = rate > 0.0 ? 40.0 / rate : 1e5;
  const double first = c.first_panel > 0.0 ? c.first_panel : c.a / 10.0;
  double cap = c.max_panel;
  if (cap <= 0.0) cap = rate > 0.0 ? std::max(first, 2.5 / rate) : INFINITY;

  const cplx up = std::polar(1.0, c.phi), down = std::polar(1.0, -c.phi);
  auto singular_distance = [&](double s) {
    const cplx w = c.a + s * up;
    return w.real() >= singular_from ? w.imag() : std::abs(w - singular_from);
  };
  std::vector<std::pair<double, double>> panels;
  double s = 0.0, len = first;
  while (s < length) {
    const double e = std::min(s + std::min(len, 0.5 * singular_distance(s)), length);
    panels.emplace_back(s, e);
    len = std::min(2.0 * (e - s), cap);
    s = e;
  }
  OuterRule r;
  // Upper ray traversed inward, then the lower ray outward.
  for (auto it = panels.rbegin(); it != panels.rend(); ++it) {
    const auto gl = numerics::gauss_legendre(nodes_per_panel, it->first, it->second);
    for (int k = nodes_per_panel - 1; k >= 0; --k) {
      r.w.push_back(c.a + gl.nodes[k] * up);
      r.weight.push_back(-gl.weights[k] * up / kTwoPiI);
    }
  }
  for (const auto& [lo, hi] : panels) {
    const auto gl = numerics::gauss_legendre(nodes_per_panel, lo, hi);
    for (int k = 0; k < nodes_per_panel; ++k) {
      r.w.push_back(c.a + gl.nodes[k] * down);
      r.weight.push_back(gl.weights[k] * down / kTwoPiI);
    }
  }
  return r;
}

bool left_of_contour(cplx z, double a, double phi) {
  const cplx d = z - a;
  if (std::abs(d) == 0.0) return false;
  return std::abs(std::arg(d)) > phi;
}

// arg(w (q^u - 1)) in (pi/2 + b, 3pi/2 - b), b = pi/4 - phi/2.
bool direction_ok(cplx w, cplx qu, double phi) {
  double th = std::arg(w * (qu - 1.0));
  if (th < 0.0) th += 2.0 * kPi;
  const double b = kPi / 4.0 - phi / 2.0;
  return th > kPi / 2.0 + b && th < 1.5 * kPi - b;
}

cplx log_poch_inf(cplx z, double q) {
  cplx sum = 0.0;
  cplx zk = z;
  for (int k = 0; k < 100000; ++k) {
    const cplx f = 1.0 - zk;
    if (std::abs(f) < 1e-14) throw PoleError("q-Pochhammer factor vanishes");
    sum += std::log(f);
    if (std::abs(zk) < 1e-18) break;
    zk *= q;
  }
  return sum;
}

// Smallest N >= min_n with q^N |w| <= a / 2.
int line_index(cplx w, double a, double q, int min_n) {
  int n = min_n;
  double r = std::abs(w) * std::pow(q, n);
  while (r > a / 2.0) {
    r *= q;
    ++n;
  }
  return n;
}

struct KernelContext {
  double t, x;
  const SpeedField& field;
  const Roadblocks& rb;
  const ModelParams& params;
  cplx log_minus_zeta;
  double a, phi;
  double singular_from;
};

double vertical_truncation(const DContourSpec& d, cplx log_minus_zeta) {
  if (d.vertical_truncation > 0.0) return d.vertical_truncation;
  const double decay = kPi - std::abs(log_minus_zeta.imag());
  return 40.0 / decay;
}

// (1/2 pi i) Gamma(-u) Gamma(1+u) (-zeta)^u du without the g ratio.
cplx gamma_pair_measure(cplx u, cplx du, cplx log_minus_zeta) {
  return -kPi / std::sin(kPi * u) * std::exp(u * log_minus_zeta) * du / kTwoPiI;
}

void check_node(cplx w, cplx qu, const KernelContext& ctx) {
  if (!left_of_contour(qu * w, ctx.a, ctx.phi) || !direction_ok(w, qu, ctx.phi)) {
    throw ContourError("inner contour node violates the geometric conditions at w = (" +
                       std::to_string(w.real()) + ", " + std::to_string(w.imag()) + ")");
  }
}

InnerRule residue_line_rule(cplx w, cplx lg_w, const KernelContext& ctx, const DContourSpec& d,
                            bool refine) {
  const double q = ctx.params.q;
  const double lnq = std::log(q);
  const double h = refine ? d.line_step / 2.0 : d.line_step;
  const double Y = vertical_truncation(d, ctx.log_minus_zeta);
  const int M = static_cast<int>(std::ceil(Y / h));

  int N = line_index(w, ctx.a, q, 0);
  // The arg condition can fail for mid-sized |w| with a wide circle; shrink it.
  for (int attempt = 0;; ++attempt) {
    const double c = N + 0.5;
    bool ok = true;
    for (int m = -M; m <= M && ok; ++m) {
      const cplx qu = std::exp(cplx(c, m * h) * lnq);
      ok = left_of_contour(qu * w, ctx.a, ctx.phi) && direction_ok(w, qu, ctx.phi);
    }
    if (ok) break;
    if (attempt > 60) throw ContourError("no admissible vertical line for the inner integral");
    ++N;
  }

  InnerRule r;
  const cplx zeta = -std::exp(ctx.log_minus_zeta);
  cplx zn = 1.0;
  double qn = 1.0;
  for (int n = 1; n <= N; ++n) {
    zn *= zeta;
    qn *= q;
    const cplx v = qn * w;
    check_node(w, qn, ctx);
    r.v.push_back(v);
    r.coef.push_back(zn * std::exp(lg_w - log_g(v, ctx.t, ctx.x, ctx.field, ctx.rb, ctx.params)));
  }
  const double c = N + 0.5;
  const double sign = (N % 2 == 0) ? 1.0 : -1.0;
  for (int m = -M; m <= M; ++m) {
    const double y = m * h;
    const cplx u(c, y);
    const cplx qu = std::exp(u * lnq);
    const cplx v = qu * w;
    const cplx measure = h / (2.0 * kPi) * (-kPi * sign / std::cosh(kPi * y)) *
                         std::exp(u * ctx.log_minus_zeta);
    r.v.push_back(v);
    r.coef.push_back(measure *
                     std::exp(lg_w - log_g(v, ctx.t, ctx.x, ctx.field, ctx.rb, ctx.params)));
  }
  return r;
}

InnerRule slit_rule(cplx w, cplx lg_w, const KernelContext& ctx, const DContourSpec& d,
                    bool refine) {
  const double q = ctx.params.q;
  const double lnq = std::log(q);
  const int npp = refine ? 2 * d.nodes_per_panel : d.nodes_per_panel;
  const int N = line_index(w, ctx.a, q, 1);
  const double R = N + 0.5;
  const double sq = std::sqrt(q);
  const double Bd =
      d.B_d > 0.0 ? d.B_d : 0.5 * (1.0 - sq) * ctx.a * std::sin(ctx.phi) / (sq * std::abs(lnq));
  const double dd = std::min(0.25, Bd / std::abs(w));
  const double Y = vertical_truncation(d, ctx.log_minus_zeta);

  // (u, du) pairs along the slit contour, imaginary part nondecreasing.
  std::vector<std::pair<cplx, cplx>> nodes;
  auto add_segment = [&](cplx from, cplx to) {
    const auto gl = numerics::gauss_legendre(npp, 0.0, 1.0);
    for (int k = 0; k < npp; ++k) nodes.emplace_back(from + gl.nodes[k] * (to - from),
                                                     gl.weights[k] * (to - from));
  };
  // Horizontal breakpoints graded toward each integer 1..N.
  std::vector<double> xs{0.5, R};
  for (int n = 1; n <= N; ++n) {
    xs.push_back(n);
    for (double e = dd; e < 0.5; e *= 2.0) {
      xs.push_back(n - e);
      xs.push_back(n + e);
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  for (double y = Y; y > dd; y -= 1.0) add_segment(cplx(R, -y), cplx(R, -std::max(dd, y - 1.0)));
  for (std::size_t i = xs.size() - 1; i > 0; --i) add_segment(cplx(xs[i], -dd), cplx(xs[i - 1], -dd));
  add_segment(cplx(0.5, -dd), cplx(0.5, dd));
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) add_segment(cplx(xs[i], dd), cplx(xs[i + 1], dd));
  for (double y = dd; y < Y; y += 1.0) add_segment(cplx(R, y), cplx(R, std::min(Y, y + 1.0)));

  InnerRule r;
  for (const auto& [u, du] : nodes) {
    const cplx qu = std::exp(u * lnq);
    check_node(w, qu, ctx);
    const cplx v = qu * w;
    r.v.push_back(v);
    r.coef.push_back(gamma_pair_measure(u, du, ctx.log_minus_zeta) *
                     std::exp(lg_w - log_g(v, ctx.t, ctx.x, ctx.field, ctx.rb, ctx.params)));
  }
  return r;
}

cplx fredholm_det(const KernelContext& ctx, const ContourSpec& cspec, const DContourSpec& dspec,
                  bool refine, int* outer_nodes) {
  const double q = ctx.params.q;
  const int npp = refine ? 2 * cspec.nodes_per_panel : cspec.nodes_per_panel;
  const OuterRule outer = outer_rule(cspec, ctx.t * (1.0 - q), ctx.singular_from, npp);
  const auto n = static_cast<Eigen::Index>(outer.w.size());
  if (outer_nodes) *outer_nodes = static_cast<int>(n);
  Eigen::MatrixXcd m(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    const cplx w = outer.w[i];
    const cplx lg = log_g(w, ctx.t, ctx.x, ctx.field, ctx.rb, ctx.params);
    const InnerRule inner = dspec.route == InnerRoute::ResidueLine
                                ? residue_line_rule(w, lg, ctx, dspec, refine)
                                : slit_rule(w, lg, ctx, dspec, refine);
    for (Eigen::Index j = 0; j < n; ++j) {
      cplx sum = 0.0;
      for (std::size_t k = 0; k < inner.v.size(); ++k) sum += inner.coef[k] / (inner.v[k] - outer.w[j]);
      m(static_cast<Eigen::Index>(i), j) = sum * outer.weight[j];
    }
  });
  m += Eigen::MatrixXcd::Identity(n, n);
  return m.partialPivLu().determinant();
}

double min_hc_pole(std::size_t k, const sim::VertexParams& p) {
  double bound = p.xi0;
  for (std::size_t j = 1; j < k; ++j) bound = std::min(bound, -p.xi_at(j) * p.s_at(j));
  return bound;
}

double sample_mean_se(const std::vector<double>& v, double* se) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  *se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return mean;
}

}  // namespace

void ContourSpec::validate(double bound) const {
  if (!(a > 0.0 && a < bound)) {
    throw ContourError("contour vertex a = " + std::to_string(a) + " must lie in (0, " +
                       std::to_string(bound) + ")");
  }
  if (!(phi > 0.0 && phi < kPi / 2.0)) throw ContourError("contour angle must lie in (0, pi/2)");
  if (nodes_per_panel < 2) throw ContourError("need at least two nodes per panel");
}

ZetaPoint::ZetaPoint(cplx zeta) : z_(zeta) {
  if (zeta.imag() == 0.0 && zeta.real() >= 0.0) {
    throw DomainError("zeta must avoid the nonnegative real axis");
  }
}

cplx g_of_w(cplx w, double t, double x, const SpeedField& field, const Roadblocks& rb,
            const ModelParams& params) {
  const QParam q = params.q;
  using qspecial::kInfinity;
  using qspecial::q_pochhammer;
  const cplx den0 = q_pochhammer(w / field.xi0(), q, kInfinity);
  if (std::abs(den0) < 1e-300) throw PoleError("g: pole at w = xi(0) q^{-k}");
  cplx g = std::exp(-t * w) / den0;
  for (const auto& b : rb.entries()) {
    if (!(b.b < x)) continue;
    const double xb = roadblock_speed(field, b);
    const cplx den = q_pochhammer(w / xb, q, kInfinity);
    if (std::abs(den) < 1e-300) throw PoleError("g: pole at a roadblock factor");
    g *= q_pochhammer(w * b.p / xb, q, kInfinity) / den;
  }
  return g * std::exp(params.lambda * limitshape::Phi_n(0, w, x, field, q));
}

cplx log_g(cplx w, double t, double x, const SpeedField& field, const Roadblocks& rb,
           const ModelParams& params) {
  const double q = params.q;
  cplx lg = -t * w - log_poch_inf(w / field.xi0(), q);
  for (const auto& b : rb.entries()) {
    if (!(b.b < x)) continue;
    const double xb = roadblock_speed(field, b);
    lg += log_poch_inf(w * b.p / xb, q) - log_poch_inf(w / xb, q);
  }
  return lg + params.lambda * limitshape::Phi_n(0, w, x, field, params.q);
}

DetReport qlaplace_det_report(const ZetaPoint& zeta, double t, double x, const SpeedField& field,
                              const Roadblocks& rb, const ModelParams& params,
                              const ContourSpec& cspec, const DContourSpec& dspec,
                              const DetOptions& opt) {
  if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
  if (!(x > 0.0)) throw DomainError("x must be positive");
  const double W = min_speed(field, rb, x).W;
  cspec.validate(W);
  if (!(dspec.line_step > 0.0) || dspec.nodes_per_panel < 2) {
    throw ContourError("invalid inner quadrature settings");
  }
  const KernelContext ctx{t, x, field, rb, params, std::log(-zeta.value()), cspec.a, cspec.phi, W};
  DetReport rep;
  rep.coarse = fredholm_det(ctx, cspec, dspec, false, &rep.outer_nodes);
  rep.value = rep.coarse;
  if (opt.check_doubling) {
    rep.value = fredholm_det(ctx, cspec, dspec, true, &rep.outer_nodes);
    rep.doubling_change = std::abs(rep.value - rep.coarse);
    if (rep.doubling_change > opt.doubling_tol) {
      throw ConvergenceError("Fredholm determinant moved by " +
                             std::to_string(rep.doubling_change) + " under node doubling");
    }
  }
  return rep;
}

cplx qlaplace_det(const ZetaPoint& zeta, double t, double x, const SpeedField& field,
                  const Roadblocks& rb, const ModelParams& params, const ContourSpec& cspec,
                  const DContourSpec& dspec, const DetOptions& opt) {
  return qlaplace_det_report(zeta, t, x, field, rb, params, cspec, dspec, opt).value;
}

cplx f_hc(cplx w, std::size_t k, double t, const sim::VertexParams& p) {
  const double q = p.q;
  cplx f = std::exp((q - 1.0) * t * w) / (1.0 - w / p.xi0);
  for (std::size_t j = 1; j < k; ++j) {
    const double xs = p.xi_at(j) * p.s_at(j);
    const double s = p.s_at(j);
    f *= (xs + s * s * w) / (xs + w);
  }
  return f;
}

double q_moment(int ell, std::size_t k, double t, const sim::VertexParams& p,
                const ContourSpec& cspec) {
  if (ell < 1 || ell > 3) throw DomainError("q_moment supports ell in 1..3");
  if (k < 1) throw DomainError("site index must be at least 1");
  if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
  p.validate();
  cspec.validate(min_hc_pole(k, p));
  const double q = p.q;

  auto evaluate = [&](int npp) {
    const OuterRule outer = outer_rule(cspec, t * (1.0 - q), min_hc_pole(k, p), npp);
    const std::size_t n = outer.w.size();
    // F[m-1][j] = weight_j * f(w_j) f(q w_j) ... f(q^{m-1} w_j)
    std::vector<std::vector<cplx>> F(ell, std::vector<cplx>(n));
    for (std::size_t j = 0; j < n; ++j) {
      cplx prod = 1.0;
      cplx wq = outer.w[j];
      for (int m = 0; m < ell; ++m) {
        prod *= f_hc(wq, k, t, p);
        wq *= q;
        F[m][j] = prod * outer.weight[j];
      }
    }
    const auto& w = outer.w;
    auto c = [&](std::size_t i, int mu, std::size_t j) { return 1.0 / (w[i] * std::pow(q, mu) - w[j]); };
    cplx total = 0.0;
    // Partitions of ell with their 1/(m_1! m_2! ...) factors.
    if (ell == 1) {
      for (std::size_t i = 0; i < n; ++i) total += F[0][i] * c(i, 1, i);
    } else if (ell == 2) {
      for (std::size_t i = 0; i < n; ++i) total += F[1][i] * c(i, 2, i);
      cplx s11 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          s11 += F[0][i] * F[0][j] * (c(i, 1, i) * c(j, 1, j) - c(i, 1, j) * c(j, 1, i));
        }
      }
      total += 0.5 * s11;
    } else {
      for (std::size_t i = 0; i < n; ++i) total += F[2][i] * c(i, 3, i);
      cplx s21 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          s21 += F[1][i] * F[0][j] * (c(i, 2, i) * c(j, 1, j) - c(i, 2, j) * c(j, 1, i));
        }
      }
      total += s21;
      std::vector<cplx> diag(n);
      Eigen::MatrixXcd off(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        diag[i] = c(i, 1, i);
        for (std::size_t j = 0; j < n; ++j) off(i, j) = c(i, 1, j);
      }
      cplx s111 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const cplx fij = F[0][i] * F[0][j];
          for (std::size_t l = 0; l < n; ++l) {
            Eigen::Matrix3cd d;
            d << diag[i], off(i, j), off(i, l), off(j, i), diag[j], off(j, l), off(l, i), off(l, j),
                diag[l];
            s111 += fij * F[0][l] * d.determinant();
          }
        }
      }
      total += s111 / 6.0;
    }
    return (qspecial::q_pochhammer(q, p.q, ell) * total).real();
  };
  const double coarse = evaluate(cspec.nodes_per_panel);
  if (ell == 3) return coarse;  // the triple sum is too costly to repeat at doubled nodes
  const double fine = evaluate(2 * cspec.nodes_per_panel);
  if (std::abs(fine - coarse) > 1e-7) {
    throw ConvergenceError("q-moment moved by " + std::to_string(std::abs(fine - coarse)) +
                           " under node doubling");
  }
  return fine;
}

MCEstimate mc_qlaplace(double zeta, double t, double x, const SpeedField& field,
                       const Roadblocks& rb, const ModelParams& params, int trials,
                       std::uint64_t master_seed) {
  if (!(zeta < 0.0)) throw DomainError("Monte Carlo q-Laplace transform needs real zeta < 0");
  if (trials < 2) throw DomainError("need at least two trials");
  std::vector<double> vals(static_cast<std::size_t>(trials));
  parallel_for(vals.size(), [&](std::size_t i) {
    sim::ExpJumpSimulator s(field, rb, params, trial_seed(master_seed, i));
    s.run_until(t);
    const double qh = std::pow(static_cast<double>(params.q), static_cast<double>(s.height(x)));
    vals[i] = 1.0 / qspecial::q_pochhammer(zeta * qh, params.q, qspecial::kInfinity);
  });
  MCEstimate e;
  e.trials = trials;
  e.mean = sample_mean_se(vals, &e.se);
  return e;
}

MCEstimate mc_q_moment(int ell, std::size_t k, double t, const sim::VertexParams& p, int trials,
                       std::uint64_t master_seed) {
  if (ell < 1) throw DomainError("moment order must be positive");
  if (trials < 2) throw DomainError("need at least two trials");
  std::vector<double> vals(static_cast<std::size_t>(trials));
  parallel_for(vals.size(), [&](std::size_t i) {
    sim::HalfContinuousSimulator s(p, trial_seed(master_seed, i));
    s.run_until(t);
    vals[i] = std::pow(static_cast<double>(p.q), static_cast<double>(ell * s.state().height(k)));
  });
  MCEstimate e;
  e.trials = trials;
  e.mean = sample_mean_se(vals, &e.se);
  return e;
}

}  // namespace expjump::fredholm
