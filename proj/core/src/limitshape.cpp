#include "expjump/limitshape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "expjump/errors.hpp"
#include "expjump/numerics.hpp"

namespace expjump::limitshape {

namespace {

template <class T>
T Phi_impl(int n, T w, double x, const SpeedField& field, QParam q) {
  if (!(x >= 0.0)) throw DomainError("Phi_n: x must be nonnegative");
  T sum(0.0);
  field.for_each_piece(x, [&](double len, double xi) { sum += len * qspecial::phi_n(n, w / xi, q); });
  return sum;
}

double Phi3_minus_Phi2(double w, double x, const SpeedField& field, QParam q) {
  double sum = 0.0;
  field.for_each_piece(x,
                       [&](double len, double xi) { sum += len * qspecial::phi3_minus_phi2(w / xi, q); });
  return sum;
}

bool beyond_edge(double tau, double x, const SpeedField& field, QParam q) {
  return tau <= tau_edge(x, field, q);
}

}  // namespace

double Phi_n(int n, double w, double x, const SpeedField& field, QParam q) {
  return Phi_impl<double>(n, w, x, field, q);
}

cplx Phi_n(int n, cplx w, double x, const SpeedField& field, QParam q) {
  return Phi_impl<cplx>(n, w, x, field, q);
}

double tau_edge(double x, const SpeedField& field, QParam q) {
  if (!(x >= 0.0)) throw DomainError("tau_edge: x must be nonnegative");
  double t = 0.0;
  field.for_each_piece(x, [&](double len, double xi) { t += len / ((1.0 - q) * xi); });
  return t;
}

double edge_x(double tau, const SpeedField& field, QParam q) {
  if (!(tau >= 0.0)) throw DomainError("edge_x: tau must be nonnegative");
  const auto& br = field.breakpoints();
  const auto& val = field.segment_values();
  double remaining = tau;
  for (std::size_t k = 0; k < br.size(); ++k) {
    const double rate = 1.0 / ((1.0 - q) * val[k]);  // tau per unit length
    if (k + 1 < br.size()) {
      const double cost = (br[k + 1] - br[k]) * rate;
      if (remaining <= cost) return br[k] + remaining / rate;
      remaining -= cost;
    } else {
      return br[k] + remaining / rate;
    }
  }
  return br.back();
}

double omega_circ(double tau, double x, const SpeedField& field, QParam q) {
  if (!(x > 0.0)) throw DomainError("omega_circ: x must be positive");
  if (beyond_edge(tau, x, field, q)) throw DomainError("omega_circ: x must lie before the edge");
  const double wc = min_speed(field, Roadblocks{}, x).W_circ;
  auto f = [&](double w) { return Phi_n(2, w, x, field, q) / w - tau; };
  const double lo = 1e-12 * wc;
  double gap = 1e-3;
  double hi = wc * (1.0 - gap);
  while (f(hi) <= 0.0) {
    gap *= 0.1;
    if (gap < 1e-7) throw ConvergenceError("omega_circ: root too close to W_circ to bracket");
    hi = wc * (1.0 - gap);
  }
  if (f(lo) >= 0.0) return lo;
  return numerics::bisect_increasing(f, lo, hi);
}

double height(double tau, double x, const SpeedField& field, const Roadblocks& rb, QParam q) {
  if (!(tau >= 0.0) || !(x >= 0.0)) throw DomainError("height: tau and x must be nonnegative");
  if (x == 0.0) return std::numeric_limits<double>::infinity();
  if (beyond_edge(tau, x, field, q)) return 0.0;
  const double w = std::min(omega_circ(tau, x, field, q), min_speed(field, rb, x).W);
  return tau * w - Phi_n(1, w, x, field, q);
}

std::string to_string(Phase p) {
  switch (p) {
    case Phase::TracyWidom:
      return "TW";
    case Phase::Transition:
      return "Transition";
    case Phase::Gaussian:
      return "Gaussian";
  }
  return "?";
}

PhaseReport classify(double tau, double x, const SpeedField& field, const Roadblocks& rb, QParam q,
                     const ClassifyOptions& opt) {
  if (!(x > 0.0)) throw DomainError("classify: x must be positive");
  if (beyond_edge(tau, x, field, q)) throw DomainError("classify: x must lie before the edge");
  PhaseReport r;
  r.tau = tau;
  r.x = x;
  r.omega_circ = omega_circ(tau, x, field, q);
  const MinSpeed ms = min_speed(field, rb, x);
  r.W = ms.W;
  r.W_circ = ms.W_circ;
  const double diff = r.omega_circ - r.W;
  if (diff < -opt.eps_phase) {
    r.phase = Phase::TracyWidom;
  } else if (diff > opt.eps_phase) {
    r.phase = Phase::Gaussian;
  } else {
    r.phase = Phase::Transition;
  }
  r.m_x = (field.xi0() == r.W) ? 1 : 0;
  for (const auto& e : rb.entries()) {
    if (e.b >= x) break;
    if (roadblock_speed(field, e) == r.W) ++r.m_x;
  }
  const double wcr = std::min(r.omega_circ, r.W);
  r.H = tau * wcr - Phi_n(1, wcr, x, field, q);
  r.density = qspecial::phi_n(1, wcr / eval_speed_left(field, x), q);
  if (r.phase == Phase::Gaussian) {
    r.dispersion = std::sqrt(tau * r.W - Phi_n(2, r.W, x, field, q)) / r.W;
    r.fluctuation_exponent = 0.5;
  } else {
    r.dispersion =
        std::cbrt(Phi3_minus_Phi2(r.omega_circ, x, field, q)) / (std::cbrt(2.0) * r.omega_circ);
    r.fluctuation_exponent = 1.0 / 3.0;
  }
  return r;
}

double transition_point(double tau, const SpeedField& field, const Roadblocks& rb, QParam q,
                        double x_lo, double x_hi) {
  if (!(0.0 < x_lo && x_lo < x_hi)) throw DomainError("transition_point: need 0 < x_lo < x_hi");
  auto gap = [&](double x) { return omega_circ(tau, x, field, q) - min_speed(field, rb, x).W; };
  const double g_lo = gap(x_lo), g_hi = gap(x_hi);
  if (g_lo * g_hi >= 0.0) throw DomainError("transition_point: no phase change on the interval");
  const double sign = g_lo < 0.0 ? 1.0 : -1.0;
  return numerics::bisect_increasing([&](double x) { return sign * gap(x); }, x_lo, x_hi);
}

GValue G_eval(double w, double tau, double x, double H, const SpeedField& field, QParam q) {
  if (!(w > 0.0)) throw DomainError("G_eval: w must be positive");
  const double p0 = Phi_n(0, w, x, field, q);
  const double p1 = Phi_n(1, w, x, field, q);
  const double p2 = Phi_n(2, w, x, field, q);
  const double p3 = Phi_n(3, w, x, field, q);
  GValue g;
  g.w = w;
  g.g = -tau * w + H * std::log(w) + p0;
  g.g1 = (H - tau * w + p1) / w;
  g.g2 = (-H + p2 - p1) / (w * w);
  g.g3 = (2.0 * H + p3 - 3.0 * p2 + 2.0 * p1) / (w * w * w);
  return g;
}

HeightGradient height_gradient(double tau, double x, const SpeedField& field, const Roadblocks& rb,
                               QParam q, double h_tau, double h_x) {
  if (!(h_tau > 0.0) || !(h_x > 0.0)) throw DomainError("height_gradient: steps must be positive");
  if (!(x - h_x > 0.0)) throw DomainError("height_gradient: stencil crosses x = 0");
  for (double b : field.breakpoints()) {
    if (b > 0.0 && std::abs(b - x) <= h_x) {
      throw DomainError("height_gradient: breakpoint inside the stencil");
    }
  }
  for (const auto& e : rb.entries()) {
    if (std::abs(e.b - x) <= h_x) throw DomainError("height_gradient: roadblock inside the stencil");
  }
  auto H = [&](double t, double y) { return height(t, y, field, rb, q); };
  HeightGradient g;
  g.d_tau = (H(tau + h_tau, x) - H(tau - h_tau, x)) / (2.0 * h_tau);
  g.d_x = (H(tau, x + h_x) - H(tau, x - h_x)) / (2.0 * h_x);
  return g;
}

double pde_residual(double tau, double x, const SpeedField& field, const Roadblocks& rb, QParam q,
                    double h_tau, double h_x) {
  const PhaseReport rep = classify(tau, x, field, rb, q);
  if (rep.phase != Phase::TracyWidom) throw DomainError("pde_residual: point not in the TW phase");
  const HeightGradient g = height_gradient(tau, x, field, rb, q, h_tau, h_x);
  return g.d_x + qspecial::phi_n(1, g.d_tau / eval_speed(field, x), q);
}

std::pair<SpeedField, Roadblocks> traffic_jam_modify(const SpeedField& field, const Roadblocks& rb,
                                                     const JamScenario& scenario) {
  if (const auto* ins = std::get_if<RoadblockInsert>(&scenario)) {
    if (!(ins->sigma > 0.0) || !(ins->alpha > 0.0)) {
      throw DomainError("traffic_jam_modify: sigma and alpha must be positive");
    }
    std::vector<Roadblock> entries = rb.entries();
    entries.push_back({ins->sigma, ins->p, ins->alpha});
    return {field, Roadblocks(std::move(entries))};
  }
  const auto& sl = std::get<Slowdown>(scenario);
  if (!(sl.sigma > 0.0) || !(sl.sigma1 > sl.sigma) || !(sl.kappa > 0.0)) {
    throw DomainError("traffic_jam_modify: need 0 < sigma < sigma1 and kappa > 0");
  }
  // Rebuild the breakpoint list with (sigma, sigma1) overwritten by kappa.
  std::vector<double> br;
  std::vector<double> val;
  auto push = [&](double b, double v) {
    if (!br.empty() && br.back() == b) {
      val.back() = v;
    } else {
      br.push_back(b);
      val.push_back(v);
    }
  };
  const auto& ob = field.breakpoints();
  for (std::size_t k = 0; k < ob.size(); ++k) {
    if (ob[k] < sl.sigma) push(ob[k], field.segment_values()[k]);
  }
  push(sl.sigma, sl.kappa);
  if (std::isfinite(sl.sigma1)) push(sl.sigma1, eval_speed(field, sl.sigma1));
  for (std::size_t k = 0; k < ob.size(); ++k) {
    if (ob[k] > sl.sigma1) push(ob[k], field.segment_values()[k]);
  }
  return {SpeedField(field.xi0(), std::move(br), std::move(val),
                     std::min(field.band_min(), sl.kappa), std::max(field.band_max(), sl.kappa)),
          rb};
}

}  // namespace expjump::limitshape
