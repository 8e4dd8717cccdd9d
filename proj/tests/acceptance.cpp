// Acceptance gates. Prints one PASS/FAIL line per criterion and exits nonzero if any fails.
// Optional arguments select criteria by number, e.g. `acceptance 1 2 8`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "expjump/distributions.hpp"
#include "expjump/experiments.hpp"
#include "expjump/fredholm.hpp"
#include "expjump/limitshape.hpp"
#include "expjump/model.hpp"
#include "expjump/numerics.hpp"
#include "expjump/qspecial.hpp"
#include "expjump/simulator.hpp"
#include "expjump/stationary.hpp"

using namespace expjump;
using limitshape::Phase;

namespace {

const QParam kHalf(0.5);

SpeedField step_field() { return SpeedField(0.7, {0.0, 0.2}, {1.0, 0.4}); }

// Accumulates sub-checks of one criterion; the first failure is kept for the report.
class Gate {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok && pass_) failure_ = what;
    pass_ = pass_ && ok;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  bool pass() const { return pass_; }
  std::string summary() const { return pass_ ? notes_ : "failed: " + failure_ + " | " + notes_; }

 private:
  bool pass_ = true;
  std::string failure_;
  std::string notes_;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// --------------------------------------------------------------------------- 1
void step_limit_shape(Gate& g) {
  const auto f = step_field();
  const Roadblocks none;
  const double sigma = limitshape::transition_point(3.0, f, none, kHalf, 1e-3, 0.19);
  g.check(std::abs(sigma - 0.045) <= 0.005, "transition point");
  g.note(fmt("sigma=%.6f", sigma));

  const int n = 40;
  std::vector<double> h;
  for (int i = 1; i <= n; ++i) h.push_back(limitshape::height(3.0, sigma * i / (n + 1), f, none, kHalf));
  double d2 = 0.0;
  for (int i = 1; i + 1 < n; ++i) d2 = std::max(d2, std::abs(h[i + 1] - 2.0 * h[i] + h[i - 1]));
  g.check(d2 < 1e-8, "linearity on [0, sigma]");
  g.note(fmt("max second difference=%.1e", d2));

  bool phases = true;
  for (int i = 1; i <= 20; ++i) {
    const auto r = limitshape::classify(3.0, sigma * i / 21.0, f, none, kHalf);
    phases = phases && r.phase == Phase::Gaussian && r.m_x == 1;
    const double x = sigma + (0.2 - sigma) * i / 21.0;
    phases = phases && limitshape::classify(3.0, x, f, none, kHalf).phase == Phase::TracyWidom;
  }
  g.check(phases, "phase labels");

  const double jump = limitshape::height(3.0, 0.2 - 1e-12, f, none, kHalf) -
                      limitshape::height(3.0, 0.2 + 1e-12, f, none, kHalf);
  g.check(jump > 0.01, "jump at 0.2");
  g.note(fmt("jump=%.4f", jump));

  const double xe = limitshape::edge_x(3.0, f, kHalf);
  g.check(std::abs(xe - 0.72) <= 1e-9, "edge");
  g.note(fmt("x_e=%.12f", xe));
}

// --------------------------------------------------------------------------- 2
void exact_identities(Gate& g) {
  double worst_balance = 0.0, worst_norm = 0.0, worst_qmoment = 0.0, worst_mean = 0.0, worst_row = 0.0;
  for (double q : {0.2, 0.5, 0.8}) {
    for (double c : {0.0, 0.1, 0.3, 0.6, 0.9}) {
      for (double s : {-0.9, -0.5, -0.1}) {
        for (double xi : {0.5, 1.0, 2.0}) {
          for (int k = 0; k <= 10; ++k) {
            worst_balance = std::max(worst_balance, std::abs(stationary::balance_residual(k, c, xi, s, q)));
          }
        }
        const stationary::DiscreteProductSpec spec{c, s * s, 1};
        double total = 0.0, eq = 0.0, mean = 0.0;
        for (int j = 0; j < 4000; ++j) {
          const double p = stationary::discrete_mark_pmf(j, spec, q);
          total += p;
          eq += p * std::pow(q, j);
          mean += p * j;
          if (j > 10 && p == 0.0) break;
        }
        worst_norm = std::max(worst_norm, std::abs(total - 1.0));
        worst_qmoment = std::max(worst_qmoment, std::abs(eq - (1.0 - c) / (1.0 - c * s * s)));
        const double rho = qspecial::phi_n(0, c, q) - qspecial::phi_n(0, c * s * s, q);
        worst_mean = std::max(worst_mean, std::abs(mean - rho));
      }
      if (c > 0.0) {
        double total = 0.0;
        for (double p : stationary::mark_table(c, q)) total += p;
        worst_norm = std::max(worst_norm, std::abs(total - 1.0));
      }
    }
    for (double u : {0.5, 1.0, 2.0}) {
      for (double s : {-0.9, -0.3}) {
        for (int h = 0; h <= 1; ++h) {
          for (int eta = 0; eta <= 10; ++eta) {
            const auto [p0, p1] = sim::discrete_row(h, eta, 1.3, s, u, q);
            worst_row = std::max(worst_row, std::abs(p0 + p1 - 1.0));
          }
        }
      }
    }
  }
  g.check(worst_balance <= 1e-12, "balance residuals");
  g.check(worst_norm <= 1e-12, "normalizations");
  g.check(worst_qmoment <= 1e-12, "E q^Y");
  g.check(worst_mean <= 1e-12, "product-measure density");
  g.check(worst_row <= 1e-12, "vertex row sums");
  std::ostringstream s;
  s.precision(1);
  s << std::scientific << "balance=" << worst_balance << " norm=" << worst_norm << " Eq^Y=" << worst_qmoment
    << " density=" << worst_mean << " rows=" << worst_row;
  g.note(s.str());
}

// --------------------------------------------------------------------------- 3
void critical_points(Gate& g) {
  const auto f = step_field();
  const auto hom = SpeedField::homogeneous(1.0);
  const Roadblocks none;
  double worst_tw = 0.0, worst_ga = 0.0;
  int tw_points = 0, ga_points = 0;
  bool signs = true;
  struct Case {
    const SpeedField* field;
    double tau, x;
  };
  const std::vector<Case> cases{{&f, 3.0, 0.01},  {&f, 3.0, 0.03},  {&f, 3.0, 0.08},
                                {&f, 3.0, 0.15},  {&f, 3.0, 0.4},   {&f, 3.0, 0.65},
                                {&hom, 1.0, 0.1}, {&hom, 4.0, 1.0}, {&hom, 2.0, 0.9}};
  for (const auto& c : cases) {
    const auto r = limitshape::classify(c.tau, c.x, *c.field, none, kHalf);
    if (r.phase == Phase::TracyWidom) {
      const auto gv = limitshape::G_eval(r.omega_circ, c.tau, c.x, r.H, *c.field, kHalf);
      worst_tw = std::max({worst_tw, std::abs(gv.g1), std::abs(gv.g2)});
      signs = signs && gv.g3 > 0.0;
      ++tw_points;
    } else if (r.phase == Phase::Gaussian) {
      const auto gv = limitshape::G_eval(r.W, c.tau, c.x, r.H, *c.field, kHalf);
      worst_ga = std::max(worst_ga, std::abs(gv.g1));
      signs = signs && gv.g2 < 0.0;
      ++ga_points;
    }
  }
  g.check(tw_points >= 5 && ga_points >= 2, "phase coverage");
  g.check(worst_tw <= 1e-8, "double critical point");
  g.check(worst_ga <= 1e-8, "simple critical point");
  g.check(signs, "third/second derivative signs");

  double worst_pde = 0.0;
  const std::vector<Case> pde{{&f, 3.0, 0.08}, {&f, 3.0, 0.15}, {&f, 3.0, 0.4},
                              {&hom, 4.0, 1.0}, {&hom, 1.0, 0.25}};
  for (const auto& c : pde) {
    worst_pde = std::max(worst_pde, std::abs(limitshape::pde_residual(c.tau, c.x, *c.field, none, kHalf)));
  }
  g.check(worst_pde <= 1e-5, "hydrodynamic residual");
  std::ostringstream s;
  s.precision(1);
  s << std::scientific << "TW points=" << tw_points << " max|G'|,|G''|=" << worst_tw
    << "; Gaussian points=" << ga_points << " max|G'|=" << worst_ga << "; max pde residual=" << worst_pde;
  g.note(s.str());
}

// --------------------------------------------------------------------------- 4
void stationarity(Gate& g) {
  // Circumference 10 gives an expected count near 99, above the 50 required.
  const stationary::MarkedPoissonSpec spec{0.3, 10.0, 10.0};
  const auto r = stationary::ring_evolution(spec, 1.0, kHalf, 10.0, 50, 2024);
  g.check(r.conserved, "conservation");
  g.check(std::abs(r.density.est - r.density.target) <= 3.0 * r.density.se, "density");
  g.check(std::abs(r.current.est - r.current.target) <= 3.0 * r.current.se, "current");
  g.check(r.mark_z <= 3.0, "mark chi-square");
  g.note(fmt("density %.4f vs %.4f", r.density.est, r.density.target) + fmt(" (se %.4f)", r.density.se));
  g.note(fmt("current %.4f vs %.4f", r.current.est, r.current.target) + fmt(" (se %.4f)", r.current.se));
  g.note(fmt("mark z=%.2f", r.mark_z));
}

// --------------------------------------------------------------------------- 5
void law_of_large_numbers(Gate& g) {
  const auto rows = experiments::lln_experiment(1.0, {0.1, 0.2, 0.3}, SpeedField::homogeneous(1.0),
                                                Roadblocks{}, ModelParams(0.5, 200.0), 100, 5150);
  for (const auto& r : rows) {
    g.check(r.gap <= 0.05, fmt("gap at x=%.1f", r.x));
    g.note(fmt("x=%.1f gap=%.4f", r.x, r.gap));
  }
}

// --------------------------------------------------------------------------- 6
void fluctuations(Gate& g) {
  const auto hom = SpeedField::homogeneous(1.0);
  const auto f = step_field();
  const Roadblocks none;
  const int n = 2000;

  // Tracy-Widom phase. The gate runs at x = 0.1, well inside the phase; nearer the edge
  // the finite-lambda correction decays slowly.
  std::vector<double> ks_trend;
  for (double lambda : {50.0, 100.0, 200.0}) {
    const auto [s, k] = experiments::fluct_experiment(1.0, 0.1, hom, none, ModelParams(0.5, lambda), n, 600);
    ks_trend.push_back(k.ks_distance);
    if (lambda == 100.0) {
      g.check(k.reference_law == "F2" && k.ks_distance <= 0.1, "TW KS");
    }
  }
  int inversions = 0;
  for (std::size_t i = 1; i < ks_trend.size(); ++i) inversions += ks_trend[i] > ks_trend[i - 1];
  g.check(inversions <= 1, "KS trend");
  g.note(fmt("TW KS lambda=50,100: %.3f, %.3f", ks_trend[0], ks_trend[1]) + fmt(", 200: %.3f", ks_trend[2]));

  // Gaussian phase of the step environment.
  {
    const auto [s, k] = experiments::fluct_experiment(3.0, 0.03, f, none, ModelParams(0.5, 400.0), n, 601);
    g.check(k.reference_law == "G_1" && k.ks_distance <= 0.1, "Gaussian KS");
    g.note(fmt("Gaussian KS (lambda=400, x=0.03): %.3f", k.ks_distance));
  }

  // Transition point.
  {
    const double sigma = limitshape::transition_point(3.0, f, none, kHalf, 1e-3, 0.19);
    const auto [s, k] = experiments::fluct_experiment(3.0, sigma, f, none, ModelParams(0.5, 100.0), n, 602);
    g.check(k.reference_law == "BBP(1)" && k.ks_distance <= 0.15, "Transition KS");
    g.note(fmt("BBP KS (lambda=100): %.3f", k.ks_distance));
  }
}

// --------------------------------------------------------------------------- 7
void fredholm_cross_check(Gate& g) {
  const ModelParams mp(0.5, 5.0);
  const auto hom = SpeedField::homogeneous(1.0);
  const double t = 2.5, x = 0.3;
  const fredholm::ZetaPoint zeta(-1.0);

  const auto rep = fredholm::qlaplace_det_report(zeta, t, x, hom, Roadblocks{}, mp, fredholm::ContourSpec{});
  const auto mc = fredholm::mc_qlaplace(-1.0, t, x, hom, Roadblocks{}, mp, 100000, 77);
  const double det = rep.value.real();
  g.check(std::abs(det - mc.mean) <= 3.0 * mc.se + 0.01, "determinant vs Monte Carlo");
  g.note(fmt("det=%.8f mc=%.5f", det, mc.mean) + fmt(" (se %.5f)", mc.se));

  double spread = 0.0;
  const fredholm::DetOptions fast{false, 0.0};
  for (auto [a, phi] : std::vector<std::pair<double, double>>{{0.3, 0.6}, {0.8, 1.0}, {0.5, 0.8}}) {
    fredholm::ContourSpec c;
    c.a = a;
    c.phi = phi;
    const cplx d = fredholm::qlaplace_det(zeta, t, x, hom, Roadblocks{}, mp, c, {}, fast);
    spread = std::max(spread, std::abs(d - rep.value));
  }
  g.check(spread <= 1e-4, "contour invariance");
  g.note(fmt("contour spread=%.1e", spread));

  sim::VertexParams p(0.5, 0.5, 1.0, -0.5);
  const fredholm::ContourSpec small{0.25};
  for (int ell : {1, 2}) {
    const double formula = fredholm::q_moment(ell, 3, 2.0, p, small);
    const auto m = fredholm::mc_q_moment(ell, 3, 2.0, p, 100000, 80 + ell);
    g.check(std::abs(formula - m.mean) <= 3.0 * m.se, fmt("q-moment %.0f", ell));
    g.note(fmt("E q^{%.0fh}: ", ell) + fmt("%.5f vs mc %.5f", formula, m.mean) + fmt(" (se %.5f)", m.se));
  }
}

// --------------------------------------------------------------------------- 8
void distribution_evaluators(Gate& g) {
  double doubling = 0.0, bbp = 0.0, gauss = 0.0;
  for (double r = -8.0; r <= 4.0; r += 0.5) {
    doubling = std::max(doubling, std::abs(dist::F2_airy(r, 40) - dist::F2_airy(r, 80)));
    bbp = std::max(bbp, std::abs(dist::BBP(r, 0, {}) - dist::F2(r)));
    gauss = std::max(gauss, std::abs(dist::G_m(r, 1).value - dist::normal_cdf(r)));
  }
  double mean = 0.0;
  for (double a = -10.0; a < 8.0; a += 0.5) {
    const auto rule = numerics::gauss_legendre(12, a, a + 0.5);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double v = dist::F2(rule.nodes[i]);
      mean += rule.weights[i] * (a < 0.0 ? -v : 1.0 - v);
    }
  }
  g.check(doubling <= 1e-8, "F2 node doubling");
  g.check(std::abs(mean + 1.771) <= 0.005, "F2 mean");
  g.check(bbp <= 1e-6, "BBP(m=0) vs F2");
  g.check(gauss == 0.0, "G_1 vs normal");
  std::ostringstream s;
  s.precision(2);
  s << std::scientific << "doubling=" << doubling << " BBP0-F2=" << bbp << " G1-normal=" << gauss;
  g.note(s.str() + fmt("; F2 mean=%.6f", mean));
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<void(Gate&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "step-environment limit shape", 5.0, step_limit_shape},
      {2, "exact identities", 1.0, exact_identities},
      {3, "critical points and hydrodynamics", 5.0, critical_points},
      {4, "stationary ring", 300.0, stationarity},
      {5, "law of large numbers", 600.0, law_of_large_numbers},
      {6, "fluctuation laws", 1800.0, fluctuations},
      {7, "Fredholm determinant cross-check", 600.0, fredholm_cross_check},
      {8, "distribution evaluators", 60.0, distribution_evaluators},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Gate g;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(g);
    } catch (const std::exception& e) {
      g.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    g.check(secs <= c.budget_s, fmt("runtime over %.0f s", c.budget_s));
    std::printf("[%s] %d %s (%.1f s): %s\n", g.pass() ? "PASS" : "FAIL", c.id, c.name, secs,
                g.summary().c_str());
    std::fflush(stdout);
    failed += !g.pass();
  }
  return failed == 0 ? 0 : 1;
}
