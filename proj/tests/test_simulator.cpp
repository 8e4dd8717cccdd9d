#include <cmath>
#include <vector>

#include "doctest.h"
#include "expjump/errors.hpp"
#include "expjump/experiments.hpp"
#include "expjump/simulator.hpp"
#include "gen.hpp"

using namespace expjump;
using namespace expjump::sim;

namespace {

// |observed frequency - p| in units of its binomial standard error.
double freq_z(int hits, int n, double p) {
  const double se = std::sqrt(p * (1.0 - p) / n);
  return std::abs(static_cast<double>(hits) / n - p) / se;
}

double poisson_pmf(int k, double mu) { return std::exp(k * std::log(mu) - mu - std::lgamma(k + 1.0)); }

struct MeanSe {
  double mean, se;
};

MeanSe mean_se(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (v.size() - 1.0) / v.size())};
}

}  // namespace

TEST_CASE("first event from the empty configuration is an entry") {
  ExpJumpSimulator s(SpeedField::homogeneous(1.0), Roadblocks{}, ModelParams(0.5, 3.0), 7);
  s.step();
  CHECK(s.entered() == 1);
  CHECK(s.config().total() == 1);
  CHECK(s.event_count() == 1);
  CHECK(s.time() > 0.0);
}

TEST_CASE("free jump length is exponential") {
  ExpJumpSimulator s(SpeedField::homogeneous(1.0), Roadblocks{}, ModelParams(0.5, 4.0), 1);
  Rng rng(99);
  std::vector<double> d;
  for (int i = 0; i < 10000; ++i) {
    const Landing l = s.resolve_jump(0.5, rng);
    CHECK_FALSE(l.stopped);
    d.push_back(l.pos - 0.5);
  }
  const double ks = experiments::ks_distance(d, [](double x) { return x <= 0 ? 0.0 : 1.0 - std::exp(-4.0 * x); });
  CHECK(ks < 1.95 / std::sqrt(10000.0));  // 0.1% critical value
}

TEST_CASE("stop probability at a stack sitting on a roadblock") {
  const double p = 0.6, q = 0.5, b = 1e-3;
  ExpJumpSimulator s(SpeedField::homogeneous(1.0), Roadblocks({{b, p, std::nullopt}}),
                     ModelParams(q, 1e-4), 1);
  s.set_config(ParticleConfig{{{b, 4}}});
  Rng rng(5);
  const int n = 100000;
  int stopped = 0;
  for (int i = 0; i < n; ++i) {
    const Landing l = s.resolve_jump(0.0, rng);
    if (l.stopped && l.pos == b) ++stopped;
  }
  // Reaching b has probability exp(-1e-7), indistinguishable from 1 here.
  CHECK(freq_z(stopped, n, 1.0 - p * std::pow(q, 4)) < 3.0);
}

TEST_CASE("running to the current time changes nothing") {
  ExpJumpSimulator s(SpeedField::homogeneous(1.0), Roadblocks{}, ModelParams(0.5, 3.0), 3);
  s.run_until(2.0);
  const auto before = s.state();
  s.run_until(2.0);
  const auto after = s.state();
  CHECK(before.config == after.config);
  CHECK(before.time == after.time);
  CHECK(before.event_count == after.event_count);
  CHECK_THROWS_AS(s.run_until(1.0), DomainError);
}

TEST_CASE("entries by time t are Poisson") {
  const double xi0 = 1.5, t = 2.0, mu = xi0 * t;
  const SpeedField f(xi0, {0.0}, {1.0});
  const int runs = 1000, top = 8;
  std::vector<int> counts(top + 1, 0);
  for (int r = 0; r < runs; ++r) {
    ExpJumpSimulator s(f, Roadblocks{}, ModelParams(0.5, 5.0), trial_seed(17, r));
    s.run_until(t);
    ++counts[std::min<std::int64_t>(s.entered(), top)];
  }
  double chi2 = 0.0, tail = 1.0;
  for (int k = 0; k <= top; ++k) {
    const double pk = k < top ? poisson_pmf(k, mu) : tail;
    tail -= pk;
    const double e = runs * pk;
    chi2 += (counts[k] - e) * (counts[k] - e) / e;
  }
  const double dof = top;
  CHECK((chi2 - dof) / std::sqrt(2.0 * dof) < 3.0);
}

TEST_CASE("trajectory height is nondecreasing and particles are conserved") {
  const SpeedField f(0.7, {0.0, 0.2}, {1.0, 0.4});
  Roadblocks rb({{0.15, 0.5, std::nullopt}});
  ExpJumpSimulator s(f, rb, ModelParams(0.5, 20.0), 11);
  std::int64_t h_prev = 0;
  for (int i = 0; i < 3000; ++i) {
    s.step();
    const auto h = s.height(0.1);
    CHECK(h >= h_prev);
    h_prev = h;
  }
  const auto c = s.config();
  CHECK_NOTHROW(c.validate());
  CHECK(c.total() == s.entered());
}

TEST_CASE("same seed, same trajectory") {
  const SpeedField f(0.7, {0.0, 0.2}, {1.0, 0.4});
  ExpJumpSimulator a(f, Roadblocks{}, ModelParams(0.5, 10.0), 2024);
  ExpJumpSimulator b(f, Roadblocks{}, ModelParams(0.5, 10.0), 2024);
  a.run_until(5.0);
  b.run_until(5.0);
  CHECK(a.config() == b.config());
  CHECK(a.event_count() == b.event_count());
}

TEST_CASE("event cap raises BudgetError") {
  ExpJumpSimulator s(SpeedField::homogeneous(1.0), Roadblocks{}, ModelParams(0.5, 10.0), 1,
                     SimOptions{100});
  CHECK_THROWS_AS(s.run_until(1e6), BudgetError);
}

TEST_CASE("property: vertex rows are probability vectors") {
  Gen g(41);
  for (int i = 0; i < 500; ++i) {
    const double q = g.uniform(0.05, 0.95), xi = g.uniform(0.1, 5.0), s = g.uniform(-0.99, -0.01);
    const double u = g.uniform(0.1, 3.0);
    const int h = g.integer(0, 1);
    const std::int64_t eta = g.integer(0, 20);
    const auto [p0, p1] = discrete_row(h, eta, xi, s, u, q);
    CAPTURE(i);
    CHECK(p0 + p1 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p0 >= 0.0);
    CHECK(p1 >= 0.0);
  }
  CHECK(discrete_row(0, 0, 1.0, -0.5, 1.0, 0.5).second == 0.0);
  const double pe = discrete_entry_prob(2.0, 0.5);
  CHECK(pe == doctest::Approx(0.5));
}

TEST_CASE("discrete one-step frequencies") {
  const double q = 0.5, u = 0.8, xi = 1.3, s = -0.6;
  const std::int64_t e = 2;
  VertexParams p(q, 0.9, xi, s);
  p.u = u;
  const double pe = discrete_entry_prob(0.9, u);
  const auto r0 = discrete_row(0, e, xi, s, u, q);
  const auto r1 = discrete_row(1, e, xi, s, u, q);
  const double down = (1 - pe) * r0.second, up = pe * r1.first;
  Rng rng(8);
  const int n = 100000;
  int n_down = 0, n_up = 0;
  for (int i = 0; i < n; ++i) {
    VertexState st;
    st.eta = {e};
    vertex_step_discrete(st, p, rng);
    const auto e1 = st.occupation(1);
    n_down += e1 == e - 1;
    n_up += e1 == e + 1;
  }
  CHECK(freq_z(n_down, n, down) < 3.0);
  CHECK(freq_z(n_up, n, up) < 3.0);
}

TEST_CASE("discrete window policy") {
  VertexParams p(0.5, 5.0, 1.0, -0.9);
  Rng rng(1);
  VertexState st;
  CHECK_THROWS_AS(
      [&] {
        for (int i = 0; i < 1000; ++i) vertex_step_discrete(st, p, rng, WindowPolicy{false, 2});
      }(),
      WindowError);
}

TEST_CASE("half-continuous stop law") {
  VertexParams p(0.5, 4.0, 1.0, -0.7);
  p.s = {-0.5, -0.8, -0.6};
  HalfContinuousSimulator sim(p, 4);
  sim.run_until(3.0);
  const auto& st = sim.state();
  REQUIRE(st.total() > 0);
  auto pass = [&](std::size_t k) {
    const double s = p.s_at(k);
    return s * s * std::pow(0.5, static_cast<double>(st.occupation(k)));
  };
  Rng rng(6);
  const int n = 100000;
  std::vector<int> hits(6, 0);
  for (int i = 0; i < n; ++i) {
    const auto j = sim.resolve_jump(0, rng);
    if (j <= 5) ++hits[j];
  }
  double through = 1.0;
  for (std::size_t j = 1; j <= 5; ++j) {
    const double pj = through * (1.0 - pass(j));
    CAPTURE(j);
    CHECK(freq_z(hits[j], n, pj) < 3.0);
    through *= pass(j);
  }
}

TEST_CASE("half-continuous model with empty sites moves geometrically") {
  VertexParams p(0.5, 1.0, 1.0, -0.8);
  HalfContinuousSimulator sim(p, 1);
  Rng rng(2);
  const int n = 50000;
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += static_cast<double>(sim.resolve_jump(3, rng) - 3);
  mean /= n;
  // Geometric on {1, 2, ...} with success 1 - s^2 = 0.36.
  const double m = 1.0 / 0.36, sd = std::sqrt(0.64) / 0.36;
  CHECK(std::abs(mean - m) < 3.0 * sd / std::sqrt(n));
}

TEST_CASE("vertex parameter validation") {
  CHECK_THROWS_AS(HalfContinuousSimulator(VertexParams(0.5, 1.0, 1.0, -1.0), 1), DomainError);
  CHECK_THROWS_AS(HalfContinuousSimulator(VertexParams(0.5, 0.0, 1.0, -0.5), 1), DomainError);
  VertexParams p(0.5, 1.0, 1.0, -0.5);
  p.s = {0.2};
  CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("half-continuous model approaches the exponential model under space scaling") {
  // s^2 = exp(-lambda eps), -xi s = 1, site floor(x / eps) stands for x.
  const double lambda = 5.0, eps = 1e-3, t = 2.5, x = 0.3, q = 0.5;
  const double s = -std::exp(-0.5 * lambda * eps);
  VertexParams p(q, 1.0, -1.0 / s, s);
  const auto site = static_cast<std::size_t>(std::floor(x / eps));
  const int trials = 4000;
  std::vector<double> hc, ex;
  for (int i = 0; i < trials; ++i) {
    HalfContinuousSimulator a(p, trial_seed(31, i));
    a.run_until(t);
    hc.push_back(static_cast<double>(a.state().height(site)));
    ExpJumpSimulator b(SpeedField::homogeneous(1.0), Roadblocks{}, ModelParams(q, lambda), trial_seed(32, i));
    b.run_until(t);
    ex.push_back(static_cast<double>(b.height(x)));
  }
  const auto m1 = mean_se(hc), m2 = mean_se(ex);
  CHECK(std::abs(m1.mean - m2.mean) < 3.0 * std::hypot(m1.se, m2.se));
}
