#include "expjump/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "expjump/errors.hpp"
#include "expjump/parallel.hpp"

namespace expjump::stationary {

namespace {

int sample_from_table(const std::vector<double>& cdf, Rng& rng) {
  const double u = uniform01(rng);
  auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<int>(it - cdf.begin()) + 1;
}

std::vector<double> cumulative(const std::vector<double>& pmf) {
  std::vector<double> cdf(pmf.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) cdf[i] = (acc += pmf[i]);
  return cdf;
}

struct MeanSe {
  double mean;
  double se;
};

MeanSe mean_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double var = v.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {m, std::sqrt(var / n)};
}

}  // namespace

void MarkedPoissonSpec::validate() const {
  if (!(c >= 0.0 && c < 1.0)) throw DomainError("marked Poisson: c must lie in [0,1)");
  if (!(lambda > 0.0)) throw DomainError("marked Poisson: lambda must be positive");
  if (!(window_length > 0.0)) throw DomainError("marked Poisson: window length must be positive");
}

void DiscreteProductSpec::validate() const {
  if (!(c >= 0.0 && c < 1.0)) throw DomainError("product measure: c must lie in [0,1)");
  if (!(s_sq > 0.0 && s_sq < 1.0)) throw DomainError("product measure: s^2 must lie in (0,1)");
  if (window_sites <= 0) throw DomainError("product measure: window must be nonempty");
}

double mark_pmf(int j, double c, QParam q) {
  if (j < 1) return 0.0;
  return std::pow(c, j) / ((1.0 - std::pow(q.value(), j)) * qspecial::phi_n(0, c, q));
}

std::vector<double> mark_table(double c, QParam q, double tail_tol) {
  if (!(c > 0.0 && c < 1.0)) throw DomainError("mark_table: c must lie in (0,1)");
  const double p0 = qspecial::phi_n(0, c, q);
  std::vector<double> pmf;
  double cj = 1.0;
  for (int j = 1;; ++j) {
    cj *= c;
    pmf.push_back(cj / ((1.0 - std::pow(q.value(), j)) * p0));
    const double tail = cj * c / ((1.0 - c) * (1.0 - q) * p0);
    if (tail < tail_tol) break;
  }
  return pmf;
}

ParticleConfig sample_marked_poisson(const MarkedPoissonSpec& spec, QParam q, std::uint64_t seed) {
  spec.validate();
  ParticleConfig cfg;
  if (spec.c == 0.0) return cfg;
  Rng rng(seed);
  const double mean = spec.lambda * qspecial::phi_n(0, spec.c, q) * spec.window_length;
  const auto n = std::poisson_distribution<std::int64_t>(mean)(rng);
  std::vector<double> pos(static_cast<std::size_t>(n));
  for (auto& p : pos) p = uniform01(rng) * spec.window_length;
  std::sort(pos.begin(), pos.end());
  const auto cdf = cumulative(mark_table(spec.c, q));
  for (double p : pos) {
    const int mark = sample_from_table(cdf, rng);
    if (p <= 0.0) continue;  // positions live in (0, L)
    if (!cfg.stacks.empty() && cfg.stacks.back().pos == p) {
      cfg.stacks.back().count += mark;
    } else {
      cfg.stacks.push_back({p, mark});
    }
  }
  return cfg;
}

double discrete_mark_pmf(int j, const DiscreteProductSpec& spec, QParam q) {
  spec.validate();
  if (j < 0) return 0.0;
  const double norm = qspecial::q_pochhammer(spec.c, q, qspecial::kInfinity) /
                      qspecial::q_pochhammer(spec.c * spec.s_sq, q, qspecial::kInfinity);
  return std::pow(spec.c, j) * qspecial::q_pochhammer(spec.s_sq, q, j) /
         qspecial::q_pochhammer(q.value(), q, j) * norm;
}

sim::VertexState sample_discrete_product(const DiscreteProductSpec& spec, QParam q,
                                         std::uint64_t seed) {
  spec.validate();
  std::vector<double> cdf;
  double acc = 0.0;
  for (int j = 0; acc < 1.0 - 1e-15 && j < 10000; ++j) {
    acc += discrete_mark_pmf(j, spec, q);
    cdf.push_back(acc);
  }
  Rng rng(seed);
  sim::VertexState st;
  st.eta.resize(static_cast<std::size_t>(spec.window_sites));
  for (auto& e : st.eta) e = sample_from_table(cdf, rng) - 1;
  return st;
}

double rate_down(int k, double xi, double s, QParam q) {
  if (k <= 0) return 0.0;
  return -xi * s * (1.0 - std::pow(q.value(), k));
}

double rate_up(int k, double c, double xi, double s, QParam q) {
  if (k < 0) return 0.0;
  return -xi * s * c * (1.0 - s * s * std::pow(q.value(), k));
}

double balance_residual(int k, double c, double xi, double s, QParam q) {
  if (k < 0) throw DomainError("balance_residual: k must be nonnegative");
  const DiscreteProductSpec spec{c, s * s, 1};
  auto phi = [&](int j) { return discrete_mark_pmf(j, spec, q); };
  const double in = (k >= 1 ? phi(k - 1) * rate_up(k - 1, c, xi, s, q) : 0.0) +
                    phi(k + 1) * rate_down(k + 1, xi, s, q);
  const double out = phi(k) * (rate_up(k, c, xi, s, q) + rate_down(k, xi, s, q));
  return in - out;
}

double continuous_balance_residual(int k, double c, double xi, double lambda, double dx, QParam q) {
  if (k < 0) throw DomainError("continuous_balance_residual: k must be nonnegative");
  const double p0 = qspecial::phi_n(0, c, q);
  const double e1 = std::exp(-lambda * p0 * dx);
  const double e2 = std::exp(-lambda * dx);
  auto qk = [&](int j) { return std::pow(q.value(), j); };
  // Probability weight of j particles in the cell, up to the common factor (1 - e1).
  auto w = [&](int j) { return std::pow(c, j) / ((1.0 - qk(j)) * p0); };
  if (k == 0) {
    return -e1 * xi * c * (1.0 - e2) + (1.0 - e1) * w(1) * (1.0 - q) * xi;
  }
  if (k == 1) {
    return -(1.0 - e1) * w(1) * (xi * c * (1.0 - q * e2) + (1.0 - q) * xi) +
           (1.0 - e1) * w(2) * (1.0 - qk(2)) * xi + e1 * xi * c * (1.0 - e2);
  }
  return -(1.0 - e1) * w(k) * (xi * c * (1.0 - qk(k) * e2) + (1.0 - qk(k)) * xi) +
         (1.0 - e1) * w(k + 1) * (1.0 - qk(k + 1)) * xi +
         (1.0 - e1) * w(k - 1) * xi * c * (1.0 - qk(k - 1) * e2);
}

// ------------------------------------------------------------------ ring

RingSimulator::RingSimulator(double length, double xi, ModelParams params, std::uint64_t seed,
                             sim::SimOptions opt)
    : length_(length), xi_(xi), q_(params.q), lambda_(params.lambda), opt_(opt), rng_(seed) {
  if (!(length > 0.0)) throw DomainError("ring: length must be positive");
  if (!(xi > 0.0)) throw DomainError("ring: speed must be positive");
}

void RingSimulator::set_config(const ParticleConfig& cfg) {
  cfg.validate();
  for (const auto& s : cfg.stacks) {
    if (!(s.pos < length_)) throw DomainError("ring: stack outside [0, L)");
  }
  stacks_ = cfg.stacks;
}

std::int64_t RingSimulator::total() const {
  std::int64_t n = 0;
  for (const auto& s : stacks_) n += s.count;
  return n;
}

ParticleConfig RingSimulator::config() const { return ParticleConfig{stacks_}; }

void RingSimulator::depart(std::size_t idx) {
  const double origin = stacks_[idx].pos;
  if (--stacks_[idx].count == 0) stacks_.erase(stacks_.begin() + static_cast<std::ptrdiff_t>(idx));
  const double want = exponential(rng_, lambda_);
  double travelled = want;
  double dest = -1.0;
  if (!stacks_.empty()) {
    auto it = std::upper_bound(stacks_.begin(), stacks_.end(), origin,
                               [](double v, const Stack& s) { return v < s.pos; });
    auto i = static_cast<std::size_t>(it - stacks_.begin());
    double lap = 0.0;
    while (true) {
      if (i == stacks_.size()) {
        i = 0;
        lap += length_;
      }
      const Stack& s = stacks_[i];
      const double d = s.pos - origin + (s.pos > origin ? lap : std::max(lap, length_));
      if (d >= want) break;
      while (qpow_.size() <= static_cast<std::size_t>(s.count)) qpow_.push_back(qpow_.back() * q_);
      if (uniform01(rng_) >= qpow_[static_cast<std::size_t>(s.count)]) {
        travelled = d;
        dest = s.pos;
        break;
      }
      ++i;
    }
  }
  crossings_ += static_cast<std::int64_t>(std::floor((origin + travelled) / length_));
  if (dest < 0.0) {
    dest = std::fmod(origin + travelled, length_);
    if (dest >= length_) dest = 0.0;
  }
  auto it = std::lower_bound(stacks_.begin(), stacks_.end(), dest,
                             [](const Stack& s, double v) { return s.pos < v; });
  if (it != stacks_.end() && it->pos == dest) {
    ++it->count;
  } else {
    stacks_.insert(it, Stack{dest, 1});
  }
}

bool RingSimulator::propose(double t_limit) {
  if (stacks_.empty()) {
    time_ = t_limit;
    return false;
  }
  const double total = static_cast<double>(stacks_.size()) * xi_;
  const double dt = exponential(rng_, total);
  if (time_ + dt > t_limit) {
    time_ = t_limit;
    return false;
  }
  time_ += dt;
  auto idx = std::min(static_cast<std::size_t>(uniform01(rng_) * static_cast<double>(stacks_.size())),
                      stacks_.size() - 1);
  while (qpow_.size() <= static_cast<std::size_t>(stacks_[idx].count)) {
    qpow_.push_back(qpow_.back() * q_);
  }
  if (uniform01(rng_) >= 1.0 - qpow_[static_cast<std::size_t>(stacks_[idx].count)]) return true;
  depart(idx);
  if (++events_ > opt_.event_cap) throw BudgetError("ring simulation exceeded its event cap");
  return true;
}

void RingSimulator::run_until(double t_end) {
  if (t_end < time_) throw DomainError("run_until: t_end is before the current time");
  while (propose(t_end)) {
  }
}

RingReport ring_evolution(const MarkedPoissonSpec& spec, double xi, QParam q, double t_end,
                          int seeds, std::uint64_t master_seed) {
  spec.validate();
  if (seeds < 2) throw DomainError("ring_evolution: need at least two seeds");
  if (!(t_end > 0.0)) throw DomainError("ring_evolution: t_end must be positive");
  const ModelParams params(q, spec.lambda);
  struct Trial {
    double density = 0;
    double current = 0;
    bool conserved = true;
    std::vector<std::int64_t> marks;
  };
  std::vector<Trial> trials(static_cast<std::size_t>(seeds));
  parallel_for(trials.size(), [&](std::size_t i) {
    const std::uint64_t s = trial_seed(master_seed, i);
    const ParticleConfig init = sample_marked_poisson(spec, q, splitmix64(s));
    RingSimulator ring(spec.window_length, xi, params, s);
    ring.set_config(init);
    ring.run_until(t_end);
    Trial& t = trials[i];
    t.density = static_cast<double>(ring.total()) / spec.window_length;
    t.current = static_cast<double>(ring.crossings()) / t_end;
    t.conserved = ring.total() == init.total();
    for (const auto& st : ring.config().stacks) t.marks.push_back(st.count);
  });

  RingReport rep{};
  rep.seeds = seeds;
  rep.conserved = true;
  std::vector<double> dens, curr;
  std::vector<std::int64_t> marks;
  for (const auto& t : trials) {
    dens.push_back(t.density);
    curr.push_back(t.current);
    rep.conserved = rep.conserved && t.conserved;
    marks.insert(marks.end(), t.marks.begin(), t.marks.end());
  }
  const auto d = mean_se(dens);
  const auto c = mean_se(curr);
  rep.density = {d.mean, d.se, spec.lambda * qspecial::phi_n(1, spec.c, q)};
  rep.current = {c.mean, c.se, xi * spec.c};

  // Pearson chi-square of pooled stack sizes; bins j = 1..J-1 and a tail bin j >= J,
  // with J the first size whose expected count drops below 5.
  rep.mark_chi2 = 0.0;
  rep.mark_dof = 0;
  rep.mark_z = 0.0;
  if (spec.c > 0.0 && !marks.empty()) {
    const double n = static_cast<double>(marks.size());
    std::vector<double> expected;
    double used = 0.0;
    for (int j = 1;; ++j) {
      const double e = n * mark_pmf(j, spec.c, q);
      if (e < 5.0 || n - used - e < 5.0) break;
      expected.push_back(e);
      used += e;
    }
    expected.push_back(n - used);
    std::vector<double> observed(expected.size(), 0.0);
    for (auto m : marks) {
      const auto bin = std::min<std::size_t>(static_cast<std::size_t>(m - 1), expected.size() - 1);
      observed[bin] += 1.0;
    }
    for (std::size_t b = 0; b < expected.size(); ++b) {
      rep.mark_chi2 += (observed[b] - expected[b]) * (observed[b] - expected[b]) / expected[b];
    }
    rep.mark_dof = static_cast<int>(expected.size()) - 1;
    if (rep.mark_dof > 0) {
      rep.mark_z = (rep.mark_chi2 - rep.mark_dof) / std::sqrt(2.0 * rep.mark_dof);
    }
  }
  return rep;
}

}  // namespace expjump::stationary
