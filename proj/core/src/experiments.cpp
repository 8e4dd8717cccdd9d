#include "expjump/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <variant>

#include "expjump/distributions.hpp"
#include "expjump/errors.hpp"
#include "expjump/parallel.hpp"
#include "expjump/rng.hpp"
#include "expjump/simulator.hpp"

namespace expjump::experiments {

using limitshape::Phase;

std::vector<std::vector<std::int64_t>> sample_heights(double tau, const std::vector<double>& xs,
                                                      const SpeedField& field,
                                                      const Roadblocks& rb,
                                                      const ModelParams& params, int trials,
                                                      std::uint64_t seed) {
  if (!(tau >= 0.0)) throw DomainError("tau must be nonnegative");
  if (trials < 1) throw DomainError("need at least one trial");
  const double t = params.lambda * tau;
  std::vector<std::vector<std::int64_t>> out(static_cast<std::size_t>(trials));
  parallel_for(out.size(), [&](std::size_t i) {
    sim::ExpJumpSimulator s(field, rb, params, trial_seed(seed, i));
    s.run_until(t);
    out[i].reserve(xs.size());
    for (double x : xs) out[i].push_back(s.height(x));
  });
  return out;
}

std::vector<LLNRow> lln_experiment(double tau, const std::vector<double>& xs,
                                   const SpeedField& field, const Roadblocks& rb,
                                   const ModelParams& params, int trials, std::uint64_t seed) {
  if (trials < 2) throw DomainError("need at least two trials");
  const auto h = sample_heights(tau, xs, field, rb, params, trials, seed);
  std::vector<LLNRow> rows;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    double mean = 0.0;
    for (const auto& row : h) mean += static_cast<double>(row[j]) / params.lambda;
    mean /= trials;
    double ss = 0.0;
    for (const auto& row : h) {
      const double d = static_cast<double>(row[j]) / params.lambda - mean;
      ss += d * d;
    }
    LLNRow r;
    r.x = xs[j];
    r.mean_over_lambda = mean;
    r.se = std::sqrt(ss / (trials - 1) / trials);
    r.H = limitshape::height(tau, xs[j], field, rb, params.q);
    r.gap = std::abs(mean - r.H);
    rows.push_back(r);
  }
  return rows;
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("KS distance of an empty sample");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    const double f = cdf(samples[i]);
    d = std::max({d, std::abs(static_cast<double>(i) / n - f), std::abs(static_cast<double>(j) / n - f)});
    i = j;
  }
  return d;
}

namespace {

std::function<double(double)> cached(std::function<double(double)> f) {
  auto cache = std::make_shared<std::map<double, double>>();
  auto mu = std::make_shared<std::mutex>();
  return [f = std::move(f), cache, mu](double r) {
    {
      std::lock_guard<std::mutex> lock(*mu);
      auto it = cache->find(r);
      if (it != cache->end()) return it->second;
    }
    const double v = f(r);
    std::lock_guard<std::mutex> lock(*mu);
    (*cache)[r] = v;
    return v;
  };
}

// Empirical CDF of sampled largest GUE eigenvalues, for sizes without a closed form.
std::function<double(double)> gue_empirical_cdf(int m, int samples, std::uint64_t seed) {
  auto sorted = std::make_shared<std::vector<double>>(static_cast<std::size_t>(samples));
  parallel_for(sorted->size(), [&](std::size_t i) {
    (*sorted)[i] = dist::sample_gue_largest(m, trial_seed(seed, i));
  });
  std::sort(sorted->begin(), sorted->end());
  return [sorted](double r) {
    const auto k = std::upper_bound(sorted->begin(), sorted->end(), r) - sorted->begin();
    return static_cast<double>(k) / static_cast<double>(sorted->size());
  };
}

double sigma_of(const limitshape::JamScenario& s) {
  return std::visit([](const auto& v) { return v.sigma; }, s);
}

}  // namespace

std::function<double(double)> reference_cdf(const limitshape::PhaseReport& rep, std::string* name) {
  std::string label;
  std::function<double(double)> f;
  switch (rep.phase) {
    case Phase::TracyWidom:
      label = "F2";
      f = [](double r) { return dist::F2(r); };
      break;
    case Phase::Transition: {
      const int m = rep.m_x;
      label = "BBP(" + std::to_string(m) + ")";
      f = [m](double r) { return dist::BBP(r, m, std::vector<double>(static_cast<std::size_t>(m), 0.0)); };
      break;
    }
    case Phase::Gaussian: {
      const int m = rep.m_x;
      if (m < 1) throw DomainError("Gaussian phase without an attaining speed has no reference law");
      label = "G_" + std::to_string(m);
      if (m <= 3) {
        f = [m](double r) { return dist::gue_largest_cdf_exact(r, m); };
      } else {
        f = gue_empirical_cdf(m, 200000, 0x5eed);
      }
      break;
    }
  }
  if (name) *name = label;
  return cached(std::move(f));
}

FluctuationSample standardize(const std::vector<std::int64_t>& heights,
                              const limitshape::PhaseReport& rep, double lambda) {
  FluctuationSample s;
  s.tau = rep.tau;
  s.x = rep.x;
  s.lambda = lambda;
  s.trials = static_cast<int>(heights.size());
  s.beta = rep.fluctuation_exponent;
  s.scale = rep.scale();
  s.report = rep;
  const double denom = std::pow(lambda, s.beta) * s.scale;
  if (!(denom > 0.0)) throw DomainError("degenerate fluctuation scale");
  for (auto h : heights) s.standardized.push_back((static_cast<double>(h) - lambda * rep.H) / denom);
  return s;
}

KSReport compare_to_law(const FluctuationSample& s) {
  KSReport k;
  const auto cdf = reference_cdf(s.report, &k.reference_law);
  std::vector<double> neg;
  neg.reserve(s.standardized.size());
  for (double v : s.standardized) neg.push_back(-v);
  k.ks_distance = ks_distance(std::move(neg), cdf);
  k.n = static_cast<int>(s.standardized.size());
  return k;
}

std::pair<FluctuationSample, KSReport> fluct_experiment(double tau, double x,
                                                        const SpeedField& field,
                                                        const Roadblocks& rb,
                                                        const ModelParams& params, int trials,
                                                        std::uint64_t seed) {
  const auto rep = limitshape::classify(tau, x, field, rb, params.q);
  const auto h = sample_heights(tau, {x}, field, rb, params, trials, seed);
  std::vector<std::int64_t> col;
  col.reserve(h.size());
  for (const auto& row : h) col.push_back(row[0]);
  FluctuationSample s = standardize(col, rep, params.lambda);
  KSReport k = compare_to_law(s);
  return {std::move(s), std::move(k)};
}

JamReport traffic_jam_experiment(double tau, const limitshape::JamScenario& scenario,
                                 const SpeedField& field, const Roadblocks& rb,
                                 const ModelParams& params, int trials, std::uint64_t seed,
                                 double delta) {
  if (!(delta > 0.0)) throw DomainError("offset from the jam must be positive");
  const double sigma = sigma_of(scenario);
  if (!(sigma - delta > 0.0)) throw DomainError("jam too close to the origin for the offset");
  const auto [mfield, mrb] = limitshape::traffic_jam_modify(field, rb, scenario);
  const std::vector<double> xs{sigma - delta, sigma + delta};
  const auto h_mod = sample_heights(tau, xs, mfield, mrb, params, trials, seed);
  const auto h_base = sample_heights(tau, {xs[0]}, field, rb, params, trials, seed);

  JamReport out;
  out.sigma = sigma;
  out.delta = delta;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const auto rep = limitshape::classify(tau, xs[j], mfield, mrb, params.q);
    std::vector<std::int64_t> col;
    double mean = 0.0;
    for (const auto& row : h_mod) {
      col.push_back(row[j]);
      mean += static_cast<double>(row[j]);
    }
    const FluctuationSample s = standardize(col, rep, params.lambda);
    const KSReport k = compare_to_law(s);
    JamSide side;
    side.side = j == 0 ? "left" : "right";
    side.x = xs[j];
    side.H_base = limitshape::height(tau, xs[j], field, rb, params.q);
    side.H_modified = rep.H;
    side.phase = limitshape::to_string(rep.phase);
    side.beta = s.beta;
    side.scale = s.scale;
    side.ks = k.ks_distance;
    side.law = k.reference_law;
    side.mean_height = mean / trials / params.lambda;
    out.sides.push_back(side);
  }
  auto mean_var = [](const std::vector<double>& v, double* var) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    *var = ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size());
    return m;
  };
  std::vector<double> a, b;
  for (const auto& row : h_base) a.push_back(static_cast<double>(row[0]) / params.lambda);
  for (const auto& row : h_mod) b.push_back(static_cast<double>(row[0]) / params.lambda);
  double va = 0.0, vb = 0.0;
  out.left_mean_base = mean_var(a, &va);
  out.left_mean_modified = mean_var(b, &vb);
  const double se = std::sqrt(va + vb);
  out.left_z = se > 0.0 ? (out.left_mean_modified - out.left_mean_base) / se : 0.0;
  return out;
}

}  // namespace expjump::experiments
