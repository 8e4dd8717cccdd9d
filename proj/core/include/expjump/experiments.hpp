#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "expjump/limitshape.hpp"
#include "expjump/model.hpp"

namespace expjump::experiments {

// heights[i][j] = h(xs[j]) in trial i at time lambda * tau. Trials use
// trial_seed(seed, i), so results do not depend on the worker count.
std::vector<std::vector<std::int64_t>> sample_heights(double tau, const std::vector<double>& xs,
                                                      const SpeedField& field,
                                                      const Roadblocks& rb,
                                                      const ModelParams& params, int trials,
                                                      std::uint64_t seed);

struct LLNRow {
  double x;
  double mean_over_lambda;
  double se;  // standard error of mean_over_lambda
  double H;
  double gap;  // |mean_over_lambda - H|
};

std::vector<LLNRow> lln_experiment(double tau, const std::vector<double>& xs,
                                   const SpeedField& field, const Roadblocks& rb,
                                   const ModelParams& params, int trials, std::uint64_t seed);

struct FluctuationSample {
  double tau = 0;
  double x = 0;
  double lambda = 0;
  int trials = 0;
  std::vector<double> standardized;  // (h - lambda H) / (lambda^beta scale)
  double beta = 0;
  double scale = 0;
  limitshape::PhaseReport report;
};

struct KSReport {
  double ks_distance = 0;
  int n = 0;
  std::string reference_law;  // "F2", "BBP(m)", "G_m"
};

// sup_r |F_n(r) - F(r)| for a continuous reference CDF; ties handled exactly.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

// Reference law of the phase at (tau, x): F2, BBP(m_x, 0..0) or G_{m_x}.
// The returned CDF caches evaluated points.
std::function<double(double)> reference_cdf(const limitshape::PhaseReport& rep,
                                            std::string* name = nullptr);

FluctuationSample standardize(const std::vector<std::int64_t>& heights,
                              const limitshape::PhaseReport& rep, double lambda);

// Empirical CDF of the negated standardized sample against the phase law.
KSReport compare_to_law(const FluctuationSample& s);

std::pair<FluctuationSample, KSReport> fluct_experiment(double tau, double x,
                                                        const SpeedField& field,
                                                        const Roadblocks& rb,
                                                        const ModelParams& params, int trials,
                                                        std::uint64_t seed);

struct JamSide {
  std::string side;  // "left" or "right"
  double x;
  double H_base;      // unmodified environment
  double H_modified;
  std::string phase;
  double beta;
  double scale;
  double ks;
  std::string law;
  double mean_height;  // modified environment, per lambda
};

struct JamReport {
  double sigma;
  double delta;
  std::vector<JamSide> sides;
  // Left side, same seed in both environments: equal in distribution.
  double left_mean_base;
  double left_mean_modified;
  double left_z;  // difference over its standard error
};

JamReport traffic_jam_experiment(double tau, const limitshape::JamScenario& scenario,
                                 const SpeedField& field, const Roadblocks& rb,
                                 const ModelParams& params, int trials, std::uint64_t seed,
                                 double delta = 0.02);

}  // namespace expjump::experiments
