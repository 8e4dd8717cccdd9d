#pragma once

#include <cstdint>
#include <vector>

#include "expjump/model.hpp"
#include "expjump/qspecial.hpp"
#include "expjump/rng.hpp"
#include "expjump/simulator.hpp"

namespace expjump::stationary {

// Translation-invariant measure: Poisson points of rate lambda*phi_0(c), i.i.d. marks.
struct MarkedPoissonSpec {
  double c;
  double lambda;
  double window_length;
  void validate() const;
};

// Product measure of the half-continuous model with mark law
// c^j (s^2;q)_j / (q;q)_j * (c;q)_inf / (c s^2;q)_inf.
struct DiscreteProductSpec {
  double c;
  double s_sq;
  int window_sites;
  void validate() const;
};

// Stack-size law c^j / ((1 - q^j) phi_0(c)), j >= 1.
double mark_pmf(int j, double c, QParam q);
// pmf[j-1] for j = 1..J, truncated once the remaining tail mass is below tail_tol.
std::vector<double> mark_table(double c, QParam q, double tail_tol = 1e-14);

ParticleConfig sample_marked_poisson(const MarkedPoissonSpec& spec, QParam q, std::uint64_t seed);

double discrete_mark_pmf(int j, const DiscreteProductSpec& spec, QParam q);
sim::VertexState sample_discrete_product(const DiscreteProductSpec& spec, QParam q,
                                         std::uint64_t seed);

// Half-continuous transition rates of a single site holding k particles.
double rate_down(int k, double xi, double s, QParam q);
double rate_up(int k, double c, double xi, double s, QParam q);

// Master-equation residual at occupation k:
// inflow phi(k-1) R(k-1 -> k) + phi(k+1) R(k+1 -> k) minus outflow phi(k) [R(k -> k+1) + R(k -> k-1)].
double balance_residual(int k, double c, double xi, double s, QParam q);

// Exponential-model flux balance for the occupation of a cell of width dx; O(dx^2).
double continuous_balance_residual(int k, double c, double xi, double lambda, double dx, QParam q);

// Exponential-model dynamics on a ring of circumference L (homogeneous speed).
class RingSimulator {
 public:
  RingSimulator(double length, double xi, ModelParams params, std::uint64_t seed,
                sim::SimOptions opt = {});

  void set_config(const ParticleConfig& cfg);
  void run_until(double t_end);

  double time() const noexcept { return time_; }
  // Movers that crossed the marked point 0 = L (with multiplicity).
  std::int64_t crossings() const noexcept { return crossings_; }
  std::int64_t total() const;
  ParticleConfig config() const;

 private:
  bool propose(double t_limit);
  void depart(std::size_t idx);

  double length_;
  double xi_;
  double q_;
  double lambda_;
  sim::SimOptions opt_;
  Rng rng_;
  std::vector<Stack> stacks_;
  std::vector<double> qpow_{1.0};
  double time_ = 0.0;
  std::uint64_t events_ = 0;
  std::int64_t crossings_ = 0;
};

struct Estimate {
  double est;
  double se;
  double target;
};

struct RingReport {
  Estimate density;
  Estimate current;
  double mark_chi2;
  int mark_dof;
  double mark_z;  // (chi2 - dof) / sqrt(2 dof)
  int seeds;
  bool conserved;
};

RingReport ring_evolution(const MarkedPoissonSpec& spec, double xi, QParam q, double t_end,
                          int seeds, std::uint64_t master_seed);

}  // namespace expjump::stationary
