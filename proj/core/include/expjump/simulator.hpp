#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "expjump/model.hpp"
#include "expjump/rng.hpp"

namespace expjump::sim {

struct SimOptions {
  std::uint64_t event_cap = 200'000'000;
};

// Snapshot of a running exponential-model chain.
struct ExpJumpState {
  ParticleConfig config;
  double time = 0.0;
  std::uint64_t rng_seed = 0;
  std::uint64_t event_count = 0;
  std::int64_t entered = 0;
};

// Where a mover comes to rest.
struct Landing {
  double pos;
  bool stopped;  // false when it travelled the full desired distance
};

// Continuous-space exponential jump model on (0, inf). Rates are sampled by
// thinning against the uniform bound xi0 + (#stacks) * max speed, so event
// selection is O(1) and each jump costs O(log n + obstacles passed).
class ExpJumpSimulator {
 public:
  ExpJumpSimulator(const SpeedField& field, const Roadblocks& rb, ModelParams params,
                   std::uint64_t seed, SimOptions opt = {});

  void set_config(const ParticleConfig& cfg);

  // Advances by exactly one wake-up event.
  void step();
  // Runs until the clock reaches t_end; the state is that at time t_end.
  void run_until(double t_end);

  // Resolves the trajectory of a mover starting at `origin` against the current
  // obstacles, without modifying the configuration.
  Landing resolve_jump(double origin, Rng& rng) const;

  double time() const noexcept { return time_; }
  std::uint64_t event_count() const noexcept { return events_; }
  std::int64_t entered() const noexcept { return entered_; }
  std::size_t stack_count() const noexcept { return stacks_.size(); }
  std::int64_t height(double x) const;
  ParticleConfig config() const;
  ExpJumpState state() const;

 private:
  struct SimStack {
    double pos;
    std::int64_t count;
    double speed;
  };

  bool propose(double t_limit);  // returns false if the clock would pass t_limit
  void depart(std::size_t idx);
  void enter();
  void move_from(double origin);
  void land(double pos);
  double speed_at(double pos) const;
  double pass_prob(std::int64_t count) const;

  SpeedField field_;
  Roadblocks rb_;
  double q_;
  double lambda_;
  double rate_bound_;
  std::uint64_t seed_;
  SimOptions opt_;
  Rng rng_;
  std::vector<SimStack> stacks_;
  mutable std::vector<double> qpow_;
  double time_ = 0.0;
  std::uint64_t events_ = 0;
  std::int64_t entered_ = 0;
};

// Vertex-model parameters on sites 1, 2, ...; entries beyond the vectors use the tail values.
struct VertexParams {
  QParam q;
  double xi0;
  double u = 1.0;  // spectral parameter, discrete model only
  std::vector<double> xi;
  std::vector<double> s;
  double xi_tail;
  double s_tail;

  VertexParams(QParam q_, double xi0_, double xi_tail_, double s_tail_);
  double xi_at(std::size_t site) const { return site - 1 < xi.size() ? xi[site - 1] : xi_tail; }
  double s_at(std::size_t site) const { return site - 1 < s.size() ? s[site - 1] : s_tail; }
  void validate() const;
};

struct VertexState {
  std::vector<std::int64_t> eta;  // eta[i-1] is the occupation of site i
  double time = 0.0;

  std::int64_t occupation(std::size_t site) const {
    return site - 1 < eta.size() ? eta[site - 1] : 0;
  }
  // Number of particles at sites >= k.
  std::int64_t height(std::size_t k) const;
  std::int64_t total() const { return height(1); }
};

// P(h(i) = 0), P(h(i) = 1) given the incoming h(i-1) and the occupation eta(i).
std::pair<double, double> discrete_row(int h_in, std::int64_t eta, double xi, double s, double u,
                                       double q);
// P(h(0) = 1) at the boundary.
double discrete_entry_prob(double xi0, double u);

struct WindowPolicy {
  bool auto_grow = true;
  std::size_t max_sites = 0;  // used when auto_grow is false
};

// One left-to-right sequential update of the discrete vertex model.
void vertex_step_discrete(VertexState& state, const VertexParams& p, Rng& rng,
                          const WindowPolicy& window = {});

// Half-continuous vertex model driven in continuous time.
class HalfContinuousSimulator {
 public:
  HalfContinuousSimulator(VertexParams params, std::uint64_t seed, SimOptions opt = {});

  // One wake-up event.
  void step();
  void run_until(double t_end);
  // Landing site of a mover starting at `site` (0 = boundary), current occupations.
  std::size_t resolve_jump(std::size_t site, Rng& rng) const;

  const VertexState& state() const noexcept { return state_; }
  std::uint64_t event_count() const noexcept { return events_; }

 private:
  bool propose(double t_limit);
  void add(std::size_t site);
  void remove(std::size_t site);
  double site_rate_cap(std::size_t site) const;

  VertexParams p_;
  SimOptions opt_;
  Rng rng_;
  VertexState state_;
  std::vector<std::size_t> occupied_;
  std::vector<std::ptrdiff_t> slot_;  // index into occupied_ per site, -1 if empty
  double rate_bound_;
  std::uint64_t events_ = 0;
};

}  // namespace expjump::sim
