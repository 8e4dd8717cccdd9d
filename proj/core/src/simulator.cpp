#include "expjump/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "expjump/errors.hpp"

namespace expjump::sim {

namespace {

enum class Proposal { ClockPassed, Rejected, Accepted };

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

ExpJumpSimulator::ExpJumpSimulator(const SpeedField& field, const Roadblocks& rb, ModelParams params,
                                   std::uint64_t seed, SimOptions opt)
    : field_(field),
      rb_(rb),
      q_(params.q),
      lambda_(params.lambda),
      seed_(seed),
      opt_(opt),
      rng_(seed) {
  rate_bound_ = field_.band_max();
  for (double v : field_.segment_values()) rate_bound_ = std::max(rate_bound_, v);
  for (const auto& e : rb_.entries()) rate_bound_ = std::max(rate_bound_, roadblock_speed(field_, e));
  qpow_.push_back(1.0);
}

void ExpJumpSimulator::set_config(const ParticleConfig& cfg) {
  cfg.validate();
  stacks_.clear();
  for (const auto& s : cfg.stacks) stacks_.push_back({s.pos, s.count, speed_at(s.pos)});
}

double ExpJumpSimulator::speed_at(double pos) const {
  if (const Roadblock* r = rb_.find(pos)) return roadblock_speed(field_, *r);
  return eval_speed(field_, pos);
}

double ExpJumpSimulator::pass_prob(std::int64_t count) const {
  while (static_cast<std::int64_t>(qpow_.size()) <= count) qpow_.push_back(qpow_.back() * q_);
  return qpow_[static_cast<std::size_t>(count)];
}

Landing ExpJumpSimulator::resolve_jump(double origin, Rng& rng) const {
  const double target = origin + exponential(rng, lambda_);
  auto st = std::upper_bound(stacks_.begin(), stacks_.end(), origin,
                             [](double v, const SimStack& s) { return v < s.pos; });
  const auto& rbs = rb_.entries();
  auto rt = std::upper_bound(rbs.begin(), rbs.end(), origin,
                             [](double v, const Roadblock& r) { return v < r.b; });
  while (true) {
    const double ps = st != stacks_.end() ? st->pos : kInf;
    const double pb = rt != rbs.end() ? rt->b : kInf;
    const double next = std::min(ps, pb);
    if (next >= target) break;
    if (pb == next) {
      if (uniform01(rng) >= rt->p) return {pb, true};
      ++rt;
    }
    if (ps == next) {
      if (uniform01(rng) >= pass_prob(st->count)) return {ps, true};
      ++st;
    }
  }
  return {target, false};
}

void ExpJumpSimulator::land(double pos) {
  auto it = std::lower_bound(stacks_.begin(), stacks_.end(), pos,
                             [](const SimStack& s, double v) { return s.pos < v; });
  if (it != stacks_.end() && it->pos == pos) {
    ++it->count;
  } else {
    stacks_.insert(it, SimStack{pos, 1, speed_at(pos)});
  }
}

void ExpJumpSimulator::move_from(double origin) { land(resolve_jump(origin, rng_).pos); }

void ExpJumpSimulator::enter() {
  ++entered_;
  move_from(0.0);
}

void ExpJumpSimulator::depart(std::size_t idx) {
  const double origin = stacks_[idx].pos;
  if (--stacks_[idx].count == 0) stacks_.erase(stacks_.begin() + static_cast<std::ptrdiff_t>(idx));
  move_from(origin);
}

bool ExpJumpSimulator::propose(double t_limit) {
  const double xi0 = field_.xi0();
  const double total = xi0 + static_cast<double>(stacks_.size()) * rate_bound_;
  const double dt = exponential(rng_, total);
  if (time_ + dt > t_limit) {
    time_ = t_limit;
    return false;
  }
  time_ += dt;
  const double pick = uniform01(rng_) * total;
  if (pick < xi0) {
    enter();
  } else {
    auto idx = static_cast<std::size_t>((pick - xi0) / rate_bound_);
    idx = std::min(idx, stacks_.size() - 1);
    const SimStack& s = stacks_[idx];
    const double accept = s.speed * (1.0 - pass_prob(s.count)) / rate_bound_;
    if (uniform01(rng_) >= accept) return true;
    depart(idx);
  }
  if (++events_ > opt_.event_cap) throw BudgetError("exponential model exceeded its event cap");
  return true;
}

void ExpJumpSimulator::step() {
  const std::uint64_t before = events_;
  while (events_ == before) propose(kInf);
}

void ExpJumpSimulator::run_until(double t_end) {
  if (t_end < time_) throw DomainError("run_until: t_end is before the current time");
  while (propose(t_end)) {
  }
}

std::int64_t ExpJumpSimulator::height(double x) const {
  std::int64_t n = 0;
  auto it = std::lower_bound(stacks_.begin(), stacks_.end(), x,
                             [](const SimStack& s, double v) { return s.pos < v; });
  for (; it != stacks_.end(); ++it) n += it->count;
  return n;
}

ParticleConfig ExpJumpSimulator::config() const {
  ParticleConfig c;
  c.stacks.reserve(stacks_.size());
  for (const auto& s : stacks_) c.stacks.push_back({s.pos, s.count});
  return c;
}

ExpJumpState ExpJumpSimulator::state() const {
  return {config(), time_, seed_, events_, entered_};
}

// ---------------------------------------------------------------- vertex models

VertexParams::VertexParams(QParam q_, double xi0_, double xi_tail_, double s_tail_)
    : q(q_), xi0(xi0_), xi_tail(xi_tail_), s_tail(s_tail_) {}

void VertexParams::validate() const {
  if (!(xi0 > 0.0)) throw DomainError("vertex model: xi0 must be positive");
  if (!(u > 0.0)) throw DomainError("vertex model: u must be positive");
  auto check = [](double xi, double s) {
    if (!(xi > 0.0)) throw DomainError("vertex model: xi_i must be positive");
    if (!(s > -1.0 && s < 0.0)) throw DomainError("vertex model: s_i must lie in (-1,0)");
  };
  check(xi_tail, s_tail);
  for (std::size_t i = 0; i < std::max(xi.size(), s.size()); ++i) check(xi_at(i + 1), s_at(i + 1));
}

std::int64_t VertexState::height(std::size_t k) const {
  std::int64_t n = 0;
  for (std::size_t i = std::max<std::size_t>(k, 1); i <= eta.size(); ++i) n += eta[i - 1];
  return n;
}

std::pair<double, double> discrete_row(int h_in, std::int64_t eta, double xi, double s, double u,
                                       double q) {
  const double qe = std::pow(q, static_cast<double>(eta));
  const double a = xi * s * u;  // negative
  const double den = 1.0 - a;
  if (h_in == 0) return {(1.0 - a * qe) / den, -a * (1.0 - qe) / den};
  const double s2 = s * s;
  return {(1.0 - s2 * qe) / den, (s2 * qe - a) / den};
}

double discrete_entry_prob(double xi0, double u) { return xi0 * u / (1.0 + xi0 * u); }

void vertex_step_discrete(VertexState& state, const VertexParams& p, Rng& rng,
                          const WindowPolicy& window) {
  std::size_t last = state.eta.size();
  while (last > 0 && state.eta[last - 1] == 0) --last;
  int h_prev = uniform01(rng) < discrete_entry_prob(p.xi0, p.u) ? 1 : 0;
  for (std::size_t i = 1;; ++i) {
    if (i > last && h_prev == 0) break;
    const std::int64_t e = state.occupation(i);
    const auto [p0, p1] = discrete_row(h_prev, e, p.xi_at(i), p.s_at(i), p.u, p.q);
    (void)p0;
    const int h = uniform01(rng) < p1 ? 1 : 0;
    const std::int64_t next = e - h + h_prev;
    if (i > state.eta.size()) {
      if (next == 0) {
        h_prev = h;
        continue;
      }
      if (!window.auto_grow && i > window.max_sites) {
        throw WindowError("discrete vertex model: particle left the window");
      }
      state.eta.resize(i, 0);
    }
    state.eta[i - 1] = next;
    h_prev = h;
  }
  state.time += 1.0;
}

HalfContinuousSimulator::HalfContinuousSimulator(VertexParams params, std::uint64_t seed,
                                                 SimOptions opt)
    : p_(std::move(params)), opt_(opt), rng_(seed) {
  p_.validate();
  rate_bound_ = p_.xi_tail * (-p_.s_tail);
  for (std::size_t i = 1; i <= std::max(p_.xi.size(), p_.s.size()); ++i) {
    rate_bound_ = std::max(rate_bound_, site_rate_cap(i));
  }
}

double HalfContinuousSimulator::site_rate_cap(std::size_t site) const {
  return p_.xi_at(site) * (-p_.s_at(site));
}

void HalfContinuousSimulator::add(std::size_t site) {
  if (site > state_.eta.size()) {
    state_.eta.resize(site, 0);
    slot_.resize(site, -1);
  }
  if (state_.eta[site - 1]++ == 0) {
    slot_[site - 1] = static_cast<std::ptrdiff_t>(occupied_.size());
    occupied_.push_back(site);
  }
}

void HalfContinuousSimulator::remove(std::size_t site) {
  if (--state_.eta[site - 1] == 0) {
    const auto k = static_cast<std::size_t>(slot_[site - 1]);
    const std::size_t moved = occupied_.back();
    occupied_[k] = moved;
    slot_[moved - 1] = static_cast<std::ptrdiff_t>(k);
    occupied_.pop_back();
    slot_[site - 1] = -1;
  }
}

std::size_t HalfContinuousSimulator::resolve_jump(std::size_t site, Rng& rng) const {
  for (std::size_t k = site + 1;; ++k) {
    const double s = p_.s_at(k);
    const double pass = s * s * std::pow(p_.q.value(), static_cast<double>(state_.occupation(k)));
    if (uniform01(rng) >= pass) return k;
  }
}

bool HalfContinuousSimulator::propose(double t_limit) {
  const double total = p_.xi0 + static_cast<double>(occupied_.size()) * rate_bound_;
  const double dt = exponential(rng_, total);
  if (state_.time + dt > t_limit) {
    state_.time = t_limit;
    return false;
  }
  state_.time += dt;
  const double pick = uniform01(rng_) * total;
  if (pick < p_.xi0) {
    add(resolve_jump(0, rng_));
  } else {
    auto k = static_cast<std::size_t>((pick - p_.xi0) / rate_bound_);
    k = std::min(k, occupied_.size() - 1);
    const std::size_t site = occupied_[k];
    const double rate =
        site_rate_cap(site) * (1.0 - std::pow(p_.q.value(), static_cast<double>(state_.eta[site - 1])));
    if (uniform01(rng_) >= rate / rate_bound_) return true;
    const std::size_t dest = resolve_jump(site, rng_);
    remove(site);
    add(dest);
  }
  if (++events_ > opt_.event_cap) throw BudgetError("half-continuous model exceeded its event cap");
  return true;
}

void HalfContinuousSimulator::step() {
  const std::uint64_t before = events_;
  while (events_ == before) propose(kInf);
}

void HalfContinuousSimulator::run_until(double t_end) {
  if (t_end < state_.time) throw DomainError("run_until: t_end is before the current time");
  while (propose(t_end)) {
  }
}

}  // namespace expjump::sim
