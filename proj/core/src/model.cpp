#include "expjump/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "expjump/errors.hpp"

namespace expjump {

SpeedField::SpeedField(double xi0, std::vector<double> breakpoints,
                       std::vector<double> segment_values, std::optional<double> band_min,
                       std::optional<double> band_max)
    : xi0_(xi0), breaks_(std::move(breakpoints)), values_(std::move(segment_values)) {
  if (breaks_.empty()) throw DomainError("speed field needs at least one breakpoint (0)");
  if (breaks_.front() != 0.0) throw DomainError("first breakpoint must be 0");
  if (breaks_.size() != values_.size()) {
    throw DomainError("breakpoints and segment_values must have equal length");
  }
  for (std::size_t k = 1; k < breaks_.size(); ++k) {
    if (!(breaks_[k] > breaks_[k - 1]) || !std::isfinite(breaks_[k])) {
      throw DomainError("breakpoints must be finite and strictly increasing");
    }
  }
  double lo = xi0_, hi = xi0_;
  for (double v : values_) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  band_min_ = band_min.value_or(lo);
  band_max_ = band_max.value_or(hi);
  if (!(band_min_ > 0.0) || !(band_max_ < INFINITY) || band_min_ > band_max_) {
    throw DomainError("speed band must satisfy 0 < min <= max < inf");
  }
  if (!(xi0_ >= band_min_ && xi0_ <= band_max_)) throw DomainError("xi0 outside speed band");
  for (double v : values_) {
    if (!(v >= band_min_ && v <= band_max_)) throw DomainError("segment value outside speed band");
  }
}

SpeedField SpeedField::homogeneous(double xi, std::optional<double> xi0) {
  return SpeedField(xi0.value_or(xi), {0.0}, {xi});
}

std::size_t SpeedField::segment_index(double x) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
  return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - breaks_.begin()) - 1));
}

std::size_t SpeedField::segment_index_left(double x) const {
  auto it = std::lower_bound(breaks_.begin(), breaks_.end(), x);
  return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - breaks_.begin()) - 1));
}

Roadblocks::Roadblocks(std::vector<Roadblock> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const Roadblock& a, const Roadblock& b) { return a.b < b.b; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!(e.b > 0.0) || !std::isfinite(e.b)) throw DomainError("roadblock position must be > 0");
    if (!(e.p > 0.0 && e.p < 1.0)) throw DomainError("roadblock pass probability must be in (0,1)");
    if (e.xi_override && !(*e.xi_override > 0.0)) {
      throw DomainError("roadblock speed override must be positive");
    }
    if (i > 0 && entries_[i - 1].b == e.b) throw DomainError("roadblock positions must be distinct");
  }
}

const Roadblock* Roadblocks::find(double x) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), x,
                             [](const Roadblock& r, double v) { return r.b < v; });
  if (it != entries_.end() && it->b == x) return &*it;
  return nullptr;
}

ModelParams::ModelParams(QParam q_, double lambda_) : q(q_), lambda(lambda_) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive");
}

std::int64_t ParticleConfig::total() const {
  std::int64_t n = 0;
  for (const auto& s : stacks) n += s.count;
  return n;
}

std::int64_t ParticleConfig::height(double x) const {
  std::int64_t n = 0;
  auto it = std::lower_bound(stacks.begin(), stacks.end(), x,
                             [](const Stack& s, double v) { return s.pos < v; });
  for (; it != stacks.end(); ++it) n += it->count;
  return n;
}

void ParticleConfig::validate() const {
  for (std::size_t i = 0; i < stacks.size(); ++i) {
    if (stacks[i].count < 1) throw DomainError("stack count must be >= 1");
    if (!(stacks[i].pos > 0.0)) throw DomainError("stack position must be > 0");
    if (i > 0 && !(stacks[i].pos > stacks[i - 1].pos)) {
      throw DomainError("stack positions must be strictly increasing");
    }
  }
}

double eval_speed(const SpeedField& field, double x) {
  if (x < 0.0) throw DomainError("eval_speed: x must be nonnegative");
  if (x == 0.0) return field.xi0();
  return field.segment_values()[field.segment_index(x)];
}

double eval_speed_left(const SpeedField& field, double x) {
  if (!(x > 0.0)) throw DomainError("eval_speed_left: x must be positive");
  return field.segment_values()[field.segment_index_left(x)];
}

double roadblock_speed(const SpeedField& field, const Roadblock& rb) {
  return rb.xi_override ? *rb.xi_override : eval_speed(field, rb.b);
}

MinSpeed min_speed(const SpeedField& field, const Roadblocks& rb, double x) {
  if (!(x > 0.0)) throw DomainError("min_speed: x must be positive");
  double wc = INFINITY;
  field.for_each_piece(x, [&](double, double v) { wc = std::min(wc, v); });
  double w = std::min(wc, field.xi0());
  for (const auto& r : rb.entries()) {
    if (r.b >= x) break;
    w = std::min(w, roadblock_speed(field, r));
  }
  return {w, wc};
}

}  // namespace expjump
