#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "expjump/qspecial.hpp"

namespace expjump {

// Piecewise-constant speed function. Segment k covers (b_k, b_{k+1}); the last
// one extends to +infinity. The value at x = 0 is the separate boundary value.
class SpeedField {
 public:
  SpeedField(double xi0, std::vector<double> breakpoints, std::vector<double> segment_values,
             std::optional<double> band_min = std::nullopt,
             std::optional<double> band_max = std::nullopt);

  static SpeedField homogeneous(double xi, std::optional<double> xi0 = std::nullopt);

  double xi0() const noexcept { return xi0_; }
  const std::vector<double>& breakpoints() const noexcept { return breaks_; }
  const std::vector<double>& segment_values() const noexcept { return values_; }
  double band_min() const noexcept { return band_min_; }
  double band_max() const noexcept { return band_max_; }

  // Index of the segment containing x > 0, right-continuous at breakpoints.
  std::size_t segment_index(double x) const;
  // Segment containing a left neighbourhood of x > 0.
  std::size_t segment_index_left(double x) const;

  // Calls fn(length, value) for each segment piece of (0, x).
  template <class Fn>
  void for_each_piece(double x, Fn&& fn) const {
    for (std::size_t k = 0; k < breaks_.size(); ++k) {
      const double lo = breaks_[k];
      if (lo >= x) break;
      const double hi = (k + 1 < breaks_.size()) ? std::min(breaks_[k + 1], x) : x;
      if (hi > lo) fn(hi - lo, values_[k]);
    }
  }

 private:
  double xi0_;
  std::vector<double> breaks_;
  std::vector<double> values_;
  double band_min_;
  double band_max_;
};

struct Roadblock {
  double b;
  double p;
  std::optional<double> xi_override;
};

// Finite sorted roadblock set.
class Roadblocks {
 public:
  Roadblocks() = default;
  explicit Roadblocks(std::vector<Roadblock> entries);

  const std::vector<Roadblock>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  // Pointer to the roadblock exactly at x, if any.
  const Roadblock* find(double x) const;

 private:
  std::vector<Roadblock> entries_;
};

struct ModelParams {
  QParam q;
  double lambda;

  ModelParams(QParam q_, double lambda_);
};

struct Stack {
  double pos;
  std::int64_t count;
  friend bool operator==(const Stack&, const Stack&) = default;
};

// Ordered particle stacks; positions strictly increasing, counts >= 1.
struct ParticleConfig {
  std::vector<Stack> stacks;

  std::int64_t total() const;
  // Number of particles at positions >= x.
  std::int64_t height(double x) const;
  // Throws DomainError if the ordering or count invariants fail.
  void validate() const;
  friend bool operator==(const ParticleConfig&, const ParticleConfig&) = default;
};

// xi(0) at x = 0, otherwise the containing segment value (right value at breakpoints).
double eval_speed(const SpeedField& field, double x);
// Left limit xi(x-) for x > 0.
double eval_speed_left(const SpeedField& field, double x);
// xi(b) for a roadblock: its override if present, otherwise eval_speed.
double roadblock_speed(const SpeedField& field, const Roadblock& rb);

struct MinSpeed {
  double W;       // includes xi(0) and roadblock speeds below x
  double W_circ;  // segment values only
};

MinSpeed min_speed(const SpeedField& field, const Roadblocks& rb, double x);

}  // namespace expjump
