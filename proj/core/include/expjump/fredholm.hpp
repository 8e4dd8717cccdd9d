#pragma once

#include <cstdint>
#include <numbers>
#include <vector>

#include "expjump/model.hpp"
#include "expjump/qspecial.hpp"
#include "expjump/simulator.hpp"

namespace expjump::fredholm {

// Outer contour: two rays leaving the vertex a at angles +-phi, traversed with
// decreasing imaginary part. Each ray is cut at ray_length and split into
// Gauss-Legendre panels whose lengths double from first_panel up to max_panel.
struct ContourSpec {
  double a = 0.5;
  double phi = std::numbers::pi / 4.0;
  double ray_length = 0.0;   // 0: chosen from the exponential decay of the integrand
  double first_panel = 0.0;  // 0: a / 10
  double max_panel = 0.0;    // 0: chosen from the decay rate
  int nodes_per_panel = 12;

  // Throws ContourError unless 0 < a < bound and 0 < phi < pi/2.
  void validate(double bound) const;
};

// How the inner u-integral over the slit contour is evaluated.
enum class InnerRoute {
  // Residues at u = 1..N plus the vertical line Re u = N + 1/2, where N is the
  // smallest integer with q^N |w| <= a/2. Trapezoid rule in Im u.
  ResidueLine,
  // The slit contour itself: vertical rays at Re u = R = N + 1/2 joined by
  // horizontal segments at Im u = +-d around 1/2 <= Re u <= R, d = B_d / |w|.
  SlitContour,
};

struct DContourSpec {
  InnerRoute route = InnerRoute::ResidueLine;
  double line_step = 0.1;           // trapezoid step in Im u
  double vertical_truncation = 0.0; // 0: where the Gamma pair falls below 1e-17
  double B_d = 0.0;                 // 0: largest value keeping q^u w left of the outer contour
  int nodes_per_panel = 10;         // slit route only
};

// zeta in C minus [0, inf).
class ZetaPoint {
 public:
  explicit ZetaPoint(cplx zeta);  // throws DomainError on [0, inf)
  cplx value() const noexcept { return z_; }

 private:
  cplx z_;
};

// g(w) = e^{-tw} / (w/xi(0);q)_inf * prod_{b<x} (w p/xi_b;q)_inf / (w/xi_b;q)_inf
//        * exp(lambda * int_0^x phi_0(w/xi(y)) dy).
cplx g_of_w(cplx w, double t, double x, const SpeedField& field, const Roadblocks& rb,
            const ModelParams& params);

// log g(w) summed factor by factor (principal logs); exp(log_g) == g_of_w.
cplx log_g(cplx w, double t, double x, const SpeedField& field, const Roadblocks& rb,
           const ModelParams& params);

struct DetOptions {
  bool check_doubling = true;
  double doubling_tol = 1e-7;
};

struct DetReport {
  cplx value;         // refined determinant
  cplx coarse;        // determinant before node doubling (== value if not checked)
  int outer_nodes = 0;
  double doubling_change = 0.0;
};

// det(1 + K_zeta) on the outer contour, equal to E 1/(zeta q^{h(x)};q)_inf at time t.
DetReport qlaplace_det_report(const ZetaPoint& zeta, double t, double x, const SpeedField& field,
                              const Roadblocks& rb, const ModelParams& params,
                              const ContourSpec& cspec, const DContourSpec& dspec = {},
                              const DetOptions& opt = {});

cplx qlaplace_det(const ZetaPoint& zeta, double t, double x, const SpeedField& field,
                  const Roadblocks& rb, const ModelParams& params, const ContourSpec& cspec,
                  const DContourSpec& dspec = {}, const DetOptions& opt = {});

// f(w) = e^{(q-1)tw} / (1 - w/xi(0)) * prod_{j<k} (xi_j s_j + s_j^2 w)/(xi_j s_j + w).
cplx f_hc(cplx w, std::size_t k, double t, const sim::VertexParams& p);

// E q^{ell h(k)} of the half-continuous model, ell in 1..3, by the single-contour
// partition sum. Requires a < min(xi(0), -xi_j s_j for j < k).
double q_moment(int ell, std::size_t k, double t, const sim::VertexParams& p,
                const ContourSpec& cspec);

struct MCEstimate {
  double mean = 0.0;
  double se = 0.0;
  int trials = 0;
};

// Monte Carlo of E 1/(zeta q^{h(x)};q)_inf for real zeta < 0, exponential model.
MCEstimate mc_qlaplace(double zeta, double t, double x, const SpeedField& field,
                       const Roadblocks& rb, const ModelParams& params, int trials,
                       std::uint64_t master_seed);

// Monte Carlo of E q^{ell h(k)} in the half-continuous model.
MCEstimate mc_q_moment(int ell, std::size_t k, double t, const sim::VertexParams& p, int trials,
                       std::uint64_t master_seed);

}  // namespace expjump::fredholm
