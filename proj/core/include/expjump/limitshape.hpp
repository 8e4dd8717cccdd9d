#pragma once

#include <string>
#include <utility>
#include <variant>

#include "expjump/model.hpp"
#include "expjump/qspecial.hpp"

namespace expjump::limitshape {

// Integral of phi_n(w / xi(y)) over y in (0, x), an exact sum over segments.
double Phi_n(int n, double w, double x, const SpeedField& field, QParam q);
cplx Phi_n(int n, cplx w, double x, const SpeedField& field, QParam q);

// tau at which the edge reaches x: integral of 1/((1-q) xi) over (0, x).
double tau_edge(double x, const SpeedField& field, QParam q);
// Inverse of tau_edge; edge_x(0) = 0.
double edge_x(double tau, const SpeedField& field, QParam q);

// Unique root of tau * w = Phi_2(w | x) in (0, W_circ_x). Requires 0 < x < x_e(tau).
double omega_circ(double tau, double x, const SpeedField& field, QParam q);

// Limit shape: +inf at x = 0, 0 beyond the edge.
double height(double tau, double x, const SpeedField& field, const Roadblocks& rb, QParam q);

enum class Phase { TracyWidom, Transition, Gaussian };
std::string to_string(Phase p);

struct PhaseReport {
  double tau = 0;
  double x = 0;
  double omega_circ = 0;
  double W = 0;
  double W_circ = 0;
  Phase phase = Phase::TracyWidom;
  int m_x = 0;
  double H = 0;
  double density = 0;
  double dispersion = 0;
  double fluctuation_exponent = 1.0 / 3.0;

  // omega_circ in TW/Transition, W in Gaussian.
  double critical_point() const { return phase == Phase::Gaussian ? W : omega_circ; }
  // Denominator of the standardized fluctuation, without the lambda power.
  double scale() const { return critical_point() * dispersion; }
};

struct ClassifyOptions {
  double eps_phase = 1e-9;
};

PhaseReport classify(double tau, double x, const SpeedField& field, const Roadblocks& rb,
                     QParam q, const ClassifyOptions& opt = {});

// Point x in (x_lo, x_hi) where omega_circ(tau, x) crosses W_x; the difference must
// change sign on the interval. Throws DomainError otherwise.
double transition_point(double tau, const SpeedField& field, const Roadblocks& rb, QParam q,
                        double x_lo, double x_hi);

struct GValue {
  double w;
  double g, g1, g2, g3;
};

// G(w) = -tau w + H log w + Phi_0(w|x) and its first three derivatives.
GValue G_eval(double w, double tau, double x, double H, const SpeedField& field, QParam q);

struct HeightGradient {
  double d_tau;
  double d_x;
};

// Centered finite differences of height(tau, x).
HeightGradient height_gradient(double tau, double x, const SpeedField& field,
                               const Roadblocks& rb, QParam q, double h_tau, double h_x);

// dH/dx + phi_1(dH/dtau / xi(x)) by centered differences. Requires the TW phase and
// no roadblock or breakpoint inside the stencil.
double pde_residual(double tau, double x, const SpeedField& field, const Roadblocks& rb,
                    QParam q, double h_tau = 1e-4, double h_x = 1e-4);

struct RoadblockInsert {
  double sigma;
  double alpha;  // speed value attached to the new roadblock
  double p;
};

struct Slowdown {
  double sigma;
  double sigma1;  // may be +infinity
  double kappa;
};

using JamScenario = std::variant<RoadblockInsert, Slowdown>;

std::pair<SpeedField, Roadblocks> traffic_jam_modify(const SpeedField& field, const Roadblocks& rb,
                                                     const JamScenario& scenario);

}  // namespace expjump::limitshape
