#pragma once

#include <cstdint>
#include <vector>

namespace expjump::dist {

// Nodes and weights on (r, inf) from Gauss-Legendre on (0,1) under
// v = r - scale * log(1 - s).
struct KernelQuadrature {
  int node_count = 0;
  double r = 0.0;
  double scale = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;

  static KernelQuadrature make(double r, int n, double scale = 2.5);
};

struct F2Options {
  int nodes = 40;
  // Recompute with doubled nodes and require agreement within doubling_tol.
  bool check_doubling = true;
  double doubling_tol = 1e-8;
};

// GUE Tracy-Widom distribution det(1 - K_Ai) on L^2(r, inf).
double F2(double r, const F2Options& opt = {});

// Real-line Airy kernel (Ai(x)Ai'(y) - Ai'(x)Ai(y))/(x - y).
double F2_airy(double r, int nodes);

// Rays for the double contour integral kernel: w leaves through e^{-2 pi i/3} inf and
// returns through e^{2 pi i/3} inf from vertex w_vertex; z likewise through
// e^{-pi i/3}, e^{pi i/3} from z_vertex > w_vertex.
struct ContourKernelOptions {
  int nodes = 40;           // real-line nodes
  int nodes_per_ray = 96;
  double ray_length = 7.0;  // arc length, integrand below 1e-18 beyond it
  double separation = 0.5;  // distance of the w vertex to the right of max(b)
  double gap = 1.0;         // z vertex minus w vertex
  // Recompute with doubled real-line and ray nodes; ConvergenceError above the tolerance.
  bool check_doubling = true;
  double doubling_tol = 1e-8;
};

// F2 via the double contour integral form of the Airy kernel.
double F2_contour(double r, const ContourKernelOptions& opt = {});

// BBP distribution with m parameters b (b.size() == m).
double BBP(double r, int m, const std::vector<double>& b, const ContourKernelOptions& opt = {});

double normal_cdf(double r);

// P(largest eigenvalue of an m x m GUE <= r), exact Hankel-determinant formula (m <= 3).
double gue_largest_cdf_exact(double r, int m);

struct MCValue {
  double value;
  double se;
};

// Monte Carlo estimate over sampled GUE matrices.
MCValue gue_largest_cdf_mc(double r, int m, int samples, std::uint64_t seed);

// G_m: m = 1 normal CDF, m <= 3 exact, otherwise Monte Carlo.
MCValue G_m(double r, int m, int samples = 200000, std::uint64_t seed = 1);

// Largest eigenvalue of one sampled m x m GUE matrix, for tests and MC.
double sample_gue_largest(int m, std::uint64_t seed);

}  // namespace expjump::dist
