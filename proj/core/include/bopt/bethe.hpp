#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "bopt/model.hpp"

namespace bopt {

// Pairwise-consistent beliefs in the (q, xi) parameterization:
// q_i = p(s_i = 1), xi_ij = p(s_i = 1, s_j = 1) per edge. All remaining
// probability-table entries follow from these.
struct Beliefs {
  std::vector<double> q;
  std::vector<double> xi;  // aligned with Model::edges
};

// Quantities attached to one edge at fixed (q_i, q_j, w). Used internally by
// the pairwise solve and exposed for the property tests around the quadratic.
struct EdgeScratch {
  double alpha = 0.0;  // e^w - 1
  double beta = 0.0;   // 1 / alpha (0 when alpha overflows)
  double Q = 0.0;      // 1 + alpha (q_i + q_j)
  double R = 0.0;      // beta + q_i + q_j
  double zeta = 0.0;   // positive-discriminant root; always outside bounds

  static EdgeScratch make(double q_i, double q_j, double w);
};

// The four entries of a pair probability table.
struct PairTable {
  double p11 = 0.0;
  double p10 = 0.0;
  double p01 = 0.0;
  double p00 = 0.0;
};

// Feasible interval for xi at fixed marginals:
// max(0, q_i + q_j - 1) < xi < min(q_i, q_j).
std::pair<double, double> xi_bounds(double q_i, double q_j);

// The unique stationary point of the edge terms of the free energy inside
// the feasible interval: the negative-discriminant root of
//   alpha xi^2 - (1 + alpha q_i + alpha q_j) xi + (1 + alpha) q_i q_j = 0,
// alpha = e^w - 1. For |w| below a degeneracy threshold returns q_i q_j.
double xi_solve(double q_i, double q_j, double w);

// d F_b / d xi for one edge: -w + ln[ xi (xi+1-q_i-q_j) / ((q_i-xi)(q_j-xi)) ].
// xi must lie strictly inside the bounds.
double dF_dxi(double q_i, double q_j, double xi, double w);

// The positive-discriminant root of the same quadratic; always lies outside
// the feasible interval. Degenerate at w = 0 (throws).
double positive_root_zeta(double q_i, double q_j, double w);

// (p11, p10, p01, p00) = (xi, q_i-xi, q_j-xi, xi+1-q_i-q_j).
PairTable pair_table(double q_i, double q_j, double xi);

// Pair table at the solved xi. Entries that plain subtraction would round to
// zero (large |w| pushes xi within an ulp of a bound) are reconstructed from
// the stationarity identity p11 p00 = e^w p10 p01, so their logarithms stay
// meaningful. Entries are floored at 1e-300.
PairTable solved_pair_table(double q_i, double q_j, double w);

// F_b = E - S1 - S2 over the pairwise parameterization; x ln x := 0 at x = 0.
double bethe_free_energy(const Model& model, const Beliefs& beliefs);

// Gradient of F_b with respect to y_i where q_i = sigmoid(y_i), with each
// xi_ij eliminated analytically at its per-edge minimum (so the partial
// derivatives through xi vanish):
//   dF/dy_i = dF/dq_i * q_i (1 - q_i).
std::vector<double> grad_q(const Model& model, const std::vector<double>& q);

// Fills beliefs.xi with xi_solve(q_i, q_j, w) for every edge.
void solve_all_xi(const Model& model, Beliefs& beliefs);

inline double sigmoid(double y) { return 1.0 / (1.0 + std::exp(-y)); }
inline double logit(double q) { return std::log(q) - std::log(1.0 - q); }

}  // namespace bopt
