#pragma once

#include <vector>

#include "bopt/bethe.hpp"
#include "bopt/model.hpp"
#include "bopt/solver_config.hpp"

namespace bopt {

enum class BpSchedule { synchronous, sequential };

// Mean-field free energy: E - S1 with independent pair beliefs xi = q_i q_j.
double mf_free_energy(const Model& model, const std::vector<double>& q);

// Mean-field free energy plus the second-order (Onsager) correction
//   -1/2 sum_(ij) W_ij^2 q_i(1-q_i) q_j(1-q_j).
double tap_free_energy(const Model& model, const std::vector<double>& q);

// Second-order pairwise estimate q_i q_j + w q_i(1-q_i) q_j(1-q_j).
// A small-weight expansion: may leave the feasible pair-table region for
// large |w|.
double xi_tap(double q_i, double q_j, double w);

// Update logits for the damped fixed-point iterations q <- sigmoid(y(q)).
// The mean-field and second-order forms truncate the exact pairwise logits
// (fixed_point_logits in bo_solver.hpp) at first and second order in w.
std::vector<double> mf_update_logits(const Model& model, const std::vector<double>& q);
std::vector<double> tap_update_logits(const Model& model, const std::vector<double>& q);

// Damped fixed-point iteration of q_i = sigmoid(sum_j w_ij q_j + b_i).
// `q` is the starting point when non-empty, the solution on return.
SolveReport mf_solve(const Model& model, std::vector<double>& q, const SolveConfig& config);

// Damped fixed-point iteration of the second-order update
//   q_i = sigmoid(sum_j w_ij q_j + b_i + (1-2q_i)/2 sum_j w_ij^2 q_j(1-q_j)).
SolveReport tap_solve(const Model& model, std::vector<double>& q, const SolveConfig& config);

// Descent variant for models where the fixed point cycles: adaptive gradient
// descent on the second-order free energy in logit space.
SolveReport tap_solve_gradient(const Model& model, std::vector<double>& q,
                               const SolveConfig& config);

// Beliefs with the method's pairwise estimates attached (independence for
// mean field, xi_tap for the second-order method).
Beliefs mf_beliefs(const Model& model, const std::vector<double>& q);
Beliefs tap_beliefs(const Model& model, const std::vector<double>& q);

// Damped sum-product message passing with pair potentials e^{w s_i s_j} and
// node potentials e^{b s}. Messages are normalized two-entry tables, floored
// at 1e-300; damping ramps linearly to config.damping_max. Beliefs are read
// off the final messages whether or not the iteration converged; the report
// carries the free energy of those beliefs computed from the full pair
// tables, which stays defined even when node/pair beliefs are inconsistent.
SolveReport bp_solve(const Model& model, Beliefs& beliefs, const SolveConfig& config,
                     BpSchedule schedule = BpSchedule::synchronous);

}  // namespace bopt
