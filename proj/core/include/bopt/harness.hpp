#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bopt/bethe.hpp"
#include "bopt/exact.hpp"
#include "bopt/model.hpp"
#include "bopt/solver_config.hpp"

namespace bopt {

enum class Method { mf, tap, bp, bo_grad, bo_fp };
const char* to_string(Method m);
bool parse_method(const std::string& text, Method& out);

enum class OracleKind { elimination, brute, gibbs };
const char* to_string(OracleKind k);
bool parse_oracle(const std::string& text, OracleKind& out);

struct MethodRun {
  Beliefs beliefs;
  SolveReport report;
};

// Runs every requested method on the same model with the same config. A
// method that fails to converge (or throws) is recorded in its report;
// nothing propagates out.
std::map<Method, MethodRun> run_methods(const Model& model,
                                        const std::vector<Method>& methods,
                                        const SolveConfig& config);

struct ErrorMetrics {
  double mean_err = 0.0;  // mean over nodes of |q_est - q_exact|
  double cov_err = 0.0;   // mean over edges of the covariance gap, cov = xi - q_i q_j
};

ErrorMetrics error_metrics(const Model& model, const Beliefs& estimate,
                           const ExactResult& oracle);

struct SweepSpec {
  Topology topology;
  std::vector<double> w_scales;
  std::vector<double> b_scales;
  int instances_per_cell = 1;
  std::vector<Method> methods;
  OracleKind oracle = OracleKind::elimination;
  SolveConfig config;
  std::uint64_t seed = 0;
  GibbsConfig gibbs;             // only read when oracle == gibbs
  double sample_exponent = 1.5;  // weight-distribution shape passed to sample_instance
};

struct CellResult {
  double w_scale = 0.0;
  double b_scale = 0.0;
  Method method = Method::mf;
  std::uint64_t instance_seed = 0;
  double mean_err = 0.0;
  double cov_err = 0.0;
  bool converged = false;
  double free_energy = 0.0;
  int iterations = 0;
  double wall_seconds = 0.0;  // kept out of the main CSV so reruns are byte-identical
};

inline constexpr const char* kSweepSchema = "bopt-sweep-v1";

// Samples an instance per (w_scale, b_scale, repeat) cell, runs the oracle
// once and every method on it, and streams one row per method to csv_path
// as soon as it is computed (partial output survives a crash). Wall times
// go to times_path (default csv_path + ".times"). Instance seeds derive
// from (spec.seed, cell index), so results do not depend on scheduling.
std::vector<CellResult> sweep(const SweepSpec& spec, const std::string& csv_path,
                              const std::string& times_path = "");

// Named specs: "desk" (6x6 smoke run), "full-grid" (10x10 lattice, 20x20
// scale grid, elimination oracle), "full-cubic" (5x5x5 periodic lattice,
// sampling oracle).
SweepSpec sweep_preset(const std::string& name);

struct ScatterRun {
  Model model;
  std::uint64_t seed = 0;
  Beliefs bp;
  SolveReport bp_report;
  Beliefs bo;
  SolveReport bo_report;
};

// Paired BP / BO (gradient) runs on sampled instances of one cell.
std::vector<ScatterRun> run_scatter(const Topology& topology, double w_scale,
                                    double b_scale, int instances,
                                    const SolveConfig& config, std::uint64_t seed);

// Long-format CSV with one "node" row per node (both marginal estimates),
// one "edge" row per edge (both covariance estimates), and one "instance"
// row per run (both free energies plus the BP convergence flag).
void scatter_dump(const std::vector<ScatterRun>& runs, std::ostream& out);

}  // namespace bopt
