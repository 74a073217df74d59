#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bopt {

enum class InitKind {
  uniform_half,   // q = 0.5 everywhere
  bias_sigmoid,   // q_i = sigmoid(b_i)
  seeded_noise,   // q_i = 0.5 +/- 0.01, seeded
};

struct SolveConfig {
  int max_iters = 1000;
  double tol_q = 1e-8;     // max |q_new - q_old| per sweep
  double tol_f = 1e-10;    // |F_new - F_old| per accepted step
  double tol_grad = 1e-6;  // ||grad||_2 <= tol_grad * n required at exit
  double step0 = 0.1;
  double step_up = 1.1;
  double step_down = 0.5;
  double damping_max = 0.9;
  int damping_ramp_iters = 100;
  InitKind init = InitKind::seeded_noise;
  std::uint64_t seed = 0;
  int restarts = 1;
  bool record_trace = false;
};

enum class SolveStatus {
  converged,
  max_iters,
  diverged,
};

struct IterationTrace {
  int iteration = 0;
  double free_energy = 0.0;
  double grad_norm = 0.0;
  double max_dq = 0.0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::max_iters;
  bool converged = false;
  int iterations = 0;
  double final_free_energy = 0.0;
  double final_grad_norm = 0.0;
  double wall_seconds = 0.0;
  std::vector<IterationTrace> trace;
};

const char* to_string(SolveStatus status);
const char* to_string(InitKind kind);
bool parse_init_kind(const std::string& text, InitKind& out);

}  // namespace bopt
