#include "bopt/solver_config.hpp"

namespace bopt {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters: return "max-iters";
    case SolveStatus::diverged: return "diverged";
  }
  return "?";
}

const char* to_string(InitKind k) {
  switch (k) {
    case InitKind::uniform_half: return "uniform-half";
    case InitKind::bias_sigmoid: return "bias-sigmoid";
    case InitKind::seeded_noise: return "seeded-noise";
  }
  return "?";
}

bool parse_init_kind(const std::string& text, InitKind& out) {
  if (text == "uniform-half") out = InitKind::uniform_half;
  else if (text == "bias-sigmoid") out = InitKind::bias_sigmoid;
  else if (text == "seeded-noise") out = InitKind::seeded_noise;
  else return false;
  return true;
}

}  // namespace bopt
