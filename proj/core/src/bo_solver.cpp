#include "bopt/bo_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "bopt/rng.hpp"

namespace bopt {

namespace {

constexpr double kQClamp = 1e-12;
const double kYClamp = std::log((1.0 - kQClamp) / kQClamp);

double clamp_q(double q) { return std::clamp(q, kQClamp, 1.0 - kQClamp); }

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void prepare_start(const Model& model, Beliefs& beliefs, const SolveConfig& config) {
  if (beliefs.q.empty()) {
    beliefs = init_beliefs(model, config);
    return;
  }
  if (static_cast<int>(beliefs.q.size()) != model.num_nodes())
    throw std::invalid_argument("solver: warm-start beliefs length mismatch");
  for (double& q : beliefs.q) q = clamp_q(q);
  solve_all_xi(model, beliefs);
}

// Runs `run` once per restart; restart r > 0 re-randomizes the starting
// point with a seed derived from (config.seed, r). Keeps the run with the
// lowest finite free energy. wall_seconds accumulates across restarts.
template <typename RunFn>
SolveReport with_restarts(const Model& model, Beliefs& beliefs,
                          const SolveConfig& config, RunFn run) {
  const int restarts = std::max(1, config.restarts);
  SolveReport best;
  Beliefs best_beliefs;
  double total_wall = 0.0;
  bool have = false;
  for (int r = 0; r < restarts; ++r) {
    SolveConfig local = config;
    local.restarts = 1;
    Beliefs b;
    if (r == 0) {
      b = beliefs;  // honors a caller-provided warm start
    } else {
      local.init = InitKind::seeded_noise;
      local.seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
    }
    SolveReport rep = run(model, b, local);
    total_wall += rep.wall_seconds;
    const bool better =
        !have || (std::isfinite(rep.final_free_energy) &&
                  (!std::isfinite(best.final_free_energy) ||
                   rep.final_free_energy < best.final_free_energy));
    if (better) {
      best = rep;
      best_beliefs = b;
      have = true;
    }
  }
  best.wall_seconds = total_wall;
  beliefs = std::move(best_beliefs);
  return best;
}

SolveReport gradient_single(const Model& model, Beliefs& beliefs,
                            const SolveConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const int n = model.num_nodes();
  prepare_start(model, beliefs, config);

  SolveReport report;
  std::vector<double> y(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) y[static_cast<size_t>(i)] = logit(beliefs.q[static_cast<size_t>(i)]);

  double f = bethe_free_energy(model, beliefs);
  std::vector<double> g = grad_q(model, beliefs.q);
  double gnorm = norm2(g);
  const double grad_gate = config.tol_grad * n;
  double step = config.step0;

  Beliefs trial = beliefs;
  std::vector<double> y_trial(static_cast<size_t>(n));

  int iter = 0;
  bool done = false;
  while (iter < config.max_iters && !done) {
    ++iter;
    if (!std::isfinite(f) || !all_finite(g)) {
      report.status = SolveStatus::diverged;
      break;
    }
    double max_dq = 0.0;
    for (int i = 0; i < n; ++i) {
      const size_t k = static_cast<size_t>(i);
      y_trial[k] = std::clamp(y[k] - step * g[k], -kYClamp, kYClamp);
      trial.q[k] = clamp_q(sigmoid(y_trial[k]));
      max_dq = std::max(max_dq, std::fabs(trial.q[k] - beliefs.q[k]));
    }
    solve_all_xi(model, trial);
    const double f_trial = bethe_free_energy(model, trial);

    if (std::isfinite(f_trial) && f_trial < f) {
      const double df = f - f_trial;
      y.swap(y_trial);
      beliefs.q = trial.q;
      beliefs.xi = trial.xi;
      f = f_trial;
      g = grad_q(model, beliefs.q);
      gnorm = norm2(g);
      step *= config.step_up;
      if (config.record_trace)
        report.trace.push_back({iter, f, gnorm, max_dq});
      if ((max_dq < config.tol_q || df < config.tol_f) && gnorm <= grad_gate) {
        report.status = SolveStatus::converged;
        done = true;
      }
    } else {
      step *= config.step_down;
      if (step < 1e-18) {
        // the line search cannot make progress below rounding noise
        report.status =
            gnorm <= grad_gate ? SolveStatus::converged : SolveStatus::max_iters;
        done = true;
      }
    }
  }

  report.converged = report.status == SolveStatus::converged;
  report.iterations = iter;
  report.final_free_energy = f;
  report.final_grad_norm = gnorm;
  report.wall_seconds = elapsed_seconds(start);
  return report;
}

SolveReport fixed_point_single(const Model& model, Beliefs& beliefs,
                               const SolveConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const int n = model.num_nodes();
  prepare_start(model, beliefs, config);

  SolveReport report;
  int iter = 0;
  while (iter < config.max_iters) {
    const std::vector<double> ystar = fixed_point_logits(model, beliefs);
    if (!all_finite(ystar)) {
      report.status = SolveStatus::diverged;
      break;
    }
    double damping = config.damping_max;
    if (config.damping_ramp_iters > 0)
      damping = config.damping_max *
                std::min(1.0, static_cast<double>(iter) / config.damping_ramp_iters);
    double resid = 0.0;
    for (int i = 0; i < n; ++i) {
      const size_t k = static_cast<size_t>(i);
      const double target = clamp_q(sigmoid(ystar[k]));
      resid = std::max(resid, std::fabs(target - beliefs.q[k]));
      beliefs.q[k] = clamp_q((1.0 - damping) * target + damping * beliefs.q[k]);
    }
    solve_all_xi(model, beliefs);
    ++iter;
    if (config.record_trace)
      report.trace.push_back(
          {iter, bethe_free_energy(model, beliefs), 0.0, resid});
    if (resid < config.tol_q) {
      report.status = SolveStatus::converged;
      break;
    }
  }

  report.converged = report.status == SolveStatus::converged;
  report.iterations = iter;
  report.final_free_energy = bethe_free_energy(model, beliefs);
  report.final_grad_norm = norm2(grad_q(model, beliefs.q));
  report.wall_seconds = elapsed_seconds(start);
  return report;
}

}  // namespace

Beliefs init_beliefs(const Model& model, const SolveConfig& config) {
  const int n = model.num_nodes();
  Beliefs b;
  b.q.assign(static_cast<size_t>(n), 0.5);
  switch (config.init) {
    case InitKind::uniform_half:
      break;
    case InitKind::bias_sigmoid:
      for (int i = 0; i < n; ++i)
        b.q[static_cast<size_t>(i)] = clamp_q(sigmoid(model.bias(i)));
      break;
    case InitKind::seeded_noise: {
      Rng rng(config.seed);
      for (int i = 0; i < n; ++i)
        b.q[static_cast<size_t>(i)] = 0.5 + 0.01 * (2.0 * rng.uniform01() - 1.0);
      break;
    }
  }
  solve_all_xi(model, b);
  return b;
}

std::vector<double> fixed_point_logits(const Model& model, const Beliefs& beliefs) {
  const int n = model.num_nodes();
  if (static_cast<int>(beliefs.q.size()) != n)
    throw std::invalid_argument("fixed_point_logits: beliefs length mismatch");

  std::vector<double> y(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const size_t k = static_cast<size_t>(i);
    const double qi = beliefs.q[k];
    double yi = model.bias(i) +
                model.degree(i) * (std::log(qi) - std::log1p(-qi));
    for (const Neighbor& nb : model.neighbors(i)) {
      const Edge& e = model.edge(nb.edge);
      const PairTable t = solved_pair_table(beliefs.q[static_cast<size_t>(e.i)],
                                            beliefs.q[static_cast<size_t>(e.j)], e.w);
      const double p_on_off = (i == e.i) ? t.p10 : t.p01;
      yi += std::log(t.p00) - std::log(p_on_off);
    }
    y[k] = yi;
  }
  return y;
}

double coordinate_update_q(const Model& model, const Beliefs& beliefs, int node) {
  const int n = model.num_nodes();
  if (node < 0 || node >= n)
    throw std::invalid_argument("coordinate_update_q: node out of range");
  if (static_cast<int>(beliefs.q.size()) != n ||
      beliefs.xi.size() != static_cast<size_t>(model.num_edges()))
    throw std::invalid_argument("coordinate_update_q: beliefs shape mismatch");

  // With all pair beliefs fixed, q[node] must keep every incident table
  // entry positive: q > xi_e and q < xi_e + 1 - q_other for each edge e.
  double lo = 0.0;
  double hi = 1.0;
  for (const Neighbor& nb : model.neighbors(node)) {
    const double xi = beliefs.xi[static_cast<size_t>(nb.edge)];
    lo = std::max(lo, xi);
    hi = std::min(hi, xi + 1.0 - beliefs.q[static_cast<size_t>(nb.node)]);
  }
  lo = std::max(lo, kQClamp);
  hi = std::min(hi, 1.0 - kQClamp);
  if (!(lo < hi))
    throw std::domain_error("coordinate_update_q: empty feasible interval");

  const double z = model.degree(node);
  const double b = model.bias(node);
  // Restricted dF/dq; strictly increasing on (lo, hi): the second derivative
  // is bounded below by 1 / (q(1-q)) because q - xi < q and
  // xi + 1 - q - q_other < 1 - q for every incident edge.
  const auto deriv = [&](double q) {
    double d = -b + (1.0 - z) * (std::log(q) - std::log1p(-q));
    for (const Neighbor& nb : model.neighbors(node)) {
      const double xi = beliefs.xi[static_cast<size_t>(nb.edge)];
      const double qo = beliefs.q[static_cast<size_t>(nb.node)];
      d += std::log(q - xi) - std::log(xi + 1.0 - q - qo);
    }
    return d;
  };

  double a = lo;
  double c = hi;
  if (deriv(a) >= 0.0) return a;
  if (deriv(c) <= 0.0) return c;
  for (int it = 0; it < 200 && (c - a) > 1e-16 * std::max(1.0, c); ++it) {
    const double m = 0.5 * (a + c);
    if (deriv(m) < 0.0)
      a = m;
    else
      c = m;
  }
  return 0.5 * (a + c);
}

SolveReport solve_gradient(const Model& model, Beliefs& beliefs,
                           const SolveConfig& config) {
  return with_restarts(model, beliefs, config, gradient_single);
}

SolveReport solve_fixed_point(const Model& model, Beliefs& beliefs,
                              const SolveConfig& config) {
  return with_restarts(model, beliefs, config, fixed_point_single);
}

}  // namespace bopt
