#include "bopt/gaussian.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bopt {

namespace {

constexpr double kFreeEnergyFloor = -1e12;
constexpr double kVarianceCap = 1e12;
const double kYMax = std::log(kVarianceCap);
constexpr double kYMin = -600.0;

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Eigen::MatrixXd assemble(const GaussianModel& model) {
  const int n = model.num_nodes();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) w(i, i) = model.diag(i);
  for (const Edge& e : model.edges()) {
    w(e.i, e.j) = e.w;
    w(e.j, e.i) = e.w;
  }
  return w;
}

std::vector<double> apply_w(const GaussianModel& model, const std::vector<double>& x) {
  const int n = model.num_nodes();
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double s = model.diag(i) * x[static_cast<size_t>(i)];
    for (const Neighbor& nb : model.neighbors(i))
      s += model.edge(nb.edge).w * x[static_cast<size_t>(nb.node)];
    out[static_cast<size_t>(i)] = s;
  }
  return out;
}

// Steepest descent with the exact quadratic line step. Returns diverged on
// a direction of nonpositive curvature (the quadratic is unbounded there).
SolveStatus mean_descent(const GaussianModel& model, std::vector<double>& mu,
                         int max_iters) {
  const int n = model.num_nodes();
  if (mu.empty()) mu.assign(static_cast<size_t>(n), 0.0);

  double b_norm = norm2(model.biases());
  const double tol = 1e-10 * std::max(1.0, b_norm);
  for (int iter = 0; iter < max_iters; ++iter) {
    std::vector<double> r = apply_w(model, mu);
    double rr = 0.0;
    for (int i = 0; i < n; ++i) {
      r[static_cast<size_t>(i)] = -(r[static_cast<size_t>(i)] + model.bias(i));
      rr += r[static_cast<size_t>(i)] * r[static_cast<size_t>(i)];
    }
    if (std::sqrt(rr) < tol) return SolveStatus::converged;
    const std::vector<double> wr = apply_w(model, r);
    double curv = 0.0;
    for (int i = 0; i < n; ++i) curv += r[static_cast<size_t>(i)] * wr[static_cast<size_t>(i)];
    if (!(curv > 0.0)) return SolveStatus::diverged;
    const double eta = rr / curv;
    for (int i = 0; i < n; ++i) mu[static_cast<size_t>(i)] += eta * r[static_cast<size_t>(i)];
  }
  return SolveStatus::max_iters;
}

void solve_edges(const GaussianModel& model, GaussianBeliefs& beliefs) {
  beliefs.v_edge.resize(static_cast<size_t>(model.num_edges()));
  for (int e = 0; e < model.num_edges(); ++e) {
    const Edge& ed = model.edge(e);
    beliefs.v_edge[static_cast<size_t>(e)] =
        ga_vij_solve(beliefs.v[static_cast<size_t>(ed.i)],
                     beliefs.v[static_cast<size_t>(ed.j)], ed.w);
  }
}

std::vector<double> default_variances(const GaussianModel& model) {
  std::vector<double> v(static_cast<size_t>(model.num_nodes()));
  for (int i = 0; i < model.num_nodes(); ++i)
    v[static_cast<size_t>(i)] = model.diag(i) > 0.0 ? 1.0 / model.diag(i) : 1.0;
  return v;
}

// dF/dy_i with y = ln V and the covariances at their per-edge optimum.
std::vector<double> variance_grad(const GaussianModel& model,
                                  const GaussianBeliefs& beliefs) {
  const int n = model.num_nodes();
  std::vector<double> g(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double vi = beliefs.v[static_cast<size_t>(i)];
    double gi = 0.5 * model.diag(i) * vi - 0.5 * (1.0 - model.degree(i));
    for (const Neighbor& nb : model.neighbors(i)) {
      const double vj = beliefs.v[static_cast<size_t>(nb.node)];
      const double ve = beliefs.v_edge[static_cast<size_t>(nb.edge)];
      gi -= vi * vj / (2.0 * (vi * vj - ve * ve));
    }
    g[static_cast<size_t>(i)] = gi;
  }
  return g;
}

}  // namespace

GaussianModel::GaussianModel(std::vector<double> diag, std::vector<Edge> edges,
                             std::vector<double> biases)
    : diag_(std::move(diag)), edges_(std::move(edges)), biases_(std::move(biases)) {
  const int n = static_cast<int>(diag_.size());
  if (biases_.size() != diag_.size())
    throw std::invalid_argument("GaussianModel: diag/bias length mismatch");
  for (double d : diag_)
    if (!std::isfinite(d)) throw std::invalid_argument("GaussianModel: non-finite diagonal");
  for (double b : biases_)
    if (!std::isfinite(b)) throw std::invalid_argument("GaussianModel: non-finite bias");

  adjacency_.resize(static_cast<size_t>(n));
  for (size_t e = 0; e < edges_.size(); ++e) {
    const Edge& ed = edges_[e];
    if (ed.i < 0 || ed.j < 0 || ed.i >= n || ed.j >= n || ed.i >= ed.j)
      throw std::invalid_argument("GaussianModel: edge endpoints invalid (need i < j in range)");
    if (!std::isfinite(ed.w))
      throw std::invalid_argument("GaussianModel: non-finite edge weight");
    for (const Neighbor& nb : adjacency_[static_cast<size_t>(ed.i)])
      if (nb.node == ed.j)
        throw std::invalid_argument("GaussianModel: duplicate edge");
    adjacency_[static_cast<size_t>(ed.i)].push_back({ed.j, static_cast<int>(e)});
    adjacency_[static_cast<size_t>(ed.j)].push_back({ed.i, static_cast<int>(e)});
  }
}

bool is_positive_definite(const GaussianModel& model) {
  if (model.num_nodes() == 0) return true;
  const Eigen::MatrixXd w = assemble(model);
  // LLT succeeds on some semidefinite inputs; pivoted LDLT gives a clean
  // answer via the eigen-free positivity test on D.
  Eigen::LDLT<Eigen::MatrixXd> ldlt(w);
  if (ldlt.info() != Eigen::Success) return false;
  return ldlt.isPositive() && ldlt.vectorD().minCoeff() > 0.0;
}

std::vector<double> ga_mean_solve(const GaussianModel& model, const SolveConfig& config) {
  if (!is_positive_definite(model))
    throw std::domain_error("ga_mean_solve: matrix not positive definite");
  std::vector<double> mu;
  const int cap = std::max(100000, config.max_iters);
  mean_descent(model, mu, cap);
  return mu;
}

double ga_vij_solve(double v_i, double v_j, double w) {
  if (!(v_i > 0.0) || !(v_j > 0.0) || !std::isfinite(v_i) || !std::isfinite(v_j))
    throw std::invalid_argument("ga_vij_solve: variances must be positive");
  if (!std::isfinite(w)) throw std::invalid_argument("ga_vij_solve: non-finite weight");
  if (w == 0.0) return 0.0;
  // 1/(2w) - sign(w) sqrt(1/(2w)^2 + v_i v_j), written so the small root is
  // a quotient rather than a difference of near-equal terms.
  const double p = v_i * v_j;
  const double a = std::fabs(0.5 / w);
  const double root = a + std::sqrt(a * a + p);
  return (w > 0.0 ? -1.0 : 1.0) * p / root;
}

double ga_free_energy(const GaussianModel& model, const GaussianBeliefs& beliefs) {
  const int n = model.num_nodes();
  if (static_cast<int>(beliefs.mu.size()) != n ||
      static_cast<int>(beliefs.v.size()) != n ||
      static_cast<int>(beliefs.v_edge.size()) != model.num_edges())
    throw std::invalid_argument("ga_free_energy: beliefs shape mismatch");

  double f = 0.0;
  for (int i = 0; i < n; ++i) {
    const double vi = beliefs.v[static_cast<size_t>(i)];
    const double mi = beliefs.mu[static_cast<size_t>(i)];
    if (!(vi > 0.0)) throw std::domain_error("ga_free_energy: non-positive variance");
    f += 0.5 * model.diag(i) * (vi + mi * mi) + model.bias(i) * mi;
    f -= 0.5 * (1.0 - model.degree(i)) * std::log(vi);
  }
  for (int e = 0; e < model.num_edges(); ++e) {
    const Edge& ed = model.edge(e);
    const double vi = beliefs.v[static_cast<size_t>(ed.i)];
    const double vj = beliefs.v[static_cast<size_t>(ed.j)];
    const double ve = beliefs.v_edge[static_cast<size_t>(e)];
    const double det = vi * vj - ve * ve;
    if (!(det > 0.0))
      throw std::domain_error("ga_free_energy: pair block not positive definite");
    f += ed.w * (ve + beliefs.mu[static_cast<size_t>(ed.i)] *
                          beliefs.mu[static_cast<size_t>(ed.j)]);
    f -= 0.5 * std::log(det);
  }
  return f;
}

SolveReport ga_solve(const GaussianModel& model, GaussianBeliefs& beliefs,
                     const SolveConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const int n = model.num_nodes();
  SolveReport report;

  if (beliefs.mu.size() != static_cast<size_t>(n)) beliefs.mu.clear();
  const SolveStatus mean_status =
      mean_descent(model, beliefs.mu, std::max(100000, config.max_iters));
  if (mean_status == SolveStatus::diverged) {
    report.status = SolveStatus::diverged;
    if (beliefs.v.size() != static_cast<size_t>(n)) beliefs.v = default_variances(model);
    solve_edges(model, beliefs);
    report.final_free_energy = -std::numeric_limits<double>::infinity();
    report.wall_seconds = elapsed_seconds(start);
    return report;
  }

  if (beliefs.v.size() != static_cast<size_t>(n)) beliefs.v = default_variances(model);
  std::vector<double> y(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    y[static_cast<size_t>(i)] =
        std::clamp(std::log(beliefs.v[static_cast<size_t>(i)]), kYMin, kYMax);
  for (int i = 0; i < n; ++i) beliefs.v[static_cast<size_t>(i)] = std::exp(y[static_cast<size_t>(i)]);
  solve_edges(model, beliefs);

  double f = ga_free_energy(model, beliefs);
  std::vector<double> g = variance_grad(model, beliefs);
  double gnorm = norm2(g);
  const double grad_gate = config.tol_grad * std::max(1, n);
  double step = config.step0;

  GaussianBeliefs trial = beliefs;
  std::vector<double> y_trial(static_cast<size_t>(n));

  int iter = 0;
  bool done = false;
  while (iter < config.max_iters && !done) {
    ++iter;
    double max_dy = 0.0;
    bool capped = false;
    for (int i = 0; i < n; ++i) {
      const size_t k = static_cast<size_t>(i);
      y_trial[k] = std::clamp(y[k] - step * g[k], kYMin, kYMax);
      capped = capped || y_trial[k] >= kYMax;
      trial.v[k] = std::exp(y_trial[k]);
      max_dy = std::max(max_dy, std::fabs(y_trial[k] - y[k]));
    }
    solve_edges(model, trial);
    const double f_trial = ga_free_energy(model, trial);

    if (std::isfinite(f_trial) && f_trial < f) {
      const double df = f - f_trial;
      y.swap(y_trial);
      beliefs.v = trial.v;
      beliefs.v_edge = trial.v_edge;
      f = f_trial;
      if (f < kFreeEnergyFloor || capped) {
        report.status = SolveStatus::diverged;
        done = true;
        continue;
      }
      g = variance_grad(model, beliefs);
      gnorm = norm2(g);
      step *= config.step_up;
      if (config.record_trace) report.trace.push_back({iter, f, gnorm, max_dy});
      if ((max_dy < config.tol_q || df < config.tol_f) && gnorm <= grad_gate) {
        report.status = SolveStatus::converged;
        done = true;
      }
    } else {
      step *= config.step_down;
      if (step < 1e-18) {
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

SolveReport ga_bp_reference(const GaussianModel& model, GaussianBeliefs& beliefs,
                            const SolveConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const int n = model.num_nodes();
  SolveReport report;

  beliefs.mu.assign(static_cast<size_t>(n), 0.0);
  beliefs.v = default_variances(model);
  solve_edges(model, beliefs);

  for (int i = 0; i < n; ++i)
    if (!(model.diag(i) > 0.0)) {
      // the variance consistency equation has no positive solution
      report.status = SolveStatus::diverged;
      report.wall_seconds = elapsed_seconds(start);
      return report;
    }

  int iter = 0;
  while (iter < config.max_iters) {
    double damping = config.damping_max;
    if (config.damping_ramp_iters > 0)
      damping = config.damping_max *
                std::min(1.0, static_cast<double>(iter) / config.damping_ramp_iters);
    double resid = 0.0;
    bool blown = false;

    std::vector<double> mu_next(static_cast<size_t>(n));
    std::vector<double> v_next(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      const size_t k = static_cast<size_t>(i);
      double off = 0.0;
      double ratio_sum = 0.0;
      for (const Neighbor& nb : model.neighbors(i)) {
        const Edge& ed = model.edge(nb.edge);
        off += ed.w * beliefs.mu[static_cast<size_t>(nb.node)];
        const double ve = beliefs.v_edge[static_cast<size_t>(nb.edge)];
        const double p = beliefs.v[k] * beliefs.v[static_cast<size_t>(nb.node)];
        ratio_sum += 1.0 / (1.0 - ve * ve / p);
      }
      mu_next[k] = (-model.bias(i) - off) / model.diag(i);
      v_next[k] = (1.0 - model.degree(i) + ratio_sum) / model.diag(i);
      resid = std::max({resid, std::fabs(mu_next[k] - beliefs.mu[k]),
                        std::fabs(v_next[k] - beliefs.v[k])});
      blown = blown || !std::isfinite(mu_next[k]) || !std::isfinite(v_next[k]) ||
              std::fabs(mu_next[k]) > kVarianceCap || v_next[k] > kVarianceCap ||
              v_next[k] <= 0.0;
    }
    if (blown) {
      report.status = SolveStatus::diverged;
      break;
    }
    for (int i = 0; i < n; ++i) {
      const size_t k = static_cast<size_t>(i);
      beliefs.mu[k] = (1.0 - damping) * mu_next[k] + damping * beliefs.mu[k];
      beliefs.v[k] = (1.0 - damping) * v_next[k] + damping * beliefs.v[k];
    }
    solve_edges(model, beliefs);
    ++iter;
    if (resid < config.tol_q) {
      report.status = SolveStatus::converged;
      break;
    }
  }

  report.converged = report.status == SolveStatus::converged;
  report.iterations = iter;
  try {
    report.final_free_energy = ga_free_energy(model, beliefs);
  } catch (const std::exception&) {
    report.final_free_energy = std::numeric_limits<double>::quiet_NaN();
  }
  report.wall_seconds = elapsed_seconds(start);
  return report;
}

ProbeRow ga_boundedness_probe(const GaussianModel& model, const SolveConfig& config) {
  ProbeRow row;
  row.pd = is_positive_definite(model);
  row.n = model.num_nodes();
  row.seed = config.seed;
  GaussianBeliefs bo;
  row.gabo_status = ga_solve(model, bo, config).status;
  GaussianBeliefs bp;
  row.gabp_status = ga_bp_reference(model, bp, config).status;
  return row;
}

}  // namespace bopt
