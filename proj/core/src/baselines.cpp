#include "bopt/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "bopt/bo_solver.hpp"
#include "bopt/rng.hpp"

namespace bopt {

namespace {

constexpr double kQClamp = 1e-12;
constexpr double kMsgFloor = 1e-300;

double clamp_q(double q) { return std::clamp(q, kQClamp, 1.0 - kQClamp); }

double xlnx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void check_q(const Model& model, const std::vector<double>& q, const char* what) {
  if (static_cast<int>(q.size()) != model.num_nodes())
    throw std::invalid_argument(std::string(what) + ": q length mismatch");
  for (double qi : q) {
    if (!std::isfinite(qi)) throw std::invalid_argument(std::string(what) + ": non-finite q");
    if (qi <= 0.0 || qi >= 1.0) throw std::domain_error(std::string(what) + ": q outside (0,1)");
  }
}

std::vector<double> init_q(const Model& model, const SolveConfig& config) {
  const int n = model.num_nodes();
  std::vector<double> q(static_cast<size_t>(n), 0.5);
  switch (config.init) {
    case InitKind::uniform_half:
      break;
    case InitKind::bias_sigmoid:
      for (int i = 0; i < n; ++i) q[static_cast<size_t>(i)] = clamp_q(sigmoid(model.bias(i)));
      break;
    case InitKind::seeded_noise: {
      Rng rng(config.seed);
      for (int i = 0; i < n; ++i)
        q[static_cast<size_t>(i)] = 0.5 + (rng.uniform01() < 0.5 ? -0.01 : 0.01);
      break;
    }
  }
  return q;
}

// Shared driver for the damped logit fixed points: q <- sigmoid(logits(q)),
// mixed with the previous iterate under the linear damping ramp.
template <typename LogitsFn, typename FreeEnergyFn>
SolveReport damped_fixed_point(const Model& model, std::vector<double>& q,
                               const SolveConfig& config, LogitsFn logits,
                               FreeEnergyFn free_energy) {
  const auto start = std::chrono::steady_clock::now();
  const int n = model.num_nodes();
  if (q.empty()) q = init_q(model, config);
  check_q(model, q, "fixed point");

  SolveReport report;
  int iter = 0;
  while (iter < config.max_iters) {
    const std::vector<double> y = logits(q);
    bool finite = true;
    for (double v : y) finite = finite && std::isfinite(v);
    if (!finite) {
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
      const double target = clamp_q(sigmoid(y[k]));
      resid = std::max(resid, std::fabs(target - q[k]));
      q[k] = clamp_q((1.0 - damping) * target + damping * q[k]);
    }
    ++iter;
    if (config.record_trace)
      report.trace.push_back({iter, free_energy(q), 0.0, resid});
    if (resid < config.tol_q) {
      report.status = SolveStatus::converged;
      break;
    }
  }

  const std::vector<double> y = logits(q);
  std::vector<double> g(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const size_t k = static_cast<size_t>(i);
    g[k] = (logit(q[k]) - y[k]) * q[k] * (1.0 - q[k]);
  }
  report.converged = report.status == SolveStatus::converged;
  report.iterations = iter;
  report.final_free_energy = free_energy(q);
  report.final_grad_norm = norm2(g);
  report.wall_seconds = elapsed_seconds(start);
  return report;
}

}  // namespace

double mf_free_energy(const Model& model, const std::vector<double>& q) {
  check_q(model, q, "mf_free_energy");
  double f = 0.0;
  for (int i = 0; i < model.num_nodes(); ++i) {
    const double qi = q[static_cast<size_t>(i)];
    f += -model.bias(i) * qi + xlnx(qi) + xlnx(1.0 - qi);
  }
  for (const Edge& e : model.edges())
    f += -e.w * q[static_cast<size_t>(e.i)] * q[static_cast<size_t>(e.j)];
  return f;
}

double tap_free_energy(const Model& model, const std::vector<double>& q) {
  double f = mf_free_energy(model, q);
  for (const Edge& e : model.edges()) {
    const double qi = q[static_cast<size_t>(e.i)];
    const double qj = q[static_cast<size_t>(e.j)];
    f += -0.5 * e.w * e.w * qi * (1.0 - qi) * qj * (1.0 - qj);
  }
  return f;
}

double xi_tap(double q_i, double q_j, double w) {
  return q_i * q_j + w * q_i * (1.0 - q_i) * q_j * (1.0 - q_j);
}

std::vector<double> mf_update_logits(const Model& model, const std::vector<double>& q) {
  check_q(model, q, "mf_update_logits");
  std::vector<double> y(q.size());
  for (int i = 0; i < model.num_nodes(); ++i) {
    double yi = model.bias(i);
    for (const Neighbor& nb : model.neighbors(i))
      yi += model.edge(nb.edge).w * q[static_cast<size_t>(nb.node)];
    y[static_cast<size_t>(i)] = yi;
  }
  return y;
}

std::vector<double> tap_update_logits(const Model& model, const std::vector<double>& q) {
  std::vector<double> y = mf_update_logits(model, q);
  for (int i = 0; i < model.num_nodes(); ++i) {
    const double qi = q[static_cast<size_t>(i)];
    double t = 0.0;
    for (const Neighbor& nb : model.neighbors(i)) {
      const double w = model.edge(nb.edge).w;
      const double qj = q[static_cast<size_t>(nb.node)];
      t += w * w * qj * (1.0 - qj);
    }
    y[static_cast<size_t>(i)] += 0.5 * (1.0 - 2.0 * qi) * t;
  }
  return y;
}

SolveReport mf_solve(const Model& model, std::vector<double>& q, const SolveConfig& config) {
  return damped_fixed_point(
      model, q, config,
      [&](const std::vector<double>& qq) { return mf_update_logits(model, qq); },
      [&](const std::vector<double>& qq) { return mf_free_energy(model, qq); });
}

SolveReport tap_solve(const Model& model, std::vector<double>& q, const SolveConfig& config) {
  return damped_fixed_point(
      model, q, config,
      [&](const std::vector<double>& qq) { return tap_update_logits(model, qq); },
      [&](const std::vector<double>& qq) { return tap_free_energy(model, qq); });
}

SolveReport tap_solve_gradient(const Model& model, std::vector<double>& q,
                               const SolveConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const int n = model.num_nodes();
  if (q.empty()) q = init_q(model, config);
  check_q(model, q, "tap_solve_gradient");

  const auto grad = [&](const std::vector<double>& qq) {
    const std::vector<double> y = tap_update_logits(model, qq);
    std::vector<double> g(qq.size());
    for (size_t k = 0; k < qq.size(); ++k)
      g[k] = (logit(qq[k]) - y[k]) * qq[k] * (1.0 - qq[k]);
    return g;
  };

  SolveReport report;
  double f = tap_free_energy(model, q);
  std::vector<double> g = grad(q);
  double gnorm = norm2(g);
  const double grad_gate = config.tol_grad * n;
  double step = config.step0;
  std::vector<double> trial(q.size());

  int iter = 0;
  bool done = false;
  while (iter < config.max_iters && !done) {
    ++iter;
    double max_dq = 0.0;
    for (size_t k = 0; k < q.size(); ++k) {
      trial[k] = clamp_q(sigmoid(logit(q[k]) - step * g[k]));
      max_dq = std::max(max_dq, std::fabs(trial[k] - q[k]));
    }
    const double f_trial = tap_free_energy(model, trial);
    if (std::isfinite(f_trial) && f_trial < f) {
      const double df = f - f_trial;
      q = trial;
      f = f_trial;
      g = grad(q);
      gnorm = norm2(g);
      step *= config.step_up;
      if (config.record_trace) report.trace.push_back({iter, f, gnorm, max_dq});
      if ((max_dq < config.tol_q || df < config.tol_f) && gnorm <= grad_gate) {
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

Beliefs mf_beliefs(const Model& model, const std::vector<double>& q) {
  check_q(model, q, "mf_beliefs");
  Beliefs b;
  b.q = q;
  b.xi.reserve(model.edges().size());
  for (const Edge& e : model.edges())
    b.xi.push_back(q[static_cast<size_t>(e.i)] * q[static_cast<size_t>(e.j)]);
  return b;
}

Beliefs tap_beliefs(const Model& model, const std::vector<double>& q) {
  check_q(model, q, "tap_beliefs");
  Beliefs b;
  b.q = q;
  b.xi.reserve(model.edges().size());
  for (const Edge& e : model.edges())
    b.xi.push_back(xi_tap(q[static_cast<size_t>(e.i)], q[static_cast<size_t>(e.j)], e.w));
  return b;
}

namespace {

// Messages are normalized two-entry tables, two directed messages per edge.
// Direction 0 runs e.i -> e.j, direction 1 the reverse.
struct BpWork {
  const Model& model;
  std::vector<double> msg;  // 4 per edge: [e][dir][value]

  explicit BpWork(const Model& m)
      : model(m), msg(static_cast<size_t>(m.num_edges()) * 4, 0.5) {}

  double& at(int e, int dir, int s) {
    return msg[static_cast<size_t>(e) * 4 + static_cast<size_t>(dir) * 2 +
               static_cast<size_t>(s)];
  }
  double at(int e, int dir, int s) const {
    return msg[static_cast<size_t>(e) * 4 + static_cast<size_t>(dir) * 2 +
               static_cast<size_t>(s)];
  }

  // Message arriving at `node` along edge e.
  double incoming(int e, int node, int s) const {
    const Edge& ed = model.edge(e);
    return at(e, node == ed.i ? 1 : 0, s);
  }

  // phi_node(s) times all incoming messages except the one along skip_edge
  // (pass -1 to include everything).
  void cavity(int node, int skip_edge, double out[2]) const {
    out[0] = 1.0;
    out[1] = std::exp(model.bias(node));
    for (const Neighbor& nb : model.neighbors(node)) {
      if (nb.edge == skip_edge) continue;
      out[0] *= incoming(nb.edge, node, 0);
      out[1] *= incoming(nb.edge, node, 1);
    }
  }

  // Sum-product update for direction dir of edge e, normalized.
  void update(int e, int dir, double out[2]) const {
    const Edge& ed = model.edge(e);
    const int src = dir == 0 ? ed.i : ed.j;
    double cav[2];
    cavity(src, e, cav);
    out[0] = cav[0] + cav[1];
    out[1] = cav[0] + cav[1] * std::exp(ed.w);
    normalize(out);
  }

  static void normalize(double t[2]) {
    t[0] = std::max(t[0], kMsgFloor);
    t[1] = std::max(t[1], kMsgFloor);
    const double s = t[0] + t[1];
    t[0] /= s;
    t[1] /= s;
  }

  std::vector<double> node_marginals() const {
    std::vector<double> q(static_cast<size_t>(model.num_nodes()));
    for (int i = 0; i < model.num_nodes(); ++i) {
      double full[2];
      cavity(i, -1, full);
      q[static_cast<size_t>(i)] = clamp_q(full[1] / (full[0] + full[1]));
    }
    return q;
  }

  // Normalized pair belief for edge e, indexed [s_i][s_j].
  void edge_belief(int e, double out[2][2]) const {
    const Edge& ed = model.edge(e);
    double ci[2], cj[2];
    cavity(ed.i, e, ci);
    cavity(ed.j, e, cj);
    const double ew = std::exp(ed.w);
    out[0][0] = ci[0] * cj[0];
    out[0][1] = ci[0] * cj[1];
    out[1][0] = ci[1] * cj[0];
    out[1][1] = ci[1] * cj[1] * ew;
    const double s = out[0][0] + out[0][1] + out[1][0] + out[1][1];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) out[a][b] /= s;
  }

  Beliefs beliefs() const {
    Beliefs b;
    b.q = node_marginals();
    b.xi.resize(static_cast<size_t>(model.num_edges()));
    for (int e = 0; e < model.num_edges(); ++e) {
      double t[2][2];
      edge_belief(e, t);
      b.xi[static_cast<size_t>(e)] = std::clamp(t[1][1], 0.0, 1.0);
    }
    return b;
  }

  // Bethe free energy evaluated on the raw message beliefs. Node and pair
  // beliefs need not be consistent (they are not, before convergence), so
  // this uses the general two-table form rather than the (q, xi)
  // parameterization; the two coincide at a fixed point.
  double free_energy() const {
    double f = 0.0;
    for (int e = 0; e < model.num_edges(); ++e) {
      const Edge& ed = model.edge(e);
      double t[2][2];
      edge_belief(e, t);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          f += xlnx(t[a][b]) -
               t[a][b] * (ed.w * a * b + model.bias(ed.i) * a + model.bias(ed.j) * b);
    }
    const std::vector<double> q = node_marginals();
    for (int i = 0; i < model.num_nodes(); ++i) {
      const double qi = q[static_cast<size_t>(i)];
      f += (1.0 - model.degree(i)) *
           (xlnx(qi) + xlnx(1.0 - qi) - model.bias(i) * qi);
    }
    return f;
  }
};

}  // namespace

SolveReport bp_solve(const Model& model, Beliefs& beliefs, const SolveConfig& config,
                     BpSchedule schedule) {
  const auto start = std::chrono::steady_clock::now();
  const int ne = model.num_edges();
  BpWork work(model);

  SolveReport report;
  std::vector<double> next(static_cast<size_t>(ne) * 4);
  int iter = 0;
  while (iter < config.max_iters) {
    double damping = config.damping_max;
    if (config.damping_ramp_iters > 0)
      damping = config.damping_max *
                std::min(1.0, static_cast<double>(iter) / config.damping_ramp_iters);
    double resid = 0.0;
    bool finite = true;

    if (schedule == BpSchedule::synchronous) {
      for (int e = 0; e < ne; ++e)
        for (int dir = 0; dir < 2; ++dir) {
          double u[2];
          work.update(e, dir, u);
          finite = finite && std::isfinite(u[0]) && std::isfinite(u[1]);
          const size_t base = static_cast<size_t>(e) * 4 + static_cast<size_t>(dir) * 2;
          resid = std::max({resid, std::fabs(u[0] - work.msg[base]),
                            std::fabs(u[1] - work.msg[base + 1])});
          next[base] = u[0];
          next[base + 1] = u[1];
        }
      for (size_t k = 0; k < next.size(); ++k)
        work.msg[k] = (1.0 - damping) * next[k] + damping * work.msg[k];
    } else {
      for (int e = 0; e < ne; ++e)
        for (int dir = 0; dir < 2; ++dir) {
          double u[2];
          work.update(e, dir, u);
          finite = finite && std::isfinite(u[0]) && std::isfinite(u[1]);
          const size_t base = static_cast<size_t>(e) * 4 + static_cast<size_t>(dir) * 2;
          resid = std::max({resid, std::fabs(u[0] - work.msg[base]),
                            std::fabs(u[1] - work.msg[base + 1])});
          work.msg[base] = (1.0 - damping) * u[0] + damping * work.msg[base];
          work.msg[base + 1] = (1.0 - damping) * u[1] + damping * work.msg[base + 1];
        }
    }

    ++iter;
    if (!finite) {
      report.status = SolveStatus::diverged;
      break;
    }
    if (config.record_trace) {
      const Beliefs b = work.beliefs();
      report.trace.push_back(
          {iter, work.free_energy(), norm2(grad_q(model, b.q)), resid});
    }
    if (resid < config.tol_q) {
      report.status = SolveStatus::converged;
      break;
    }
  }

  beliefs = work.beliefs();
  report.converged = report.status == SolveStatus::converged;
  report.iterations = iter;
  report.final_free_energy = work.free_energy();
  report.final_grad_norm = norm2(grad_q(model, beliefs.q));
  report.wall_seconds = elapsed_seconds(start);
  return report;
}

}  // namespace bopt
