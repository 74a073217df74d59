#include "bopt/exact.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

#include "bopt/rng.hpp"

namespace bopt {

namespace {

constexpr int kWidthCap = 14;

double state_energy(const Model& model, std::uint32_t state) {
  double e = 0.0;
  for (int i = 0; i < model.num_nodes(); ++i)
    if (state >> i & 1u) e += model.bias(i);
  for (const Edge& ed : model.edges())
    if ((state >> ed.i & 1u) && (state >> ed.j & 1u)) e += ed.w;
  return e;
}

// Factor over a sorted variable scope, stored as log values; bit k of a
// table index is the value of vars[k].
struct Factor {
  std::vector<int> vars;
  std::vector<double> logs;
};

// log(e^a + e^b) without overflow.
double lse(double a, double b) {
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  return hi + std::log1p(std::exp(lo - hi));
}

void check_permutation(const Model& model, const std::vector<int>& order) {
  const int n = model.num_nodes();
  if (static_cast<int>(order.size()) != n)
    throw std::invalid_argument("eliminate: order length mismatch");
  std::vector<char> seen(static_cast<size_t>(n), 0);
  for (int v : order) {
    if (v < 0 || v >= n || seen[static_cast<size_t>(v)])
      throw std::invalid_argument("eliminate: order is not a permutation");
    seen[static_cast<size_t>(v)] = 1;
  }
}

// Fill-graph simulation shared by the width estimate and the min-degree
// ordering: eliminating v connects v's remaining neighbors into a clique.
std::vector<std::set<int>> fill_adjacency(const Model& model) {
  std::vector<std::set<int>> adj(static_cast<size_t>(model.num_nodes()));
  for (const Edge& e : model.edges()) {
    adj[static_cast<size_t>(e.i)].insert(e.j);
    adj[static_cast<size_t>(e.j)].insert(e.i);
  }
  return adj;
}

int eliminate_in_fill(std::vector<std::set<int>>& adj, int v) {
  const std::set<int> nbrs = adj[static_cast<size_t>(v)];
  for (int a : nbrs) adj[static_cast<size_t>(a)].erase(v);
  for (int a : nbrs)
    for (int b : nbrs)
      if (a < b) {
        adj[static_cast<size_t>(a)].insert(b);
        adj[static_cast<size_t>(b)].insert(a);
      }
  adj[static_cast<size_t>(v)].clear();
  return static_cast<int>(nbrs.size());
}

}  // namespace

ExactResult brute_force(const Model& model) {
  const int n = model.num_nodes();
  if (n > 20) throw std::invalid_argument("brute_force: more than 20 nodes");

  ExactResult res;
  res.q.assign(static_cast<size_t>(n), 0.0);
  res.xi.assign(model.edges().size(), 0.0);
  if (n == 0) {
    res.log_z = 0.0;
    return res;
  }

  const std::uint32_t count = 1u << n;
  double mx = -std::numeric_limits<double>::infinity();
  for (std::uint32_t s = 0; s < count; ++s)
    mx = std::max(mx, state_energy(model, s));

  double z = 0.0;
  for (std::uint32_t s = 0; s < count; ++s) {
    const double p = std::exp(state_energy(model, s) - mx);
    z += p;
    for (int i = 0; i < n; ++i)
      if (s >> i & 1u) res.q[static_cast<size_t>(i)] += p;
    for (size_t e = 0; e < model.edges().size(); ++e) {
      const Edge& ed = model.edges()[e];
      if ((s >> ed.i & 1u) && (s >> ed.j & 1u)) res.xi[e] += p;
    }
  }
  for (double& v : res.q) v /= z;
  for (double& v : res.xi) v /= z;
  res.log_z = mx + std::log(z);
  return res;
}

double eliminate(const Model& model, const std::vector<int>& order) {
  check_permutation(model, order);
  const int n = model.num_nodes();
  if (n == 0) return 0.0;

  std::vector<Factor> factors;
  factors.reserve(static_cast<size_t>(n) + model.edges().size());
  for (int i = 0; i < n; ++i)
    factors.push_back({{i}, {0.0, model.bias(i)}});
  for (const Edge& e : model.edges())
    factors.push_back({{e.i, e.j}, {0.0, 0.0, 0.0, e.w}});

  std::vector<char> active(factors.size(), 1);
  double log_z = 0.0;

  for (int v : order) {
    // gather scopes of all active factors mentioning v
    std::set<int> scope_set;
    std::vector<size_t> bucket;
    for (size_t f = 0; f < factors.size(); ++f) {
      if (!active[f]) continue;
      if (std::find(factors[f].vars.begin(), factors[f].vars.end(), v) ==
          factors[f].vars.end())
        continue;
      bucket.push_back(f);
      scope_set.insert(factors[f].vars.begin(), factors[f].vars.end());
    }
    if (bucket.empty()) {
      log_z += std::log(2.0);  // free variable: both states weight 1
      continue;
    }
    const int width = static_cast<int>(scope_set.size()) - 1;
    if (width > kWidthCap)
      throw std::runtime_error("eliminate: induced width " + std::to_string(width) +
                               " exceeds cap " + std::to_string(kWidthCap));

    const std::vector<int> scope(scope_set.begin(), scope_set.end());
    const size_t bits = scope.size();
    std::vector<double> logs(size_t{1} << bits, 0.0);
    for (size_t f : bucket) {
      const Factor& fac = factors[f];
      std::vector<int> pos(fac.vars.size());
      for (size_t k = 0; k < fac.vars.size(); ++k)
        pos[k] = static_cast<int>(std::lower_bound(scope.begin(), scope.end(),
                                                   fac.vars[k]) -
                                  scope.begin());
      for (size_t idx = 0; idx < logs.size(); ++idx) {
        size_t sub = 0;
        for (size_t k = 0; k < fac.vars.size(); ++k)
          sub |= (idx >> pos[k] & 1u) << k;
        logs[idx] += fac.logs[sub];
      }
      active[f] = 0;
    }

    const size_t pv = static_cast<size_t>(
        std::lower_bound(scope.begin(), scope.end(), v) - scope.begin());
    Factor out;
    out.vars.reserve(bits - 1);
    for (int u : scope)
      if (u != v) out.vars.push_back(u);
    out.logs.resize(size_t{1} << (bits - 1));
    const size_t low_mask = (size_t{1} << pv) - 1;
    for (size_t j = 0; j < out.logs.size(); ++j) {
      const size_t idx0 = ((j & ~low_mask) << 1) | (j & low_mask);
      out.logs[j] = lse(logs[idx0], logs[idx0 | (size_t{1} << pv)]);
    }

    if (out.vars.empty()) {
      log_z += out.logs[0];
    } else {
      factors.push_back(std::move(out));
      active.push_back(1);
    }
  }
  return log_z;
}

std::vector<int> default_elimination_order(const Model& model) {
  const int n = model.num_nodes();
  std::vector<std::set<int>> adj = fill_adjacency(model);
  std::vector<char> done(static_cast<size_t>(n), 0);
  std::vector<int> order;
  order.reserve(static_cast<size_t>(n));
  for (int step = 0; step < n; ++step) {
    int best = -1;
    size_t best_deg = 0;
    for (int v = 0; v < n; ++v) {
      if (done[static_cast<size_t>(v)]) continue;
      const size_t deg = adj[static_cast<size_t>(v)].size();
      if (best < 0 || deg < best_deg) {
        best = v;
        best_deg = deg;
      }
    }
    eliminate_in_fill(adj, best);
    done[static_cast<size_t>(best)] = 1;
    order.push_back(best);
  }
  return order;
}

int induced_width(const Model& model, const std::vector<int>& order) {
  check_permutation(model, order);
  std::vector<std::set<int>> adj = fill_adjacency(model);
  int width = 0;
  for (int v : order) width = std::max(width, eliminate_in_fill(adj, v));
  return width;
}

ExactResult exact_marginals_via_elimination(const Model& model) {
  ExactResult res;
  res.q.assign(static_cast<size_t>(model.num_nodes()), 0.0);
  res.xi.assign(model.edges().size(), 0.0);
  const double log_z = eliminate(model, default_elimination_order(model));
  res.log_z = log_z;

  const auto clamped_log_z = [&](std::initializer_list<int> ones) {
    Evidence ev;
    for (int v : ones) ev.set(v, 1);
    const ConditionResult cond = condition(model, ev);
    return cond.log_constant +
           eliminate(cond.model, default_elimination_order(cond.model));
  };

  for (int i = 0; i < model.num_nodes(); ++i)
    res.q[static_cast<size_t>(i)] =
        std::clamp(std::exp(clamped_log_z({i}) - log_z), 0.0, 1.0);
  for (size_t e = 0; e < model.edges().size(); ++e) {
    const Edge& ed = model.edges()[e];
    res.xi[e] = std::clamp(std::exp(clamped_log_z({ed.i, ed.j}) - log_z), 0.0, 1.0);
  }
  return res;
}

ExactResult gibbs(const Model& model, const GibbsConfig& config) {
  if (config.n_samples < 1) throw std::invalid_argument("gibbs: n_samples < 1");
  if (config.burn_in < 0) throw std::invalid_argument("gibbs: negative burn_in");
  if (config.anneal_from < 1.0)
    throw std::invalid_argument("gibbs: anneal_from below 1");

  const int n = model.num_nodes();
  Rng rng(config.seed);
  std::vector<int> s(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) s[static_cast<size_t>(i)] = rng.uniform01() < 0.5;

  const int anneal_steps = std::max(1, config.anneal_steps);
  const auto sweep = [&](double temperature) {
    for (int i = 0; i < n; ++i) {
      double field = model.bias(i);
      for (const Neighbor& nb : model.neighbors(i))
        field += model.edge(nb.edge).w * s[static_cast<size_t>(nb.node)];
      const double p = 1.0 / (1.0 + std::exp(-field / temperature));
      s[static_cast<size_t>(i)] = rng.uniform01() < p;
    }
  };

  for (int t = 0; t < config.burn_in; ++t) {
    const double frac = std::min(1.0, static_cast<double>(t) / anneal_steps);
    sweep(config.anneal_from + (1.0 - config.anneal_from) * frac);
  }

  ExactResult res;
  res.q.assign(static_cast<size_t>(n), 0.0);
  res.xi.assign(model.edges().size(), 0.0);
  for (int t = 0; t < config.n_samples; ++t) {
    sweep(1.0);
    for (int i = 0; i < n; ++i) res.q[static_cast<size_t>(i)] += s[static_cast<size_t>(i)];
    for (size_t e = 0; e < model.edges().size(); ++e) {
      const Edge& ed = model.edges()[e];
      res.xi[e] += s[static_cast<size_t>(ed.i)] & s[static_cast<size_t>(ed.j)];
    }
  }
  for (double& v : res.q) v /= config.n_samples;
  for (double& v : res.xi) v /= config.n_samples;
  return res;
}

}  // namespace bopt
