#pragma once

// Shared numeric oracles for the test suite: a 1-D minimizer, central
// differences, and random-model generators that do not go through the
// library's own instance sampler.

#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <utility>
#include <vector>

#include "bopt/model.hpp"
#include "bopt/rng.hpp"

namespace testutil {

// Golden-section search over [lo, hi]; f must be unimodal there.
inline double minimize_1d(const std::function<double(double)>& f, double lo,
                          double hi, int iters = 200) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int k = 0; k < iters; ++k) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

inline double central_diff(const std::function<double(double)>& f, double x,
                           double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Connected random model: random attachment tree plus extra edges, normal
// weights and biases.
inline bopt::Model random_model(int n, double w_sd, double b_sd,
                                std::uint64_t seed,
                                double extra_edge_prob = 0.25) {
  bopt::Rng rng(bopt::mix_seed(seed));
  std::vector<bopt::Edge> edges;
  std::set<std::pair<int, int>> seen;
  for (int v = 1; v < n; ++v) {
    const int u =
        static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(v));
    seen.insert({u, v});
    edges.push_back({u, v, w_sd * rng.normal()});
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (seen.count({i, j})) continue;
      if (rng.uniform01() < extra_edge_prob)
        edges.push_back({i, j, w_sd * rng.normal()});
    }
  std::vector<double> biases(static_cast<size_t>(n));
  for (double& b : biases) b = b_sd * rng.normal();
  return bopt::Model(n, std::move(edges), std::move(biases));
}

// Normal weights/biases on a fixed topology.
inline bopt::Model model_on(const bopt::Topology& topo, double w_sd,
                            double b_sd, std::uint64_t seed) {
  bopt::Rng rng(bopt::mix_seed(seed));
  std::vector<bopt::Edge> edges;
  edges.reserve(topo.edges.size());
  for (const auto& [i, j] : topo.edges)
    edges.push_back({i, j, w_sd * rng.normal()});
  std::vector<double> biases(static_cast<size_t>(topo.n));
  for (double& b : biases) b = b_sd * rng.normal();
  return bopt::Model(topo.n, std::move(edges), std::move(biases));
}

// Interior marginal vector with entries in [margin, 1 - margin].
inline std::vector<double> random_interior_q(int n, std::uint64_t seed,
                                             double margin = 0.15) {
  bopt::Rng rng(bopt::mix_seed(seed ^ 0x5eedULL));
  std::vector<double> q(static_cast<size_t>(n));
  for (double& v : q) v = margin + (1.0 - 2.0 * margin) * rng.uniform01();
  return q;
}

}  // namespace testutil
