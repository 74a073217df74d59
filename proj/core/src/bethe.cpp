#include "bopt/bethe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bopt {

namespace {

// Below this |w| the quadratic is treated as degenerate and xi = q_i q_j.
constexpr double kDegenerateW = 1e-8;
// Floor on reconstructed table entries; keeps logs finite at absurd weights.
constexpr double kEntryFloor = 1e-300;

void check_marginal(double q, const char* what) {
  if (!std::isfinite(q)) throw std::invalid_argument(std::string(what) + ": non-finite marginal");
  if (q <= 0.0 || q >= 1.0) throw std::domain_error(std::string(what) + ": marginal outside (0,1)");
}

double xlnx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

std::pair<double, double> xi_bounds(double q_i, double q_j) {
  return {std::max(0.0, q_i + q_j - 1.0), std::min(q_i, q_j)};
}

EdgeScratch EdgeScratch::make(double q_i, double q_j, double w) {
  EdgeScratch s;
  s.alpha = std::expm1(w);
  s.beta = s.alpha != 0.0 ? 1.0 / s.alpha : 0.0;
  s.Q = 1.0 + s.alpha * (q_i + q_j);
  s.R = s.beta + q_i + q_j;
  if (std::fabs(w) >= kDegenerateW) s.zeta = positive_root_zeta(q_i, q_j, w);
  return s;
}

namespace {

// Q^2 - 4 alpha c expanded into a sum of nonnegative terms (an identity in
// E = e^w), so the discriminant keeps full relative accuracy even when the
// direct difference cancels to ~eps * Q^2:
//   (1 - qi - qj)^2 + E (2 (qi(1-qi) + qj(1-qj)) + E (qi - qj)^2)
double disc_alpha_form(double q_i, double q_j, double E) {
  const double r = 1.0 - q_i - q_j;
  const double d = q_i - q_j;
  return r * r + E * (2.0 * (q_i * (1.0 - q_i) + q_j * (1.0 - q_j)) + E * d * d);
}

// same treatment for R^2 - 4c' in the beta-form:
//   (qi - qj)^2 + beta (2 (qi(1-qj) + qj(1-qi)) + beta)
double disc_beta_form(double q_i, double q_j, double beta) {
  const double d = q_i - q_j;
  return d * d +
         beta * (2.0 * (q_i * (1.0 - q_j) + q_j * (1.0 - q_i)) + beta);
}

}  // namespace

// Branch selection, per the two algebraically identical root formulas:
//  - w <= ln 2 (|alpha| <= 1): the alpha-form
//      xi = (Q - sqrt(Q^2 - 4 alpha c)) / (2 alpha),  c = e^w q_i q_j,
//    evaluated as 2c / (Q + sqrt(...)) when Q >= 0 so the small root is a
//    quotient instead of a cancelling difference.
//  - w > ln 2: the beta-form (beta = 1/alpha in (0,1), R = beta + q_i + q_j),
//      xi = (R - sqrt(R^2 - 4 c')) / 2,  c' = (1 + beta) q_i q_j,
//    again via the product form 2c' / (R + sqrt(...)). This keeps everything
//    at O(1) scale when e^w is enormous.
double xi_solve(double q_i, double q_j, double w) {
  check_marginal(q_i, "xi_solve");
  check_marginal(q_j, "xi_solve");
  if (!std::isfinite(w)) throw std::invalid_argument("xi_solve: non-finite weight");

  if (std::fabs(w) < kDegenerateW) return q_i * q_j;

  const double alpha = std::expm1(w);
  if (alpha <= 1.0) {
    const double E = std::exp(w);
    const double c = E * q_i * q_j;  // (1 + alpha) q_i q_j
    const double Q = 1.0 + alpha * (q_i + q_j);
    const double s = std::sqrt(disc_alpha_form(q_i, q_j, E));
    return Q >= 0.0 ? 2.0 * c / (Q + s) : (Q - s) / (2.0 * alpha);
  }
  const double beta = 1.0 / alpha;
  const double c = (1.0 + beta) * q_i * q_j;
  const double R = beta + q_i + q_j;
  return 2.0 * c / (R + std::sqrt(disc_beta_form(q_i, q_j, beta)));
}

double dF_dxi(double q_i, double q_j, double xi, double w) {
  check_marginal(q_i, "dF_dxi");
  check_marginal(q_j, "dF_dxi");
  const auto [lo, hi] = xi_bounds(q_i, q_j);
  if (!(xi > lo && xi < hi))
    throw std::domain_error("dF_dxi: xi not strictly inside bounds");
  return -w + std::log(xi) + std::log(xi + 1.0 - q_i - q_j) -
         std::log(q_i - xi) - std::log(q_j - xi);
}

double positive_root_zeta(double q_i, double q_j, double w) {
  check_marginal(q_i, "positive_root_zeta");
  check_marginal(q_j, "positive_root_zeta");
  if (!std::isfinite(w)) throw std::invalid_argument("positive_root_zeta: non-finite weight");
  if (w == 0.0) throw std::domain_error("positive_root_zeta: degenerate at w = 0");

  const double alpha = std::expm1(w);
  const double E = std::exp(w);
  const double c = E * q_i * q_j;
  const double Q = 1.0 + alpha * (q_i + q_j);
  const double s = std::sqrt(disc_alpha_form(q_i, q_j, E));
  // stable counterpart of the branch pairing in xi_solve
  return Q >= 0.0 ? (Q + s) / (2.0 * alpha) : 2.0 * c / (Q - s);
}

PairTable pair_table(double q_i, double q_j, double xi) {
  const auto [lo, hi] = xi_bounds(q_i, q_j);
  if (!(xi >= lo && xi <= hi))
    throw std::domain_error("pair_table: xi outside bounds");
  return {xi, q_i - xi, q_j - xi, xi + 1.0 - q_i - q_j};
}

PairTable solved_pair_table(double q_i, double q_j, double w) {
  const double xi = xi_solve(q_i, q_j, w);
  PairTable t{xi, q_i - xi, q_j - xi, xi + 1.0 - q_i - q_j};

  if (w > 0.0) {
    // xi approaches min(q_i, q_j); the two "disagree" entries shrink like
    // e^-w and the direct differences lose all precision.
    if (t.p10 < 1e-6 * q_i * (1.0 - q_j) || t.p01 < 1e-6 * q_j * (1.0 - q_i)) {
      const double P = t.p11 * t.p00 * std::exp(-w);
      const double d = q_j - q_i;  // p01 - p10, exact
      if (d >= 0.0) {
        t.p10 = 2.0 * P / (d + std::sqrt(d * d + 4.0 * P));
        t.p01 = t.p10 + d;
      } else {
        t.p01 = 2.0 * P / (-d + std::sqrt(d * d + 4.0 * P));
        t.p10 = t.p01 - d;
      }
    }
  } else if (w < 0.0) {
    // xi approaches the lower bound; p11 and p00 are the shrinking pair.
    if (t.p11 < 1e-6 * q_i * q_j || t.p00 < 1e-6 * (1.0 - q_i) * (1.0 - q_j)) {
      const double P = t.p10 * t.p01 * std::exp(w);
      const double d = q_i + q_j - 1.0;  // p11 - p00, exact
      if (d >= 0.0) {
        t.p00 = 2.0 * P / (d + std::sqrt(d * d + 4.0 * P));
        t.p11 = t.p00 + d;
      } else {
        t.p11 = 2.0 * P / (-d + std::sqrt(d * d + 4.0 * P));
        t.p00 = t.p11 - d;
      }
    }
  }

  t.p11 = std::max(t.p11, kEntryFloor);
  t.p10 = std::max(t.p10, kEntryFloor);
  t.p01 = std::max(t.p01, kEntryFloor);
  t.p00 = std::max(t.p00, kEntryFloor);
  return t;
}

double bethe_free_energy(const Model& model, const Beliefs& beliefs) {
  const int n = model.num_nodes();
  if (static_cast<int>(beliefs.q.size()) != n ||
      beliefs.xi.size() != model.edges().size())
    throw std::invalid_argument("bethe_free_energy: beliefs shape mismatch");

  double f = 0.0;
  for (int i = 0; i < n; ++i) {
    const double q = beliefs.q[static_cast<size_t>(i)];
    if (!(q >= 0.0 && q <= 1.0))
      throw std::domain_error("bethe_free_energy: q outside [0,1]");
    f += -model.bias(i) * q;
    f += (1.0 - model.degree(i)) * (xlnx(q) + xlnx(1.0 - q));
  }
  for (size_t e = 0; e < model.edges().size(); ++e) {
    const Edge& ed = model.edges()[e];
    const double xi = beliefs.xi[e];
    const double qi = beliefs.q[static_cast<size_t>(ed.i)];
    const double qj = beliefs.q[static_cast<size_t>(ed.j)];
    double p10 = qi - xi;
    double p01 = qj - xi;
    double p00 = xi + 1.0 - qi - qj;
    // tolerate boundary-touching beliefs up to rounding noise
    constexpr double kSlack = -1e-12;
    if (xi < kSlack || p10 < kSlack || p01 < kSlack || p00 < kSlack)
      throw std::domain_error("bethe_free_energy: xi outside bounds");
    p10 = std::max(p10, 0.0);
    p01 = std::max(p01, 0.0);
    p00 = std::max(p00, 0.0);
    f += -ed.w * xi;
    f += xlnx(xi) + xlnx(p10) + xlnx(p01) + xlnx(p00);
  }
  return f;
}

std::vector<double> grad_q(const Model& model, const std::vector<double>& q) {
  const int n = model.num_nodes();
  if (static_cast<int>(q.size()) != n)
    throw std::invalid_argument("grad_q: q length mismatch");
  for (double qi : q) check_marginal(qi, "grad_q");

  // dF/dq_i accumulated in log space; the xi terms drop out because each
  // xi_ij sits at its per-edge minimum.
  std::vector<double> g(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const double qi = q[static_cast<size_t>(i)];
    g[static_cast<size_t>(i)] =
        -model.bias(i) +
        (model.degree(i) - 1.0) * (std::log1p(-qi) - std::log(qi));
  }
  for (const Edge& ed : model.edges()) {
    const PairTable t =
        solved_pair_table(q[static_cast<size_t>(ed.i)], q[static_cast<size_t>(ed.j)], ed.w);
    const double li = std::log(t.p10) - std::log(t.p00);
    const double lj = std::log(t.p01) - std::log(t.p00);
    g[static_cast<size_t>(ed.i)] += li;
    g[static_cast<size_t>(ed.j)] += lj;
  }
  for (int i = 0; i < n; ++i) {
    const double qi = q[static_cast<size_t>(i)];
    g[static_cast<size_t>(i)] *= qi * (1.0 - qi);
  }
  return g;
}

void solve_all_xi(const Model& model, Beliefs& beliefs) {
  beliefs.xi.resize(model.edges().size());
  for (size_t e = 0; e < model.edges().size(); ++e) {
    const Edge& ed = model.edges()[e];
    beliefs.xi[e] = xi_solve(beliefs.q[static_cast<size_t>(ed.i)],
                             beliefs.q[static_cast<size_t>(ed.j)], ed.w);
  }
}

}  // namespace bopt
