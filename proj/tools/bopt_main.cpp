// Command-line front end: marginal inference on one model, parameter
// sweeps, exact oracles, and the Gaussian solver/probe. Exit code 0 covers
// every reported outcome (including non-convergence); only structural
// problems (bad files, bad flags) exit nonzero.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bopt/baselines.hpp"
#include "bopt/bethe.hpp"
#include "bopt/bo_solver.hpp"
#include "bopt/exact.hpp"
#include "bopt/gaussian.hpp"
#include "bopt/harness.hpp"
#include "bopt/model_io.hpp"
#include "bopt/rng.hpp"
#include "bopt/solver_config.hpp"

namespace {

using nlohmann::json;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iters;
  std::optional<double> tol;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "solver config JSON file");
  cmd->add_option("--seed", flags.seed, "RNG seed override");
  cmd->add_option("--max-iters", flags.max_iters, "iteration cap override");
  cmd->add_option("--tol", flags.tol,
                  "residual / step tolerance override (tol_q)");
}

bopt::SolveConfig make_config(const CommonFlags& flags) {
  bopt::SolveConfig config;
  if (!flags.config_path.empty())
    config = bopt::load_solve_config(flags.config_path, config);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.max_iters) {
    if (*flags.max_iters < 1)
      throw std::invalid_argument("--max-iters must be >= 1");
    config.max_iters = *flags.max_iters;
  }
  if (flags.tol) {
    if (*flags.tol < 0) throw std::invalid_argument("--tol must be >= 0");
    config.tol_q = *flags.tol;
  }
  return config;
}

json report_to_json(const bopt::SolveReport& report) {
  return json{{"status", bopt::to_string(report.status)},
              {"converged", report.converged},
              {"iterations", report.iterations},
              {"free_energy", report.final_free_energy},
              {"grad_norm", report.final_grad_norm},
              {"wall_seconds", report.wall_seconds}};
}

void write_trace(const bopt::SolveReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "iteration,free_energy,grad_norm,max_dq\n";
  for (const bopt::IterationTrace& t : report.trace)
    out << t.iteration << ',' << t.free_energy << ',' << t.grad_norm << ','
        << t.max_dq << '\n';
}

// Lifts beliefs over the conditioned model back to the original indexing:
// observed nodes carry their clamped value, an edge with an observed
// endpoint at 0 has xi = 0, at 1 has xi = (marginal of the other endpoint).
void expand_beliefs(const bopt::Model& original, const bopt::Evidence& evidence,
                    const bopt::ConditionResult& cond,
                    const bopt::Beliefs& reduced, std::vector<double>& q_full,
                    std::vector<double>& xi_full) {
  const auto value_of = [&](int node) {
    return evidence.assignments().at(node);
  };
  q_full.assign(static_cast<size_t>(original.num_nodes()), 0.0);
  for (int i = 0; i < original.num_nodes(); ++i) {
    const int r = cond.old_to_new[static_cast<size_t>(i)];
    q_full[static_cast<size_t>(i)] =
        r < 0 ? static_cast<double>(value_of(i)) : reduced.q[static_cast<size_t>(r)];
  }

  xi_full.assign(original.edges().size(), 0.0);
  for (size_t e = 0; e < original.edges().size(); ++e) {
    const bopt::Edge& ed = original.edges()[e];
    const int ri = cond.old_to_new[static_cast<size_t>(ed.i)];
    const int rj = cond.old_to_new[static_cast<size_t>(ed.j)];
    if (ri >= 0 && rj >= 0) {
      // hidden-hidden edges survive conditioning; locate the reduced edge
      double xi = 0.0;
      bool found = false;
      for (const bopt::Neighbor& nb : cond.model.neighbors(ri))
        if (nb.node == rj) {
          xi = reduced.xi[static_cast<size_t>(nb.edge)];
          found = true;
          break;
        }
      if (!found) throw std::logic_error("conditioned edge missing");
      xi_full[e] = xi;
    } else {
      // exact for a clamped endpoint: E[s_i s_j] = v_i E[s_j]
      xi_full[e] = q_full[static_cast<size_t>(ed.i)] *
                   q_full[static_cast<size_t>(ed.j)];
    }
  }
}

json xi_rows(const bopt::Model& model, const std::vector<double>& xi) {
  json rows = json::array();
  for (size_t e = 0; e < model.edges().size(); ++e)
    rows.push_back({model.edges()[e].i, model.edges()[e].j, xi[e]});
  return rows;
}

int cmd_infer(const std::string& model_path, const std::string& method_name,
              const CommonFlags& flags, const std::string& trace_path) {
  bopt::Method method;
  if (!bopt::parse_method(method_name, method))
    throw std::invalid_argument("unknown method \"" + method_name +
                                "\" (mf | tap | bp | bo-grad | bo-fp)");
  const bopt::LoadedModel loaded = bopt::load_model(model_path);
  bopt::SolveConfig config = make_config(flags);
  if (!trace_path.empty()) config.record_trace = true;

  const bopt::ConditionResult cond =
      bopt::condition(loaded.model, loaded.evidence);
  const std::map<bopt::Method, bopt::MethodRun> runs =
      bopt::run_methods(cond.model, {method}, config);
  const bopt::MethodRun& run = runs.at(method);

  std::vector<double> q_full, xi_full;
  expand_beliefs(loaded.model, loaded.evidence, cond, run.beliefs, q_full,
                 xi_full);

  json out;
  out["method"] = bopt::to_string(method);
  out["q"] = q_full;
  out["xi"] = xi_rows(loaded.model, xi_full);
  out["free_energy"] = run.report.final_free_energy;
  out["report"] = report_to_json(run.report);
  if (!loaded.evidence.empty()) {
    out["observed"] = json::object();
    for (const auto& [node, value] : loaded.evidence.assignments())
      out["observed"][std::to_string(node)] = value;
    // -ln Z of the full model splits as free_energy - log_constant
    out["log_evidence_constant"] = cond.log_constant;
  }
  std::cout << out.dump(2) << '\n';

  if (!trace_path.empty()) write_trace(run.report, trace_path);
  return 0;
}

int cmd_exact(const std::string& model_path, const std::string& oracle_name,
              const bopt::GibbsConfig& gibbs_config) {
  bopt::OracleKind oracle;
  if (!bopt::parse_oracle(oracle_name, oracle))
    throw std::invalid_argument("unknown oracle \"" + oracle_name +
                                "\" (brute | elim | gibbs)");
  const bopt::LoadedModel loaded = bopt::load_model(model_path);
  const bopt::ConditionResult cond =
      bopt::condition(loaded.model, loaded.evidence);

  bopt::ExactResult result;
  switch (oracle) {
    case bopt::OracleKind::brute:
      result = bopt::brute_force(cond.model);
      break;
    case bopt::OracleKind::elimination:
      result = bopt::exact_marginals_via_elimination(cond.model);
      break;
    case bopt::OracleKind::gibbs:
      result = bopt::gibbs(cond.model, gibbs_config);
      break;
  }

  bopt::Beliefs reduced{result.q, result.xi};
  std::vector<double> q_full, xi_full;
  expand_beliefs(loaded.model, loaded.evidence, cond, reduced, q_full, xi_full);

  json out;
  out["oracle"] = bopt::to_string(oracle);
  out["q"] = q_full;
  out["xi"] = xi_rows(loaded.model, xi_full);
  if (result.log_z) {
    out["log_z"] = *result.log_z + cond.log_constant;
    if (!loaded.evidence.empty()) out["log_z_hidden"] = *result.log_z;
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& preset_name,
              const std::string& out_path, const std::string& times_path,
              const CommonFlags& flags) {
  bopt::SweepSpec spec = spec_path.empty() ? bopt::sweep_preset(preset_name)
                                           : bopt::load_sweep_spec(spec_path);
  if (!flags.config_path.empty())
    spec.config = bopt::load_solve_config(flags.config_path, spec.config);
  if (flags.seed) spec.seed = *flags.seed;
  if (flags.max_iters) {
    if (*flags.max_iters < 1)
      throw std::invalid_argument("--max-iters must be >= 1");
    spec.config.max_iters = *flags.max_iters;
  }
  if (flags.tol) {
    if (*flags.tol < 0) throw std::invalid_argument("--tol must be >= 0");
    spec.config.tol_q = *flags.tol;
  }

  const std::vector<bopt::CellResult> rows =
      bopt::sweep(spec, out_path, times_path);
  std::cerr << "wrote " << rows.size() << " rows to " << out_path << '\n';
  return 0;
}

int cmd_gaussian_solve(const std::string& model_path, const CommonFlags& flags) {
  const bopt::GaussianModel model = bopt::load_gaussian_model(model_path);
  const bopt::SolveConfig config = make_config(flags);
  bopt::GaussianBeliefs beliefs;
  const bopt::SolveReport report = bopt::ga_solve(model, beliefs, config);

  json out;
  out["mu"] = beliefs.mu;
  out["v"] = beliefs.v;
  json vij = json::array();
  for (size_t e = 0; e < model.edges().size(); ++e)
    vij.push_back({model.edges()[e].i, model.edges()[e].j, beliefs.v_edge[e]});
  out["v_edge"] = vij;
  out["free_energy"] = report.final_free_energy;
  out["report"] = report_to_json(report);
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_gaussian_probe(const std::string& model_path, const CommonFlags& flags) {
  const bopt::GaussianModel model = bopt::load_gaussian_model(model_path);
  const bopt::SolveConfig config = make_config(flags);
  const bopt::ProbeRow row = bopt::ga_boundedness_probe(model, config);
  std::cout << "pd,gabo_status,gabp_status,n,seed\n"
            << (row.pd ? 1 : 0) << ',' << bopt::to_string(row.gabo_status)
            << ',' << bopt::to_string(row.gabp_status) << ',' << row.n << ','
            << row.seed << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bethe free-energy inference for binary pairwise models"};
  app.require_subcommand(1);

  // infer
  std::string infer_model, infer_method, infer_trace;
  CommonFlags infer_flags;
  CLI::App* infer = app.add_subcommand("infer", "run one method on one model");
  infer->add_option("--model", infer_model, "model JSON file")->required();
  infer->add_option("--method", infer_method, "mf | tap | bp | bo-grad | bo-fp")
      ->required();
  infer->add_option("--trace", infer_trace, "write per-iteration CSV here");
  add_common_flags(infer, infer_flags);

  // sweep
  std::string sweep_spec, sweep_preset_name, sweep_out, sweep_times;
  CommonFlags sweep_flags;
  CLI::App* sweep = app.add_subcommand("sweep", "scale-grid experiment");
  CLI::Option* spec_opt =
      sweep->add_option("--spec", sweep_spec, "sweep spec JSON file");
  sweep->add_option("--preset", sweep_preset_name,
                    "desk | full-grid | full-cubic")
      ->excludes(spec_opt);
  sweep->add_option("--out", sweep_out, "result CSV path")->required();
  sweep->add_option("--times", sweep_times,
                    "wall-time CSV path (default: OUT.times)");
  add_common_flags(sweep, sweep_flags);

  // exact
  std::string exact_model, exact_oracle;
  bopt::GibbsConfig gibbs_config;
  CLI::App* exact = app.add_subcommand("exact", "exact / sampled marginals");
  exact->add_option("--model", exact_model, "model JSON file")->required();
  exact->add_option("--oracle", exact_oracle, "brute | elim | gibbs")
      ->required();
  exact->add_option("--samples", gibbs_config.n_samples, "gibbs sweep count");
  exact->add_option("--burn-in", gibbs_config.burn_in, "gibbs burn-in sweeps");
  exact->add_option("--seed", gibbs_config.seed, "gibbs RNG seed");

  // gaussian
  CLI::App* gaussian = app.add_subcommand("gaussian", "continuous variant");
  gaussian->require_subcommand(1);
  std::string ga_solve_model, ga_probe_model;
  CommonFlags ga_solve_flags, ga_probe_flags;
  CLI::App* ga_solve_cmd =
      gaussian->add_subcommand("solve", "means + variances");
  ga_solve_cmd->add_option("--model", ga_solve_model, "model JSON file")
      ->required();
  add_common_flags(ga_solve_cmd, ga_solve_flags);
  CLI::App* ga_probe_cmd = gaussian->add_subcommand(
      "probe", "boundedness vs convergence outcome row");
  ga_probe_cmd->add_option("--model", ga_probe_model, "model JSON file")
      ->required();
  add_common_flags(ga_probe_cmd, ga_probe_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (infer->parsed())
      return cmd_infer(infer_model, infer_method, infer_flags, infer_trace);
    if (sweep->parsed()) {
      if (sweep_spec.empty() && sweep_preset_name.empty())
        throw std::invalid_argument("sweep needs --spec or --preset");
      return cmd_sweep(sweep_spec, sweep_preset_name, sweep_out, sweep_times,
                       sweep_flags);
    }
    if (exact->parsed())
      return cmd_exact(exact_model, exact_oracle, gibbs_config);
    if (gaussian->parsed()) {
      if (ga_solve_cmd->parsed())
        return cmd_gaussian_solve(ga_solve_model, ga_solve_flags);
      if (ga_probe_cmd->parsed())
        return cmd_gaussian_probe(ga_probe_model, ga_probe_flags);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
