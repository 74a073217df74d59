#pragma once

#include <string>

#include "bopt/gaussian.hpp"
#include "bopt/harness.hpp"
#include "bopt/model.hpp"
#include "bopt/solver_config.hpp"

namespace bopt {

struct LoadedModel {
  Model model;
  Evidence evidence;
};

// Reads { "num_nodes": n, "biases": [...], "edges": [[i, j, w], ...],
//         "evidence": {"3": 1, ...} }. biases, edges and evidence may be
// omitted (zero biases, no edges, no evidence). Edges must satisfy i < j.
// Unknown keys, duplicate edges, out-of-range indices and non-binary
// evidence are rejected with the offending field named in the message.
LoadedModel load_model(const std::string& path);

void save_model(const LoadedModel& loaded, const std::string& path);

// Same layout with a required "diag" array of length num_nodes; evidence is
// not part of the Gaussian format.
GaussianModel load_gaussian_model(const std::string& path);

// Overlay: fields present in the file replace those in `defaults`, all
// others keep their values. Accepted keys match the SolveConfig fields,
// with "init" given as uniform-half | bias-sigmoid | seeded-noise.
SolveConfig load_solve_config(const std::string& path,
                              const SolveConfig& defaults);

// Sweep description. An optional "preset" (desk | full-grid | full-cubic)
// seeds the spec; remaining keys then override it field by field. Topology
// objects: {"kind": "square", "rows": r, "cols": c},
// {"kind": "cubic-periodic", "side": s}, {"kind": "tree", "n": n[, "seed"]},
// or {"kind": "edges", "num_nodes": n, "edges": [[i, j], ...]}.
SweepSpec load_sweep_spec(const std::string& path);

}  // namespace bopt
