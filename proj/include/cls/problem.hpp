#pragma once

// One fully specified reaction-diffusion run: model, grids, time stepping, truncation
// order and recovery. Shared by the sweep drivers and the command-line front end.

#include <string>
#include <string_view>
#include <vector>

#include "cls/evolve.hpp"

namespace cls {

enum class Scheme { fdm, cl, cls };

Scheme parse_scheme(std::string_view name);
std::string_view to_string(Scheme scheme);

enum class InitialCondition {
  cosine,   // 0.5 - 0.5 cos(2 pi x)
  constant  // every node equals initial_value
};

InitialCondition parse_initial_condition(std::string_view name);
std::string_view to_string(InitialCondition initial);

struct ProblemConfig {
  ReactionDiffusionParams params;
  double x_length = 1.0;
  Index n_x = 36;
  NodeLayout node_layout = NodeLayout::interior;
  double p_left = -20.0;
  double p_right = 20.0;
  Index n_p = 256;
  double t_end = 0.4;
  Index n_t = 400000;
  int order = 3;
  InitialCondition initial = InitialCondition::cosine;
  double initial_value = 0.5;
  RecoverySpec recovery;
  std::vector<double> sample_times = kDefaultSampleTimes;
  bool allow_unstable = false;
  Index check_every = 256;
  Index symmetric_reduction_above = 20000;
  /// Keeps warped-state snapshots in cls trajectories (not a config key).
  bool keep_wpt_snapshots = false;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  SpatialGrid1D grid() const { return SpatialGrid1D(x_length, n_x, node_layout); }
  AuxGrid aux() const { return AuxGrid(p_left, p_right, n_p); }
  TimeGrid time() const { return TimeGrid(t_end, n_t); }
  FieldState initial_state() const;
  EvolveOptions evolve_options() const;
};

/// Runs one solver on the configured problem.
Trajectory run_scheme(const ProblemConfig& config, Scheme scheme);

}  // namespace cls
