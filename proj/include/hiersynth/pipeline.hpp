#pragma once

#include "hiersynth/grid.hpp"
#include "hiersynth/ltl.hpp"
#include "hiersynth/refine.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hiersynth {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DisturbanceKind { zero, extreme, random };

/// Everything needed to run the three layers and the closed loop.  The YAML
/// schema is documented in README.md; defaults match the office example.
struct Scenario {
  std::string name = "scenario";

  // workspace
  VectorXd lower, upper;
  std::vector<int> cells;
  std::vector<std::vector<int>> obstacles;            ///< multi-indices
  std::map<std::string, std::vector<int>> regions;    ///< name -> multi-index

  // system
  std::string model = "unicycle";  ///< "unicycle" or "linear"
  BoxXd controls, disturbances;
  Eigen::MatrixXd A, B, E;         ///< linear model only

  // specification
  std::string formula;
  std::string initial_region;
  std::optional<std::map<std::string, std::vector<std::string>>> transitions;  ///< empty: complete

  // synthesis
  std::optional<double> tau;  ///< empty: suggest_tau
  double tau_slack = 1.2;
  std::vector<int> input_counts;
  std::vector<int> initial_split;
  int max_depth = 6;
  int max_iterations = 200;
  int integrator_steps = kDefaultIntegratorSteps;
  bool projection_2d = false;
  int rotate_input = 1;
  bool avoid_other_rois = false;
  double obstacle_penalty = 0.0;

  // simulation
  std::uint64_t seed = 1;
  std::size_t suffix_iterations = 1;
  DisturbanceKind disturbance = DisturbanceKind::zero;
};

Scenario parse_scenario(const std::string& yaml_text);
Scenario load_scenario(const std::string& path);

Workspace make_workspace(const Scenario& s);
SystemModel make_system(const Scenario& s);
RoiTransitionSystem make_roi_system(const Scenario& s);

/// Sampling period slack * max(cell size) / vmax.
double suggest_tau(const GridPartition& partition, double vmax, double slack);

/// Uniform grid over U with counts[i] values per dimension, endpoints included;
/// a count of 1 gives the midpoint.  The last dimension varies fastest.
std::vector<VectorXd> discretize_inputs(const BoxXd& u, const std::vector<int>& counts);

AbstractionConfig make_abstraction_config(const Scenario& s, const Workspace& ws);

enum class Layer { specification = 1, planning = 2, synthesis = 3 };

class PipelineError : public std::runtime_error {
 public:
  PipelineError(Layer layer, const std::string& what) : std::runtime_error(what), layer_(layer) {}
  Layer layer() const { return layer_; }

 private:
  Layer layer_;
};

struct PlanController {
  RegionPair pair;
  Plan plan;
  std::shared_ptr<Abstraction> abstraction;  ///< null when synthesis was skipped
  RefineStats stats;
  double seconds = 0.0;
};

struct SynthesisBundle {
  AcceptingPath path;
  std::vector<PlanController> controllers;  ///< one per distinct pair, in path order
  double ltl_seconds = 0.0;
  double plan_seconds = 0.0;
  double synthesis_seconds = 0.0;

  /// Index of the controller for a pair; throws std::out_of_range.
  std::size_t controller_index(const RegionPair& pair) const;
};

struct PipelineOptions {
  bool synthesize = true;  ///< false stops after the planning layer
  unsigned threads = 0;    ///< 0: hardware concurrency
  std::function<void(const std::string&)> log;
};

/// Layer 1 -> layer 2 -> layer 3.  Failures are reported as PipelineError tagged
/// with the layer; configuration problems as ConfigError.
SynthesisBundle run_pipeline(const Scenario& s, const PipelineOptions& options = {});

struct TrajectorySample {
  double t = 0.0;
  VectorXd z;
  VectorXd u;
  std::string mode;  ///< drive, rotate or arrived
  std::size_t plan = 0;
  std::size_t step = 0;
};

struct TrajectoryRecord {
  std::vector<TrajectorySample> samples;  ///< one per control application, plus the final state
  std::vector<double> dense_t;            ///< every integrator substep, for plotting
  std::vector<VectorXd> dense_z;
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, TrajectoryRecord trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const TrajectoryRecord& trace() const { return trace_; }

 private:
  TrajectoryRecord trace_;
};

struct SimulationOptions {
  std::size_t suffix_iterations = 1;
  DisturbanceKind disturbance = DisturbanceKind::zero;
  std::uint64_t seed = 1;
};

/// Region pairs followed by the closed loop: prefix then `suffix_iterations`
/// copies of the suffix.  Pairs of a region with itself are dropped.
std::vector<RegionPair> simulation_pairs(const AcceptingPath& path, std::size_t suffix_iterations);

/// Uniform random state in the lifted initial region.
VectorXd random_initial_state(const SynthesisBundle& bundle, const Workspace& ws, const std::string& region,
                              std::uint64_t seed);

/**
 * Closed loop under the synthesized controllers.  Drive directives hold the
 * input for tau; rotate directives turn in place until the state enters a
 * valid symbol.  Disturbances are piecewise constant over quarters of tau.
 * Throws std::invalid_argument when z0 is not in the initial region and
 * SimulationError (with the trace so far) on a contract violation.
 */
TrajectoryRecord simulate(const SynthesisBundle& bundle, const VectorXd& z0, const SimulationOptions& options);

void write_trajectory_csv(const TrajectoryRecord& record, const std::string& path);
std::string trajectory_csv(const TrajectoryRecord& record);

/// Controller table of one plan: leaves with lo/hi arrays, validity per plan step
/// and the chosen input index.
std::string controller_json(const PlanController& controller);
void write_text(const std::string& text, const std::string& path);

/// Workspace plot: grid, obstacles, regions, valid-set projections and trajectories.
std::string workspace_svg(const Workspace& ws, const std::vector<const PlanController*>& controllers,
                          const std::vector<const TrajectoryRecord*>& trajectories);

}  // namespace hiersynth
