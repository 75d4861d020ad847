#include "hiersynth/pipeline.hpp"
#include "hiersynth/systems.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hiersynth {

namespace {

void check_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

const YAML::Node require(const YAML::Node& node, const std::string& key, const std::string& where) {
  const YAML::Node v = node[key];
  if (!v) throw ConfigError(where + ": missing '" + key + "'");
  return v;
}

template <typename T>
T scalar_as(const YAML::Node& node, const std::string& where) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + ": bad value '" + YAML::Dump(node) + "'");
  }
}

VectorXd vector_of(const YAML::Node& node, const std::string& where) {
  if (!node.IsSequence()) throw ConfigError(where + ": expected a list of numbers");
  VectorXd v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) v[static_cast<Eigen::Index>(i)] = scalar_as<double>(node[i], where);
  return v;
}

std::vector<int> ints_of(const YAML::Node& node, const std::string& where) {
  if (!node.IsSequence()) throw ConfigError(where + ": expected a list of integers");
  std::vector<int> v;
  for (const auto& x : node) v.push_back(scalar_as<int>(x, where));
  return v;
}

BoxXd box_of(const YAML::Node& node, const std::string& where) {
  check_keys(node, where, {"lower", "upper"});
  const VectorXd lo = vector_of(require(node, "lower", where), where + ".lower");
  const VectorXd hi = vector_of(require(node, "upper", where), where + ".upper");
  if (lo.size() != hi.size()) throw ConfigError(where + ": lower and upper differ in length");
  if ((lo.array() > hi.array()).any()) throw ConfigError(where + ": lower exceeds upper");
  return BoxXd(lo, hi);
}

Eigen::MatrixXd matrix_of(const YAML::Node& node, const std::string& where) {
  if (!node.IsSequence() || node.size() == 0) throw ConfigError(where + ": expected a list of rows");
  const std::size_t cols = node[0].size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(node.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < node.size(); ++r) {
    const VectorXd row = vector_of(node[r], where);
    if (static_cast<std::size_t>(row.size()) != cols) throw ConfigError(where + ": ragged matrix");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

DisturbanceKind disturbance_of(const std::string& text) {
  if (text == "zero") return DisturbanceKind::zero;
  if (text == "extreme") return DisturbanceKind::extreme;
  if (text == "random") return DisturbanceKind::random;
  throw ConfigError("simulation.disturbance: expected zero, extreme or random, got '" + text + "'");
}

void validate(const Scenario& s) {
  const auto n = static_cast<std::size_t>(s.lower.size());
  if (s.cells.size() != n) throw ConfigError("workspace.cells: one count per workspace dimension expected");
  if (std::any_of(s.cells.begin(), s.cells.end(), [](int c) { return c < 1; }))
    throw ConfigError("workspace.cells: counts must be positive");
  if ((s.lower.array() >= s.upper.array()).any()) throw ConfigError("workspace: empty bounds");
  auto valid_index = [&](const std::vector<int>& m) {
    if (m.size() != n) return false;
    for (std::size_t d = 0; d < n; ++d)
      if (m[d] < 0 || m[d] >= s.cells[d]) return false;
    return true;
  };
  for (const auto& o : s.obstacles)
    if (!valid_index(o)) throw ConfigError("workspace.obstacles: cell index out of range");
  if (s.regions.empty()) throw ConfigError("workspace.regions: at least one region is needed");
  for (const auto& [name, m] : s.regions) {
    if (!valid_index(m)) throw ConfigError("workspace.regions." + name + ": cell index out of range");
    if (std::find(s.obstacles.begin(), s.obstacles.end(), m) != s.obstacles.end())
      throw ConfigError("workspace.regions." + name + ": region lies on an obstacle");
  }

  if (s.model == "unicycle") {
    if (n != 2) throw ConfigError("system: the unicycle needs a 2D workspace");
    if (s.controls.dim() != 2 || s.disturbances.dim() != 3)
      throw ConfigError("system: the unicycle needs 2 controls and 3 disturbances");
  } else if (s.model == "linear") {
    const auto ni = static_cast<Eigen::Index>(n);
    if (s.A.rows() != ni || s.A.cols() != ni) throw ConfigError("system.A: expected a square matrix of workspace size");
    if (s.B.rows() != ni || s.B.cols() != s.controls.dim()) throw ConfigError("system.B: shape does not match controls");
    if (s.E.rows() != ni || s.E.cols() != s.disturbances.dim())
      throw ConfigError("system.E: shape does not match disturbances");
  } else {
    throw ConfigError("system.model: expected unicycle or linear, got '" + s.model + "'");
  }

  if (s.formula.empty()) throw ConfigError("specification.formula: missing");
  if (!s.regions.count(s.initial_region))
    throw ConfigError("specification.initial: unknown region '" + s.initial_region + "'");
  if (s.tau && !(*s.tau > 0)) throw ConfigError("synthesis.tau: must be positive");
  if (s.input_counts.size() != static_cast<std::size_t>(s.controls.dim()))
    throw ConfigError("synthesis.inputs: one count per control dimension expected");
  if (std::any_of(s.input_counts.begin(), s.input_counts.end(), [](int c) { return c < 1; }))
    throw ConfigError("synthesis.inputs: counts must be positive");
  const std::size_t state_dim = s.model == "unicycle" ? 3 : n;
  if (!s.initial_split.empty() && s.initial_split.size() != state_dim)
    throw ConfigError("synthesis.initial_split: one count per state dimension expected");
  if (s.max_iterations < 0 || s.max_depth < 0 || s.integrator_steps < 1)
    throw ConfigError("synthesis: budgets must be non-negative");
  if (s.projection_2d && s.model != "unicycle") throw ConfigError("synthesis.projection_2d: unicycle only");
}

}  // namespace

Scenario parse_scenario(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario is not valid YAML: ") + e.what());
  }
  check_keys(root, "scenario", {"name", "workspace", "system", "specification", "synthesis", "simulation"});
  Scenario s;
  if (root["name"]) s.name = scalar_as<std::string>(root["name"], "name");

  const YAML::Node ws = require(root, "workspace", "scenario");
  check_keys(ws, "workspace", {"lower", "upper", "cells", "obstacles", "regions"});
  s.lower = vector_of(require(ws, "lower", "workspace"), "workspace.lower");
  s.upper = vector_of(require(ws, "upper", "workspace"), "workspace.upper");
  if (s.lower.size() != s.upper.size()) throw ConfigError("workspace: lower and upper differ in length");
  s.cells = ints_of(require(ws, "cells", "workspace"), "workspace.cells");
  if (ws["obstacles"])
    for (const auto& o : ws["obstacles"]) s.obstacles.push_back(ints_of(o, "workspace.obstacles"));
  const YAML::Node regions = require(ws, "regions", "workspace");
  if (!regions.IsMap()) throw ConfigError("workspace.regions: expected a mapping");
  for (const auto& kv : regions)
    s.regions[kv.first.as<std::string>()] = ints_of(kv.second, "workspace.regions");

  const YAML::Node sys = require(root, "system", "scenario");
  check_keys(sys, "system", {"model", "controls", "disturbances", "A", "B", "E"});
  s.model = scalar_as<std::string>(require(sys, "model", "system"), "system.model");
  s.controls = box_of(require(sys, "controls", "system"), "system.controls");
  if (sys["disturbances"]) {
    s.disturbances = box_of(sys["disturbances"], "system.disturbances");
  } else {
    const Eigen::Index q = s.model == "unicycle" ? 3 : s.lower.size();
    s.disturbances = BoxXd(VectorXd::Zero(q), VectorXd::Zero(q));
  }
  if (s.model == "linear") {
    s.A = matrix_of(require(sys, "A", "system"), "system.A");
    s.B = matrix_of(require(sys, "B", "system"), "system.B");
    s.E = sys["E"] ? matrix_of(sys["E"], "system.E")
                   : Eigen::MatrixXd::Identity(s.lower.size(), s.disturbances.dim()).eval();
  }

  const YAML::Node spec = require(root, "specification", "scenario");
  check_keys(spec, "specification", {"formula", "initial", "transitions"});
  s.formula = scalar_as<std::string>(require(spec, "formula", "specification"), "specification.formula");
  s.initial_region = scalar_as<std::string>(require(spec, "initial", "specification"), "specification.initial");
  if (spec["transitions"]) {
    std::map<std::string, std::vector<std::string>> delta;
    if (!spec["transitions"].IsMap()) throw ConfigError("specification.transitions: expected a mapping");
    for (const auto& kv : spec["transitions"])
      delta[kv.first.as<std::string>()] = scalar_as<std::vector<std::string>>(kv.second, "specification.transitions");
    s.transitions = std::move(delta);
  }

  s.input_counts.assign(static_cast<std::size_t>(s.controls.dim()), 5);
  if (const YAML::Node syn = root["synthesis"]) {
    check_keys(syn, "synthesis",
               {"tau", "tau_slack", "inputs", "initial_split", "max_depth", "max_iterations", "integrator_steps",
                "projection_2d", "rotate_input", "avoid_other_rois", "obstacle_penalty"});
    if (syn["tau"] && scalar_as<std::string>(syn["tau"], "synthesis.tau") != "auto")
      s.tau = scalar_as<double>(syn["tau"], "synthesis.tau");
    if (syn["tau_slack"]) s.tau_slack = scalar_as<double>(syn["tau_slack"], "synthesis.tau_slack");
    if (syn["inputs"]) s.input_counts = ints_of(syn["inputs"], "synthesis.inputs");
    if (syn["initial_split"]) s.initial_split = ints_of(syn["initial_split"], "synthesis.initial_split");
    if (syn["max_depth"]) s.max_depth = scalar_as<int>(syn["max_depth"], "synthesis.max_depth");
    if (syn["max_iterations"]) s.max_iterations = scalar_as<int>(syn["max_iterations"], "synthesis.max_iterations");
    if (syn["integrator_steps"])
      s.integrator_steps = scalar_as<int>(syn["integrator_steps"], "synthesis.integrator_steps");
    if (syn["projection_2d"]) s.projection_2d = scalar_as<bool>(syn["projection_2d"], "synthesis.projection_2d");
    if (syn["rotate_input"]) s.rotate_input = scalar_as<int>(syn["rotate_input"], "synthesis.rotate_input");
    if (syn["avoid_other_rois"])
      s.avoid_other_rois = scalar_as<bool>(syn["avoid_other_rois"], "synthesis.avoid_other_rois");
    if (syn["obstacle_penalty"])
      s.obstacle_penalty = scalar_as<double>(syn["obstacle_penalty"], "synthesis.obstacle_penalty");
  }

  if (const YAML::Node sim = root["simulation"]) {
    check_keys(sim, "simulation", {"seed", "suffix_iterations", "disturbance"});
    if (sim["seed"]) s.seed = scalar_as<std::uint64_t>(sim["seed"], "simulation.seed");
    if (sim["suffix_iterations"])
      s.suffix_iterations = scalar_as<std::size_t>(sim["suffix_iterations"], "simulation.suffix_iterations");
    if (sim["disturbance"])
      s.disturbance = disturbance_of(scalar_as<std::string>(sim["disturbance"], "simulation.disturbance"));
  }

  validate(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

Workspace make_workspace(const Scenario& s) {
  GridPartition g(BoxXd(s.lower, s.upper), s.cells);
  std::vector<std::size_t> obstacles;
  for (const auto& o : s.obstacles) obstacles.push_back(g.linear_index(o));
  std::map<std::string, std::size_t> rois;
  for (const auto& [name, m] : s.regions) rois[name] = g.linear_index(m);
  return Workspace(std::move(g), obstacles, std::move(rois));
}

SystemModel make_system(const Scenario& s) {
  const BoxXd space(s.lower, s.upper);
  if (s.model == "unicycle") return unicycle_model(s.disturbances, space, s.controls);
  return linear_model(s.A, s.B, s.E, space, s.controls, s.disturbances);
}

RoiTransitionSystem make_roi_system(const Scenario& s) {
  std::vector<std::string> names;
  for (const auto& [name, cell] : s.regions) names.push_back(name);
  if (!s.transitions) return RoiTransitionSystem::complete(std::move(names));
  RoiTransitionSystem ts{names, *s.transitions};
  try {
    ts.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("specification.transitions: ") + e.what());
  }
  return ts;
}

}  // namespace hiersynth
