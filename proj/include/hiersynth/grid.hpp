#pragma once

#include "hiersynth/box.hpp"
#include "hiersynth/ltl.hpp"

#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hiersynth {

/// Partitioned workspace with obstacle cells and named regions of interest
/// (one cell each).
class Workspace {
 public:
  Workspace(GridPartition partition, const std::vector<std::size_t>& obstacles,
            std::map<std::string, std::size_t> rois);

  const GridPartition& partition() const { return partition_; }
  const std::map<std::string, std::size_t>& rois() const { return rois_; }
  std::vector<std::size_t> obstacles() const;
  bool is_obstacle(std::size_t cell) const;
  std::size_t roi_cell(const std::string& name) const;
  /// True when the cell shares a facet with an obstacle cell.
  bool touches_obstacle(std::size_t cell) const;

 private:
  GridPartition partition_;
  std::vector<bool> obstacle_;
  std::map<std::string, std::size_t> rois_;
};

/// The cell itself followed by its facet neighbours in the order -x, +x, -y, +y, ...
/// minus obstacles.  Empty for an obstacle cell.
std::vector<std::size_t> neighbors(const Workspace& ws, std::size_t cell);

struct Plan {
  std::vector<std::size_t> cells;
  bool operator==(const Plan&) const = default;
};

class PlanInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cost of moving between two adjacent cells; must be positive.
using TransitionCost = std::function<double(std::size_t from, std::size_t to)>;

/// Unit cost plus `penalty` for entering a cell next to an obstacle.
TransitionCost obstacle_penalty_cost(const Workspace& ws, double penalty);

struct PlanOptions {
  TransitionCost cost;                ///< empty: breadth-first search on unit costs
  std::set<std::size_t> forbidden;    ///< cells that may not be used as intermediate steps
};

Plan shortest_plan(const Workspace& ws, std::size_t from, std::size_t to, const PlanOptions& options = {});

struct PairPlan {
  RegionPair pair;
  Plan plan;
};

/// One plan per distinct pair, in the given order.  With `avoid_other_rois`,
/// intermediate cells never belong to a region of interest.
std::vector<PairPlan> plans_for_path(const Workspace& ws, const std::vector<RegionPair>& pairs,
                                     bool avoid_other_rois = false, double obstacle_penalty = 0.0);

}  // namespace hiersynth
