#pragma once

#include "hiersynth/box.hpp"
#include "hiersynth/grid.hpp"
#include "hiersynth/reach.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace hiersynth {

using LeafId = std::uint32_t;
/// Target standing for "left the workspace or touched an obstacle".  Never valid.
inline constexpr LeafId kSinkLeaf = std::numeric_limits<LeafId>::max();

enum class SplitPolicy { uniform, longest_dimension };

class MaxDepthReached : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Interval symbols organised as one tree per partition cell.  The root of a cell
 * is its lifted box: the cell along the partitioned dimensions times the full
 * state range along the remaining ones.  Leaves of a tree tile the root, ids are
 * never reused, and a split leaf keeps its id as an interior node.
 */
class SymbolStore {
 public:
  SymbolStore(GridPartition partition, BoxXd state_space, std::vector<int> initial_split = {}, int max_depth = 6,
              SplitPolicy policy = SplitPolicy::uniform);

  const GridPartition& partition() const { return partition_; }
  const BoxXd& state_space() const { return state_space_; }
  int max_depth() const { return max_depth_; }
  SplitPolicy policy() const { return policy_; }

  LeafId root(std::size_t cell) const { return roots_.at(cell); }
  const BoxXd& box(LeafId id) const { return node(id).box; }
  std::size_t cell(LeafId id) const { return node(id).cell; }
  bool is_leaf(LeafId id) const { return node(id).children.empty(); }
  std::optional<LeafId> parent(LeafId id) const;
  const std::vector<LeafId>& children(LeafId id) const { return node(id).children; }
  /// Number of splits along each dimension between the root and this symbol.
  const std::vector<int>& depth(LeafId id) const { return node(id).depth; }

  /// Leaves of the cell's tree in depth-first order (= P_a(cell)).
  std::vector<LeafId> leaves(std::size_t cell) const;
  /// Leaves of the subtree below `id` (just `id` for a leaf).
  std::vector<LeafId> leaves_below(LeafId id) const;
  std::size_t node_count() const { return nodes_.size(); }

  bool can_split(LeafId id) const;
  /// Split a leaf according to the policy; returns the new leaves.
  std::vector<LeafId> split(LeafId id);

  /// H(z): the leaf containing z, with the half-open convention inside every node
  /// (upper-closed on the root boundary).  Angular dimensions are wrapped first.
  std::optional<LeafId> locate(const VectorXd& z) const;

  /// Leaves of the cell meeting the closed box q (closed intersection).
  void collect(std::size_t cell, const BoxXd& q, std::vector<LeafId>& out) const;

  void set_angular_dims(std::vector<int> dims) { angular_dims_ = std::move(dims); }
  const std::vector<int>& angular_dims() const { return angular_dims_; }

 private:
  struct Node {
    BoxXd box;
    std::size_t cell;
    LeafId parent;
    std::vector<LeafId> children;
    std::vector<int> depth;
  };
  const Node& node(LeafId id) const { return nodes_.at(id); }
  LeafId add(BoxXd box, std::size_t cell, LeafId parent, std::vector<int> depth);

  GridPartition partition_;
  BoxXd state_space_;
  int max_depth_;
  SplitPolicy policy_;
  std::vector<int> angular_dims_;
  std::vector<Node> nodes_;
  std::vector<LeafId> roots_;
};

struct AbstractionConfig {
  double tau = 1.0;
  std::vector<VectorXd> inputs;  ///< U_a in its fixed order
  int integrator_steps = kDefaultIntegratorSteps;
  std::vector<int> initial_split;  ///< per state dimension, empty for none
  int max_depth = 6;
  SplitPolicy policy = SplitPolicy::uniform;
  int max_iterations = 200;
  /// Validity through the projection on the partitioned dimensions: a target is
  /// acceptable when its projection lies inside the projection of a valid symbol
  /// of the next cell.  Requires rotate_input for concretization.
  bool projection_2d = false;
  int rotate_input = 1;  ///< control index that turns the angular state
};

struct Targets {
  std::vector<LeafId> leaves;  ///< sorted, alive at the time of the query
  bool sink = false;
};

/**
 * Abstraction S_a of one plan: symbols, cached transitions, valid sets and the
 * controller table.  Plan step k refers to cell plan.cells[k].
 */
class Abstraction {
 public:
  Abstraction(SystemModel system, const Workspace& workspace, Plan plan, AbstractionConfig config);

  const SystemModel& system() const { return system_; }
  const Workspace& workspace() const { return workspace_; }
  const Plan& plan() const { return plan_; }
  const AbstractionConfig& config() const { return config_; }
  const SymbolStore& store() const { return store_; }
  std::size_t steps() const { return plan_.cells.size(); }
  /// Plan step of a cell, if the plan visits it.
  std::optional<std::size_t> step_of_cell(std::size_t cell) const;

  /// delta_a(leaf, input), computed on first use and repaired after splits.
  const Targets& transitions(LeafId leaf, std::size_t input);
  /// Fresh over-approximation of the successor set, before leaf intersection.
  BoxXd successor_box(LeafId leaf, std::size_t input) const;
  /// Query boxes for an over-box: angular ranges wrapped into the state range,
  /// possibly as two pieces.  Also reports whether the sink is reached.
  std::vector<BoxXd> query_boxes(const BoxXd& over, bool& sink) const;
  std::size_t transitions_computed() const { return computed_; }

  bool is_valid(LeafId leaf) const;
  /// Input index chosen for a valid leaf; -1 for leaves of the final cell.
  int input_of(LeafId leaf) const;
  std::vector<LeafId> valid_set(std::size_t step) const;
  /// Whether the leaf's projection lies in the projection of a valid leaf of its cell.
  bool covered_2d(LeafId leaf) const;
  /// Leaves the refinement loop would split in this step: invalid ones (or, in projected
  /// mode, those not covered) that are still splittable.
  std::vector<LeafId> splittable_invalid(std::size_t step) const;
  /// Exit condition of the refinement loop: the first cell is fully valid.
  bool initial_cell_complete() const;

  /// Valid-set iteration for one step: recompute V(sigma_k) from V(sigma_{k+1}).
  void valid_set_step(std::size_t k);
  /// Split every splittable invalid leaf of step j; returns how many were split.
  std::size_t split_invalid(std::size_t j);
  /// Hand-built abstractions only: mark a leaf valid with the given input.
  void mark_valid(LeafId leaf, int input);
  SymbolStore& mutable_store() { return store_; }

 private:
  struct Entry {
    Targets targets;
    std::vector<BoxXd> queries;
  };
  void ensure_size();

  SystemModel system_;
  Workspace workspace_;
  Plan plan_;
  AbstractionConfig config_;
  SymbolStore store_;
  std::map<std::size_t, std::size_t> step_of_cell_;
  std::unordered_map<std::uint64_t, Entry> cache_;
  std::vector<char> valid_;
  std::vector<int> input_;
  std::size_t computed_ = 0;
};

class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// FIFO queue of plan steps used to pick where to refine next.
class PickQueue {
 public:
  explicit PickQueue(std::size_t steps);
  /// Least refined step in [k, steps-1] accepted by `eligible`; ties go to the one
  /// earliest in the queue.
  std::optional<std::size_t> pick(std::size_t k, const std::function<bool(std::size_t)>& eligible) const;
  /// Record a refinement of step j and move it to the back of the queue.
  void refined(std::size_t j);
  const std::vector<std::size_t>& order() const { return order_; }
  int count(std::size_t j) const { return counts_.at(j); }

 private:
  std::vector<std::size_t> order_;
  std::vector<int> counts_;
};

struct RefineStats {
  int iterations = 0;
  std::vector<int> splits_per_step;
  std::size_t leaves = 0;
  std::size_t transitions = 0;
};

/// Called after each valid-set recomputation with the step just recomputed.
using RefineObserver = std::function<void(const Abstraction&, std::size_t step)>;

/// Refine until the first cell is fully valid.  Throws BudgetExhausted when the
/// iteration budget runs out or no invalid symbol can be split any further.
RefineStats refine_plan(Abstraction& abs, const RefineObserver& observer = {});

struct ControlAction {
  enum class Kind { drive, rotate, arrived } kind = Kind::drive;
  VectorXd u;
  LeafId leaf = kSinkLeaf;  ///< leaf whose input is used (drive) or aimed at (rotate)
  int input = -1;
  std::size_t step = 0;
};

class ContractViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Feedback controller C(z) = C_a(H(z)), with the rotation rule of the
/// projected mode when H(z) is invalid but its projection is covered.
ControlAction concretize(const Abstraction& abs, const VectorXd& z);

}  // namespace hiersynth
