#include "hiersynth/refine.hpp"
#include "hiersynth/systems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

namespace hiersynth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t cache_key(LeafId leaf, std::size_t input) {
  return (static_cast<std::uint64_t>(leaf) << 20) | static_cast<std::uint64_t>(input);
}

struct VectorHash {
  std::size_t operator()(const std::vector<double>& v) const {
    std::size_t h = 0;
    for (double x : v) h ^= std::hash<double>{}(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

// Projections (partitioned dimensions only) of a set of leaves.  Symbols come
// from halving, so per dimension their intervals are nested or disjoint, and the
// intervals containing a symbol's interval are exactly those met along its
// ancestor chain.  Containment is then a hash lookup per ancestor combination.
class ProjectionIndex {
 public:
  ProjectionIndex(const SymbolStore& store, const std::vector<LeafId>& leaves)
      : store_(store), dims_(store.partition().dim()) {
    for (LeafId v : leaves) keys_.insert(key(store.box(v)));
  }

  bool covers(LeafId t) const {
    if (keys_.empty()) return false;
    std::vector<std::vector<std::pair<double, double>>> chains(static_cast<std::size_t>(dims_));
    for (std::optional<LeafId> a = t; a; a = store_.parent(*a)) {
      const BoxXd& b = store_.box(*a);
      for (Eigen::Index d = 0; d < dims_; ++d) {
        auto& chain = chains[static_cast<std::size_t>(d)];
        const std::pair<double, double> iv{b.lo(d), b.hi(d)};
        if (chain.empty() || chain.back() != iv) chain.push_back(iv);
      }
    }
    std::vector<std::size_t> pick(static_cast<std::size_t>(dims_), 0);
    std::vector<double> k(2 * static_cast<std::size_t>(dims_));
    while (true) {
      for (std::size_t d = 0; d < pick.size(); ++d) {
        k[2 * d] = chains[d][pick[d]].first;
        k[2 * d + 1] = chains[d][pick[d]].second;
      }
      if (keys_.count(k)) return true;
      std::size_t d = 0;
      while (d < pick.size() && ++pick[d] == chains[d].size()) pick[d++] = 0;
      if (d == pick.size()) return false;
    }
  }

 private:
  std::vector<double> key(const BoxXd& b) const {
    std::vector<double> k;
    for (Eigen::Index d = 0; d < dims_; ++d) {
      k.push_back(b.lo(d));
      k.push_back(b.hi(d));
    }
    return k;
  }

  const SymbolStore& store_;
  Eigen::Index dims_;
  std::unordered_set<std::vector<double>, VectorHash> keys_;
};

}  // namespace

Abstraction::Abstraction(SystemModel system, const Workspace& workspace, Plan plan, AbstractionConfig config)
    : system_(std::move(system)),
      workspace_(workspace),
      plan_(std::move(plan)),
      config_(std::move(config)),
      store_(workspace.partition(), system_.state_space, config_.initial_split, config_.max_depth, config_.policy) {
  if (plan_.cells.empty()) throw std::invalid_argument("Abstraction: empty plan");
  if (!(config_.tau > 0.0)) throw std::invalid_argument("Abstraction: sampling period must be positive");
  if (config_.inputs.empty()) throw std::invalid_argument("Abstraction: empty input set");
  if (config_.inputs.size() >= (1u << 20)) throw std::invalid_argument("Abstraction: too many inputs");
  for (const auto& u : config_.inputs)
    if (u.size() != system_.p) throw std::invalid_argument("Abstraction: input dimension mismatch");
  for (std::size_t k = 0; k < plan_.cells.size(); ++k) {
    const std::size_t c = plan_.cells[k];
    if (workspace_.is_obstacle(c)) throw std::invalid_argument("Abstraction: plan crosses an obstacle");
    if (!step_of_cell_.emplace(c, k).second) throw std::invalid_argument("Abstraction: plan repeats a cell");
  }
  if (config_.projection_2d) {
    if (system_.angular_dims.empty()) throw std::invalid_argument("Abstraction: projected mode needs an angular state");
    if (config_.rotate_input < 0 || config_.rotate_input >= system_.p)
      throw std::invalid_argument("Abstraction: rotate_input out of range");
  }
  store_.set_angular_dims(system_.angular_dims);
  ensure_size();
}

std::optional<std::size_t> Abstraction::step_of_cell(std::size_t cell) const {
  const auto it = step_of_cell_.find(cell);
  if (it == step_of_cell_.end()) return std::nullopt;
  return it->second;
}

void Abstraction::ensure_size() {
  valid_.resize(store_.node_count(), 0);
  input_.resize(store_.node_count(), -1);
}

BoxXd Abstraction::successor_box(LeafId leaf, std::size_t input) const {
  return over_approximate(system_, store_.box(leaf), config_.inputs.at(input), system_.disturbance_space, config_.tau,
                          config_.integrator_steps)
      .over_box;
}

std::vector<BoxXd> Abstraction::query_boxes(const BoxXd& over, bool& sink) const {
  const GridPartition& g = store_.partition();
  const Eigen::Index np = g.dim();
  const BoxXd space = store_.state_space();
  sink = false;
  const BoxXd proj = over.segment(0, np);
  if (!g.workspace().contains(proj)) sink = true;
  for (Eigen::Index d = np; d < over.dim(); ++d) {
    const bool angular = std::find(store_.angular_dims().begin(), store_.angular_dims().end(), d) !=
                         store_.angular_dims().end();
    if (!angular && (over.lo(d) < space.lo(d) || over.hi(d) > space.hi(d))) sink = true;
  }
  std::vector<int> first, last;
  if (g.cell_range(proj, first, last)) {
    std::vector<int> idx = first;
    while (true) {
      if (workspace_.is_obstacle(g.linear_index(idx))) {
        sink = true;
        break;
      }
      std::size_t d = 0;
      while (d < idx.size() && ++idx[d] > last[d]) {
        idx[d] = first[d];
        ++d;
      }
      if (d == idx.size()) break;
    }
  }

  // angular dimensions: shift into the state range, splitting where it wraps
  std::vector<BoxXd> queries{over};
  for (int d : store_.angular_dims()) {
    std::vector<BoxXd> next;
    const double base = space.lo(d), top = space.hi(d);
    for (const BoxXd& q : queries) {
      const double width = q.hi(d) - q.lo(d);
      if (width >= top - base) {
        next.push_back(q.with_interval(d, base, top));
        continue;
      }
      const double lo = wrap_angle(q.lo(d));
      const double hi = lo + width;
      if (hi <= top) {
        next.push_back(q.with_interval(d, lo, hi));
      } else {
        next.push_back(q.with_interval(d, lo, top));
        next.push_back(q.with_interval(d, base, hi - kTwoPi));
      }
    }
    queries = std::move(next);
  }
  return queries;
}

const Targets& Abstraction::transitions(LeafId leaf, std::size_t input) {
  if (input >= config_.inputs.size()) throw std::out_of_range("Abstraction::transitions: input index");
  if (!store_.is_leaf(leaf)) throw std::invalid_argument("Abstraction::transitions: not a leaf");
  const std::uint64_t key = cache_key(leaf, input);
  if (auto it = cache_.find(key); it != cache_.end()) {
    Entry& e = it->second;
    const bool stale = std::any_of(e.targets.leaves.begin(), e.targets.leaves.end(),
                                   [&](LeafId t) { return !store_.is_leaf(t); });
    if (stale) {
      // replace split targets by their descendants that still meet the query boxes
      std::vector<LeafId> repaired;
      for (LeafId t : e.targets.leaves) {
        if (store_.is_leaf(t)) {
          repaired.push_back(t);
          continue;
        }
        for (LeafId s : store_.leaves_below(t))
          if (std::any_of(e.queries.begin(), e.queries.end(), [&](const BoxXd& q) { return store_.box(s).intersects(q); }))
            repaired.push_back(s);
      }
      std::sort(repaired.begin(), repaired.end());
      repaired.erase(std::unique(repaired.begin(), repaired.end()), repaired.end());
      e.targets.leaves = std::move(repaired);
    }
    return e.targets;
  }

  Entry e;
  const BoxXd over = successor_box(leaf, input);
  e.queries = query_boxes(over, e.targets.sink);
  std::vector<int> first, last;
  const GridPartition& g = store_.partition();
  if (g.cell_range(over.segment(0, g.dim()), first, last)) {
    std::vector<int> idx = first;
    while (true) {
      const std::size_t c = g.linear_index(idx);
      if (!workspace_.is_obstacle(c))
        for (const BoxXd& q : e.queries) store_.collect(c, q, e.targets.leaves);
      std::size_t d = 0;
      while (d < idx.size() && ++idx[d] > last[d]) {
        idx[d] = first[d];
        ++d;
      }
      if (d == idx.size()) break;
    }
  }
  std::sort(e.targets.leaves.begin(), e.targets.leaves.end());
  e.targets.leaves.erase(std::unique(e.targets.leaves.begin(), e.targets.leaves.end()), e.targets.leaves.end());
  ++computed_;
  return cache_.emplace(key, std::move(e)).first->second.targets;
}

bool Abstraction::is_valid(LeafId leaf) const {
  if (leaf == kSinkLeaf || !store_.is_leaf(leaf)) return false;
  const auto step = step_of_cell(store_.cell(leaf));
  if (!step) return false;
  if (*step + 1 == steps()) return true;
  return leaf < valid_.size() && valid_[leaf];
}

int Abstraction::input_of(LeafId leaf) const {
  if (!is_valid(leaf)) throw std::invalid_argument("Abstraction::input_of: leaf is not valid");
  return leaf < input_.size() ? input_[leaf] : -1;
}

std::vector<LeafId> Abstraction::valid_set(std::size_t step) const {
  std::vector<LeafId> out;
  for (LeafId s : store_.leaves(plan_.cells.at(step)))
    if (is_valid(s)) out.push_back(s);
  return out;
}

bool Abstraction::covered_2d(LeafId leaf) const {
  const auto step = step_of_cell(store_.cell(leaf));
  if (!step) return false;
  return ProjectionIndex(store_, valid_set(*step)).covers(leaf);
}

std::vector<LeafId> Abstraction::splittable_invalid(std::size_t step) const {
  std::vector<LeafId> out;
  if (step + 1 >= steps()) return out;
  const auto leaves = store_.leaves(plan_.cells[step]);
  if (config_.projection_2d) {
    const ProjectionIndex index(store_, valid_set(step));
    for (LeafId s : leaves)
      if (!index.covers(s) && store_.can_split(s)) out.push_back(s);
  } else {
    for (LeafId s : leaves)
      if (!is_valid(s) && store_.can_split(s)) out.push_back(s);
  }
  return out;
}

bool Abstraction::initial_cell_complete() const {
  if (steps() == 1) return true;
  const auto leaves = store_.leaves(plan_.cells[0]);
  if (config_.projection_2d) {
    const ProjectionIndex index(store_, valid_set(0));
    return std::all_of(leaves.begin(), leaves.end(), [&](LeafId s) { return index.covers(s); });
  }
  return std::all_of(leaves.begin(), leaves.end(), [&](LeafId s) { return is_valid(s); });
}

void Abstraction::valid_set_step(std::size_t k) {
  if (k + 1 >= steps()) throw std::out_of_range("valid_set_step: step has no successor");
  ensure_size();
  const std::size_t next_cell = plan_.cells[k + 1];
  std::optional<ProjectionIndex> index;
  if (config_.projection_2d) index.emplace(store_, valid_set(k + 1));
  auto ok = [&](LeafId t) {
    if (store_.cell(t) != next_cell) return false;
    return index ? index->covers(t) : is_valid(t);
  };
  for (LeafId s : store_.leaves(plan_.cells[k])) {
    valid_[s] = 0;
    input_[s] = -1;
    for (std::size_t i = 0; i < config_.inputs.size(); ++i) {
      const Targets& t = transitions(s, i);
      if (t.sink || t.leaves.empty()) continue;
      if (std::all_of(t.leaves.begin(), t.leaves.end(), ok)) {
        valid_[s] = 1;
        input_[s] = static_cast<int>(i);
        break;
      }
    }
  }
}

std::size_t Abstraction::split_invalid(std::size_t j) {
  const auto leaves = splittable_invalid(j);
  for (LeafId s : leaves) {
    for (std::size_t i = 0; i < config_.inputs.size(); ++i) cache_.erase(cache_key(s, i));
    store_.split(s);
    ensure_size();
    valid_[s] = 0;
    input_[s] = -1;
  }
  return leaves.size();
}

void Abstraction::mark_valid(LeafId leaf, int input) {
  ensure_size();
  if (!store_.is_leaf(leaf)) throw std::invalid_argument("mark_valid: not a leaf");
  valid_[leaf] = 1;
  input_[leaf] = input;
}

PickQueue::PickQueue(std::size_t steps) : counts_(steps, 0) {
  for (std::size_t j = 0; j < steps; ++j) order_.push_back(j);
}

std::optional<std::size_t> PickQueue::pick(std::size_t k, const std::function<bool(std::size_t)>& eligible) const {
  std::optional<std::size_t> best;
  for (std::size_t j : order_) {
    if (j < k || (eligible && !eligible(j))) continue;
    if (!best || counts_[j] < counts_[*best]) best = j;
  }
  return best;
}

void PickQueue::refined(std::size_t j) {
  ++counts_.at(j);
  order_.erase(std::find(order_.begin(), order_.end(), j));
  order_.push_back(j);
}

RefineStats refine_plan(Abstraction& abs, const RefineObserver& observer) {
  RefineStats stats;
  const std::size_t r = abs.steps() - 1;
  stats.splits_per_step.assign(abs.steps(), 0);
  PickQueue queue(r);
  auto recompute = [&](std::size_t l) {
    abs.valid_set_step(l);
    if (observer) observer(abs, l);
  };
  for (std::size_t k = r; k-- > 0;) {
    recompute(k);
    while (abs.valid_set(k).empty() || (k == 0 && !abs.initial_cell_complete())) {
      if (stats.iterations >= abs.config().max_iterations)
        throw BudgetExhausted("refinement budget of " + std::to_string(abs.config().max_iterations) +
                              " iterations exhausted at plan step " + std::to_string(k));
      const auto j = queue.pick(k, [&](std::size_t s) { return !abs.splittable_invalid(s).empty(); });
      if (!j)
        throw BudgetExhausted("no invalid symbol left to split (maximum depth) at plan step " + std::to_string(k));
      abs.split_invalid(*j);
      queue.refined(*j);
      ++stats.iterations;
      ++stats.splits_per_step[*j];
      for (std::size_t l = *j + 1; l-- > k;) recompute(l);
    }
  }
  for (std::size_t k = 0; k < abs.steps(); ++k) stats.leaves += abs.store().leaves(abs.plan().cells[k]).size();
  stats.transitions = abs.transitions_computed();
  return stats;
}

ControlAction concretize(const Abstraction& abs, const VectorXd& z) {
  const SymbolStore& store = abs.store();
  const auto leaf = store.locate(z);
  if (!leaf) throw ContractViolation("state lies outside the symbolic state space");
  const auto step = abs.step_of_cell(store.cell(*leaf));
  if (!step) throw ContractViolation("state lies in cell " + std::to_string(store.cell(*leaf)) + " outside the plan");
  ControlAction action;
  action.step = *step;
  action.leaf = *leaf;
  if (*step + 1 == abs.steps()) {
    action.kind = ControlAction::Kind::arrived;
    action.u = VectorXd::Zero(abs.system().p);
    return action;
  }
  if (abs.is_valid(*leaf)) {
    action.kind = ControlAction::Kind::drive;
    action.input = abs.input_of(*leaf);
    action.u = abs.config().inputs[static_cast<std::size_t>(action.input)];
    return action;
  }
  if (!abs.config().projection_2d) throw ContractViolation("state is in an invalid symbol");

  // rotate in place toward the closest valid angular interval above this position
  const int a = store.angular_dims().front();
  const Eigen::Index np = store.partition().dim();
  const double theta = wrap_angle(z[a]);
  struct Candidate {
    double distance;
    LeafId leaf;
    double target;
  };
  std::vector<Candidate> candidates;
  for (LeafId v : abs.valid_set(*step)) {
    const BoxXd& b = store.box(v);
    if (!b.segment(0, np).contains(VectorXd(z.head(np)))) continue;
    const double target = 0.5 * (b.lo(a) + b.hi(a));
    candidates.push_back({wrap_angle(target - theta), v, target});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    return std::abs(x.distance) != std::abs(y.distance) ? std::abs(x.distance) < std::abs(y.distance) : x.leaf < y.leaf;
  });
  for (const auto& c : candidates) {
    VectorXd zt = z;
    zt[a] = c.target;
    if (store.locate(zt) != c.leaf) continue;
    action.kind = ControlAction::Kind::rotate;
    action.leaf = c.leaf;
    action.u = VectorXd::Zero(abs.system().p);
    const int w = abs.config().rotate_input;
    action.u[w] = c.distance >= 0.0 ? abs.system().control_space.hi(w) : abs.system().control_space.lo(w);
    return action;
  }
  throw ContractViolation("state projection is not covered by any valid symbol");
}

}  // namespace hiersynth
