#include "hiersynth/grid.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <queue>
#include <tuple>

namespace hiersynth {

Workspace::Workspace(GridPartition partition, const std::vector<std::size_t>& obstacles,
                     std::map<std::string, std::size_t> rois)
    : partition_(std::move(partition)), obstacle_(partition_.cell_count(), false), rois_(std::move(rois)) {
  for (std::size_t c : obstacles) {
    if (c >= partition_.cell_count()) throw std::invalid_argument("obstacle cell index out of range");
    obstacle_[c] = true;
  }
  for (const auto& [name, cell] : rois_) {
    if (cell >= partition_.cell_count()) throw std::invalid_argument("region '" + name + "' out of range");
    if (obstacle_[cell]) throw std::invalid_argument("region '" + name + "' lies on an obstacle");
  }
}

std::vector<std::size_t> Workspace::obstacles() const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < obstacle_.size(); ++c)
    if (obstacle_[c]) out.push_back(c);
  return out;
}

bool Workspace::is_obstacle(std::size_t cell) const {
  if (cell >= obstacle_.size()) throw std::out_of_range("cell index out of range");
  return obstacle_[cell];
}

std::size_t Workspace::roi_cell(const std::string& name) const {
  const auto it = rois_.find(name);
  if (it == rois_.end()) throw std::invalid_argument("unknown region '" + name + "'");
  return it->second;
}

namespace {

// Facet neighbours inside the grid, obstacles included.
std::vector<std::size_t> adjacent(const GridPartition& g, std::size_t cell) {
  std::vector<std::size_t> out;
  std::vector<int> idx = g.multi_index(cell);
  for (int d = 0; d < g.dim(); ++d) {
    for (int step : {-1, 1}) {
      idx[static_cast<std::size_t>(d)] += step;
      if (g.valid_multi_index(idx)) out.push_back(g.linear_index(idx));
      idx[static_cast<std::size_t>(d)] -= step;
    }
  }
  return out;
}

}  // namespace

bool Workspace::touches_obstacle(std::size_t cell) const {
  for (std::size_t n : adjacent(partition_, cell))
    if (obstacle_[n]) return true;
  return false;
}

std::vector<std::size_t> neighbors(const Workspace& ws, std::size_t cell) {
  if (ws.is_obstacle(cell)) return {};
  std::vector<std::size_t> out{cell};
  for (std::size_t n : adjacent(ws.partition(), cell))
    if (!ws.is_obstacle(n)) out.push_back(n);
  return out;
}

TransitionCost obstacle_penalty_cost(const Workspace& ws, double penalty) {
  if (!(penalty >= 0.0)) throw std::invalid_argument("obstacle penalty must be non-negative");
  return [&ws, penalty](std::size_t, std::size_t to) { return ws.touches_obstacle(to) ? 1.0 + penalty : 1.0; };
}

Plan shortest_plan(const Workspace& ws, std::size_t from, std::size_t to, const PlanOptions& options) {
  const std::size_t n = ws.partition().cell_count();
  if (from >= n || to >= n) throw std::out_of_range("shortest_plan: cell index out of range");
  if (ws.is_obstacle(from) || ws.is_obstacle(to)) throw PlanInfeasible("plan endpoint is an obstacle");
  if (from == to) return Plan{{from}};

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> parent(n, kNone);
  auto usable = [&](std::size_t c) { return c == to || !options.forbidden.count(c); };

  if (!options.cost) {
    std::vector<bool> seen(n, false);
    std::deque<std::size_t> queue{from};
    seen[from] = true;
    while (!queue.empty() && !seen[to]) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t w : neighbors(ws, u)) {
        if (seen[w] || !usable(w)) continue;
        seen[w] = true;
        parent[w] = u;
        queue.push_back(w);
      }
    }
  } else {
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    // (distance, insertion order, cell): insertion order keeps ties deterministic
    using Entry = std::tuple<double, std::size_t, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    std::size_t order = 0;
    dist[from] = 0.0;
    heap.emplace(0.0, order++, from);
    while (!heap.empty()) {
      const auto [d, ignored, u] = heap.top();
      heap.pop();
      if (d > dist[u]) continue;
      if (u == to) break;
      for (std::size_t w : neighbors(ws, u)) {
        if (w == u || !usable(w)) continue;
        const double c = options.cost(u, w);
        if (!(c > 0.0)) throw std::invalid_argument("transition costs must be positive");
        if (d + c < dist[w]) {
          dist[w] = d + c;
          parent[w] = u;
          heap.emplace(dist[w], order++, w);
        }
      }
    }
  }
  if (parent[to] == kNone) throw PlanInfeasible("no obstacle-free path between the two cells");
  Plan plan;
  for (std::size_t c = to; c != kNone; c = parent[c]) plan.cells.push_back(c);
  std::reverse(plan.cells.begin(), plan.cells.end());
  return plan;
}

std::vector<PairPlan> plans_for_path(const Workspace& ws, const std::vector<RegionPair>& pairs,
                                     bool avoid_other_rois, double obstacle_penalty) {
  std::vector<PairPlan> out;
  for (const auto& pair : pairs) {
    if (std::any_of(out.begin(), out.end(), [&](const PairPlan& p) { return p.pair == pair; })) continue;
    PlanOptions options;
    if (obstacle_penalty > 0.0) options.cost = obstacle_penalty_cost(ws, obstacle_penalty);
    const std::size_t from = ws.roi_cell(pair.first), to = ws.roi_cell(pair.second);
    if (avoid_other_rois)
      for (const auto& [name, cell] : ws.rois())
        if (cell != from && cell != to) options.forbidden.insert(cell);
    try {
      out.push_back({pair, shortest_plan(ws, from, to, options)});
    } catch (const PlanInfeasible& e) {
      throw PlanInfeasible("pair " + pair.first + " -> " + pair.second + ": " + e.what());
    }
  }
  return out;
}

}  // namespace hiersynth
