#include <doctest.h>

#include "hiersynth/grid.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace hiersynth;

namespace {

GridPartition grid(int nx, int ny) {
  return GridPartition(BoxXd(Eigen::Vector2d(0, 0), Eigen::Vector2d(nx, ny)), {nx, ny});
}

std::size_t at(const GridPartition& g, int x, int y) { return g.linear_index({x, y}); }

bool facet_adjacent(const GridPartition& g, std::size_t a, std::size_t b) {
  const auto ia = g.multi_index(a), ib = g.multi_index(b);
  int diff = 0;
  for (std::size_t d = 0; d < ia.size(); ++d) diff += std::abs(ia[d] - ib[d]);
  return diff == 1;
}

// Bellman-Ford relaxation over all cell pairs: independent of the search code.
std::vector<double> brute_force_distances(const Workspace& ws, std::size_t from, const TransitionCost& cost) {
  const std::size_t n = ws.partition().cell_count();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  dist[from] = 0;
  for (std::size_t round = 0; round < n; ++round) {
    bool changed = false;
    for (std::size_t a = 0; a < n; ++a) {
      if (ws.is_obstacle(a) || std::isinf(dist[a])) continue;
      for (std::size_t b = 0; b < n; ++b) {
        if (ws.is_obstacle(b) || !facet_adjacent(ws.partition(), a, b)) continue;
        const double c = cost ? cost(a, b) : 1.0;
        if (dist[a] + c < dist[b]) {
          dist[b] = dist[a] + c;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return dist;
}

void check_plan_shape(const Workspace& ws, const Plan& plan, std::size_t from, std::size_t to) {
  REQUIRE(!plan.cells.empty());
  CHECK(plan.cells.front() == from);
  CHECK(plan.cells.back() == to);
  for (std::size_t c : plan.cells) CHECK_FALSE(ws.is_obstacle(c));
  for (std::size_t k = 0; k + 1 < plan.cells.size(); ++k)
    CHECK(facet_adjacent(ws.partition(), plan.cells[k], plan.cells[k + 1]));
}

}  // namespace

TEST_CASE("workspace validation") {
  const auto g = grid(3, 3);
  CHECK_THROWS_AS(Workspace(g, {9}, {}), std::invalid_argument);
  CHECK_THROWS_AS(Workspace(g, {4}, {{"a", 4}}), std::invalid_argument);
  CHECK_THROWS_AS(Workspace(g, {}, {{"a", 12}}), std::invalid_argument);
  const Workspace ws(g, {4}, {{"a", 0}});
  CHECK(ws.obstacles() == std::vector<std::size_t>{4});
  CHECK(ws.touches_obstacle(1));
  CHECK_FALSE(ws.touches_obstacle(0));
  CHECK_THROWS_AS(ws.roi_cell("b"), std::invalid_argument);
}

TEST_CASE("neighbors") {
  const auto g = grid(4, 3);
  const Workspace ws(g, {at(g, 2, 1)}, {});
  CHECK(neighbors(ws, at(g, 1, 1)) ==
        std::vector<std::size_t>{at(g, 1, 1), at(g, 0, 1), at(g, 1, 0), at(g, 1, 2)});
  CHECK(neighbors(ws, at(g, 2, 1)).empty());
  CHECK(neighbors(ws, at(g, 0, 0)) == std::vector<std::size_t>{at(g, 0, 0), at(g, 1, 0), at(g, 0, 1)});
  CHECK_THROWS_AS(neighbors(ws, 12), std::out_of_range);

  const GridPartition cube(BoxXd(Eigen::Vector3d::Zero(), Eigen::Vector3d::Constant(3)), {3, 3, 3});
  const Workspace ws3(cube, {}, {});
  CHECK(neighbors(ws3, cube.linear_index({1, 1, 1})).size() == 7);
}

TEST_CASE("shortest_plan examples") {
  const auto g = grid(5, 4);
  // wall at x = 2 with no door
  std::vector<std::size_t> wall;
  for (int y = 0; y < 4; ++y) wall.push_back(at(g, 2, y));
  const Workspace walled(g, wall, {});
  CHECK(shortest_plan(walled, at(g, 0, 0), at(g, 1, 0)).cells.size() == 2);
  CHECK(shortest_plan(walled, at(g, 3, 3), at(g, 3, 3)) == Plan{{at(g, 3, 3)}});
  CHECK_THROWS_AS(shortest_plan(walled, at(g, 0, 0), at(g, 4, 0)), PlanInfeasible);
  CHECK_THROWS_AS(shortest_plan(walled, at(g, 0, 0), at(g, 2, 0)), PlanInfeasible);

  // door at (2, 3): the plan goes through it
  wall.pop_back();
  const Workspace door(g, wall, {});
  const Plan p = shortest_plan(door, at(g, 0, 0), at(g, 4, 0));
  check_plan_shape(door, p, at(g, 0, 0), at(g, 4, 0));
  CHECK(p.cells.size() == 11);
  CHECK(std::find(p.cells.begin(), p.cells.end(), at(g, 2, 3)) != p.cells.end());

  // ties are broken by the fixed expansion order (-x, +x, -y, +y)
  const Workspace open(grid(2, 2), {}, {});
  CHECK(shortest_plan(open, 0, 3).cells == std::vector<std::size_t>{0, 1, 3});

  // forbidden cells are avoided unless they are the goal
  PlanOptions opt;
  opt.forbidden = {1};
  CHECK(shortest_plan(open, 0, 3, opt).cells == std::vector<std::size_t>{0, 2, 3});
  CHECK(shortest_plan(open, 0, 1, opt).cells == std::vector<std::size_t>{0, 1});
}

TEST_CASE("plan lengths match a brute-force oracle (property)") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 40; ++trial) {
    const int nx = std::uniform_int_distribution<int>(2, 20)(rng);
    const int ny = std::uniform_int_distribution<int>(2, 12)(rng);
    const auto g = grid(nx, ny);
    std::vector<std::size_t> obs;
    for (std::size_t c = 0; c < g.cell_count(); ++c)
      if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.25) obs.push_back(c);
    const Workspace ws(g, obs, {});
    const bool weighted = trial % 2 == 1;
    const TransitionCost cost = weighted ? obstacle_penalty_cost(ws, 2.5) : TransitionCost{};
    std::uniform_int_distribution<std::size_t> cell(0, g.cell_count() - 1);
    for (int q = 0; q < 10; ++q) {
      const std::size_t a = cell(rng), b = cell(rng);
      if (ws.is_obstacle(a) || ws.is_obstacle(b)) continue;
      const auto dist = brute_force_distances(ws, a, cost);
      PlanOptions opt;
      opt.cost = cost;
      if (std::isinf(dist[b])) {
        CHECK_THROWS_AS(shortest_plan(ws, a, b, opt), PlanInfeasible);
        continue;
      }
      const Plan p = shortest_plan(ws, a, b, opt);
      check_plan_shape(ws, p, a, b);
      double length = 0;
      for (std::size_t k = 0; k + 1 < p.cells.size(); ++k) length += cost ? cost(p.cells[k], p.cells[k + 1]) : 1.0;
      CHECK(length == doctest::Approx(dist[b]));
    }
  }
}

TEST_CASE("plans_for_path") {
  const auto g = grid(6, 3);
  const Workspace ws(g, {}, {{"a", at(g, 0, 1)}, {"b", at(g, 5, 1)}, {"c", at(g, 2, 1)}});
  CHECK(plans_for_path(ws, {}).empty());

  const auto plans = plans_for_path(ws, {{"a", "b"}, {"b", "b"}, {"a", "b"}});
  REQUIRE(plans.size() == 2);
  CHECK(plans[0].pair == RegionPair{"a", "b"});
  CHECK(plans[1].plan.cells == std::vector<std::size_t>{at(g, 5, 1)});
  // the straight line crosses region c; avoiding other regions detours around it
  const auto& direct = plans[0].plan.cells;
  CHECK(std::find(direct.begin(), direct.end(), at(g, 2, 1)) != direct.end());
  const auto detour = plans_for_path(ws, {{"a", "b"}}, true);
  const auto& cells = detour[0].plan.cells;
  CHECK(std::find(cells.begin(), cells.end(), at(g, 2, 1)) == cells.end());
  CHECK(cells.size() == direct.size() + 2);

  const Workspace blocked(g, {at(g, 1, 0), at(g, 1, 1), at(g, 1, 2)}, {{"a", at(g, 0, 1)}, {"b", at(g, 5, 1)}});
  CHECK_THROWS_AS(plans_for_path(blocked, {{"a", "b"}}), PlanInfeasible);
}
