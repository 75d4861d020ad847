#include <doctest.h>

#include "hiersynth/box.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace hiersynth;

namespace {

BoxXd box1(double lo, double hi) { return BoxXd(VectorXd::Constant(1, lo), VectorXd::Constant(1, hi)); }

BoxXd box2(double x0, double x1, double y0, double y1) {
  return BoxXd(Eigen::Vector2d(x0, y0), Eigen::Vector2d(x1, y1));
}

}  // namespace

TEST_CASE("box construction rejects inverted or mismatched corners") {
  CHECK_THROWS_AS(box1(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(BoxXd(VectorXd::Zero(2), VectorXd::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(BoxXd(VectorXd(), VectorXd()), std::invalid_argument);
  CHECK_NOTHROW(box1(0.5, 0.5));
}

TEST_CASE("contains") {
  CHECK(box2(0, 1, 0, 1).contains(VectorXd(Eigen::Vector2d(0.5, 0.5))));
  CHECK(box1(0, 1).contains(VectorXd::Constant(1, 1.0)));
  CHECK_FALSE(box1(0, 1).contains(VectorXd::Constant(1, 1.0 + 1e-9)));
  CHECK_THROWS_AS(box1(0, 1).contains(VectorXd(Eigen::Vector2d(0.0, 0.0))), std::invalid_argument);
}

TEST_CASE("intersects uses closed boxes") {
  CHECK(box1(0, 1).intersects(box1(1, 2)));
  CHECK_FALSE(box1(0, 1).intersects(box1(1.1, 2)));
  CHECK(box2(0, 2, 0, 2).intersects(box2(1, 3, 1, 3)));
  CHECK_THROWS_AS(box1(0, 1).intersects(box2(0, 1, 0, 1)), std::invalid_argument);
}

TEST_CASE("split") {
  SUBCASE("1D halves") {
    const auto parts = box1(0, 2).split({2});
    REQUIRE(parts.size() == 2);
    CHECK(parts[0] == box1(0, 1));
    CHECK(parts[1] == box1(1, 2));
  }
  SUBCASE("unit cube into 2^3") {
    const BoxXd cube(VectorXd::Zero(3), VectorXd::Ones(3));
    const auto parts = cube.split({2, 2, 2});
    REQUIRE(parts.size() == 8);
    for (const auto& p : parts) CHECK(p.width().isApprox(VectorXd::Constant(3, 0.5)));
    // lexicographic: last dimension fastest
    CHECK(parts[1].lo() == Eigen::Vector3d(0, 0, 0.5));
    CHECK(parts[4].lo() == Eigen::Vector3d(0.5, 0, 0));
  }
  SUBCASE("theta-only split of a lifted cell") {
    const double pi = std::numbers::pi;
    const BoxXd cell(Eigen::Vector3d(0, 0, -pi), Eigen::Vector3d(1.65, 1.6667, pi));
    const auto parts = cell.split({1, 1, 4});
    REQUIRE(parts.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(parts[k].lo(0) == 0.0);
      CHECK(parts[k].hi(1) == 1.6667);
      CHECK(parts[k].hi(2) - parts[k].lo(2) == doctest::Approx(pi / 2));
    }
    CHECK(parts[0].lo(2) == -pi);
    CHECK(parts[3].hi(2) == pi);
  }
  SUBCASE("zero parts rejected") { CHECK_THROWS_AS(box1(0, 1).split({0}), std::invalid_argument); }
}

TEST_CASE("split tiles the box (property)") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  std::uniform_int_distribution<int> count(1, 4);
  for (int trial = 0; trial < 200; ++trial) {
    VectorXd a(3), b(3);
    for (int i = 0; i < 3; ++i) {
      a[i] = coord(rng);
      b[i] = coord(rng);
    }
    const BoxXd box(a.cwiseMin(b), a.cwiseMax(b));
    const std::vector<int> parts{count(rng), count(rng), count(rng)};
    const auto children = box.split(parts);
    CHECK(children.size() == static_cast<std::size_t>(parts[0] * parts[1] * parts[2]));
    for (int s = 0; s < 50; ++s) {
      VectorXd z(3);
      for (int i = 0; i < 3; ++i)
        z[i] = box.lo(i) + std::uniform_real_distribution<double>(0.0, 1.0)(rng) * (box.hi(i) - box.lo(i));
      int containing = 0;
      for (const auto& c : children) containing += c.contains(z) ? 1 : 0;
      CHECK(containing >= 1);
      if (containing > 1) {
        // only possible on a shared boundary
        bool on_boundary = false;
        for (const auto& c : children)
          if (c.contains(z))
            for (int i = 0; i < 3; ++i) on_boundary |= (z[i] == c.lo(i) || z[i] == c.hi(i));
        CHECK(on_boundary);
      }
    }
    for (const auto& c : children) {
      CHECK(c.intersects(c));
      for (const auto& e : children) CHECK(c.intersects(e) == e.intersects(c));
    }
  }
}

TEST_CASE("grid partition indexing and half-open location") {
  const GridPartition grid(box2(0, 33, 0, 20), {20, 12});
  CHECK(grid.cell_count() == 240);
  CHECK(grid.linear_index({3, 2}) == 43u);
  CHECK(grid.multi_index(43) == std::vector<int>{3, 2});
  const BoxXd c = grid.cell_box(43);
  CHECK(c.lo(0) == doctest::Approx(3 * 1.65));
  CHECK(c.hi(1) == doctest::Approx(3 * 20.0 / 12.0));

  std::size_t cell = 0;
  // lower-closed, upper-open inside the workspace
  REQUIRE(grid.locate(VectorXd(Eigen::Vector2d(c.lo(0), c.lo(1))), cell));
  CHECK(cell == 43u);
  REQUIRE(grid.locate(VectorXd(Eigen::Vector2d(c.hi(0), c.lo(1))), cell));
  CHECK(cell == 44u);
  // upper-closed on the workspace boundary
  REQUIRE(grid.locate(VectorXd(Eigen::Vector2d(33.0, 20.0)), cell));
  CHECK(cell == 239u);
  CHECK_FALSE(grid.locate(VectorXd(Eigen::Vector2d(33.0 + 1e-12, 1.0)), cell));

  std::vector<int> first, last;
  REQUIRE(grid.cell_range(box2(c.lo(0), c.hi(0), c.lo(1), c.hi(1)), first, last));
  CHECK(first == std::vector<int>{2, 1});  // closed box touches the neighbours
  CHECK(last == std::vector<int>{4, 3});
  CHECK_FALSE(grid.cell_range(box2(40, 41, 0, 1), first, last));
}

TEST_CASE("every cell box contains the points it locates") {
  const GridPartition grid(box2(0, 33, 0, 20), {20, 12});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(0.0, 33.0), y(0.0, 20.0);
  for (int i = 0; i < 2000; ++i) {
    const VectorXd z = Eigen::Vector2d(x(rng), y(rng));
    std::size_t cell = 0;
    REQUIRE(grid.locate(z, cell));
    CHECK(grid.cell_box(cell).contains(z));
  }
}
