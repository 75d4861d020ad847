#include <doctest.h>

#include "hiersynth/reach.hpp"
#include "hiersynth/systems.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace hiersynth;

namespace {

constexpr double kPi = std::numbers::pi;

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

BoxXd interval(double lo, double hi) { return BoxXd(vec({lo}), vec({hi})); }

// z' = -z^3 on [-1, 1] with unused scalar control and disturbance.
SystemModel cubic_model() {
  SystemModel m;
  m.name = "cubic";
  m.n = m.p = m.q = 1;
  m.field = [](const VectorXd& z, const VectorXd&, const VectorXd&) { return VectorXd(-z.array().cube()); };
  BoundsTable t = BoundsTable::zeros(1, 1, 1);
  t.a_z(0, 0) = -3.0;
  t.b_z(0, 0) = 0.0;
  m.jacobian_bounds = constant_bounds(t);
  m.state_space = interval(-1, 1);
  m.control_space = interval(0, 0);
  m.disturbance_space = interval(0, 0);
  return m;
}

SystemModel monotone_linear() {
  Eigen::Matrix2d A;
  A << 0.1, 0.5, 0.2, 0.0;
  return linear_model(A, Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity(),
                      BoxXd(vec({-5, -5}), vec({5, 5})), BoxXd(vec({-1, -1}), vec({1, 1})),
                      BoxXd(vec({-0.1, -0.1}), vec({0.1, 0.1})));
}

VectorXd uniform_in(const BoxXd& b, std::mt19937_64& rng) {
  VectorXd z(b.dim());
  for (Eigen::Index i = 0; i < b.dim(); ++i)
    z[i] = std::uniform_real_distribution<double>(b.lo(i), b.hi(i))(rng);
  return z;
}

}  // namespace

TEST_CASE("classify sign cases") {
  CHECK(classify(0.2, 0.5) == SignCase::positive);
  CHECK(classify(-0.1, 0.4) == SignCase::mostly_positive);
  CHECK(classify(-0.4, 0.1) == SignCase::mostly_negative);
  CHECK(classify(-0.5, -0.2) == SignCase::negative);
  CHECK(classify(-1.0, 1.0) == SignCase::mostly_positive);
  CHECK(classify(0.0, 0.0) == SignCase::positive);
  CHECK_THROWS_AS(classify(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("build_decomposition") {
  SUBCASE("monotone system collapses to f") {
    const SystemModel sys = monotone_linear();
    const DecompositionSpec spec = build_decomposition(sys, sys.jacobian_bounds(sys.state_space, vec({0, 0}),
                                                                                sys.disturbance_space, 1.0));
    CHECK(spec.z.slope.isZero(0.0));
    CHECK(spec.u.slope.isZero(0.0));
    CHECK_FALSE(spec.z.starred.any());
    CHECK_FALSE(spec.d.starred.any());
    const VectorXd z = vec({0.3, -0.2}), u = vec({0.1, 0.2}), d = vec({0.05, -0.02});
    CHECK(g_eval(spec, sys, z, u, d, vec({4, 4}), vec({-1, 1}), vec({0.1, 0.1})) == sys.field(z, u, d));
  }
  SUBCASE("cubic: negative partial selects the starred argument") {
    const SystemModel sys = cubic_model();
    const auto spec = build_decomposition(sys, sys.jacobian_bounds(sys.state_space, vec({0}), sys.disturbance_space, 1));
    CHECK(spec.z.case_at(0, 0) == SignCase::negative);
    CHECK(spec.z.starred(0, 0));
    CHECK(spec.z.slope(0, 0) == 0.0);
    CHECK(g_eval(spec, sys, vec({0.5}), vec({0}), vec({0}), vec({-0.5}), vec({0}), vec({0}))[0] ==
          doctest::Approx(0.125));
  }
  SUBCASE("tie |a| = |b| is mostly positive with slope -a") {
    SystemModel sys = cubic_model();
    BoundsTable t = BoundsTable::zeros(1, 1, 1);
    t.a_z(0, 0) = -1.0;
    t.b_z(0, 0) = 1.0;
    const auto spec = build_decomposition(sys, t);
    CHECK(spec.z.case_at(0, 0) == SignCase::mostly_positive);
    CHECK_FALSE(spec.z.starred(0, 0));
    CHECK(spec.z.slope(0, 0) == 1.0);
  }
  SUBCASE("shape mismatch and invalid bounds are rejected") {
    const SystemModel sys = cubic_model();
    CHECK_THROWS_AS(build_decomposition(sys, BoundsTable::zeros(2, 1, 1)), std::invalid_argument);
    BoundsTable bad = BoundsTable::zeros(1, 1, 1);
    bad.a_z(0, 0) = 1.0;
    CHECK_THROWS_AS(build_decomposition(sys, bad), std::invalid_argument);
  }
}

TEST_CASE("h_eval") {
  const SystemModel sys = cubic_model();
  const auto spec = build_decomposition(sys, sys.jacobian_bounds(sys.state_space, vec({0}), sys.disturbance_space, 1));
  const VectorXd zero = vec({0});
  const VectorXd h = h_eval(spec, sys, vec({0.5, -0.5}), zero, zero, zero, zero);
  CHECK(h[0] == doctest::Approx(0.125));
  CHECK(h[1] == doctest::Approx(-0.125));
  const VectorXd diag = h_eval(spec, sys, vec({0.3, 0.3}), zero, zero, zero, zero);
  CHECK(diag[0] == sys.field(vec({0.3}), zero, zero)[0]);
  CHECK(diag[1] == diag[0]);
  const VectorXd swapped = h_eval(spec, sys, vec({-0.5, 0.5}), zero, zero, zero, zero);
  CHECK(swapped[0] == h[1]);
  CHECK(swapped[1] == h[0]);
}

TEST_CASE("integrate") {
  auto decay = [](const VectorXd& x) { return VectorXd(-x); };
  CHECK(integrate<double>(decay, vec({1.0}), 1.0, 100)[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
  auto still = [](const VectorXd& x) { return VectorXd(VectorXd::Zero(x.size())); };
  CHECK(integrate<double>(still, vec({1.5, -2.0}), 7.0, 3) == vec({1.5, -2.0}));

  const SystemModel uni = unicycle_model(BoxXd(VectorXd::Zero(3), VectorXd::Zero(3)));
  const VectorXd end = simulate_flow(uni, vec({3.0, 4.0, 0.0}), vec({0.5, 0.0}), VectorXd::Zero(3), 4.0, 64);
  CHECK(std::abs(end[0] - 5.0) <= 1e-9);
  CHECK(std::abs(end[1] - 4.0) <= 1e-9);
  CHECK(std::abs(end[2]) <= 1e-9);

  CHECK_THROWS_AS(integrate<double>(decay, vec({1.0}), -1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(integrate<double>(decay, vec({1.0}), 1.0, 0), std::invalid_argument);
  auto blowup = [](const VectorXd& x) { return VectorXd(x.array().square() * 1e10); };
  CHECK_THROWS_AS(integrate<double>(blowup, vec({10.0}), 10.0, 4), std::runtime_error);
}

TEST_CASE("orientation interval and trig extrema examples") {
  const BoxXd zero = interval(0, 0);
  CHECK(orientation_interval(zero, 0.3, zero, 4.0) == interval(0.0, 0.3 * 4.0));
  CHECK(orientation_interval(interval(-0.4, 0.2), 0.0, zero, 4.0) == interval(-0.4, 0.2));
  const BoxXd rot = orientation_interval(interval(-0.1, 0.1), -0.15, zero, 4.0);
  CHECK(rot.lo(0) == doctest::Approx(-0.7));
  CHECK(rot.hi(0) == doctest::Approx(0.1));

  CHECK(cos_min(interval(-kPi / 4, kPi / 4)) == doctest::Approx(std::cos(kPi / 4)));
  CHECK(cos_min(interval(kPi / 2, 3.2)) == -1.0);
  CHECK(cos_max(interval(-0.5, 0.3)) == 1.0);
  CHECK(sin_max(interval(0.2, 2.0)) == 1.0);
  CHECK(sin_min(interval(0.2, 2.0)) == doctest::Approx(std::sin(0.2)));
  CHECK(wrap_angle(kPi) == kPi);
  CHECK(wrap_angle(-kPi) == kPi);
  CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
}

TEST_CASE("trig extrema match a dense grid oracle (property)") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> start(-kPi, kPi), width(0.0, 3 * kPi), shift(-3 * kPi, 3 * kPi);
  for (int trial = 0; trial < 300; ++trial) {
    double lo = start(rng);
    double hi = lo + width(rng);
    if (trial % 2) {  // arbitrary placement, not only ranges meeting (-pi, pi]
      const double s = shift(rng);
      lo += s;
      hi += s;
    }
    const BoxXd th = interval(lo, hi);
    double cmin = 2, cmax = -2, smin = 2, smax = -2;
    constexpr int kGrid = 4096;
    for (int k = 0; k <= kGrid; ++k) {
      const double t = lo + (hi - lo) * k / kGrid;
      cmin = std::min(cmin, std::cos(t));
      cmax = std::max(cmax, std::cos(t));
      smin = std::min(smin, std::sin(t));
      smax = std::max(smax, std::sin(t));
    }
    const double grid_err = 0.5 * (hi - lo) / kGrid;  // |d/dt| <= 1 over half a grid step
    CHECK(cos_min(th) <= cmin + 1e-12);
    CHECK(cos_min(th) >= cmin - 1e-6 - grid_err);
    CHECK(cos_max(th) >= cmax - 1e-12);
    CHECK(cos_max(th) <= cmax + 1e-6 + grid_err);
    CHECK(sin_min(th) <= smin + 1e-12);
    CHECK(sin_min(th) >= smin - 1e-6 - grid_err);
    CHECK(sin_max(th) >= smax - 1e-12);
    CHECK(sin_max(th) <= smax + 1e-6 + grid_err);
  }
}

TEST_CASE("unicycle decomposition") {
  const BoxXd no_dist(VectorXd::Zero(3), VectorXd::Zero(3));
  const SystemModel uni = unicycle_model(no_dist);

  SUBCASE("third row is omega + d3 regardless of starred arguments") {
    const BoxXd states(vec({1, 1, -0.3}), vec({2, 2, 0.4}));
    const VectorXd u = vec({0.5, 0.15});
    const auto spec = build_decomposition(uni, uni.jacobian_bounds(states, u, no_dist, 4.0));
    const VectorXd g = g_eval(spec, uni, vec({1, 1, 0.1}), u, vec({0, 0, 0.01}), vec({2, 2, 0.3}), u,
                              vec({0.2, 0.2, 0.3}));
    CHECK(g[2] == doctest::Approx(0.15 + 0.01));
  }
  SUBCASE("v = 0 gives zero orientation partials") {
    const auto t = unicycle_bounds(BoxXd(vec({0, 0, -1}), vec({1, 1, 1})), vec({0.0, 0.3}), no_dist, 4.0);
    CHECK(t.a_z(0, 2) == 0.0);
    CHECK(t.b_z(0, 2) == 0.0);
    CHECK(t.a_z(1, 2) == 0.0);
    CHECK(t.b_z(1, 2) == 0.0);
  }
  SUBCASE("point orientation: sin extrema 0 and cos extrema 1") {
    const auto t = unicycle_bounds(BoxXd(vec({0, 0, 0}), vec({1, 1, 0})), vec({0.5, 0.0}), no_dist, 4.0);
    CHECK(t.a_z(0, 2) == 0.0);
    CHECK(t.b_z(0, 2) == 0.0);
    CHECK(t.a_z(1, 2) == 0.5);
    CHECK(t.b_z(1, 2) == 0.5);
  }
  SUBCASE("negative speed swaps min and max") {
    const BoxXd states(vec({0, 0, 0.2}), vec({1, 1, 0.6}));
    const auto t = unicycle_bounds(states, vec({-0.5, 0.0}), no_dist, 4.0);
    CHECK(t.a_z(0, 2) == doctest::Approx(0.5 * std::sin(0.2)));
    CHECK(t.b_z(0, 2) == doctest::Approx(0.5 * std::sin(0.6)));
    CHECK(t.a_z(1, 2) == doctest::Approx(-0.5 * std::cos(0.2)));
    CHECK(t.b_z(1, 2) == doctest::Approx(-0.5 * std::cos(0.6)));
  }
}

TEST_CASE("over_approximate examples") {
  SUBCASE("stationary field returns the initial box") {
    SystemModel still = linear_model(Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero(),
                                     BoxXd(vec({-1, -1}), vec({1, 1})), BoxXd(vec({0, 0}), vec({0, 0})),
                                     BoxXd(vec({0, 0}), vec({0, 0})));
    const BoxXd z(vec({-0.3, 0.1}), vec({0.2, 0.7}));
    CHECK(over_approximate(still, z, vec({0, 0}), still.disturbance_space, 2.0).over_box == z);
  }
  SUBCASE("point box of a monotone system follows the trajectory") {
    const SystemModel sys = monotone_linear();
    const VectorXd z0 = vec({0.4, -0.3}), u = vec({0.2, -0.1});
    const BoxXd d0(vec({0, 0}), vec({0, 0}));
    const auto r = over_approximate(sys, BoxXd::point(z0), u, d0, 1.5);
    const VectorXd end = simulate_flow(sys, z0, u, VectorXd::Zero(2), 1.5, 64);
    CHECK((r.over_box.lo() - end).norm() <= 1e-12);
    CHECK((r.over_box.hi() - end).norm() <= 1e-12);
    // closed form through the matrix exponential
    Eigen::Matrix2d A;
    A << 0.1, 0.5, 0.2, 0.0;
    Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
    M.topLeftCorner<2, 2>() = A;
    M.topRightCorner<2, 2>() = Eigen::Matrix2d::Identity();
    Eigen::Matrix4d expm = Eigen::Matrix4d::Identity(), term = Eigen::Matrix4d::Identity();
    for (int k = 1; k < 30; ++k) {
      term = term * (M * 1.5) / k;
      expm += term;
    }
    const Eigen::Vector2d exact = expm.topLeftCorner<2, 2>() * z0 + expm.topRightCorner<2, 2>() * u;
    CHECK((end - VectorXd(exact)).norm() <= 1e-9);
  }
  SUBCASE("unicycle Monte-Carlo containment") {
    const BoxXd no_dist(VectorXd::Zero(3), VectorXd::Zero(3));
    const SystemModel uni = unicycle_model(no_dist);
    const BoxXd z(vec({0, 0, -kPi / 4}), vec({1.65, 1.667, kPi / 4}));
    const VectorXd u = vec({0.5, 0.0});
    const BoxXd over = over_approximate(uni, z, u, no_dist, 4.0).over_box;
    std::mt19937_64 rng(5);
    for (int s = 0; s < 1000; ++s) {
      const VectorXd end = simulate_flow(uni, uniform_in(z, rng), u, VectorXd::Zero(3), 4.0, 64);
      CHECK((end.array() >= over.lo().array() - 1e-6).all());
      CHECK((end.array() <= over.hi().array() + 1e-6).all());
    }
  }
  SUBCASE("invalid provider bounds propagate") {
    SystemModel sys = cubic_model();
    BoundsTable bad = BoundsTable::zeros(1, 1, 1);
    bad.a_z(0, 0) = 2.0;
    bad.b_z(0, 0) = 1.0;
    sys.jacobian_bounds = constant_bounds(bad);
    CHECK_THROWS_AS(over_approximate(sys, interval(0, 0.5), vec({0}), interval(0, 0), 1.0), std::invalid_argument);
  }
}

TEST_CASE("embedding identity on the diagonal (property)") {
  std::mt19937_64 rng(17);
  const BoxXd no_dist(VectorXd::Zero(3), VectorXd::Zero(3));
  const SystemModel uni = unicycle_model(BoxXd(vec({-0.1, -0.1, -0.05}), vec({0.1, 0.1, 0.05})));
  const SystemModel poly = polynomial_model();
  for (int s = 0; s < 1000; ++s) {
    {
      const VectorXd z = uniform_in(uni.state_space, rng), u = uniform_in(uni.control_space, rng),
                     d = uniform_in(uni.disturbance_space, rng);
      const auto spec = build_decomposition(
          uni, uni.jacobian_bounds(BoxXd::point(z), u, uni.disturbance_space, 4.0));
      const VectorXd f = uni.field(z, u, d);
      const VectorXd g = g_eval(spec, uni, z, u, d, z, u, d);
      CHECK((g - f).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, f.cwiseAbs().maxCoeff()));
    }
    {
      const BoxXd region(vec({-0.6, -0.6}), vec({0.6, 0.6}));
      const VectorXd z = uniform_in(region, rng), u = uniform_in(poly.control_space, rng),
                     d = uniform_in(poly.disturbance_space, rng);
      const auto spec = build_decomposition(poly, poly.jacobian_bounds(region, u, poly.disturbance_space, 0.2));
      const VectorXd f = poly.field(z, u, d);
      CHECK((g_eval(spec, poly, z, u, d, z, u, d) - f).cwiseAbs().maxCoeff() <=
            1e-12 * std::max(1.0, f.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("decomposition function is monotone (finite-difference property)") {
  std::mt19937_64 rng(23);
  const SystemModel poly = polynomial_model();
  const BoxXd region(vec({-0.6, -0.6}), vec({0.6, 0.6}));
  const SystemModel uni = unicycle_model(BoxXd(vec({-0.05, -0.05, -0.02}), vec({0.05, 0.05, 0.02})));
  const BoxXd uni_region(vec({2, 2, -0.4}), vec({3, 3, 0.5}));

  auto check_system = [&](const SystemModel& sys, const BoxXd& states, double horizon) {
    const VectorXd u = uniform_in(sys.control_space, rng);
    const auto spec = build_decomposition(sys, sys.jacobian_bounds(states, u, sys.disturbance_space, horizon));
    // all arguments lie inside the set the bounds were computed for
    const VectorXd z = uniform_in(states, rng), zs = uniform_in(states, rng);
    const VectorXd d = uniform_in(sys.disturbance_space, rng), ds = uniform_in(sys.disturbance_space, rng);
    const double eps = 1e-5;
    for (Eigen::Index j = 0; j < sys.n; ++j) {
      VectorXd e = VectorXd::Zero(sys.n);
      e[j] = eps;
      const VectorXd plain =
          (g_eval(spec, sys, z + e, u, d, zs, u, ds) - g_eval(spec, sys, z - e, u, d, zs, u, ds)) / (2 * eps);
      const VectorXd star =
          (g_eval(spec, sys, z, u, d, zs + e, u, ds) - g_eval(spec, sys, z, u, d, zs - e, u, ds)) / (2 * eps);
      CHECK(plain.minCoeff() >= -1e-8);
      CHECK(star.maxCoeff() <= 1e-8);
    }
    for (Eigen::Index j = 0; j < sys.q; ++j) {
      VectorXd e = VectorXd::Zero(sys.q);
      e[j] = eps;
      const VectorXd plain =
          (g_eval(spec, sys, z, u, d + e, zs, u, ds) - g_eval(spec, sys, z, u, d - e, zs, u, ds)) / (2 * eps);
      const VectorXd star =
          (g_eval(spec, sys, z, u, d, zs, u, ds + e) - g_eval(spec, sys, z, u, d, zs, u, ds - e)) / (2 * eps);
      CHECK(plain.minCoeff() >= -1e-8);
      CHECK(star.maxCoeff() <= 1e-8);
    }
  };
  for (int s = 0; s < 300; ++s) {
    check_system(poly, region, 0.0);
    check_system(uni, uni_region, 0.0);
  }
}

TEST_CASE("swap symmetry of the embedding flow is bitwise") {
  const SystemModel uni = unicycle_model(BoxXd(vec({-0.05, -0.05, -0.02}), vec({0.05, 0.05, 0.02})));
  const BoxXd z(vec({1, 2, -0.3}), vec({1.5, 2.4, 0.2}));
  const VectorXd u = vec({0.25, -0.15});
  const auto spec = build_decomposition(uni, uni.jacobian_bounds(z, u, uni.disturbance_space, 4.0));
  const VectorXd a = embedding_flow(spec, uni, z.hi(), u, uni.disturbance_space.hi(), z.lo(), u,
                                    uni.disturbance_space.lo(), 4.0, 64);
  const VectorXd b = embedding_flow(spec, uni, z.lo(), u, uni.disturbance_space.lo(), z.hi(), u,
                                    uni.disturbance_space.hi(), 4.0, 64);
  CHECK(a.head(3) == b.tail(3));
  CHECK(a.tail(3) == b.head(3));
}

TEST_CASE("monotone tightness: over-approximation equals the corner hull") {
  const SystemModel sys = monotone_linear();
  const BoxXd z(vec({-0.5, 0.2}), vec({0.3, 0.9}));
  const VectorXd u = vec({0.3, -0.4});
  const BoxXd over = over_approximate(sys, z, u, sys.disturbance_space, 2.0).over_box;
  const VectorXd lower = simulate_flow(sys, z.lo(), u, sys.disturbance_space.lo(), 2.0, 64);
  const VectorXd upper = simulate_flow(sys, z.hi(), u, sys.disturbance_space.hi(), 2.0, 64);
  CHECK((over.lo() - lower).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((over.hi() - upper).cwiseAbs().maxCoeff() <= 1e-6);
}
