#include "hiersynth/systems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hiersynth {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mod_two_pi(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

// Shift the interval by a multiple of 2*pi so that its lower end lies in
// (-pi, pi]; the closed forms below assume the interval meets (-pi, pi].
std::pair<double, double> normalized(const BoxXd& theta) {
  if (theta.dim() != 1) throw std::invalid_argument("angle interval must be one-dimensional");
  double lo = theta.lo(0);
  double hi = theta.hi(0);
  if (lo > -kPi && lo <= kPi) return {lo, hi};
  const double shift = kTwoPi * std::floor((kPi - lo) / kTwoPi);
  lo += shift;
  hi += shift;
  if (lo <= -kPi) {
    lo += kTwoPi;
    hi += kTwoPi;
  }
  return {lo, hi};
}

// True when lo <= c + 2*k*pi <= hi for some integer k.
bool contains_angle(double lo, double hi, double c) {
  const double k = std::ceil((lo - c) / kTwoPi);
  return c + k * kTwoPi <= hi;
}

}  // namespace

double wrap_angle(double theta) {
  double r = kPi - mod_two_pi(kPi - theta);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

BoxXd orientation_interval(const BoxXd& theta0, double omega, const BoxXd& d3, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("orientation_interval: negative tau");
  VectorXd lo(1), hi(1);
  lo[0] = theta0.lo(0) + std::min(0.0, tau * (omega + d3.lo(0)));
  hi[0] = theta0.hi(0) + std::max(0.0, tau * (omega + d3.hi(0)));
  return BoxXd(lo, hi);
}

double cos_min(const BoxXd& theta) {
  const auto [lo, hi] = normalized(theta);
  if (contains_angle(lo, hi, kPi)) return -1.0;
  return std::min(std::cos(lo), std::cos(hi));
}

double cos_max(const BoxXd& theta) {
  const auto [lo, hi] = normalized(theta);
  if (contains_angle(lo, hi, 0.0)) return 1.0;
  return std::max(std::cos(lo), std::cos(hi));
}

double sin_min(const BoxXd& theta) {
  const auto [lo, hi] = normalized(theta);
  if (contains_angle(lo, hi, -0.5 * kPi)) return -1.0;
  return std::min(std::sin(lo), std::sin(hi));
}

double sin_max(const BoxXd& theta) {
  const auto [lo, hi] = normalized(theta);
  if (contains_angle(lo, hi, 0.5 * kPi)) return 1.0;
  return std::max(std::sin(lo), std::sin(hi));
}

BoundsTable unicycle_bounds(const BoxXd& states, const VectorXd& u, const BoxXd& disturbances, double horizon) {
  const BoxXd theta = orientation_interval(states.segment(2, 1), u[1], disturbances.segment(2, 1), horizon);
  const double v = u[0];
  const double smin = sin_min(theta), smax = sin_max(theta);
  const double cmin = cos_min(theta), cmax = cos_max(theta);

  BoundsTable t = BoundsTable::zeros(3, 2, 3);
  if (v >= 0.0) {
    t.a_z(0, 2) = -v * smax;
    t.b_z(0, 2) = -v * smin;
    t.a_z(1, 2) = v * cmin;
    t.b_z(1, 2) = v * cmax;
  } else {
    t.a_z(0, 2) = -v * smin;
    t.b_z(0, 2) = -v * smax;
    t.a_z(1, 2) = v * cmax;
    t.b_z(1, 2) = v * cmin;
  }
  t.a_u(0, 0) = cmin;
  t.b_u(0, 0) = cmax;
  t.a_u(1, 0) = smin;
  t.b_u(1, 0) = smax;
  t.a_u(2, 1) = t.b_u(2, 1) = 1.0;
  t.a_d.setIdentity();
  t.b_d.setIdentity();
  return t;
}

SystemModel unicycle_model(const BoxXd& disturbances, const BoxXd& workspace, const BoxXd& controls) {
  if (disturbances.dim() != 3) throw std::invalid_argument("unicycle_model: disturbance box must be 3D");
  if (workspace.dim() != 2 || controls.dim() != 2)
    throw std::invalid_argument("unicycle_model: workspace and control boxes must be 2D");
  SystemModel m;
  m.name = "unicycle";
  m.n = 3;
  m.p = 2;
  m.q = 3;
  m.field = [](const VectorXd& z, const VectorXd& u, const VectorXd& d) {
    VectorXd f(3);
    f << u[0] * std::cos(z[2]) + d[0], u[0] * std::sin(z[2]) + d[1], u[1] + d[2];
    return f;
  };
  m.jacobian_bounds = unicycle_bounds;
  VectorXd lo(3), hi(3);
  lo << workspace.lo(0), workspace.lo(1), -kPi;
  hi << workspace.hi(0), workspace.hi(1), kPi;
  m.state_space = BoxXd(lo, hi);
  m.control_space = controls;
  m.disturbance_space = disturbances;
  m.angular_dims = {2};
  return m;
}

SystemModel unicycle_model(const BoxXd& disturbances) {
  return unicycle_model(disturbances, BoxXd(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(33.0, 20.0)),
                        BoxXd(Eigen::Vector2d(-0.5, -0.3), Eigen::Vector2d(0.5, 0.3)));
}

SystemModel linear_model(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& E,
                         BoxXd state_space, BoxXd control_space, BoxXd disturbance_space) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || E.rows() != n || state_space.dim() != n ||
      control_space.dim() != B.cols() || disturbance_space.dim() != E.cols())
    throw std::invalid_argument("linear_model: inconsistent dimensions");
  SystemModel m;
  m.name = "linear";
  m.n = n;
  m.p = B.cols();
  m.q = E.cols();
  m.field = [A, B, E](const VectorXd& z, const VectorXd& u, const VectorXd& d) -> VectorXd {
    return A * z + B * u + E * d;
  };
  BoundsTable t;
  t.a_z = t.b_z = A;
  t.a_u = t.b_u = B;
  t.a_d = t.b_d = E;
  m.jacobian_bounds = constant_bounds(std::move(t));
  m.state_space = std::move(state_space);
  m.control_space = std::move(control_space);
  m.disturbance_space = std::move(disturbance_space);
  return m;
}

SystemModel polynomial_model() {
  SystemModel m;
  m.name = "polynomial";
  m.n = 2;
  m.p = 1;
  m.q = 2;
  m.field = [](const VectorXd& z, const VectorXd& u, const VectorXd& d) {
    VectorXd f(2);
    f << -z[0] + 0.5 * z[1] * z[1] + u[0] + d[0], -0.5 * z[1] + z[0] * z[1] - 0.3 * z[0] * z[0] + d[1];
    return f;
  };
  m.state_space = BoxXd(Eigen::Vector2d(-2.0, -2.0), Eigen::Vector2d(2.0, 2.0));
  m.control_space = BoxXd(VectorXd::Constant(1, -0.5), VectorXd::Constant(1, 0.5));
  m.disturbance_space = BoxXd(Eigen::Vector2d(-0.05, -0.05), Eigen::Vector2d(0.05, 0.05));
  // max |f_i| over state_space x control_space x disturbance_space
  const Eigen::Vector2d speed(2.0 + 2.0 + 0.5 + 0.05, 1.0 + 4.0 + 1.2 + 0.05);
  m.jacobian_bounds = [speed](const BoxXd& states, const VectorXd&, const BoxXd&, double horizon) {
    const VectorXd lo = states.lo() - horizon * speed;
    const VectorXd hi = states.hi() + horizon * speed;
    BoundsTable t = BoundsTable::zeros(2, 1, 2);
    t.a_z(0, 0) = t.b_z(0, 0) = -1.0;
    t.a_z(0, 1) = lo[1];
    t.b_z(0, 1) = hi[1];
    t.a_z(1, 0) = lo[1] - 0.6 * hi[0];
    t.b_z(1, 0) = hi[1] - 0.6 * lo[0];
    t.a_z(1, 1) = -0.5 + lo[0];
    t.b_z(1, 1) = -0.5 + hi[0];
    t.a_u(0, 0) = t.b_u(0, 0) = 1.0;
    t.a_d.setIdentity();
    t.b_d.setIdentity();
    return t;
  };
  return m;
}

}  // namespace hiersynth
