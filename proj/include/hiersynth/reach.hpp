#ifndef HIERSYNTH_REACH_HPP
#define HIERSYNTH_REACH_HPP

#include "hiersynth/box.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hiersynth {

/// Bounds [a, b] on the partial derivatives of f with respect to z, u and d.
struct BoundsTable {
  Eigen::MatrixXd a_z, b_z;  // n x n
  Eigen::MatrixXd a_u, b_u;  // n x p
  Eigen::MatrixXd a_d, b_d;  // n x q

  static BoundsTable zeros(Eigen::Index n, Eigen::Index p, Eigen::Index q);

  /// Throws std::invalid_argument on a > b, non-finite entries or shape mismatch.
  void validate(Eigen::Index n, Eigen::Index p, Eigen::Index q) const;
};

using VectorField = std::function<VectorXd(const VectorXd& z, const VectorXd& u, const VectorXd& d)>;

/**
 * Provides Jacobian bounds valid for every state reachable from `states`
 * within `horizon` under the constant control `u` and disturbances in
 * `disturbances`.
 */
using JacobianBoundsProvider =
    std::function<BoundsTable(const BoxXd& states, const VectorXd& u, const BoxXd& disturbances, double horizon)>;

struct SystemModel {
  std::string name;
  Eigen::Index n = 0;  // state
  Eigen::Index p = 0;  // control
  Eigen::Index q = 0;  // disturbance
  VectorField field;
  JacobianBoundsProvider jacobian_bounds;
  BoxXd state_space;
  BoxXd control_space;
  BoxXd disturbance_space;
  /// State dimensions identified modulo 2*pi (orientation angles).
  std::vector<int> angular_dims;
};

/// Provider returning the same table for every query (global bounds).
JacobianBoundsProvider constant_bounds(BoundsTable table);

enum class SignCase {
  positive,         // C1: a >= 0
  mostly_positive,  // C2: a < 0 < b, |a| <= |b|
  mostly_negative,  // C3: a < 0 < b, |a| > |b|
  negative,         // C4: b <= 0
};

const char* to_string(SignCase c);

/// Throws std::invalid_argument when a > b. Ties |a| = |b| go to mostly_positive.
SignCase classify(double a, double b);

/// Per-family (z, u or d) sign cases, argument selectors and slopes.
struct FamilyDecomposition {
  std::vector<SignCase> cases;                         // row-major rows x cols
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> starred;
  Eigen::MatrixXd slope;                               // alpha >= 0

  SignCase case_at(Eigen::Index i, Eigen::Index j) const {
    return cases[static_cast<std::size_t>(i * slope.cols() + j)];
  }
};

struct DecompositionSpec {
  FamilyDecomposition z, u, d;
  /// Rows of g sharing the same argument selectors, evaluated with one call of f.
  std::vector<std::vector<Eigen::Index>> row_groups;
};

DecompositionSpec build_decomposition(const SystemModel& sys, const BoundsTable& bounds);

/// Decomposition function g(z, u, d, z*, u*, d*).
VectorXd g_eval(const DecompositionSpec& spec, const SystemModel& sys, const VectorXd& z, const VectorXd& u,
                const VectorXd& d, const VectorXd& z_star, const VectorXd& u_star, const VectorXd& d_star);

/// Embedding vector field h on the stacked state (z, z*).
VectorXd h_eval(const DecompositionSpec& spec, const SystemModel& sys, const VectorXd& stacked, const VectorXd& u,
                const VectorXd& d, const VectorXd& u_star, const VectorXd& d_star);

/// Classical fixed-step fourth order Runge-Kutta on [0, t].
template <typename Scalar, typename Rhs>
VectorX<Scalar> integrate(const Rhs& rhs, VectorX<Scalar> x, Scalar t, int steps) {
  if (!(t >= Scalar(0))) throw std::invalid_argument("integrate: negative horizon");
  if (steps < 1) throw std::invalid_argument("integrate: steps must be >= 1");
  if (t == Scalar(0)) return x;
  const Scalar dt = t / Scalar(steps);
  const Scalar half = dt / Scalar(2);
  for (int s = 0; s < steps; ++s) {
    const VectorX<Scalar> k1 = rhs(x);
    const VectorX<Scalar> k2 = rhs(VectorX<Scalar>(x + half * k1));
    const VectorX<Scalar> k3 = rhs(VectorX<Scalar>(x + half * k2));
    const VectorX<Scalar> k4 = rhs(VectorX<Scalar>(x + dt * k3));
    x += (dt / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
    if (!x.allFinite()) throw std::runtime_error("integrate: non-finite state (integration diverged)");
  }
  return x;
}

/// Flow of the embedding system from (z0, z0*) with constant inputs.
VectorXd embedding_flow(const DecompositionSpec& spec, const SystemModel& sys, const VectorXd& z0,
                        const VectorXd& u, const VectorXd& d, const VectorXd& z0_star, const VectorXd& u_star,
                        const VectorXd& d_star, double t, int steps);

/// Flow of the original system under constant control and disturbance.
VectorXd simulate_flow(const SystemModel& sys, const VectorXd& z0, const VectorXd& u, const VectorXd& d, double t,
                       int steps);

struct ReachResult {
  BoxXd over_box;
  double horizon = 0.0;
  VectorXd control;
  int integrator_steps = 0;
};

inline constexpr int kDefaultIntegratorSteps = 64;

/**
 * Interval over-approximation of the states reachable at time t from the
 * box `states` under the constant control u and any disturbance in
 * `disturbances`: one trajectory of the embedding system started at
 * (lower corner, upper corner) with disturbances (lower, upper).
 */
ReachResult over_approximate(const SystemModel& sys, const BoxXd& states, const VectorXd& u,
                             const BoxXd& disturbances, double t, int steps = kDefaultIntegratorSteps);

}  // namespace hiersynth

#endif  // HIERSYNTH_REACH_HPP
