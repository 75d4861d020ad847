#ifndef HIERSYNTH_SYSTEMS_HPP
#define HIERSYNTH_SYSTEMS_HPP

#include "hiersynth/reach.hpp"

namespace hiersynth {

// Unicycle: z = (x, y, theta), u = (v, omega), d = (d1, d2, d3).
//   x' = v cos(theta) + d1,  y' = v sin(theta) + d2,  theta' = omega + d3

/// Orientations reachable over [0, tau]; not wrapped to (-pi, pi].
BoxXd orientation_interval(const BoxXd& theta0, double omega, const BoxXd& d3, double tau);

// Exact extrema of cos / sin over a closed angle interval of any width.
double cos_min(const BoxXd& theta);
double cos_max(const BoxXd& theta);
double sin_min(const BoxXd& theta);
double sin_max(const BoxXd& theta);

/// Wrap an angle into (-pi, pi].
double wrap_angle(double theta);

/// Jacobian bounds of the unicycle over the orientations reachable in `horizon`.
BoundsTable unicycle_bounds(const BoxXd& states, const VectorXd& u, const BoxXd& disturbances, double horizon);

SystemModel unicycle_model(const BoxXd& disturbances, const BoxXd& workspace, const BoxXd& controls);

/// Office workspace [0,33] x [0,20] with U = [-0.5,0.5] x [-0.3,0.3].
SystemModel unicycle_model(const BoxXd& disturbances);

/// z' = A z + B u + E d with exact constant Jacobian bounds.
SystemModel linear_model(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& E,
                         BoxXd state_space, BoxXd control_space, BoxXd disturbance_space);

/**
 * Two-state polynomial test system with sign-changing partials:
 *   z1' = -z1 + 0.5 z2^2 + u + d1
 *   z2' = -0.5 z2 + z1 z2 - 0.3 z1^2 + d2
 * Bounds are computed by interval arithmetic over an a priori enclosure of
 * the states reachable within the horizon (query box inflated by
 * horizon * max|f| over the state space).
 */
SystemModel polynomial_model();

}  // namespace hiersynth

#endif  // HIERSYNTH_SYSTEMS_HPP
