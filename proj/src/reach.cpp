#include "hiersynth/reach.hpp"

#include <map>
#include <utility>

namespace hiersynth {

BoundsTable BoundsTable::zeros(Eigen::Index n, Eigen::Index p, Eigen::Index q) {
  BoundsTable t;
  t.a_z = t.b_z = Eigen::MatrixXd::Zero(n, n);
  t.a_u = t.b_u = Eigen::MatrixXd::Zero(n, p);
  t.a_d = t.b_d = Eigen::MatrixXd::Zero(n, q);
  return t;
}

namespace {

void check_family(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Eigen::Index rows, Eigen::Index cols,
                  const char* family) {
  if (a.rows() != rows || a.cols() != cols || b.rows() != rows || b.cols() != cols)
    throw std::invalid_argument(std::string("BoundsTable: shape mismatch for family ") + family);
  if (!a.allFinite() || !b.allFinite())
    throw std::invalid_argument(std::string("BoundsTable: non-finite bound for family ") + family);
  if ((a.array() > b.array()).any())
    throw std::invalid_argument(std::string("BoundsTable: a > b for family ") + family);
}

FamilyDecomposition decompose_family(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  FamilyDecomposition f;
  f.cases.resize(static_cast<std::size_t>(a.size()));
  f.starred.resize(a.rows(), a.cols());
  f.slope = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const SignCase c = classify(a(i, j), b(i, j));
      f.cases[static_cast<std::size_t>(i * a.cols() + j)] = c;
      f.starred(i, j) = (c == SignCase::mostly_negative || c == SignCase::negative);
      if (c == SignCase::mostly_positive) f.slope(i, j) = -a(i, j);
      if (c == SignCase::mostly_negative) f.slope(i, j) = b(i, j);
    }
  }
  return f;
}

VectorXd select(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& starred, Eigen::Index row,
                const VectorXd& plain, const VectorXd& star) {
  VectorXd out(plain.size());
  for (Eigen::Index j = 0; j < plain.size(); ++j) out[j] = starred(row, j) ? star[j] : plain[j];
  return out;
}

}  // namespace

void BoundsTable::validate(Eigen::Index n, Eigen::Index p, Eigen::Index q) const {
  check_family(a_z, b_z, n, n, "z");
  check_family(a_u, b_u, n, p, "u");
  check_family(a_d, b_d, n, q, "d");
}

JacobianBoundsProvider constant_bounds(BoundsTable table) {
  return [table = std::move(table)](const BoxXd&, const VectorXd&, const BoxXd&, double) { return table; };
}

const char* to_string(SignCase c) {
  switch (c) {
    case SignCase::positive: return "C1";
    case SignCase::mostly_positive: return "C2";
    case SignCase::mostly_negative: return "C3";
    case SignCase::negative: return "C4";
  }
  return "?";
}

SignCase classify(double a, double b) {
  if (!(a <= b)) throw std::invalid_argument("classify: lower bound exceeds upper bound");
  if (a >= 0.0) return SignCase::positive;
  if (b <= 0.0) return SignCase::negative;
  return std::abs(a) <= std::abs(b) ? SignCase::mostly_positive : SignCase::mostly_negative;
}

DecompositionSpec build_decomposition(const SystemModel& sys, const BoundsTable& bounds) {
  bounds.validate(sys.n, sys.p, sys.q);
  DecompositionSpec spec;
  spec.z = decompose_family(bounds.a_z, bounds.b_z);
  spec.u = decompose_family(bounds.a_u, bounds.b_u);
  spec.d = decompose_family(bounds.a_d, bounds.b_d);

  std::map<std::vector<bool>, std::size_t> seen;
  for (Eigen::Index i = 0; i < sys.n; ++i) {
    std::vector<bool> key;
    for (Eigen::Index j = 0; j < sys.n; ++j) key.push_back(spec.z.starred(i, j));
    for (Eigen::Index j = 0; j < sys.p; ++j) key.push_back(spec.u.starred(i, j));
    for (Eigen::Index j = 0; j < sys.q; ++j) key.push_back(spec.d.starred(i, j));
    auto [it, inserted] = seen.emplace(std::move(key), spec.row_groups.size());
    if (inserted) spec.row_groups.emplace_back();
    spec.row_groups[it->second].push_back(i);
  }
  return spec;
}

VectorXd g_eval(const DecompositionSpec& spec, const SystemModel& sys, const VectorXd& z, const VectorXd& u,
                const VectorXd& d, const VectorXd& z_star, const VectorXd& u_star, const VectorXd& d_star) {
  VectorXd g(sys.n);
  for (const auto& group : spec.row_groups) {
    const Eigen::Index i0 = group.front();
    const VectorXd fz = sys.field(select(spec.z.starred, i0, z, z_star), select(spec.u.starred, i0, u, u_star),
                                  select(spec.d.starred, i0, d, d_star));
    for (Eigen::Index i : group) g[i] = fz[i];
  }
  g += spec.z.slope * (z - z_star) + spec.u.slope * (u - u_star) + spec.d.slope * (d - d_star);
  return g;
}

VectorXd h_eval(const DecompositionSpec& spec, const SystemModel& sys, const VectorXd& stacked, const VectorXd& u,
                const VectorXd& d, const VectorXd& u_star, const VectorXd& d_star) {
  const VectorXd z = stacked.head(sys.n);
  const VectorXd z_star = stacked.tail(sys.n);
  VectorXd out(2 * sys.n);
  out.head(sys.n) = g_eval(spec, sys, z, u, d, z_star, u_star, d_star);
  out.tail(sys.n) = g_eval(spec, sys, z_star, u_star, d_star, z, u, d);
  return out;
}

VectorXd embedding_flow(const DecompositionSpec& spec, const SystemModel& sys, const VectorXd& z0,
                        const VectorXd& u, const VectorXd& d, const VectorXd& z0_star, const VectorXd& u_star,
                        const VectorXd& d_star, double t, int steps) {
  VectorXd x(2 * sys.n);
  x << z0, z0_star;
  auto rhs = [&](const VectorXd& s) { return h_eval(spec, sys, s, u, d, u_star, d_star); };
  return integrate<double>(rhs, std::move(x), t, steps);
}

VectorXd simulate_flow(const SystemModel& sys, const VectorXd& z0, const VectorXd& u, const VectorXd& d, double t,
                       int steps) {
  auto rhs = [&](const VectorXd& z) { return sys.field(z, u, d); };
  return integrate<double>(rhs, z0, t, steps);
}

ReachResult over_approximate(const SystemModel& sys, const BoxXd& states, const VectorXd& u,
                             const BoxXd& disturbances, double t, int steps) {
  if (states.dim() != sys.n || u.size() != sys.p || disturbances.dim() != sys.q)
    throw std::invalid_argument("over_approximate: dimension mismatch");
  if (!(t > 0.0)) throw std::invalid_argument("over_approximate: horizon must be positive");
  const BoundsTable bounds = sys.jacobian_bounds(states, u, disturbances, t);
  const DecompositionSpec spec = build_decomposition(sys, bounds);
  const VectorXd x =
      embedding_flow(spec, sys, states.lo(), u, disturbances.lo(), states.hi(), u, disturbances.hi(), t, steps);
  VectorXd lo = x.head(sys.n);
  VectorXd hi = x.tail(sys.n);
  if ((lo.array() > hi.array()).any())
    throw std::runtime_error("over_approximate: embedding flow produced an inverted interval");
  return ReachResult{BoxXd(std::move(lo), std::move(hi)), t, u, steps};
}

}  // namespace hiersynth
