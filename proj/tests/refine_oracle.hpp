#pragma once

#include "hiersynth/refine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace hiersynth::testing {

// Brute-force evaluation of the valid-set definition.  Shares no code path with
// the abstraction beyond the store's leaf list and the reachability engine:
// successors are recomputed, every leaf of every cell is scanned, angular
// overlap is tested by shifting over multiples of 2*pi and projection coverage
// by direct box containment.
struct OracleTargets {
  std::vector<LeafId> leaves;
  bool sink = false;
};

inline bool closed_overlap(double a_lo, double a_hi, double b_lo, double b_hi) { return a_lo <= b_hi && b_lo <= a_hi; }

inline OracleTargets oracle_targets(const Abstraction& abs, LeafId s, std::size_t input) {
  const SymbolStore& store = abs.store();
  const GridPartition& g = store.partition();
  const Eigen::Index np = g.dim();
  const auto& angular = store.angular_dims();
  const BoxXd over = over_approximate(abs.system(), store.box(s), abs.config().inputs[input],
                                      abs.system().disturbance_space, abs.config().tau, abs.config().integrator_steps)
                         .over_box;
  OracleTargets out;
  for (Eigen::Index d = 0; d < np; ++d)
    if (over.lo(d) < g.workspace().lo(d) || over.hi(d) > g.workspace().hi(d)) out.sink = true;
  for (Eigen::Index d = np; d < over.dim(); ++d) {
    const bool is_angular = std::find(angular.begin(), angular.end(), d) != angular.end();
    if (!is_angular && (over.lo(d) < store.state_space().lo(d) || over.hi(d) > store.state_space().hi(d)))
      out.sink = true;
  }
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const BoxXd cb = g.cell_box(c);
    bool meets = true;
    for (Eigen::Index d = 0; d < np; ++d) meets = meets && closed_overlap(over.lo(d), over.hi(d), cb.lo(d), cb.hi(d));
    if (!meets) continue;
    if (abs.workspace().is_obstacle(c)) {
      out.sink = true;
      continue;
    }
    for (LeafId t : store.leaves(c)) {
      const BoxXd& b = store.box(t);
      bool hit = true;
      for (Eigen::Index d = 0; d < b.dim() && hit; ++d) {
        if (std::find(angular.begin(), angular.end(), d) == angular.end()) {
          hit = closed_overlap(over.lo(d), over.hi(d), b.lo(d), b.hi(d));
          continue;
        }
        const double two_pi = 2 * std::numbers::pi;
        if (over.hi(d) - over.lo(d) >= two_pi) continue;
        bool any = false;
        for (int m = -3; m <= 3; ++m)
          any = any || closed_overlap(over.lo(d) + m * two_pi, over.hi(d) + m * two_pi, b.lo(d), b.hi(d));
        hit = any;
      }
      if (hit) out.leaves.push_back(t);
    }
  }
  std::sort(out.leaves.begin(), out.leaves.end());
  return out;
}

inline bool oracle_projection_covered(const Abstraction& abs, LeafId t, const std::vector<LeafId>& valid_next) {
  const Eigen::Index np = abs.store().partition().dim();
  const BoxXd pt = abs.store().box(t).segment(0, np);
  return std::any_of(valid_next.begin(), valid_next.end(),
                     [&](LeafId v) { return abs.store().box(v).segment(0, np).contains(pt); });
}

/// Input index that makes s valid at step k according to the definition, or -1.
inline int oracle_valid_input(const Abstraction& abs, std::size_t k, LeafId s) {
  const std::size_t next_cell = abs.plan().cells[k + 1];
  const auto valid_next = abs.valid_set(k + 1);
  for (std::size_t i = 0; i < abs.config().inputs.size(); ++i) {
    const auto t = oracle_targets(abs, s, i);
    if (t.sink || t.leaves.empty()) continue;
    const bool ok = std::all_of(t.leaves.begin(), t.leaves.end(), [&](LeafId x) {
      if (abs.store().cell(x) != next_cell) return false;
      return abs.config().projection_2d ? oracle_projection_covered(abs, x, valid_next)
                                        : std::find(valid_next.begin(), valid_next.end(), x) != valid_next.end();
    });
    if (ok) return static_cast<int>(i);
  }
  return -1;
}

/// Number of leaves of step k whose validity or chosen input disagrees with the oracle.
inline std::size_t oracle_mismatches(const Abstraction& abs, std::size_t k) {
  std::size_t bad = 0;
  for (LeafId s : abs.store().leaves(abs.plan().cells[k])) {
    const int expected = oracle_valid_input(abs, k, s);
    const bool valid = abs.is_valid(s);
    if (valid != (expected >= 0) || (valid && abs.input_of(s) != expected)) ++bad;
  }
  return bad;
}

}  // namespace hiersynth::testing
