#ifndef HIERSYNTH_BOX_HPP
#define HIERSYNTH_BOX_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hiersynth {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/**
 * Closed axis-aligned interval [lo, hi] of R^m.
 *
 * Degenerate (point) boxes are allowed. All predicates use exact IEEE
 * comparisons so that transition existence is reproducible.
 */
template <typename Scalar>
class Box {
 public:
  using Vector = VectorX<Scalar>;

  Box() = default;

  Box(Vector lo, Vector hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() == 0 || lo_.size() != hi_.size())
      throw std::invalid_argument("Box: corners must have equal nonzero dimension");
    for (Eigen::Index i = 0; i < lo_.size(); ++i)
      if (!(lo_[i] <= hi_[i]))
        throw std::invalid_argument("Box: lo > hi in dimension " + std::to_string(i));
  }

  static Box point(const Vector& z) { return Box(z, z); }

  Eigen::Index dim() const { return lo_.size(); }
  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }
  Scalar lo(Eigen::Index i) const { return lo_[i]; }
  Scalar hi(Eigen::Index i) const { return hi_[i]; }

  Vector width() const { return hi_ - lo_; }
  Vector center() const { return (lo_ + hi_) / Scalar(2); }

  bool contains(const Vector& z) const {
    check_dim(z.size());
    return (z.array() >= lo_.array()).all() && (z.array() <= hi_.array()).all();
  }

  bool contains(const Box& other) const {
    check_dim(other.dim());
    return (other.lo_.array() >= lo_.array()).all() && (other.hi_.array() <= hi_.array()).all();
  }

  /// Closed intersection test: shared facets count.
  bool intersects(const Box& other) const {
    check_dim(other.dim());
    return (lo_.array() <= other.hi_.array()).all() && (other.lo_.array() <= hi_.array()).all();
  }

  /**
   * Uniform tiling into prod(parts) subboxes, ordered lexicographically by
   * per-dimension index (last dimension varies fastest). Shared faces are
   * computed from the same expression so neighbouring children agree bitwise.
   */
  std::vector<Box> split(const std::vector<int>& parts) const {
    check_dim(static_cast<Eigen::Index>(parts.size()));
    std::size_t total = 1;
    for (int p : parts) {
      if (p < 1) throw std::invalid_argument("Box::split: parts entries must be >= 1");
      total *= static_cast<std::size_t>(p);
    }
    std::vector<Box> out;
    out.reserve(total);
    std::vector<int> idx(parts.size(), 0);
    for (std::size_t n = 0; n < total; ++n) {
      Vector lo(dim()), hi(dim());
      for (Eigen::Index d = 0; d < dim(); ++d) {
        lo[d] = grid_point(d, idx[d], parts[d]);
        hi[d] = grid_point(d, idx[d] + 1, parts[d]);
      }
      out.emplace_back(std::move(lo), std::move(hi));
      for (int d = static_cast<int>(parts.size()) - 1; d >= 0; --d) {
        if (++idx[d] < parts[d]) break;
        idx[d] = 0;
      }
    }
    return out;
  }

  /// Coordinates of dimensions [first, first + count).
  Box segment(Eigen::Index first, Eigen::Index count) const {
    return Box(lo_.segment(first, count), hi_.segment(first, count));
  }

  Box with_interval(Eigen::Index d, Scalar lo, Scalar hi) const {
    Vector l = lo_, h = hi_;
    l[d] = lo;
    h[d] = hi;
    return Box(std::move(l), std::move(h));
  }

  bool operator==(const Box& other) const {
    return dim() == other.dim() && lo_ == other.lo_ && hi_ == other.hi_;
  }

 private:
  void check_dim(Eigen::Index n) const {
    if (n != dim()) throw std::invalid_argument("Box: dimension mismatch");
  }

  Scalar grid_point(Eigen::Index d, int k, int parts) const {
    if (k == 0) return lo_[d];
    if (k == parts) return hi_[d];
    return lo_[d] + (hi_[d] - lo_[d]) * Scalar(k) / Scalar(parts);
  }

  Vector lo_;
  Vector hi_;
};

using BoxXd = Box<double>;
using Eigen::VectorXd;

template <typename Scalar>
std::ostream& operator<<(std::ostream& os, const Box<Scalar>& b) {
  for (Eigen::Index i = 0; i < b.dim(); ++i) {
    if (i) os << " x ";
    os << '[' << b.lo(i) << ", " << b.hi(i) << ']';
  }
  return os;
}

/**
 * Uniform partition of a workspace box into counts[d] cells per dimension.
 *
 * Linear cell index: dimension 0 varies fastest, so a 2D cell (col, row) has
 * index col + row * counts[0].
 */
class GridPartition {
 public:
  GridPartition() = default;
  GridPartition(BoxXd workspace, std::vector<int> counts);

  const BoxXd& workspace() const { return workspace_; }
  const std::vector<int>& counts() const { return counts_; }
  Eigen::Index dim() const { return workspace_.dim(); }
  std::size_t cell_count() const { return cell_count_; }
  VectorXd cell_size() const;

  std::vector<int> multi_index(std::size_t cell) const;
  std::size_t linear_index(const std::vector<int>& multi) const;
  bool valid_multi_index(const std::vector<int>& multi) const;

  BoxXd cell_box(std::size_t cell) const;

  /// Boundary coordinate k (0..counts[d]) along dimension d.
  double boundary(Eigen::Index d, int k) const;

  /**
   * Cell containing z under the half-open convention: lower-closed,
   * upper-open, except upper-closed on the workspace boundary. Returns
   * false when z lies outside the workspace.
   */
  bool locate(const VectorXd& z, std::size_t& cell) const;

  /// Per-dimension inclusive index ranges of cells meeting the closed box b.
  bool cell_range(const BoxXd& b, std::vector<int>& first, std::vector<int>& last) const;

 private:
  BoxXd workspace_;
  std::vector<int> counts_;
  std::size_t cell_count_ = 0;
};

}  // namespace hiersynth

#endif  // HIERSYNTH_BOX_HPP
