#include "hiersynth/box.hpp"

#include <algorithm>

namespace hiersynth {

GridPartition::GridPartition(BoxXd workspace, std::vector<int> counts)
    : workspace_(std::move(workspace)), counts_(std::move(counts)) {
  if (static_cast<Eigen::Index>(counts_.size()) != workspace_.dim())
    throw std::invalid_argument("GridPartition: counts dimension mismatch");
  cell_count_ = 1;
  for (int c : counts_) {
    if (c < 1) throw std::invalid_argument("GridPartition: counts must be >= 1");
    cell_count_ *= static_cast<std::size_t>(c);
  }
}

VectorXd GridPartition::cell_size() const {
  VectorXd s(dim());
  for (Eigen::Index d = 0; d < dim(); ++d) s[d] = workspace_.width()[d] / counts_[d];
  return s;
}

std::vector<int> GridPartition::multi_index(std::size_t cell) const {
  if (cell >= cell_count_) throw std::out_of_range("GridPartition: cell index out of range");
  std::vector<int> m(counts_.size());
  for (std::size_t d = 0; d < counts_.size(); ++d) {
    m[d] = static_cast<int>(cell % static_cast<std::size_t>(counts_[d]));
    cell /= static_cast<std::size_t>(counts_[d]);
  }
  return m;
}

bool GridPartition::valid_multi_index(const std::vector<int>& multi) const {
  if (multi.size() != counts_.size()) return false;
  for (std::size_t d = 0; d < multi.size(); ++d)
    if (multi[d] < 0 || multi[d] >= counts_[d]) return false;
  return true;
}

std::size_t GridPartition::linear_index(const std::vector<int>& multi) const {
  if (!valid_multi_index(multi)) throw std::out_of_range("GridPartition: multi-index out of range");
  std::size_t idx = 0;
  for (std::size_t d = multi.size(); d-- > 0;)
    idx = idx * static_cast<std::size_t>(counts_[d]) + static_cast<std::size_t>(multi[d]);
  return idx;
}

double GridPartition::boundary(Eigen::Index d, int k) const {
  if (k <= 0) return workspace_.lo(d);
  if (k >= counts_[d]) return workspace_.hi(d);
  return workspace_.lo(d) + (workspace_.hi(d) - workspace_.lo(d)) * double(k) / double(counts_[d]);
}

BoxXd GridPartition::cell_box(std::size_t cell) const {
  const auto m = multi_index(cell);
  VectorXd lo(dim()), hi(dim());
  for (Eigen::Index d = 0; d < dim(); ++d) {
    lo[d] = boundary(d, m[d]);
    hi[d] = boundary(d, m[d] + 1);
  }
  return BoxXd(lo, hi);
}

bool GridPartition::locate(const VectorXd& z, std::size_t& cell) const {
  if (z.size() != dim()) throw std::invalid_argument("GridPartition::locate: dimension mismatch");
  if (!workspace_.contains(z)) return false;
  std::vector<int> m(counts_.size());
  for (Eigen::Index d = 0; d < dim(); ++d) {
    const int n = counts_[d];
    int k = static_cast<int>((z[d] - workspace_.lo(d)) / (workspace_.hi(d) - workspace_.lo(d)) * n);
    k = std::clamp(k, 0, n - 1);
    // Correct the floating estimate against the exact boundaries.
    while (k > 0 && z[d] < boundary(d, k)) --k;
    while (k < n - 1 && z[d] >= boundary(d, k + 1)) ++k;
    m[d] = k;
  }
  cell = linear_index(m);
  return true;
}

bool GridPartition::cell_range(const BoxXd& b, std::vector<int>& first, std::vector<int>& last) const {
  if (b.dim() != dim()) throw std::invalid_argument("GridPartition::cell_range: dimension mismatch");
  if (!b.intersects(workspace_)) return false;
  first.assign(counts_.size(), 0);
  last.assign(counts_.size(), 0);
  for (Eigen::Index d = 0; d < dim(); ++d) {
    const int n = counts_[d];
    int lo = 0;
    while (lo < n - 1 && boundary(d, lo + 1) < b.lo(d)) ++lo;
    int hi = n - 1;
    while (hi > 0 && boundary(d, hi) > b.hi(d)) --hi;
    first[d] = lo;
    last[d] = hi;
  }
  return true;
}

}  // namespace hiersynth
