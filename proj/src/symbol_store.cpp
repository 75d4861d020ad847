#include "hiersynth/refine.hpp"
#include "hiersynth/systems.hpp"

#include <algorithm>

namespace hiersynth {

namespace {

constexpr LeafId kNoParent = std::numeric_limits<LeafId>::max();

BoxXd lifted_cell(const GridPartition& partition, const BoxXd& state_space, std::size_t cell) {
  const BoxXd c = partition.cell_box(cell);
  VectorXd lo = state_space.lo(), hi = state_space.hi();
  lo.head(c.dim()) = c.lo();
  hi.head(c.dim()) = c.hi();
  return BoxXd(lo, hi);
}

}  // namespace

SymbolStore::SymbolStore(GridPartition partition, BoxXd state_space, std::vector<int> initial_split, int max_depth,
                         SplitPolicy policy)
    : partition_(std::move(partition)), state_space_(std::move(state_space)), max_depth_(max_depth), policy_(policy) {
  if (partition_.dim() > state_space_.dim())
    throw std::invalid_argument("SymbolStore: partition has more dimensions than the state");
  if (max_depth_ < 0) throw std::invalid_argument("SymbolStore: negative max depth");
  if (!initial_split.empty() && initial_split.size() != static_cast<std::size_t>(state_space_.dim()))
    throw std::invalid_argument("SymbolStore: initial split needs one count per state dimension");
  const std::vector<int> zeros(static_cast<std::size_t>(state_space_.dim()), 0);
  const bool presplit =
      std::any_of(initial_split.begin(), initial_split.end(), [](int k) { return k != 1; });
  for (std::size_t c = 0; c < partition_.cell_count(); ++c) {
    const LeafId root = add(lifted_cell(partition_, state_space_, c), c, kNoParent, zeros);
    roots_.push_back(root);
    if (!presplit) continue;
    // the initial split is part of the initial partition and does not count as depth
    std::vector<LeafId> kids;
    for (auto& b : nodes_[root].box.split(initial_split)) kids.push_back(add(std::move(b), c, root, zeros));
    nodes_[root].children = std::move(kids);
  }
}

LeafId SymbolStore::add(BoxXd box, std::size_t cell, LeafId parent, std::vector<int> depth) {
  nodes_.push_back(Node{std::move(box), cell, parent, {}, std::move(depth)});
  return static_cast<LeafId>(nodes_.size() - 1);
}

std::optional<LeafId> SymbolStore::parent(LeafId id) const {
  const LeafId p = node(id).parent;
  if (p == kNoParent) return std::nullopt;
  return p;
}

std::vector<LeafId> SymbolStore::leaves_below(LeafId id) const {
  std::vector<LeafId> out, stack{id};
  while (!stack.empty()) {
    const LeafId u = stack.back();
    stack.pop_back();
    const auto& kids = node(u).children;
    if (kids.empty()) {
      out.push_back(u);
      continue;
    }
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<LeafId> SymbolStore::leaves(std::size_t cell) const { return leaves_below(roots_.at(cell)); }

namespace {

// Dimensions a split would halve: all of them, or the widest one still below the depth limit.
std::vector<int> split_counts(const BoxXd& box, const std::vector<int>& depth, int max_depth, SplitPolicy policy) {
  const std::size_t n = depth.size();
  std::vector<int> parts(n, 1);
  if (policy == SplitPolicy::uniform) {
    if (std::any_of(depth.begin(), depth.end(), [&](int d) { return d >= max_depth; })) return {};
    std::fill(parts.begin(), parts.end(), 2);
    return parts;
  }
  int best = -1;
  for (std::size_t d = 0; d < n; ++d) {
    if (depth[d] >= max_depth) continue;
    if (best < 0 || box.width()[static_cast<Eigen::Index>(d)] > box.width()[best]) best = static_cast<int>(d);
  }
  if (best < 0) return {};
  parts[static_cast<std::size_t>(best)] = 2;
  return parts;
}

}  // namespace

bool SymbolStore::can_split(LeafId id) const {
  const Node& n = node(id);
  return n.children.empty() && !split_counts(n.box, n.depth, max_depth_, policy_).empty();
}

std::vector<LeafId> SymbolStore::split(LeafId id) {
  if (!is_leaf(id)) throw std::logic_error("SymbolStore::split: not a leaf");
  const std::vector<int> parts = split_counts(node(id).box, node(id).depth, max_depth_, policy_);
  if (parts.empty()) throw MaxDepthReached("symbol reached the maximum split depth");
  std::vector<int> depth = node(id).depth;
  for (std::size_t d = 0; d < parts.size(); ++d) depth[d] += parts[d] > 1 ? 1 : 0;
  const std::size_t c = node(id).cell;
  std::vector<LeafId> kids;
  for (auto& b : node(id).box.split(parts)) kids.push_back(add(std::move(b), c, id, depth));
  nodes_[id].children = kids;
  return kids;
}

std::optional<LeafId> SymbolStore::locate(const VectorXd& z) const {
  if (z.size() != state_space_.dim()) throw std::invalid_argument("SymbolStore::locate: dimension mismatch");
  VectorXd w = z;
  for (int d : angular_dims_) w[d] = wrap_angle(w[d]);
  std::size_t c = 0;
  if (!partition_.locate(w.head(partition_.dim()), c)) return std::nullopt;
  LeafId u = roots_[c];
  const BoxXd& root = node(u).box;
  if (!root.contains(w)) return std::nullopt;
  auto inside = [&](const BoxXd& b) {
    for (Eigen::Index d = 0; d < b.dim(); ++d) {
      if (w[d] < b.lo(d)) return false;
      if (w[d] > b.hi(d) || (w[d] == b.hi(d) && b.hi(d) != root.hi(d))) return false;
    }
    return true;
  };
  while (!node(u).children.empty()) {
    const auto& kids = node(u).children;
    const auto it = std::find_if(kids.begin(), kids.end(), [&](LeafId k) { return inside(node(k).box); });
    if (it == kids.end()) return std::nullopt;
    u = *it;
  }
  return u;
}

void SymbolStore::collect(std::size_t cell, const BoxXd& q, std::vector<LeafId>& out) const {
  std::vector<LeafId> stack{roots_.at(cell)};
  while (!stack.empty()) {
    const LeafId u = stack.back();
    stack.pop_back();
    if (!node(u).box.intersects(q)) continue;
    const auto& kids = node(u).children;
    if (kids.empty())
      out.push_back(u);
    else
      stack.insert(stack.end(), kids.rbegin(), kids.rend());
  }
}

}  // namespace hiersynth
