#include "hiersynth/ltl.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>
#include <sstream>

namespace hiersynth {

namespace {

// Product of a generalized Buchi automaton with a labeled graph, degeneralized
// by a counter over the acceptance sets.  Product state id = (s * V + v) * K + c.
class Product {
 public:
  Product(const BuchiAutomaton& aut, const LabeledGraph& graph)
      : graph_(graph),
        states_(aut.state_count),
        vertices_(static_cast<int>(graph.labels.size())),
        sets_(static_cast<int>(aut.acceptance.size())),
        out_(static_cast<std::size_t>(aut.state_count)),
        member_(static_cast<std::size_t>(aut.state_count) * static_cast<std::size_t>(sets_), false) {
    // guard_ok_[t * V + v]: transition t may read the label of vertex v
    guard_ok_.resize(aut.transitions.size() * static_cast<std::size_t>(vertices_));
    for (std::size_t t = 0; t < aut.transitions.size(); ++t) {
      const auto& tr = aut.transitions[t];
      out_[static_cast<std::size_t>(tr.from)].push_back({tr.to, t});
      for (int v = 0; v < vertices_; ++v)
        guard_ok_[t * static_cast<std::size_t>(vertices_) + static_cast<std::size_t>(v)] =
            tr.guard.holds(graph.labels[static_cast<std::size_t>(v)]);
    }
    for (int k = 0; k < sets_; ++k)
      for (int s : aut.acceptance[static_cast<std::size_t>(k)]) member_[index(s, k)] = true;
  }

  int size() const { return states_ * vertices_ * sets_; }
  int encode(int s, int v, int c) const { return (s * vertices_ + v) * sets_ + c; }
  int vertex(int id) const { return (id / sets_) % vertices_; }

  bool accepting(int id) const {
    const int c = id % sets_;
    const int s = id / sets_ / vertices_;
    return c == 0 && member_[index(s, 0)];
  }

  std::vector<int> initial() const {
    std::vector<int> result;
    for (int v : graph_.initial)
      for (const auto& [to, t] : out_[0])
        if (ok(t, v)) result.push_back(encode(to, v, 0));
    std::sort(result.begin(), result.end());
    result.erase(std::unique(result.begin(), result.end()), result.end());
    return result;
  }

  template <class Visit>
  void for_each_successor(int id, Visit&& visit) const {
    const int c = id % sets_;
    const int v = (id / sets_) % vertices_;
    const int s = id / sets_ / vertices_;
    const int c2 = member_[index(s, c)] ? (c + 1) % sets_ : c;
    for (int w : graph_.successors[static_cast<std::size_t>(v)])
      for (const auto& [to, t] : out_[static_cast<std::size_t>(s)])
        if (ok(t, w)) visit(encode(to, w, c2));
  }

 private:
  std::size_t index(int s, int k) const { return static_cast<std::size_t>(s * sets_ + k); }
  bool ok(std::size_t t, int v) const {
    return guard_ok_[t * static_cast<std::size_t>(vertices_) + static_cast<std::size_t>(v)];
  }

  const LabeledGraph& graph_;
  int states_, vertices_, sets_;
  std::vector<std::vector<std::pair<int, std::size_t>>> out_;
  std::vector<bool> member_;
  std::vector<bool> guard_ok_;
};

// Courcoubetis-Vardi-Wolper-Yannakakis nested depth-first search, iterative.
bool nested_dfs(const Product& p) {
  const int n = p.size();
  std::vector<char> outer(static_cast<std::size_t>(n), 0), inner(static_cast<std::size_t>(n), 0);
  std::vector<int> succ;

  auto inner_search = [&](int seed) {
    std::vector<int> stack{seed};
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      bool found = false;
      p.for_each_successor(u, [&](int w) {
        if (w == seed) found = true;
        if (!inner[static_cast<std::size_t>(w)]) {
          inner[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
      });
      if (found) return true;
    }
    return false;
  };

  struct Frame {
    int id;
    std::vector<int> successors;
    std::size_t next = 0;
  };
  for (int root : p.initial()) {
    if (outer[static_cast<std::size_t>(root)]) continue;
    std::vector<Frame> stack;
    outer[static_cast<std::size_t>(root)] = 1;
    stack.push_back({root, {}});
    p.for_each_successor(root, [&](int w) { stack.back().successors.push_back(w); });
    while (!stack.empty()) {
      Frame& top = stack.back();
      if (top.next < top.successors.size()) {
        const int w = top.successors[top.next++];
        if (!outer[static_cast<std::size_t>(w)]) {
          outer[static_cast<std::size_t>(w)] = 1;
          succ.clear();
          p.for_each_successor(w, [&](int x) { succ.push_back(x); });
          stack.push_back({w, succ});
        }
        continue;
      }
      // post-order: start the inner search from accepting states
      if (p.accepting(top.id) && inner_search(top.id)) return true;
      stack.pop_back();
    }
  }
  return false;
}

// Breadth-first distances and parents from a set of sources.
struct Bfs {
  std::vector<int> dist, parent;
};

Bfs bfs(const Product& p, const std::vector<int>& sources) {
  Bfs r{std::vector<int>(static_cast<std::size_t>(p.size()), -1), std::vector<int>(static_cast<std::size_t>(p.size()), -1)};
  std::deque<int> queue;
  for (int s : sources) {
    if (r.dist[static_cast<std::size_t>(s)] >= 0) continue;
    r.dist[static_cast<std::size_t>(s)] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    p.for_each_successor(u, [&](int w) {
      if (r.dist[static_cast<std::size_t>(w)] < 0) {
        r.dist[static_cast<std::size_t>(w)] = r.dist[static_cast<std::size_t>(u)] + 1;
        r.parent[static_cast<std::size_t>(w)] = u;
        queue.push_back(w);
      }
    });
  }
  return r;
}

std::vector<int> trace(const Bfs& b, int target) {
  std::vector<int> path;
  for (int u = target; u >= 0; u = b.parent[static_cast<std::size_t>(u)]) path.push_back(u);
  std::reverse(path.begin(), path.end());
  return path;
}

// All shortest cycles through `a` (each listed from a, without the closing
// return to a), up to `cap` of them.  Empty when a lies on no cycle.
std::vector<std::vector<int>> shortest_cycles(const Product& p, int a, std::size_t cap) {
  const Bfs b = bfs(p, {a});
  auto closes = [&](int u) {
    bool found = false;
    p.for_each_successor(u, [&](int w) { found |= w == a; });
    return found;
  };
  int length = -1;
  for (int u = 0; u < p.size(); ++u)
    if (b.dist[static_cast<std::size_t>(u)] >= 0 && closes(u) &&
        (length < 0 || b.dist[static_cast<std::size_t>(u)] + 1 < length))
      length = b.dist[static_cast<std::size_t>(u)] + 1;
  std::vector<std::vector<int>> cycles;
  if (length < 0) return cycles;
  std::vector<int> path{a};
  auto extend = [&](auto&& self) -> void {
    if (cycles.size() >= cap) return;
    const int u = path.back();
    if (static_cast<int>(path.size()) == length) {
      if (closes(u)) cycles.push_back(path);
      return;
    }
    std::vector<int> next;
    p.for_each_successor(u, [&](int w) {
      if (b.dist[static_cast<std::size_t>(w)] == static_cast<int>(path.size())) next.push_back(w);
    });
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    for (int w : next) {
      path.push_back(w);
      self(self);
      path.pop_back();
    }
  };
  extend(extend);
  return cycles;
}

AcceptingPath normalize(AcceptingPath path) {
  auto& pre = path.prefix;
  auto& suf = path.suffix;
  while (!pre.empty() && pre.back() == suf.back()) {
    pre.pop_back();
    std::rotate(suf.rbegin(), suf.rbegin() + 1, suf.rend());
  }
  const std::size_t n = suf.size();
  for (std::size_t period = 1; period < n; ++period) {
    if (n % period) continue;
    bool periodic = true;
    for (std::size_t i = period; i < n && periodic; ++i) periodic = suf[i] == suf[i - period];
    if (periodic) {
      suf.resize(period);
      break;
    }
  }
  return path;
}

}  // namespace

bool accepts_some_path(const BuchiAutomaton& aut, const LabeledGraph& graph) {
  return nested_dfs(Product(aut, graph));
}

LabeledGraph lasso_graph(const std::vector<std::string>& prefix, const std::vector<std::string>& suffix) {
  if (suffix.empty()) throw std::invalid_argument("lasso_graph: empty suffix");
  LabeledGraph g;
  g.labels = prefix;
  g.labels.insert(g.labels.end(), suffix.begin(), suffix.end());
  const int n = static_cast<int>(g.labels.size());
  for (int i = 0; i < n; ++i) g.successors.push_back({i + 1 < n ? i + 1 : static_cast<int>(prefix.size())});
  g.initial = {0};
  return g;
}

RoiTransitionSystem RoiTransitionSystem::complete(std::vector<std::string> regions) {
  RoiTransitionSystem ts;
  ts.regions = std::move(regions);
  for (const auto& r : ts.regions) ts.delta[r] = ts.regions;
  return ts;
}

void RoiTransitionSystem::validate() const {
  const std::set<std::string> names(regions.begin(), regions.end());
  if (names.size() != regions.size()) throw std::invalid_argument("duplicate region name");
  for (const auto& [from, targets] : delta) {
    if (!names.count(from)) throw std::invalid_argument("transition from unknown region '" + from + "'");
    for (const auto& to : targets)
      if (!names.count(to)) throw std::invalid_argument("transition to unknown region '" + to + "'");
  }
}

bool RoiTransitionSystem::allows(const std::string& from, const std::string& to) const {
  const auto it = delta.find(from);
  return it != delta.end() && std::find(it->second.begin(), it->second.end(), to) != it->second.end();
}

AcceptingPath find_accepting_path(const RoiTransitionSystem& ts, const BuchiAutomaton& aut,
                                  const std::string& initial) {
  ts.validate();
  const auto start = std::find(ts.regions.begin(), ts.regions.end(), initial);
  if (start == ts.regions.end()) throw std::invalid_argument("unknown initial region '" + initial + "'");

  LabeledGraph graph;
  graph.labels = ts.regions;
  for (const auto& r : ts.regions) {
    std::vector<int> succ;
    if (const auto it = ts.delta.find(r); it != ts.delta.end())
      for (const auto& to : it->second)
        succ.push_back(static_cast<int>(std::find(ts.regions.begin(), ts.regions.end(), to) - ts.regions.begin()));
    graph.successors.push_back(std::move(succ));
  }
  graph.initial = {static_cast<int>(start - ts.regions.begin())};

  const Product p(aut, graph);
  if (!nested_dfs(p)) throw NoAcceptingPath("no accepting path from '" + initial + "'");

  // Candidate lasso per reachable accepting state; keep the shortest after
  // normalization (suffix first, then prefix).  Ties go to the lowest state id.
  const Bfs reach = bfs(p, p.initial());
  std::optional<AcceptingPath> best;
  for (int a = 0; a < p.size(); ++a) {
    if (reach.dist[static_cast<std::size_t>(a)] < 0 || !p.accepting(a)) continue;
    const auto stem = trace(reach, a);
    for (const auto& cycle : shortest_cycles(p, a, 256)) {
      AcceptingPath candidate;
      for (std::size_t i = 0; i + 1 < stem.size(); ++i)
        candidate.prefix.push_back(ts.regions[static_cast<std::size_t>(p.vertex(stem[i]))]);
      for (int u : cycle) candidate.suffix.push_back(ts.regions[static_cast<std::size_t>(p.vertex(u))]);
      candidate = normalize(std::move(candidate));
      if (!best || std::make_pair(candidate.suffix.size(), candidate.prefix.size()) <
                       std::make_pair(best->suffix.size(), best->prefix.size()))
        best = std::move(candidate);
    }
  }
  if (!best) throw std::logic_error("nested DFS and lasso extraction disagree");
  return *best;
}

std::vector<RegionPair> consecutive_pairs(const AcceptingPath& path) {
  if (path.suffix.empty()) throw std::invalid_argument("consecutive_pairs: empty suffix");
  std::vector<std::string> seq = path.prefix;
  seq.insert(seq.end(), path.suffix.begin(), path.suffix.end());
  seq.push_back(path.suffix.front());
  std::vector<RegionPair> pairs;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    RegionPair pr{seq[i], seq[i + 1]};
    if (std::find(pairs.begin(), pairs.end(), pr) == pairs.end()) pairs.push_back(std::move(pr));
  }
  return pairs;
}

std::string to_string(const AcceptingPath& path) {
  std::ostringstream os;
  for (const auto& r : path.prefix) os << r << ' ';
  os << '(';
  for (std::size_t i = 0; i < path.suffix.size(); ++i) os << (i ? " " : "") << path.suffix[i];
  os << ")^w";
  return os.str();
}

}  // namespace hiersynth
