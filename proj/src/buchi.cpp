#include "hiersynth/ltl.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

namespace hiersynth {

bool Guard::holds(const std::string& region) const {
  for (const auto& p : positive)
    if (p != region) return false;
  for (const auto& n : negative)
    if (n == region) return false;
  return true;
}

namespace {

enum class Nnf { top, bottom, atom, negated_atom, conjunction, disjunction, next, until, release };

struct NnfNode {
  Nnf op;
  int atom = -1;
  int lhs = -1;
  int rhs = -1;
  auto key() const { return std::make_tuple(op, atom, lhs, rhs); }
};

// Hash-consed negation normal form; equal subformulas share one id.
class NnfTable {
 public:
  int intern(NnfNode n) {
    const auto [it, inserted] = index_.emplace(n.key(), static_cast<int>(nodes_.size()));
    if (inserted) nodes_.push_back(n);
    return it->second;
  }
  const NnfNode& operator[](int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  int size() const { return static_cast<int>(nodes_.size()); }

  int atom_id(const std::string& name) {
    const auto it = std::find(atoms.begin(), atoms.end(), name);
    if (it != atoms.end()) return static_cast<int>(it - atoms.begin());
    atoms.push_back(name);
    return static_cast<int>(atoms.size()) - 1;
  }

  int build(const LtlFormula& f, bool negate) {
    switch (f.op) {
      case LtlOp::constant_true: return intern({negate ? Nnf::bottom : Nnf::top});
      case LtlOp::constant_false: return intern({negate ? Nnf::top : Nnf::bottom});
      case LtlOp::atom: return intern({negate ? Nnf::negated_atom : Nnf::atom, atom_id(f.atom)});
      case LtlOp::negation: return build(*f.lhs, !negate);
      case LtlOp::conjunction:
        return binary(negate ? Nnf::disjunction : Nnf::conjunction, *f.lhs, negate, *f.rhs, negate);
      case LtlOp::disjunction:
        return binary(negate ? Nnf::conjunction : Nnf::disjunction, *f.lhs, negate, *f.rhs, negate);
      case LtlOp::implication:
        return binary(negate ? Nnf::conjunction : Nnf::disjunction, *f.lhs, !negate, *f.rhs, negate);
      case LtlOp::next: return intern({Nnf::next, -1, build(*f.lhs, negate)});
      case LtlOp::until:
        return binary(negate ? Nnf::release : Nnf::until, *f.lhs, negate, *f.rhs, negate);
      case LtlOp::release:
        return binary(negate ? Nnf::until : Nnf::release, *f.lhs, negate, *f.rhs, negate);
      case LtlOp::eventually:
      case LtlOp::always: {
        const bool until = (f.op == LtlOp::eventually) != negate;
        const int constant = intern({until ? Nnf::top : Nnf::bottom});
        return binary(until ? Nnf::until : Nnf::release, constant, build(*f.lhs, negate));
      }
    }
    return -1;
  }

  std::vector<std::string> atoms;

 private:
  int binary(Nnf op, int lhs, int rhs) { return intern({op, -1, lhs, rhs}); }
  // operands are translated left to right so atom numbering follows the text
  int binary(Nnf op, const LtlFormula& lhs, bool negate_lhs, const LtlFormula& rhs, bool negate_rhs) {
    const int l = build(lhs, negate_lhs);
    return binary(op, l, build(rhs, negate_rhs));
  }

  std::vector<NnfNode> nodes_;
  std::map<std::tuple<Nnf, int, int, int>, int> index_;
};

constexpr int kInit = -1;

struct TableauNode {
  std::set<int> incoming;
  std::set<int> fresh;  // obligations still to be processed
  std::set<int> old;
  std::set<int> next;
};

// Tableau construction in the style of Gerth, Peled, Vardi and Wolper.
class Tableau {
 public:
  explicit Tableau(const NnfTable& table) : table_(table) {}

  void run(int root) {
    TableauNode start;
    start.incoming = {kInit};
    start.fresh = {root};
    expand(std::move(start));
  }

  std::vector<TableauNode> nodes;

 private:
  bool contradicts(const TableauNode& node, const NnfNode& lit) const {
    for (int id : node.old) {
      const NnfNode& other = table_[id];
      if (lit.op == Nnf::atom) {
        // regions are mutually exclusive: two different positive atoms never hold together
        if (other.op == Nnf::negated_atom && other.atom == lit.atom) return true;
        if (other.op == Nnf::atom && other.atom != lit.atom) return true;
      } else if (other.op == Nnf::atom && other.atom == lit.atom) {
        return true;
      }
    }
    return false;
  }

  void expand(TableauNode node) {
    if (node.fresh.empty()) {
      for (auto& existing : nodes) {
        if (existing.old == node.old && existing.next == node.next) {
          existing.incoming.insert(node.incoming.begin(), node.incoming.end());
          return;
        }
      }
      const int name = static_cast<int>(nodes.size());
      TableauNode successor;
      successor.incoming = {name};
      successor.fresh = node.next;
      nodes.push_back(std::move(node));
      expand(std::move(successor));
      return;
    }
    const int eta = *node.fresh.begin();
    node.fresh.erase(node.fresh.begin());
    if (node.old.count(eta)) {
      expand(std::move(node));
      return;
    }
    const NnfNode& f = table_[eta];
    auto add_fresh = [](TableauNode& n, std::initializer_list<int> ids) {
      for (int id : ids)
        if (!n.old.count(id)) n.fresh.insert(id);
    };
    switch (f.op) {
      case Nnf::bottom: return;
      case Nnf::top:
      case Nnf::atom:
      case Nnf::negated_atom:
        if (f.op != Nnf::top && contradicts(node, f)) return;
        node.old.insert(eta);
        expand(std::move(node));
        return;
      case Nnf::conjunction:
        node.old.insert(eta);
        add_fresh(node, {f.lhs, f.rhs});
        expand(std::move(node));
        return;
      case Nnf::next:
        node.old.insert(eta);
        node.next.insert(f.lhs);
        expand(std::move(node));
        return;
      case Nnf::disjunction:
      case Nnf::until:
      case Nnf::release: {
        TableauNode first = node, second = std::move(node);
        first.old.insert(eta);
        second.old.insert(eta);
        if (f.op == Nnf::disjunction) {
          add_fresh(first, {f.lhs});
          add_fresh(second, {f.rhs});
        } else if (f.op == Nnf::until) {
          add_fresh(first, {f.lhs});
          first.next.insert(eta);
          add_fresh(second, {f.rhs});
        } else {
          add_fresh(first, {f.rhs});
          first.next.insert(eta);
          add_fresh(second, {f.lhs, f.rhs});
        }
        expand(std::move(first));
        expand(std::move(second));
        return;
      }
    }
  }

  const NnfTable& table_;
};

}  // namespace

BuchiAutomaton ltl_to_buchi(const LtlFormula& formula) {
  NnfTable table;
  const int root = table.build(formula, false);
  Tableau tableau(table);
  tableau.run(root);

  BuchiAutomaton aut;
  aut.atoms = table.atoms;
  aut.state_count = static_cast<int>(tableau.nodes.size()) + 1;  // tableau node k is state k + 1
  for (std::size_t k = 0; k < tableau.nodes.size(); ++k) {
    const TableauNode& node = tableau.nodes[k];
    Guard guard;
    for (int id : node.old) {
      const NnfNode& lit = table[id];
      if (lit.op == Nnf::atom) guard.positive.push_back(table.atoms[static_cast<std::size_t>(lit.atom)]);
      if (lit.op == Nnf::negated_atom) guard.negative.push_back(table.atoms[static_cast<std::size_t>(lit.atom)]);
    }
    for (int source : node.incoming)
      aut.transitions.push_back({source == kInit ? 0 : source + 1, static_cast<int>(k) + 1, guard});
  }
  std::sort(aut.transitions.begin(), aut.transitions.end(),
            [](const auto& a, const auto& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });

  for (int id = 0; id < table.size(); ++id) {
    if (table[id].op != Nnf::until) continue;
    std::vector<int> set;
    for (std::size_t k = 0; k < tableau.nodes.size(); ++k) {
      const auto& old = tableau.nodes[k].old;
      if (!old.count(id) || old.count(table[id].rhs)) set.push_back(static_cast<int>(k) + 1);
    }
    aut.acceptance.push_back(std::move(set));
  }
  if (aut.acceptance.empty()) {
    std::vector<int> all;
    for (int s = 1; s < aut.state_count; ++s) all.push_back(s);
    aut.acceptance.push_back(std::move(all));
  }
  return aut;
}

std::string BuchiAutomaton::dump() const {
  std::ostringstream os;
  os << "atoms:";
  for (const auto& a : atoms) os << ' ' << a;
  os << "\nstates: " << state_count << "\ninitial: 0\n";
  for (std::size_t k = 0; k < acceptance.size(); ++k) {
    os << "accepting set " << k << ':';
    for (int s : acceptance[k]) os << ' ' << s;
    os << '\n';
  }
  for (const auto& t : transitions) {
    os << t.from << " -> " << t.to << " [";
    bool first = true;
    for (const auto& p : t.guard.positive) {
      os << (first ? "" : " && ") << p;
      first = false;
    }
    for (const auto& n : t.guard.negative) {
      os << (first ? "" : " && ") << '!' << n;
      first = false;
    }
    os << (first ? "true" : "") << "]\n";
  }
  return os.str();
}

}  // namespace hiersynth
