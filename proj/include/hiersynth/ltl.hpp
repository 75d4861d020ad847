#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hiersynth {

enum class LtlOp { constant_true, constant_false, atom, negation, conjunction, disjunction, implication,
                   next, until, release, eventually, always };

struct LtlFormula;
using LtlPtr = std::shared_ptr<const LtlFormula>;

struct LtlFormula {
  LtlOp op;
  std::string atom;  // only for LtlOp::atom
  LtlPtr lhs;        // operand of unary operators
  LtlPtr rhs;
};

LtlPtr ltl_true();
LtlPtr ltl_false();
LtlPtr ltl_atom(std::string name);
LtlPtr ltl_unary(LtlOp op, LtlPtr operand);
LtlPtr ltl_binary(LtlOp op, LtlPtr lhs, LtlPtr rhs);

bool structurally_equal(const LtlFormula& a, const LtlFormula& b);
std::size_t formula_size(const LtlFormula& f);
std::string to_string(const LtlFormula& f);

class LtlParseError : public std::runtime_error {
 public:
  LtlParseError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Grammar, loosest first: `->` (right assoc), `||`, `&&`, `U`/`R` (right assoc),
/// then the prefix operators `!`, `X`, `F`/`<>`, `G`/`[]`.  Atoms must be declared.
LtlPtr parse_ltl(const std::string& text, const std::vector<std::string>& atoms);

/// Truth of f on prefix . suffix^omega where position i holds exactly the region word[i].
bool evaluate_on_lasso(const LtlFormula& f, const std::vector<std::string>& prefix,
                       const std::vector<std::string>& suffix);

/// Conjunction of literals over region names.  Under region semantics a guard holds
/// for region r when every positive atom equals r and no negative atom does.
struct Guard {
  std::vector<std::string> positive;
  std::vector<std::string> negative;
  bool holds(const std::string& region) const;
};

/// Generalized Buchi automaton.  State 0 is the initial state; a transition reads
/// the letter satisfying its guard.  Acceptance is state-based.
struct BuchiAutomaton {
  struct Transition {
    int from;
    int to;
    Guard guard;
  };
  std::vector<std::string> atoms;
  int state_count = 0;
  std::vector<Transition> transitions;
  std::vector<std::vector<int>> acceptance;  // each a sorted list of states

  std::string dump() const;
};

BuchiAutomaton ltl_to_buchi(const LtlFormula& f);

/// Directed graph whose vertices carry a region label; paths through it spell words.
struct LabeledGraph {
  std::vector<std::string> labels;
  std::vector<std::vector<int>> successors;
  std::vector<int> initial;
};

/// Whether some word spelled by an infinite path of the graph is accepted.
bool accepts_some_path(const BuchiAutomaton& aut, const LabeledGraph& graph);

/// The single-vertex-per-position graph of prefix . suffix^omega.
LabeledGraph lasso_graph(const std::vector<std::string>& prefix, const std::vector<std::string>& suffix);

struct RoiTransitionSystem {
  std::vector<std::string> regions;
  std::map<std::string, std::vector<std::string>> delta;

  /// delta(pi) = all regions for every pi.
  static RoiTransitionSystem complete(std::vector<std::string> regions);
  void validate() const;
  bool allows(const std::string& from, const std::string& to) const;
};

struct AcceptingPath {
  std::vector<std::string> prefix;
  std::vector<std::string> suffix;

  bool operator==(const AcceptingPath&) const = default;
};

class NoAcceptingPath : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Accepting lasso through the transition system starting at `initial`, found by
/// nested DFS on the product.  Candidates are a shortest stem plus every shortest
/// product cycle through each reachable accepting state; each is normalized (stem
/// rolled into the cycle where possible, cycle reduced to its minimal period) and
/// the one with the shortest suffix, then shortest prefix, is returned.
AcceptingPath find_accepting_path(const RoiTransitionSystem& ts, const BuchiAutomaton& aut,
                                  const std::string& initial);

using RegionPair = std::pair<std::string, std::string>;

/// Distinct consecutive pairs across prefix, the prefix/suffix seam and the suffix
/// wrap-around, in order of first occurrence.
std::vector<RegionPair> consecutive_pairs(const AcceptingPath& path);

std::string to_string(const AcceptingPath& path);

}  // namespace hiersynth
