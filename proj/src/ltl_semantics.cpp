#include "hiersynth/ltl.hpp"

namespace hiersynth {

namespace {

// Positions 0..L-1 of the lasso; the successor of the last position loops back
// to the first suffix position.  Each subformula is a truth vector over positions.
class LassoEvaluator {
 public:
  LassoEvaluator(const std::vector<std::string>& prefix, const std::vector<std::string>& suffix)
      : word_(prefix), loop_(prefix.size()) {
    word_.insert(word_.end(), suffix.begin(), suffix.end());
  }

  std::vector<bool> eval(const LtlFormula& f) const {
    const std::size_t n = word_.size();
    switch (f.op) {
      case LtlOp::constant_true: return std::vector<bool>(n, true);
      case LtlOp::constant_false: return std::vector<bool>(n, false);
      case LtlOp::atom: {
        std::vector<bool> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = word_[i] == f.atom;
        return v;
      }
      case LtlOp::negation: {
        auto v = eval(*f.lhs);
        v.flip();
        return v;
      }
      case LtlOp::conjunction:
      case LtlOp::disjunction:
      case LtlOp::implication: {
        const auto a = eval(*f.lhs), b = eval(*f.rhs);
        std::vector<bool> v(n);
        for (std::size_t i = 0; i < n; ++i)
          v[i] = f.op == LtlOp::conjunction ? (a[i] && b[i]) : f.op == LtlOp::disjunction ? (a[i] || b[i])
                                                                                          : (!a[i] || b[i]);
        return v;
      }
      case LtlOp::next: {
        const auto a = eval(*f.lhs);
        std::vector<bool> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = a[next(i)];
        return v;
      }
      case LtlOp::until: return fixpoint(eval(*f.lhs), eval(*f.rhs), false);
      case LtlOp::release: return fixpoint(eval(*f.lhs), eval(*f.rhs), true);
      case LtlOp::eventually: return fixpoint(std::vector<bool>(n, true), eval(*f.lhs), false);
      case LtlOp::always: return fixpoint(std::vector<bool>(n, false), eval(*f.lhs), true);
    }
    return {};
  }

 private:
  std::size_t next(std::size_t i) const { return i + 1 < word_.size() ? i + 1 : loop_; }

  // until:   least fixpoint of   v = b | (a & X v)
  // release: greatest fixpoint of v = b & (a | X v)
  std::vector<bool> fixpoint(const std::vector<bool>& a, const std::vector<bool>& b, bool greatest) const {
    const std::size_t n = word_.size();
    std::vector<bool> v(n, greatest);
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t k = n; k-- > 0;) {
        const bool value = greatest ? (b[k] && (a[k] || v[next(k)])) : (b[k] || (a[k] && v[next(k)]));
        if (value != v[k]) {
          v[k] = value;
          changed = true;
        }
      }
    }
    return v;
  }

  std::vector<std::string> word_;
  std::size_t loop_;
};

}  // namespace

bool evaluate_on_lasso(const LtlFormula& f, const std::vector<std::string>& prefix,
                       const std::vector<std::string>& suffix) {
  if (suffix.empty()) throw std::invalid_argument("evaluate_on_lasso: empty suffix");
  return LassoEvaluator(prefix, suffix).eval(f)[0];
}

}  // namespace hiersynth
