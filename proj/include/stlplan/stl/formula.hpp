#pragma once

#include <Eigen/Core>

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stlplan::stl {

struct FormulaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Time window of a temporal operator, in seconds.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(std::isfinite(lo) && std::isfinite(hi))) {
      throw FormulaError("interval bounds must be finite");
    }
    if (lo < 0.0) {
      throw FormulaError("interval lower bound must be >= 0");
    }
    if (lo > hi) {
      throw FormulaError("interval lower bound exceeds upper bound");
    }
  }

  bool operator==(const Interval&) const = default;
};

/// Uniformly sampled multivariate signal. Column k holds the state at t_k =
/// t0 + k * period. A signal with N+1 columns supports anchors 0..N.
class Signal {
 public:
  Signal(Eigen::MatrixXd samples, double period, double start_time = 0.0)
      : samples_(std::move(samples)), period_(period), start_time_(start_time) {
    if (samples_.cols() < 2) {
      throw FormulaError("signal needs at least two samples");
    }
    if (!(period_ > 0.0)) {
      throw FormulaError("signal period must be positive");
    }
  }

  const Eigen::MatrixXd& samples() const { return samples_; }
  Eigen::MatrixXd& samples() { return samples_; }
  double period() const { return period_; }
  double start_time() const { return start_time_; }
  /// Number of steps N; valid sample indices are 0..N.
  int steps() const { return static_cast<int>(samples_.cols()) - 1; }
  Eigen::VectorXd sample(int k) const { return samples_.col(k); }

 private:
  Eigen::MatrixXd samples_;
  double period_;
  double start_time_;
};

/// Real-valued predicate over a signal: mu(signal, k). The optional gradient
/// callback accumulates weight * d(mu)/d(samples) into grad, which has the
/// same shape as the signal matrix.
struct Predicate {
  std::string name;
  std::function<double(const Signal&, int)> value;
  std::function<void(const Signal&, int, double, Eigen::MatrixXd&)> gradient;
};

class PredicateTable {
 public:
  int add(std::string name, std::function<double(const Signal&, int)> fn,
          std::function<void(const Signal&, int, double, Eigen::MatrixXd&)> grad = nullptr) {
    if (ids_.count(name) != 0) {
      throw FormulaError("duplicate predicate id: " + name);
    }
    const int id = static_cast<int>(predicates_.size());
    ids_.emplace(name, id);
    predicates_.push_back(Predicate{std::move(name), std::move(fn), std::move(grad)});
    return id;
  }

  bool contains(const std::string& name) const { return ids_.count(name) != 0; }

  int id_of(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) {
      throw FormulaError("unknown predicate id: " + name);
    }
    return it->second;
  }

  const Predicate& at(int id) const { return predicates_.at(static_cast<size_t>(id)); }
  int size() const { return static_cast<int>(predicates_.size()); }

 private:
  std::vector<Predicate> predicates_;
  std::map<std::string, int> ids_;
};

enum class Kind { True, Predicate, Not, And, Or, Always, Eventually, Next, Until };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Immutable formula tree node. Children are shared; trees may be reused
/// across concurrent evaluations.
struct Formula {
  Kind kind = Kind::True;
  int pred_id = -1;
  std::string pred_name;
  Interval window;
  std::vector<FormulaPtr> children;

  static FormulaPtr truth() {
    return std::make_shared<Formula>(Formula{Kind::True, -1, {}, {}, {}});
  }
  static FormulaPtr pred(const PredicateTable& table, const std::string& name) {
    return std::make_shared<Formula>(
        Formula{Kind::Predicate, table.id_of(name), name, {}, {}});
  }
  static FormulaPtr negate(FormulaPtr f) {
    return std::make_shared<Formula>(Formula{Kind::Not, -1, {}, {}, {std::move(f)}});
  }
  static FormulaPtr conj(std::vector<FormulaPtr> kids) {
    if (kids.size() < 2) throw FormulaError("conjunction needs at least two operands");
    return std::make_shared<Formula>(Formula{Kind::And, -1, {}, {}, std::move(kids)});
  }
  static FormulaPtr disj(std::vector<FormulaPtr> kids) {
    if (kids.size() < 2) throw FormulaError("disjunction needs at least two operands");
    return std::make_shared<Formula>(Formula{Kind::Or, -1, {}, {}, std::move(kids)});
  }
  static FormulaPtr always(Interval iv, FormulaPtr f) {
    return std::make_shared<Formula>(Formula{Kind::Always, -1, {}, iv, {std::move(f)}});
  }
  static FormulaPtr eventually(Interval iv, FormulaPtr f) {
    return std::make_shared<Formula>(Formula{Kind::Eventually, -1, {}, iv, {std::move(f)}});
  }
  static FormulaPtr next(Interval iv, FormulaPtr f) {
    return std::make_shared<Formula>(Formula{Kind::Next, -1, {}, iv, {std::move(f)}});
  }
  static FormulaPtr until(Interval iv, FormulaPtr lhs, FormulaPtr rhs) {
    return std::make_shared<Formula>(
        Formula{Kind::Until, -1, {}, iv, {std::move(lhs), std::move(rhs)}});
  }
  /// a -> b desugars to !a | b.
  static FormulaPtr implies(FormulaPtr a, FormulaPtr b) {
    return disj({negate(std::move(a)), std::move(b)});
  }
};

inline bool equal(const Formula& a, const Formula& b) {
  if (a.kind != b.kind || a.pred_id != b.pred_id || !(a.window == b.window) ||
      a.children.size() != b.children.size()) {
    return false;
  }
  for (size_t i = 0; i < a.children.size(); ++i) {
    if (!equal(*a.children[i], *b.children[i])) return false;
  }
  return true;
}

inline bool equal(const FormulaPtr& a, const FormulaPtr& b) { return equal(*a, *b); }

namespace detail {

// Shortest decimal form that parses back to the identical double.
inline void format_number(std::ostream& os, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  os.write(buf, ptr - buf);
}

inline int precedence(Kind k) {
  switch (k) {
    case Kind::Or: return 1;
    case Kind::And: return 2;
    case Kind::Until: return 3;
    default: return 4;  // atoms and unary operators
  }
}

inline void unparse_rec(const Formula& f, std::ostream& os, int parent_prec) {
  const int prec = precedence(f.kind);
  const bool parens = prec <= parent_prec;
  switch (f.kind) {
    case Kind::True:
      os << "true";
      return;
    case Kind::Predicate:
      os << f.pred_name;
      return;
    case Kind::Not:
      os << "!";
      unparse_rec(*f.children[0], os, prec);
      return;
    case Kind::And:
    case Kind::Or: {
      if (parens) os << "(";
      const char* sep = f.kind == Kind::And ? " & " : " | ";
      for (size_t i = 0; i < f.children.size(); ++i) {
        if (i > 0) os << sep;
        unparse_rec(*f.children[i], os, prec);
      }
      if (parens) os << ")";
      return;
    }
    case Kind::Always:
    case Kind::Eventually:
    case Kind::Next: {
      os << (f.kind == Kind::Always ? "G" : f.kind == Kind::Eventually ? "F" : "X");
      os << "[";
      format_number(os, f.window.lo);
      os << ",";
      format_number(os, f.window.hi);
      os << "] ";
      unparse_rec(*f.children[0], os, prec);
      return;
    }
    case Kind::Until: {
      if (parens) os << "(";
      unparse_rec(*f.children[0], os, prec - 1);  // left associative
      os << " U[";
      format_number(os, f.window.lo);
      os << ",";
      format_number(os, f.window.hi);
      os << "] ";
      unparse_rec(*f.children[1], os, prec);
      if (parens) os << ")";
      return;
    }
  }
}

}  // namespace detail

/// Canonical text form; parse(unparse(f)) reconstructs an identical tree.
inline std::string unparse(const Formula& f) {
  std::ostringstream os;
  detail::unparse_rec(f, os, 0);
  return os.str();
}

inline std::string unparse(const FormulaPtr& f) { return unparse(*f); }

}  // namespace stlplan::stl
