#pragma once

#include "stlplan/stl/formula.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace stlplan::stl {

struct HorizonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Robustness assigned to the constant true formula. Finite so that the
/// smooth operators stay well defined; large enough to never bind.
inline constexpr double kTrueRobustness = 1e6;

namespace detail {

inline int snap_ceil(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) < 1e-6) return static_cast<int>(r);
  return static_cast<int>(std::ceil(x));
}

inline int snap_floor(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) < 1e-6) return static_cast<int>(r);
  return static_cast<int>(std::floor(x));
}

}  // namespace detail

/// Inclusive index range covered by window iv anchored at sample k:
/// {ceil((t_k+lo)/T_s) .. floor((t_k+hi)/T_s)}. n_steps is the last valid
/// sample index of the signal.
struct SampleRange {
  int first;
  int last;
};

inline SampleRange interval_to_samples(const Interval& iv, double period, int k, int n_steps) {
  if (k < 0) throw FormulaError("anchor index must be non-negative");
  const int first = k + detail::snap_ceil(iv.lo / period);
  const int last = k + detail::snap_floor(iv.hi / period);
  if (first > last) {
    throw FormulaError("time window [" + std::to_string(iv.lo) + "," + std::to_string(iv.hi) +
                       "] anchored at sample " + std::to_string(k) +
                       " maps to an empty index range");
  }
  if (last > n_steps) {
    throw HorizonError("time window [" + std::to_string(iv.lo) + "," + std::to_string(iv.hi) +
                       "] anchored at sample " + std::to_string(k) +
                       " extends past the signal horizon (needs sample " + std::to_string(last) +
                       ", have " + std::to_string(n_steps) + ")");
  }
  return {first, last};
}

/// Sample index a Next operator evaluates its child at. The window [0, T_s]
/// addresses exactly the next sample; otherwise the first index of the
/// mapped range is used.
inline int next_sample_index(const Interval& iv, double period, int k, int n_steps) {
  int target;
  if (iv.lo == 0.0 && std::abs(iv.hi - period) < 1e-9 * std::max(1.0, period)) {
    target = k + 1;
  } else {
    target = interval_to_samples(iv, period, k, n_steps).first;
  }
  if (target > n_steps) {
    throw HorizonError("next operator anchored at sample " + std::to_string(k) +
                       " addresses sample " + std::to_string(target) + " past the horizon");
  }
  return target;
}

/// Soft minimum -(1/lambda) * log(sum exp(-lambda * v_i)), computed with the
/// extreme value shifted out so lambda * v never overflows the exponent range.
inline double smooth_min(const std::vector<double>& values, double lambda) {
  if (values.empty()) throw FormulaError("smooth_min of an empty set");
  if (!(lambda > 0.0)) throw FormulaError("smoothing parameter must be positive");
  double m = values[0];
  for (double v : values) {
    if (!std::isfinite(v)) throw FormulaError("smooth_min over a non-finite value");
    m = std::min(m, v);
  }
  double acc = 0.0;
  for (double v : values) acc += std::exp(-lambda * (v - m));
  return m - std::log(acc) / lambda;
}

/// Soft maximum sum(v_i * exp(lambda v_i)) / sum(exp(lambda v_i)); a convex
/// combination of the inputs, so it lies in [min(v), max(v)].
inline double smooth_max(const std::vector<double>& values, double lambda) {
  if (values.empty()) throw FormulaError("smooth_max of an empty set");
  if (!(lambda > 0.0)) throw FormulaError("smoothing parameter must be positive");
  double m = values[0];
  for (double v : values) {
    if (!std::isfinite(v)) throw FormulaError("smooth_max over a non-finite value");
    m = std::max(m, v);
  }
  double num = 0.0;
  double den = 0.0;
  for (double v : values) {
    const double w = std::exp(lambda * (v - m));
    num += v * w;
    den += w;
  }
  return num / den;
}

namespace detail {

class Evaluator {
 public:
  Evaluator(const Signal& signal, const PredicateTable& table, bool smooth, double lambda)
      : signal_(signal), table_(table), smooth_(smooth), lambda_(lambda) {}

  double eval(const Formula& f, int k) {
    auto& slot = cache_slot(f, k);
    if (!std::isnan(slot)) return slot;
    const double v = compute(f, k);
    slot = v;
    return v;
  }

  /// Accumulates weight * d(value)/d(signal) into grad. Must be called after
  /// eval() has populated the cache for the same anchor.
  void backward(const Formula& f, int k, double weight, Eigen::MatrixXd& grad) {
    switch (f.kind) {
      case Kind::True:
        return;
      case Kind::Predicate: {
        const auto& p = table_.at(f.pred_id);
        if (!p.gradient) {
          throw FormulaError("predicate '" + p.name + "' has no gradient");
        }
        p.gradient(signal_, k, weight, grad);
        return;
      }
      case Kind::Not:
        backward(*f.children[0], k, -weight, grad);
        return;
      case Kind::And:
      case Kind::Or: {
        std::vector<double> vals(f.children.size());
        for (size_t i = 0; i < f.children.size(); ++i) vals[i] = eval(*f.children[i], k);
        const auto w = soft_weights(vals, f.kind == Kind::And);
        for (size_t i = 0; i < f.children.size(); ++i) {
          backward(*f.children[i], k, weight * w[i], grad);
        }
        return;
      }
      case Kind::Always:
      case Kind::Eventually: {
        const auto range = interval_to_samples(f.window, signal_.period(), k, signal_.steps());
        std::vector<double> vals;
        vals.reserve(static_cast<size_t>(range.last - range.first + 1));
        for (int j = range.first; j <= range.last; ++j) vals.push_back(eval(*f.children[0], j));
        const auto w = soft_weights(vals, f.kind == Kind::Always);
        for (int j = range.first; j <= range.last; ++j) {
          backward(*f.children[0], j, weight * w[static_cast<size_t>(j - range.first)], grad);
        }
        return;
      }
      case Kind::Next: {
        const int j = next_sample_index(f.window, signal_.period(), k, signal_.steps());
        backward(*f.children[0], j, weight, grad);
        return;
      }
      case Kind::Until: {
        const auto range = interval_to_samples(f.window, signal_.period(), k, signal_.steps());
        const Formula& lhs = *f.children[0];
        const Formula& rhs = *f.children[1];
        std::vector<double> outer;
        outer.reserve(static_cast<size_t>(range.last - range.first + 1));
        for (int j = range.first; j <= range.last; ++j) outer.push_back(until_term(f, j, k));
        const auto wout = soft_weights(outer, /*is_min=*/false);
        for (int j = range.first; j <= range.last; ++j) {
          std::vector<double> inner;
          inner.reserve(static_cast<size_t>(j - k + 2));
          inner.push_back(eval(rhs, j));
          for (int i = k; i <= j; ++i) inner.push_back(eval(lhs, i));
          const auto win = soft_weights(inner, /*is_min=*/true);
          const double wj = weight * wout[static_cast<size_t>(j - range.first)];
          backward(rhs, j, wj * win[0], grad);
          for (int i = k; i <= j; ++i) {
            backward(lhs, i, wj * win[static_cast<size_t>(i - k + 1)], grad);
          }
        }
        return;
      }
    }
  }

  /// Total number of min/max operands across all distinct (node, anchor)
  /// evaluations, the argument count A of the soundness margin ln(A)/lambda.
  long arg_count(const Formula& f, int k) {
    auto [it, inserted] = counted_.insert(std::pair{&f, k});
    if (!inserted) return 0;
    switch (f.kind) {
      case Kind::True:
      case Kind::Predicate:
        return 0;
      case Kind::Not:
        return arg_count(*f.children[0], k);
      case Kind::And:
      case Kind::Or: {
        long total = static_cast<long>(f.children.size());
        for (const auto& c : f.children) total += arg_count(*c, k);
        return total;
      }
      case Kind::Always:
      case Kind::Eventually: {
        const auto range = interval_to_samples(f.window, signal_.period(), k, signal_.steps());
        long total = range.last - range.first + 1;
        for (int j = range.first; j <= range.last; ++j) total += arg_count(*f.children[0], j);
        return total;
      }
      case Kind::Next: {
        const int j = next_sample_index(f.window, signal_.period(), k, signal_.steps());
        return arg_count(*f.children[0], j);
      }
      case Kind::Until: {
        const auto range = interval_to_samples(f.window, signal_.period(), k, signal_.steps());
        long total = range.last - range.first + 1;  // outer max
        for (int j = range.first; j <= range.last; ++j) {
          total += j - k + 2;  // inner min over rhs(j) and lhs(k..j)
          total += arg_count(*f.children[1], j);
          for (int i = k; i <= j; ++i) total += arg_count(*f.children[0], i);
        }
        return total;
      }
    }
    return 0;
  }

 private:
  double compute(const Formula& f, int k) {
    switch (f.kind) {
      case Kind::True:
        return kTrueRobustness;
      case Kind::Predicate:
        return table_.at(f.pred_id).value(signal_, k);
      case Kind::Not:
        return -eval(*f.children[0], k);
      case Kind::And:
      case Kind::Or: {
        std::vector<double> vals(f.children.size());
        for (size_t i = 0; i < f.children.size(); ++i) vals[i] = eval(*f.children[i], k);
        return aggregate(vals, f.kind == Kind::And);
      }
      case Kind::Always:
      case Kind::Eventually: {
        const auto range = interval_to_samples(f.window, signal_.period(), k, signal_.steps());
        std::vector<double> vals;
        vals.reserve(static_cast<size_t>(range.last - range.first + 1));
        for (int j = range.first; j <= range.last; ++j) vals.push_back(eval(*f.children[0], j));
        return aggregate(vals, f.kind == Kind::Always);
      }
      case Kind::Next: {
        const int j = next_sample_index(f.window, signal_.period(), k, signal_.steps());
        return eval(*f.children[0], j);
      }
      case Kind::Until: {
        const auto range = interval_to_samples(f.window, signal_.period(), k, signal_.steps());
        std::vector<double> terms;
        terms.reserve(static_cast<size_t>(range.last - range.first + 1));
        for (int j = range.first; j <= range.last; ++j) terms.push_back(until_term(f, j, k));
        return aggregate(terms, /*is_min=*/false);
      }
    }
    return 0.0;
  }

  double until_term(const Formula& f, int j, int k) {
    std::vector<double> inner;
    inner.reserve(static_cast<size_t>(j - k + 2));
    inner.push_back(eval(*f.children[1], j));
    for (int i = k; i <= j; ++i) inner.push_back(eval(*f.children[0], i));
    return aggregate(inner, /*is_min=*/true);
  }

  double aggregate(const std::vector<double>& vals, bool is_min) const {
    if (smooth_) return is_min ? smooth_min(vals, lambda_) : smooth_max(vals, lambda_);
    return is_min ? *std::min_element(vals.begin(), vals.end())
                  : *std::max_element(vals.begin(), vals.end());
  }

  /// Partial derivatives of the smooth aggregate w.r.t. its operands.
  std::vector<double> soft_weights(const std::vector<double>& vals, bool is_min) const {
    const size_t n = vals.size();
    std::vector<double> w(n);
    if (is_min) {
      const double m = *std::min_element(vals.begin(), vals.end());
      double den = 0.0;
      for (size_t i = 0; i < n; ++i) {
        w[i] = std::exp(-lambda_ * (vals[i] - m));
        den += w[i];
      }
      for (auto& wi : w) wi /= den;
    } else {
      const double m = *std::max_element(vals.begin(), vals.end());
      double den = 0.0;
      for (size_t i = 0; i < n; ++i) {
        w[i] = std::exp(lambda_ * (vals[i] - m));
        den += w[i];
      }
      double avg = 0.0;
      for (size_t i = 0; i < n; ++i) avg += vals[i] * w[i];
      avg /= den;
      // d/dv_i of sum(v w)/sum(w) = w_i (1 + lambda (v_i - out)) / sum(w)
      for (size_t i = 0; i < n; ++i) {
        w[i] = w[i] * (1.0 + lambda_ * (vals[i] - avg)) / den;
      }
    }
    return w;
  }

  double& cache_slot(const Formula& f, int k) {
    auto& vec = cache_[&f];
    if (vec.empty()) {
      vec.assign(static_cast<size_t>(signal_.steps()) + 1,
                 std::numeric_limits<double>::quiet_NaN());
    }
    return vec[static_cast<size_t>(k)];
  }

  struct PairHash {
    size_t operator()(const std::pair<const Formula*, int>& p) const {
      return std::hash<const Formula*>()(p.first) ^ (std::hash<int>()(p.second) * 0x9e3779b9u);
    }
  };

  const Signal& signal_;
  const PredicateTable& table_;
  bool smooth_;
  double lambda_;
  std::unordered_map<const Formula*, std::vector<double>> cache_;
  std::unordered_set<std::pair<const Formula*, int>, PairHash> counted_;
};

}  // namespace detail

/// Exact robustness of f over s anchored at sample k.
inline double robustness(const Formula& f, const Signal& s, const PredicateTable& table,
                         int k = 0) {
  detail::Evaluator ev(s, table, /*smooth=*/false, 1.0);
  return ev.eval(f, k);
}

inline bool satisfied(const Formula& f, const Signal& s, const PredicateTable& table, int k = 0) {
  return robustness(f, s, table, k) > 0.0;
}

/// Smooth robustness: the exact recursion with every min/max replaced by its
/// soft counterpart, applied at every aggregation node.
inline double smooth_robustness(const Formula& f, const Signal& s, const PredicateTable& table,
                                double lambda, int k = 0) {
  detail::Evaluator ev(s, table, /*smooth=*/true, lambda);
  return ev.eval(f, k);
}

/// Smooth robustness together with its gradient w.r.t. every signal entry.
/// grad is resized to the signal shape and overwritten.
inline double smooth_robustness_gradient(const Formula& f, const Signal& s,
                                         const PredicateTable& table, double lambda,
                                         Eigen::MatrixXd& grad, int k = 0) {
  detail::Evaluator ev(s, table, /*smooth=*/true, lambda);
  const double value = ev.eval(f, k);
  grad.setZero(s.samples().rows(), s.samples().cols());
  ev.backward(f, k, 1.0, grad);
  return value;
}

/// Total min/max operand count of an evaluation of f at anchor k; A in the
/// soundness margin ln(A)/lambda.
inline long smoothing_argument_count(const Formula& f, const Signal& s, int k = 0) {
  PredicateTable empty;
  detail::Evaluator ev(s, empty, /*smooth=*/false, 1.0);
  return ev.arg_count(f, k);
}

/// Farthest sample index (relative to the anchor) an evaluation can touch.
/// Signals must extend at least this many steps beyond the anchor.
inline int horizon_steps(const Formula& f, double period) {
  switch (f.kind) {
    case Kind::True:
    case Kind::Predicate:
      return 0;
    case Kind::Not:
      return horizon_steps(*f.children[0], period);
    case Kind::And:
    case Kind::Or: {
      int h = 0;
      for (const auto& c : f.children) h = std::max(h, horizon_steps(*c, period));
      return h;
    }
    case Kind::Always:
    case Kind::Eventually:
      return detail::snap_floor(f.window.hi / period) + horizon_steps(*f.children[0], period);
    case Kind::Next: {
      const bool one_step = f.window.lo == 0.0 && std::abs(f.window.hi - period) < 1e-9;
      const int shift = one_step ? 1 : detail::snap_ceil(f.window.lo / period);
      return shift + horizon_steps(*f.children[0], period);
    }
    case Kind::Until:
      return detail::snap_floor(f.window.hi / period) +
             std::max(horizon_steps(*f.children[0], period),
                      horizon_steps(*f.children[1], period));
  }
  return 0;
}

}  // namespace stlplan::stl
