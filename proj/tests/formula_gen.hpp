#pragma once

// Deterministic random signal / formula instance generator shared by the
// stl unit tests and the acceptance suite.

#include "stlplan/stl/formula.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <vector>

namespace testgen {

struct Instance {
  stlplan::stl::Signal signal;
  stlplan::stl::FormulaPtr formula;
};

/// Predicates over a 2-dimensional signal; values stay within [-2, 2] when
/// the signal does.
inline stlplan::stl::PredicateTable make_test_table() {
  stlplan::stl::PredicateTable table;
  table.add("a", [](const stlplan::stl::Signal& s, int k) { return s.samples()(0, k); });
  table.add("b", [](const stlplan::stl::Signal& s, int k) { return s.samples()(1, k); });
  table.add("c", [](const stlplan::stl::Signal& s, int k) {
    return 0.5 * (s.samples()(0, k) + s.samples()(1, k));
  });
  table.add("d", [](const stlplan::stl::Signal& s, int k) {
    return 0.5 * (s.samples()(0, k) - s.samples()(1, k));
  });
  return table;
}

class InstanceGen {
 public:
  InstanceGen(const stlplan::stl::PredicateTable& table, uint64_t seed)
      : table_(table), rng_(seed) {}

  Instance next(int max_steps = 20, int max_depth = 3) {
    const int n = std::uniform_int_distribution<int>(8, max_steps)(rng_);
    const double ts = 0.1;
    Eigen::MatrixXd samples(2, n + 1);
    std::uniform_real_distribution<double> val(-2.0, 2.0);
    for (int j = 0; j <= n; ++j) {
      samples(0, j) = val(rng_);
      samples(1, j) = val(rng_);
    }
    stlplan::stl::Signal signal(samples, ts);
    stlplan::stl::FormulaPtr formula = gen(max_depth, n, ts);
    return Instance{std::move(signal), std::move(formula)};
  }

 private:
  stlplan::stl::FormulaPtr gen(int depth, int budget, double ts) {
    using stlplan::stl::Formula;
    using stlplan::stl::Interval;
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 7);
    switch (pick(rng_)) {
      case 0:
      case 1:
        return Formula::pred(table_, pred_name());
      case 2:
        return Formula::negate(gen(depth - 1, budget, ts));
      case 3: {
        std::vector<stlplan::stl::FormulaPtr> kids;
        const int n = std::uniform_int_distribution<int>(2, 3)(rng_);
        for (int i = 0; i < n; ++i) kids.push_back(gen(depth - 1, budget, ts));
        return Formula::conj(std::move(kids));
      }
      case 4: {
        std::vector<stlplan::stl::FormulaPtr> kids;
        const int n = std::uniform_int_distribution<int>(2, 3)(rng_);
        for (int i = 0; i < n; ++i) kids.push_back(gen(depth - 1, budget, ts));
        return Formula::disj(std::move(kids));
      }
      case 5: {
        const auto [iv, used] = window(budget, ts);
        return Formula::always(iv, gen(depth - 1, budget - used, ts));
      }
      case 6: {
        const auto [iv, used] = window(budget, ts);
        return Formula::eventually(iv, gen(depth - 1, budget - used, ts));
      }
      default: {
        const auto [iv, used] = window(budget, ts);
        auto lhs = gen(depth - 1, budget - used, ts);
        auto rhs = gen(depth - 1, budget - used, ts);
        return Formula::until(iv, std::move(lhs), std::move(rhs));
      }
    }
  }

  std::pair<stlplan::stl::Interval, int> window(int budget, double ts) {
    const int hi = std::uniform_int_distribution<int>(0, std::max(0, budget))(rng_);
    const int lo = std::uniform_int_distribution<int>(0, hi)(rng_);
    // Occasionally use endpoints that are not sample multiples to exercise
    // the rounding rule; the mapped range stays within [lo, hi] samples.
    double jitter = 0.0;
    if (std::uniform_int_distribution<int>(0, 3)(rng_) == 0 && lo < hi) {
      jitter = 0.04;
    }
    return {stlplan::stl::Interval(lo * ts, hi * ts + jitter), hi};
  }

  std::string pred_name() {
    static const char* names[] = {"a", "b", "c", "d"};
    return names[std::uniform_int_distribution<int>(0, 3)(rng_)];
  }

  const stlplan::stl::PredicateTable& table_;
  std::mt19937_64 rng_;
};

}  // namespace testgen
