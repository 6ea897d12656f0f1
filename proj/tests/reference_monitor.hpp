#pragma once

// Independent direct-recursion robustness monitor used as the test oracle.
// Deliberately written in the most literal style possible: no memoization,
// no shared helpers with the library implementation.

#include "stlplan/stl/formula.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {

inline int ref_lo_index(const stlplan::stl::Interval& iv, double ts, int k) {
  double x = iv.lo / ts;
  double r = std::round(x);
  int lo = std::abs(x - r) < 1e-6 ? static_cast<int>(r) : static_cast<int>(std::ceil(x));
  return k + lo;
}

inline int ref_hi_index(const stlplan::stl::Interval& iv, double ts, int k) {
  double x = iv.hi / ts;
  double r = std::round(x);
  int hi = std::abs(x - r) < 1e-6 ? static_cast<int>(r) : static_cast<int>(std::floor(x));
  return k + hi;
}

inline double ref_robustness(const stlplan::stl::Formula& f, const stlplan::stl::Signal& s,
                             const stlplan::stl::PredicateTable& table, int k) {
  using stlplan::stl::Kind;
  switch (f.kind) {
    case Kind::True:
      return stlplan::stl::kTrueRobustness;
    case Kind::Predicate:
      return table.at(f.pred_id).value(s, k);
    case Kind::Not:
      return -ref_robustness(*f.children[0], s, table, k);
    case Kind::And: {
      double m = ref_robustness(*f.children[0], s, table, k);
      for (size_t i = 1; i < f.children.size(); ++i) {
        m = std::min(m, ref_robustness(*f.children[i], s, table, k));
      }
      return m;
    }
    case Kind::Or: {
      double m = ref_robustness(*f.children[0], s, table, k);
      for (size_t i = 1; i < f.children.size(); ++i) {
        m = std::max(m, ref_robustness(*f.children[i], s, table, k));
      }
      return m;
    }
    case Kind::Always: {
      int lo = ref_lo_index(f.window, s.period(), k);
      int hi = ref_hi_index(f.window, s.period(), k);
      if (lo > hi || hi > s.steps()) throw std::runtime_error("oracle: bad window");
      double m = ref_robustness(*f.children[0], s, table, lo);
      for (int j = lo + 1; j <= hi; ++j) {
        m = std::min(m, ref_robustness(*f.children[0], s, table, j));
      }
      return m;
    }
    case Kind::Eventually: {
      int lo = ref_lo_index(f.window, s.period(), k);
      int hi = ref_hi_index(f.window, s.period(), k);
      if (lo > hi || hi > s.steps()) throw std::runtime_error("oracle: bad window");
      double m = ref_robustness(*f.children[0], s, table, lo);
      for (int j = lo + 1; j <= hi; ++j) {
        m = std::max(m, ref_robustness(*f.children[0], s, table, j));
      }
      return m;
    }
    case Kind::Next: {
      int j;
      if (f.window.lo == 0.0 && std::abs(f.window.hi - s.period()) < 1e-9) {
        j = k + 1;
      } else {
        j = ref_lo_index(f.window, s.period(), k);
      }
      if (j > s.steps()) throw std::runtime_error("oracle: next past horizon");
      return ref_robustness(*f.children[0], s, table, j);
    }
    case Kind::Until: {
      int lo = ref_lo_index(f.window, s.period(), k);
      int hi = ref_hi_index(f.window, s.period(), k);
      if (lo > hi || hi > s.steps()) throw std::runtime_error("oracle: bad window");
      double best = -std::numeric_limits<double>::infinity();
      for (int j = lo; j <= hi; ++j) {
        double term = ref_robustness(*f.children[1], s, table, j);
        for (int i = k; i <= j; ++i) {
          term = std::min(term, ref_robustness(*f.children[0], s, table, i));
        }
        best = std::max(best, term);
      }
      return best;
    }
  }
  throw std::runtime_error("oracle: unknown node");
}

}  // namespace oracle
