#pragma once

#include <algorithm>
#include <cmath>

#include "rrc/types.hpp"

namespace rrc {

// Inputs to the finite-sample risk bounds. The oracle quantities (r*, the
// norms, the optimal risk) are supplied by the caller; in simulations they
// come from the known generating matrix.
struct BoundInputs {
  Index n = 0, p = 0, q = 0;
  Index m = 0;             // observed-entry count; nq in the full regime
  Index r_star = 0;        // rank of the optimal predictor matrix
  double norm_x = 0;       // ||X||_F
  double norm_mb = 0;      // ||M^B||_F
  double margin_c = 1;     // margin constant C >= 1
  double bayes_risk = 0;   // optimal risk, in [0,1]
  double epsilon = 0.05;   // slack in (0,1)
  double varsigma = 0.5;   // free parameter in (0,1)

  void validate() const {
    if (n < 1 || p < 1 || q < 1 || m < 1)
      throw invalid_input("bound inputs: n, p, q, m must be >= 1");
    if (r_star < 0 || r_star > std::min(p, q))
      throw invalid_input("bound inputs: r* must lie in [0, min(p,q)]");
    if (!(norm_x >= 0) || !(norm_mb >= 0))
      throw invalid_input("bound inputs: norms must be >= 0");
    if (!(margin_c >= 1))
      throw invalid_input("bound inputs: margin constant C must be >= 1");
    if (!(bayes_risk >= 0) || !(bayes_risk <= 1))
      throw invalid_input("bound inputs: optimal risk must lie in [0,1]");
    if (!(epsilon > 0) || !(epsilon < 1))
      throw invalid_input("bound inputs: epsilon must lie in (0,1)");
    if (!(varsigma > 0) || !(varsigma < 1))
      throw invalid_input("bound inputs: varsigma must lie in (0,1)");
  }
};

namespace detail {

// r* (q+p+2) log(1 + q ||X|| ||M^B|| sqrt(inner * p) / sqrt((p+q) r*)),
// with the convention that r* = 0 yields 0. The inner count is n in the
// fully observed bound and m in the missing-data one.
inline double rank_log_term(const BoundInputs& b, double inner) {
  if (b.r_star == 0) return 0.0;
  const double arg = 1.0 + double(b.q) * b.norm_x * b.norm_mb *
                               std::sqrt(inner * double(b.p)) /
                               std::sqrt(double(b.p + b.q) * double(b.r_star));
  return double(b.r_star) * double(b.q + b.p + 2) * std::log(arg);
}

// Fast-rate template shared by the fully observed and missing-data bounds:
// `count` is nq or m.
inline double fast_rate_bound(const BoundInputs& b, double count,
                              double inner) {
  const double c = b.margin_c, vs = b.varsigma;
  const double intercept = 2.5 * b.bayes_risk;
  const double prior_term = 1.5 * double(b.p + b.q) / (2.0 * count);
  const double rank_term =
      3.0 * (3.0 * c + 2.0) * rank_log_term(b, inner) / (2.0 * count);
  const double slack_term = (6.0 + 9.0 * c * vs + 6.0 * vs) /
                            (4.0 * count * vs) * std::log(1.0 / b.epsilon);
  return intercept + prior_term + rank_term + slack_term;
}

}  // namespace detail

// Fast-rate oracle bound for the fully observed regime at the temperature
// 2nq/(3C+2); decays like 1/(nq).
inline double theorem1_bound(const BoundInputs& b) {
  b.validate();
  return detail::fast_rate_bound(b, double(b.n) * double(b.q), double(b.n));
}

// Noiseless specialization: C = 1 and zero optimal risk at temperature 2nq/5.
inline double corollary1_bound(const BoundInputs& b) {
  BoundInputs noiseless = b;
  noiseless.margin_c = 1.0;
  noiseless.bayes_risk = 0.0;
  return theorem1_bound(noiseless);
}

// Slow-rate bound needing no margin assumption, at temperature
// 2 sqrt(nq/(p+q+2)); decays like 1/sqrt(nq).
inline double proposition1_bound(const BoundInputs& b) {
  b.validate();
  const double nq = double(b.n) * double(b.q);
  const double dim = double(b.p + b.q + 2);
  const double vs = b.varsigma;

  const double intercept = 2.0 * b.bayes_risk;
  const double prior_term = double(b.p + b.q) / (2.0 * nq);
  double rank_term = 0.0;
  if (b.r_star > 0) {
    // With the theory scale tau^2 = (p+q)/(2 q^2 p n ||X||^2), the log
    // argument 1 + ||M^B||/(tau sqrt(2 r*)) collapses to the closed form
    // shared with the fast-rate bound.
    const double arg = 1.0 + double(b.q) * b.norm_x * b.norm_mb *
                                 std::sqrt(double(b.n) * double(b.p)) /
                                 std::sqrt(double(b.p + b.q) *
                                           double(b.r_star));
    rank_term = double(b.r_star) * std::sqrt(dim / nq) * std::log(arg);
  }
  const double discretization = 1.0 / (4.0 * std::sqrt(nq * dim));
  const double slack_term = (2.0 + vs * std::sqrt(nq * dim)) /
                            (2.0 * nq * vs) * std::log(1.0 / b.epsilon);
  return intercept + prior_term + rank_term + discretization + slack_term;
}

// Missing-data analogue of the fast-rate bound: nq is replaced by the
// observed count m, and the log term carries sqrt(mp).
inline double theorem2_bound(const BoundInputs& b) {
  b.validate();
  if (b.m > b.n * b.q)
    throw invalid_input("bound inputs: m cannot exceed n*q");
  return detail::fast_rate_bound(b, double(b.m), double(b.m));
}

struct VarsigmaOptimum {
  double value = 0;
  double varsigma = 0;
};

// Golden-section minimization of a bound over varsigma in (0.01, 0.99).
template <class BoundFn>
VarsigmaOptimum minimize_over_varsigma(BoundFn&& bound, BoundInputs inputs,
                                       double lo = 0.01, double hi = 0.99,
                                       double tol = 1e-10) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto eval = [&](double vs) {
    inputs.varsigma = vs;
    return bound(inputs);
  };
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c), fd = eval(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  VarsigmaOptimum out;
  out.varsigma = 0.5 * (a + b);
  out.value = eval(out.varsigma);
  return out;
}

}  // namespace rrc
