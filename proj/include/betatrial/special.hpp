// Scalar special functions used by the probability kernel.
//
// Everything here is deterministic double-precision arithmetic with no
// global state, so the functions are safe to call concurrently.

#pragma once

#include <cstdint>

namespace betatrial {

// log Gamma(x), x > 0.
double log_gamma(double x);

// log B(a, b) = lgamma(a) + lgamma(b) - lgamma(a+b).
double log_beta(double a, double b);

// log C(n, k) for 0 <= k <= n.
double log_choose(std::int64_t n, std::int64_t k);

// Regularized incomplete beta function I_x(a, b) = Pr(Beta(a,b) <= x).
// Continued-fraction evaluation (modified Lentz) with the symmetry switch
// at x > (a+1)/(a+b+2); absolute accuracy ~1e-13.
double inc_beta(double a, double b, double x);

// Binomial pmf and upper tail Pr(X >= k), X ~ Binomial(n, p).
double binomial_pmf(int n, int k, double p);
double binomial_tail_geq(int n, int k, double p);

// Digamma and trigamma for positive arguments (recurrence + asymptotic
// series); used for logit-scale moments of a Beta distribution.
double digamma(double x);
double trigamma(double x);

// log(1 + x) guarded variants used for p near 0 or 1.
double log1m(double x);  // log(1 - x)

}  // namespace betatrial
