#pragma once

namespace spectralens::special {

/// Polylogarithm of negative order, Li_{-a}(x) = sum_{k>=1} x^k k^a, for
/// 0 < x < 1, by direct summation. The series is cut once it is past its peak
/// and the current term drops below rel_tol of the partial sum.
double polylog_neg_order(double a, double x, double rel_tol = 1e-14);

/// Lerch transcendent Phi(x, -a, q) = sum_{n>=0} x^n (n + q)^a for
/// 0 < x < 1, q > 0, by direct summation with the same truncation rule.
double lerch_phi_neg_order(double x, double a, double q, double rel_tol = 1e-14);

}  // namespace spectralens::special
