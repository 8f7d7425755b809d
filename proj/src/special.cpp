#include "spectralens/special.hpp"

#include <cmath>
#include <string>

#include "spectralens/errors.hpp"

namespace spectralens::special {
namespace {

constexpr long kMaxTerms = 200'000'000;

// sum_{n>=0} x^n (n + q)^a
double positive_series(double x, double a, double q, double rel_tol) {
    if (!(x > 0.0 && x < 1.0) || !(q > 0.0) || !std::isfinite(a)) {
        throw NumericError("series does not converge for x=" + std::to_string(x) + ", q=" + std::to_string(q));
    }
    const double log_x = std::log(x);
    // x^n (n+q)^a peaks near n = -a / log(x) - q.
    const double peak = a > 0.0 ? -a / log_x - q : 0.0;
    long double sum = 0.0L;
    for (long n = 0; n < kMaxTerms; ++n) {
        const double term = std::exp(static_cast<double>(n) * log_x + a * std::log(static_cast<double>(n) + q));
        sum += term;
        if (static_cast<double>(n) > peak && term < rel_tol * static_cast<double>(sum)) {
            return static_cast<double>(sum);
        }
    }
    throw NumericError("series did not reach tolerance within " + std::to_string(kMaxTerms) + " terms");
}

}  // namespace

double polylog_neg_order(double a, double x, double rel_tol) {
    // sum_{k>=1} x^k k^a = x * sum_{n>=0} x^n (n+1)^a
    return x * positive_series(x, a, 1.0, rel_tol);
}

double lerch_phi_neg_order(double x, double a, double q, double rel_tol) {
    return positive_series(x, a, q, rel_tol);
}

}  // namespace spectralens::special
