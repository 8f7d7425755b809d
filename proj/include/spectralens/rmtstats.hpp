#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "spectralens/errors.hpp"
#include "spectralens/log.hpp"
#include "spectralens/parallel.hpp"
#include "spectralens/spectra.hpp"

namespace spectralens {

/// Mean adjacent-gap ratio for the GOE and for a Poisson process.
inline const double kGoeMeanR = 4.0 - 2.0 * std::numbers::sqrt3;
inline const double kPoissonMeanR = 2.0 * std::numbers::ln2 - 1.0;

/// Least-squares polynomial in a Chebyshev basis on [lo, hi] mapped to [-1, 1].
struct ChebyshevFit {
    std::vector<double> coeffs;
    double lo = -1.0;
    double hi = 1.0;
    bool log_axis = false;

    [[nodiscard]] double operator()(double x) const {
        const double u = log_axis ? std::log(x) : x;
        const double t = (2.0 * u - lo - hi) / (hi - lo);
        // Clenshaw
        double b1 = 0.0, b2 = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 1;) {
            const double b0 = coeffs[k] + 2.0 * t * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        return coeffs[0] + t * b1 - b2;
    }
};

inline ChebyshevFit chebyshev_fit(std::span<const double> x, std::span<const double> y, int degree, bool log_axis) {
    ChebyshevFit fit;
    fit.log_axis = log_axis;
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        u[i] = log_axis ? std::log(x[i]) : x[i];
    }
    fit.lo = *std::min_element(u.begin(), u.end());
    fit.hi = *std::max_element(u.begin(), u.end());
    if (!(fit.hi > fit.lo)) {
        throw NumericError("chebyshev_fit: abscissae are all equal");
    }
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd a(n, degree + 1);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = (2.0 * u[static_cast<std::size_t>(i)] - fit.lo - fit.hi) / (fit.hi - fit.lo);
        a(i, 0) = 1.0;
        if (degree > 0) {
            a(i, 1) = t;
        }
        for (int k = 2; k <= degree; ++k) {
            a(i, k) = 2.0 * t * a(i, k - 1) - a(i, k - 2);
        }
        rhs(i) = y[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd c = a.colPivHouseholderQr().solve(rhs);
    if (!c.allFinite()) {
        throw NumericError("chebyshev_fit: least-squares solve failed");
    }
    fit.coeffs.assign(c.data(), c.data() + c.size());
    return fit;
}

struct UnfoldedSpectrum {
    std::vector<double> levels;  // ascending
    ChebyshevFit staircase;
    IndexRange source_range;
    double mean_spacing = 0.0;
    bool quality_ok = false;
};

struct UnfoldOptions {
    int degree = 12;
    Eigen::Index min_levels = 100;
    double quality_tolerance = 0.05;
    /// Fit the staircase against log(lambda) when the bulk spans more than
    /// this ratio (and is positive). Set to 0 to always fit on a linear axis.
    double log_axis_ratio = 100.0;
};

/// Map ascending bulk eigenvalues through a smooth fit of the staircase
/// N(lambda) = #{lambda_j <= lambda}, giving levels with unit mean spacing.
/// Where the fitted polynomial decreases the levels follow its running
/// maximum.
template <typename Scalar>
UnfoldedSpectrum unfold(const Spectrum<Scalar>& s, const UnfoldOptions& opt = {}) {
    const IndexRange r = s.require_bulk("unfold");
    if (r.size() < opt.min_levels) {
        throw InsufficientSpectrum("unfold: bulk has " + std::to_string(r.size()) + " levels, need " +
                                   std::to_string(opt.min_levels));
    }
    const Vector<Scalar> b = s.bulk();
    std::vector<double> lam(static_cast<std::size_t>(b.size()));
    for (Eigen::Index k = 0; k < b.size(); ++k) {
        lam[static_cast<std::size_t>(b.size() - 1 - k)] = static_cast<double>(b(k));
    }
    std::vector<double> stair(lam.size());
    for (std::size_t k = 0; k < lam.size(); ++k) {
        stair[k] = static_cast<double>(k + 1);
    }
    const bool log_axis =
        opt.log_axis_ratio > 0 && lam.front() > 0 && lam.back() / lam.front() > opt.log_axis_ratio;

    UnfoldedSpectrum u;
    u.source_range = r;
    u.staircase = chebyshev_fit(lam, stair, opt.degree, log_axis);
    u.levels.resize(lam.size());
    double running = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lam.size(); ++k) {
        running = std::max(running, u.staircase(lam[k]));
        u.levels[k] = running;
    }
    u.mean_spacing = (u.levels.back() - u.levels.front()) / static_cast<double>(u.levels.size() - 1);
    u.quality_ok = std::abs(u.mean_spacing - 1.0) <= opt.quality_tolerance;
    if (!u.quality_ok) {
        warn("unfold: mean spacing " + std::to_string(u.mean_spacing) + " misses the unit-spacing gate");
    }
    return u;
}

struct SpacingSample {
    std::vector<double> spacings;
    DensityHistogram histogram;
};

/// Nearest-neighbour spacings of unfolded levels, histogrammed on [0, 4].
inline SpacingSample level_spacing(const UnfoldedSpectrum& u, std::size_t bins = 40) {
    if (u.levels.size() < 100) {
        throw InsufficientSpectrum("level_spacing: need at least 100 levels");
    }
    SpacingSample out;
    out.spacings.reserve(u.levels.size() - 1);
    for (std::size_t k = 0; k + 1 < u.levels.size(); ++k) {
        out.spacings.push_back(u.levels[k + 1] - u.levels[k]);
    }
    out.histogram = histogram_on_edges(out.spacings, linear_edges(0.0, 4.0, bins));
    return out;
}

/// Wigner surmise; only the orthogonal class (beta = 1) is supported.
inline double wigner_surmise(double s, int beta = 1) {
    if (beta != 1) {
        throw InvalidArgument("wigner_surmise: only beta = 1 is supported");
    }
    if (s < 0) {
        throw InvalidArgument("wigner_surmise: s must be nonnegative");
    }
    return std::numbers::pi / 2.0 * s * std::exp(-std::numbers::pi * s * s / 4.0);
}

inline double wigner_surmise_cdf(double s) { return s <= 0 ? 0.0 : 1.0 - std::exp(-std::numbers::pi * s * s / 4.0); }

inline double poisson_spacing_cdf(double s) { return s <= 0 ? 0.0 : 1.0 - std::exp(-s); }

struct RStatistics {
    std::vector<double> values;
    double mean = 0.0;
    DensityHistogram histogram;
};

/// Adjacent-gap ratios min(s_i, s_{i+1}) / max(s_i, s_{i+1}) of ascending
/// levels. Pairs of zero gaps are skipped.
inline RStatistics r_statistics_of_levels(std::span<const double> ascending, std::size_t bins = 20) {
    if (ascending.size() < 3) {
        throw InsufficientSpectrum("r_statistics: need at least 3 levels");
    }
    RStatistics out;
    for (std::size_t k = 0; k + 2 < ascending.size(); ++k) {
        const double a = ascending[k + 1] - ascending[k];
        const double b = ascending[k + 2] - ascending[k + 1];
        const double hi = std::max(a, b);
        if (hi <= 0) {
            continue;
        }
        out.values.push_back(std::min(a, b) / hi);
    }
    if (out.values.empty()) {
        throw InsufficientSpectrum("r_statistics: every gap is zero");
    }
    out.mean = mean_of(out.values);
    out.histogram = histogram_on_edges(out.values, linear_edges(0.0, 1.0, bins));
    return out;
}

/// r-statistics of the raw bulk eigenvalues (no unfolding).
template <typename Scalar>
RStatistics r_statistics(const Spectrum<Scalar>& s, std::size_t bins = 20) {
    const IndexRange r = s.require_bulk("r_statistics");
    if (r.size() < 50) {
        throw InsufficientSpectrum("r_statistics: bulk has " + std::to_string(r.size()) + " levels, need 50");
    }
    const Vector<Scalar> b = s.bulk();
    std::vector<double> asc(static_cast<std::size_t>(b.size()));
    for (Eigen::Index k = 0; k < b.size(); ++k) {
        asc[static_cast<std::size_t>(b.size() - 1 - k)] = static_cast<double>(b(k));
    }
    return r_statistics_of_levels(asc, bins);
}

inline double goe_r_density(double r) {
    if (!(r >= 0 && r <= 1)) {
        throw InvalidArgument("goe_r_density: r must lie in [0, 1]");
    }
    const double q = 1.0 + r + r * r;
    return 27.0 / 4.0 * (r + r * r) / std::pow(q, 2.5);
}

struct SffCurve {
    std::vector<double> taus;
    std::vector<double> values;
    double normalization = 0.0;  // mean level count
    std::size_t members = 0;
};

/// K(tau) = < |sum_j exp(-2 pi i e_j tau)|^2 / N > over ensemble members.
inline SffCurve spectral_form_factor(std::span<const std::vector<double>> members, std::span<const double> taus) {
    if (taus.empty()) {
        throw InvalidArgument("spectral_form_factor: empty tau grid");
    }
    if (members.empty()) {
        throw InvalidArgument("spectral_form_factor: no spectra");
    }
    for (double t : taus) {
        if (!(t > 0)) {
            throw InvalidArgument("spectral_form_factor: tau values must be positive");
        }
    }
    SffCurve out;
    out.taus.assign(taus.begin(), taus.end());
    out.values.assign(taus.size(), 0.0);
    out.members = members.size();
    double count = 0.0;
    for (const auto& m : members) {
        if (m.empty()) {
            throw InvalidArgument("spectral_form_factor: empty member spectrum");
        }
        count += static_cast<double>(m.size());
    }
    out.normalization = count / static_cast<double>(members.size());
    parallel_for(taus.size(), [&](std::size_t k) {
        const double w = 2.0 * std::numbers::pi * taus[k];
        double acc = 0.0;
        for (const auto& m : members) {
            double re = 0.0, im = 0.0;
            for (double e : m) {
                re += std::cos(w * e);
                im -= std::sin(w * e);
            }
            acc += (re * re + im * im) / static_cast<double>(m.size());
        }
        out.values[k] = acc / static_cast<double>(members.size());
    });
    return out;
}

inline SffCurve spectral_form_factor(const std::vector<UnfoldedSpectrum>& members, std::span<const double> taus) {
    std::vector<std::vector<double>> levels;
    levels.reserve(members.size());
    for (const auto& u : members) {
        levels.push_back(u.levels);
    }
    return spectral_form_factor(std::span<const std::vector<double>>(levels), taus);
}

/// Running mean of K over a tau window of +-half_width.
inline SffCurve smooth_sff(const SffCurve& c, double half_width) {
    SffCurve out = c;
    std::size_t lo = 0, hi = 0;
    double sum = 0.0;
    for (std::size_t k = 0; k < c.taus.size(); ++k) {
        while (hi < c.taus.size() && c.taus[hi] <= c.taus[k] + half_width) {
            sum += c.values[hi++];
        }
        while (c.taus[lo] < c.taus[k] - half_width) {
            sum -= c.values[lo++];
        }
        out.values[k] = sum / static_cast<double>(hi - lo);
    }
    return out;
}

/// GOE form factor in the ramp-plateau form: 2 tau - tau ln(1 + 2 tau)
/// below tau = 1, 1 above.
inline double goe_sff(double tau) {
    if (!(tau > 0)) {
        throw InvalidArgument("goe_sff: tau must be positive");
    }
    return tau < 1.0 ? 2.0 * tau - tau * std::log1p(2.0 * tau) : 1.0;
}

}  // namespace spectralens
