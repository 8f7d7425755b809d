#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "spectralens/errors.hpp"
#include "spectralens/log.hpp"
#include "spectralens/parallel.hpp"
#include "spectralens/quadrature.hpp"
#include "spectralens/rng.hpp"
#include "spectralens/spectra.hpp"
#include "spectralens/synth.hpp"

namespace spectralens {

struct MpEdges {
    double lo = 0.0;
    double hi = 0.0;
};

inline void check_mp_params(double sigma2, double gamma) {
    if (!(gamma > 0 && gamma <= 1)) {
        throw InvalidArgument("Marchenko-Pastur law needs 0 < gamma <= 1, got " + std::to_string(gamma));
    }
    if (!(sigma2 > 0)) {
        throw InvalidArgument("Marchenko-Pastur law needs sigma^2 > 0");
    }
}

inline MpEdges mp_edges(double sigma2, double gamma) {
    check_mp_params(sigma2, gamma);
    const double r = std::sqrt(gamma);
    return {sigma2 * (1 - r) * (1 - r), sigma2 * (1 + r) * (1 + r)};
}

inline double mp_density(double lambda, double sigma2, double gamma) {
    const MpEdges e = mp_edges(sigma2, gamma);
    if (lambda <= e.lo || lambda >= e.hi) {
        return 0.0;
    }
    return std::sqrt((e.hi - lambda) * (lambda - e.lo)) / (2 * std::numbers::pi * sigma2 * gamma * lambda);
}

inline double mp_cdf(double lambda, double sigma2, double gamma) {
    const MpEdges e = mp_edges(sigma2, gamma);
    if (lambda <= e.lo) {
        return 0.0;
    }
    if (lambda >= e.hi) {
        return 1.0;
    }
    return integrate([&](double x) { return mp_density(x, sigma2, gamma); }, e.lo, lambda, 1e-12, 1e-12).value;
}

/// Semicircle of radius 1: (2/pi) sqrt(1 - x^2).
inline double semicircle_cdf(double x) {
    if (x <= -1) {
        return 0.0;
    }
    if (x >= 1) {
        return 1.0;
    }
    return 0.5 + (x * std::sqrt(1 - x * x) + std::asin(x)) / std::numbers::pi;
}

/// c Gamma(1 + alpha) (d / i)^{1 + alpha}.
inline double bulk_prediction(Eigen::Index i, Eigen::Index d, double c, double alpha) {
    if (!(alpha > -1)) {
        throw InvalidArgument("bulk_prediction: alpha must exceed -1");
    }
    if (!(c > 0)) {
        throw InvalidArgument("bulk_prediction: c must be positive");
    }
    if (i < 1 || i > d) {
        throw InvalidArgument("bulk_prediction: index outside 1..d");
    }
    return c * std::tgamma(1 + alpha) * std::pow(static_cast<double>(d) / static_cast<double>(i), 1 + alpha);
}

struct StieltjesOptions {
    double damping = 0.5;
    int max_iterations = 10000;
    double tolerance = 1e-10;
    double quadrature_tolerance = 1e-10;
};

struct StieltjesSolution {
    std::vector<double> lambda;
    double eps = 0.0;
    double gamma = 0.0;
    /// Solution of the self-consistent equation at z = lambda + i eps.
    std::vector<std::complex<double>> g_tilde;
    /// G(z) = int rho(t) / (z - t) dt, so that rho = -Im G / pi.
    std::vector<std::complex<double>> g;
    std::vector<double> density;
    std::vector<int> iterations;
    double max_residual = 0.0;
    bool resolution_warning = false;

    /// Trapezoid mass of the density over the grid.
    [[nodiscard]] double mass() const {
        double m = 0.0;
        for (std::size_t k = 0; k + 1 < lambda.size(); ++k) {
            m += 0.5 * (density[k] + density[k + 1]) * (lambda[k + 1] - lambda[k]);
        }
        return m;
    }
};

namespace detail {

// gamma * F(g) where F(g) = int t / (1 + g t) dH(t) over the population.
template <typename Scalar>
class PopulationTerm {
public:
    PopulationTerm(const PopulationCovariance<Scalar>& cov, double quad_tol) : quad_tol_(quad_tol) {
        if (cov.kind() == CovarianceKind::Identity) {
            identity_ = true;
            sigma2_ = static_cast<double>(cov.sigma2());
            return;
        }
        alpha_ = static_cast<double>(cov.alpha());
        if (!(alpha_ > -1)) {
            throw InvalidArgument("solve_stieltjes: the power-law population needs alpha > -1");
        }
        chat_ = static_cast<double>(cov.c()) * std::tgamma(1 + alpha_) * static_cast<double>(cov.scale());
    }

    std::complex<double> operator()(std::complex<double> g) const {
        if (identity_) {
            return sigma2_ / (1.0 + sigma2_ * g);
        }
        // t(x) = chat x^{-1-alpha}; t / (1 + g t) = chat / (x^{1+alpha} + g chat)
        const double p = 1 + alpha_;
        auto f = [&](double x) { return chat_ / (std::pow(x, p) + g * chat_); };
        const auto r = integrate(f, 0.0, 1.0, quad_tol_, quad_tol_);
        return r.value;
    }

private:
    bool identity_ = false;
    double sigma2_ = 1.0;
    double alpha_ = 0.0;
    double chat_ = 1.0;
    double quad_tol_;
};

}  // namespace detail

/// Solve g = (-z + gamma F(g))^{-1} on z = lambda + i eps by damped fixed-point
/// iteration, warm-starting each grid point from its left neighbour, and
/// recover the density of the d x d Gram matrix with d / M = gamma.
/// ToeplitzSingular populations use the continuum power law
/// c Gamma(1+alpha) x^{-1-alpha}, x in (0, 1].
template <typename Scalar>
StieltjesSolution solve_stieltjes(double gamma, const PopulationCovariance<Scalar>& cov,
                                  std::span<const double> lambda_grid, double eps,
                                  const StieltjesOptions& opt = {}) {
    if (!(gamma > 0 && gamma <= 1)) {
        throw InvalidArgument("solve_stieltjes: gamma must lie in (0, 1]");
    }
    if (!(eps >= 1e-6 && eps <= 1e-2)) {
        throw InvalidArgument("solve_stieltjes: eps must lie in [1e-6, 1e-2]");
    }
    if (lambda_grid.size() < 2 || !std::is_sorted(lambda_grid.begin(), lambda_grid.end())) {
        throw InvalidArgument("solve_stieltjes: lambda grid must be ascending with at least 2 points");
    }
    const detail::PopulationTerm<Scalar> pop(cov, opt.quadrature_tolerance);
    const std::size_t n = lambda_grid.size();
    StieltjesSolution sol;
    sol.lambda.assign(lambda_grid.begin(), lambda_grid.end());
    sol.eps = eps;
    sol.gamma = gamma;
    sol.g_tilde.resize(n);
    sol.g.resize(n);
    sol.density.resize(n);
    sol.iterations.resize(n);

    auto map = [&](std::complex<double> g, std::complex<double> z) { return 1.0 / (-z + gamma * pop(g)); };
    std::vector<double> residual(n, 0.0);

    // Contiguous chunks; each warm-starts from a cold guess at its first point.
    const std::size_t chunks = std::min<std::size_t>(thread_count(), n);
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t begin = n * c / chunks;
        const std::size_t end = n * (c + 1) / chunks;
        std::complex<double> g;
        for (std::size_t k = begin; k < end; ++k) {
            const std::complex<double> z(lambda_grid[k], eps);
            if (k == begin) {
                g = -1.0 / z;
            }
            int it = 0;
            double step = 0.0;
            for (; it < opt.max_iterations; ++it) {
                const std::complex<double> next = (1 - opt.damping) * g + opt.damping * map(g, z);
                step = std::abs(next - g);
                g = next;
                if (step < opt.tolerance) {
                    break;
                }
            }
            if (it == opt.max_iterations) {
                throw ConvergenceError("solve_stieltjes: no convergence at lambda=" + std::to_string(lambda_grid[k]) +
                                       " after " + std::to_string(opt.max_iterations) +
                                       " iterations (last step " + std::to_string(step) + ")");
            }
            sol.iterations[k] = it + 1;
            sol.g_tilde[k] = g;
            residual[k] = std::abs(g - map(g, z));
            // Companion transform back to the d x d Gram matrix.
            const std::complex<double> m = g / gamma + (1 - gamma) / (gamma * z);
            sol.g[k] = -m;
            const double rho = -sol.g[k].imag() / std::numbers::pi;
            if (rho < -1e-8) {
                throw NumericError("solve_stieltjes: negative density " + std::to_string(rho) +
                                   " at lambda=" + std::to_string(lambda_grid[k]));
            }
            sol.density[k] = std::max(rho, 0.0);
        }
    });
    sol.max_residual = *std::max_element(residual.begin(), residual.end());
    // Coarse spacing only matters where the density exceeds 1% of its peak.
    const double peak = *std::max_element(sol.density.begin(), sol.density.end());
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const bool supported = std::max(sol.density[k], sol.density[k + 1]) > 1e-2 * peak;
        if (supported && lambda_grid[k + 1] - lambda_grid[k] > 2 * eps) {
            sol.resolution_warning = true;
        }
    }
    if (sol.resolution_warning) {
        warn("solve_stieltjes: grid spacing exceeds 2 eps inside the support; the density may be under-resolved");
    }
    return sol;
}

/// Bin masses of a tabulated density on the given edges: trapezoid on the
/// piecewise-linear interpolant, then normalized over the bins.
inline DensityHistogram density_to_histogram(std::span<const double> x, std::span<const double> rho,
                                             std::vector<double> edges,
                                             HistogramNormalization norm = HistogramNormalization::Raw) {
    auto interp = [&](double t) {
        if (t <= x.front()) {
            return t < x.front() ? 0.0 : rho.front();
        }
        if (t >= x.back()) {
            return t > x.back() ? 0.0 : rho.back();
        }
        const auto it = std::upper_bound(x.begin(), x.end(), t);
        const auto j = static_cast<std::size_t>(it - x.begin());
        const double w = (t - x[j - 1]) / (x[j] - x[j - 1]);
        return (1 - w) * rho[j - 1] + w * rho[j];
    };
    DensityHistogram h;
    h.normalization = norm;
    h.masses.assign(edges.size() - 1, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const double a = edges[k], b = edges[k + 1];
        // breakpoints: a, grid points inside (a, b), b
        double prev_x = a, prev_y = interp(a), m = 0.0;
        auto it = std::upper_bound(x.begin(), x.end(), a);
        for (; it != x.end() && *it < b; ++it) {
            const auto j = static_cast<std::size_t>(it - x.begin());
            m += 0.5 * (prev_y + rho[j]) * (*it - prev_x);
            prev_x = *it;
            prev_y = rho[j];
        }
        m += 0.5 * (prev_y + interp(b)) * (b - prev_x);
        h.masses[k] = m;
        total += m;
    }
    if (!(total > 0)) {
        throw NumericError("density_to_histogram: zero mass inside the bin range");
    }
    for (double& m : h.masses) {
        m /= total;
    }
    h.edges = std::move(edges);
    return h;
}

/// Eigenvalues of (A + A^T) / sqrt(8 n) with A iid standard normal; the
/// spectrum fills the semicircle on [-1, 1]. No bulk range is set.
inline SpectrumD goe_wigner_sample(Eigen::Index n, RngSeed seed) {
    if (n < 2) {
        throw InvalidArgument("goe_wigner_sample: n must be >= 2");
    }
    Eigen::MatrixXd a(n, n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t j) {
        Philox rng(seed, j);
        for (Eigen::Index i = 0; i < n; ++i) {
            a(i, static_cast<Eigen::Index>(j)) = rng.normal();
        }
    });
    const Eigen::MatrixXd h = (a + a.transpose()) / std::sqrt(8.0 * static_cast<double>(n));
    return eigenvalues<double>(h);
}

/// Ascending grid: n_lin linear points on [lo, knee], then n_log geometric
/// points on (knee, hi].
inline std::vector<double> composite_grid(double lo, double knee, double hi, std::size_t n_lin, std::size_t n_log) {
    if (!(lo < knee && knee < hi && lo >= 0) || n_lin < 2) {
        throw InvalidArgument("composite_grid: need 0 <= lo < knee < hi and n_lin >= 2");
    }
    std::vector<double> g = linear_edges(lo, knee, n_lin - 1);
    const double a = std::log(knee), b = std::log(hi);
    for (std::size_t k = 1; k <= n_log; ++k) {
        g.push_back(std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(n_log)));
    }
    return g;
}

struct DensityComparison {
    DensityHistogram empirical;
    DensityHistogram theory;
    double kl = 0.0;
};

/// Empirical eigenvalues against a tabulated density on linear bins over the
/// bulk window [lambda_end, lambda_start]; both sides renormalized to it.
inline DensityComparison compare_on_bulk_window(const SpectrumD& s, std::span<const double> x,
                                                std::span<const double> rho, std::size_t bins = 64) {
    const IndexRange r = s.require_bulk("compare_on_bulk_window");
    const double lo = s[r.end], hi = s[r.start];
    if (!(hi > lo)) {
        throw InsufficientSpectrum("compare_on_bulk_window: empty bulk window");
    }
    if (x.front() > lo || x.back() < hi) {
        throw InvalidArgument("compare_on_bulk_window: the density grid does not cover the bulk window");
    }
    const auto edges = linear_edges(lo, hi, bins);
    std::vector<double> vals(s.eigenvalues().data(), s.eigenvalues().data() + s.d());
    DensityComparison c;
    c.empirical = histogram_on_edges(vals, edges);
    c.theory = density_to_histogram(x, rho, edges);
    c.kl = kl_divergence(c.empirical, c.theory);
    return c;
}

}  // namespace spectralens
