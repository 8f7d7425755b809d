#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "spectralens/datamatrix.hpp"
#include "spectralens/errors.hpp"
#include "spectralens/parallel.hpp"
#include "spectralens/rmtstats.hpp"
#include "spectralens/rng.hpp"
#include "spectralens/spectra.hpp"

namespace spectralens {

inline constexpr double kSkipped = std::numeric_limits<double>::quiet_NaN();

inline bool is_skipped(double v) { return std::isnan(v); }

/// Spectral norm of a symmetric matrix by power iteration from a fixed
/// start vector; stops when the estimate changes by less than rel_tol.
template <typename Scalar>
Scalar spectral_norm(const Matrix<Scalar>& a, double rel_tol = 1e-6, int max_iterations = 20000) {
    const Eigen::Index n = a.rows();
    if (n == 0) {
        return Scalar(0);
    }
    Philox rng(RngSeed{0x5eed, 0}, 0);
    Vector<Scalar> v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = static_cast<Scalar>(rng.normal());
    }
    v.normalize();
    double est = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        // Iterate with A^2 so that +-lambda pairs do not make the estimate oscillate.
        Vector<Scalar> w = a * v;
        Vector<Scalar> w2 = a * w;
        const double nw2 = static_cast<double>(w2.norm());
        if (nw2 == 0.0) {
            return Scalar(0);
        }
        const double next = std::sqrt(nw2);
        v = w2 / static_cast<Scalar>(nw2);
        if (it > 0 && std::abs(next - est) <= rel_tol * next) {
            return static_cast<Scalar>(next);
        }
        est = next;
    }
    return static_cast<Scalar>(est);
}

/// (1/|cols|) X[:, cols] X[:, cols]^T, accumulated in column blocks.
template <typename Scalar>
Matrix<Scalar> gram_columns(const Matrix<Scalar>& x, const std::vector<Eigen::Index>& cols) {
    const Eigen::Index d = x.rows();
    constexpr Eigen::Index kBlock = 1024;
    Matrix<Scalar> g = Matrix<Scalar>::Zero(d, d);
    Matrix<Scalar> buf(d, kBlock);
    const auto m = static_cast<Eigen::Index>(cols.size());
    for (Eigen::Index start = 0; start < m; start += kBlock) {
        const Eigen::Index len = std::min(kBlock, m - start);
        for (Eigen::Index k = 0; k < len; ++k) {
            buf.col(k) = x.col(cols[static_cast<std::size_t>(start + k)]);
        }
        g.template selfadjointView<Eigen::Lower>().rankUpdate(buf.leftCols(len), Scalar(1) / static_cast<Scalar>(m));
    }
    g.template triangularView<Eigen::StrictlyUpper>() = g.transpose();
    return g;
}

/// m distinct column indices out of n (partial Fisher-Yates), ascending.
inline std::vector<Eigen::Index> sample_columns(Eigen::Index n, Eigen::Index m, Philox& rng) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto span = static_cast<std::uint64_t>(n - k);
        const auto j = k + static_cast<Eigen::Index>(rng.next_u64() % span);
        std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(m));
    std::sort(idx.begin(), idx.end());
    return idx;
}

struct SweepReference {
    double r_goe = kGoeMeanR;
    double alpha_full = 0.0;
    double entropy_full = 0.0;
    double sigma_full_norm = 0.0;
    IndexRange bulk_full;
    Eigen::Index M_full = 0;
};

struct ConvergenceSweep {
    std::vector<Eigen::Index> m_values;
    // Seed means; NaN marks a point where every seed was skipped.
    std::vector<double> delta, Delta, epsilon, entropy;
    std::vector<double> delta_se, Delta_se, epsilon_se, entropy_se;
    std::vector<int> skipped;  // seeds skipped per point, any metric
    SweepReference reference;
    int seeds_per_point = 0;
};

struct SweepOptions {
    BulkOptions bulk;
    double norm_tolerance = 1e-6;
};

namespace detail {
struct PointMetrics {
    double delta = kSkipped, Delta = kSkipped, epsilon = kSkipped, entropy = kSkipped;
};

inline void summarize(const std::vector<double>& v, double& mean, double& se) {
    std::vector<double> ok;
    for (double x : v) {
        if (!is_skipped(x)) {
            ok.push_back(x);
        }
    }
    mean = ok.empty() ? kSkipped : mean_of(ok);
    se = ok.empty() ? kSkipped : standard_error(ok);
}
}  // namespace detail

/// For each M, draw seeds_per_point column subsets without replacement and
/// compare their Gram spectra with the full dataset.
template <typename Scalar>
ConvergenceSweep sweep(const DataMatrix<Scalar>& x_full, const std::vector<Eigen::Index>& m_values, int seeds_per_point,
                       RngSeed seed, const SweepOptions& opt = {}) {
    if (seeds_per_point < 1) {
        throw InvalidArgument("sweep: seeds_per_point must be >= 1");
    }
    if (m_values.empty() || !std::is_sorted(m_values.begin(), m_values.end())) {
        throw InvalidArgument("sweep: m_values must be non-empty and ascending");
    }
    if (m_values.front() < 2 || m_values.back() > x_full.M()) {
        throw InvalidArgument("sweep: m_values must lie in [2, " + std::to_string(x_full.M()) + "]");
    }
    const auto& x = x_full.values();
    const Matrix<Scalar> sigma_full = gram(x);
    const auto spec_full = detect_bulk(eigenvalues(sigma_full, x.cols()), opt.bulk);

    ConvergenceSweep out;
    out.m_values = m_values;
    out.seeds_per_point = seeds_per_point;
    out.reference.alpha_full = static_cast<double>(fit_power_law(spec_full).alpha);
    out.reference.entropy_full = static_cast<double>(spectral_entropy(spec_full));
    out.reference.sigma_full_norm = static_cast<double>(spectral_norm(sigma_full, opt.norm_tolerance));
    out.reference.bulk_full = *spec_full.bulk_range();
    out.reference.M_full = x.cols();

    const std::size_t points = m_values.size();
    const auto seeds = static_cast<std::size_t>(seeds_per_point);
    std::vector<detail::PointMetrics> cells(points * seeds);
    parallel_for(cells.size(), [&](std::size_t job) {
        const std::size_t p = job / seeds;
        const std::size_t s = job % seeds;
        const Eigen::Index m = m_values[p];
        Philox rng(seed.derive(static_cast<std::uint64_t>(m)), s);
        // The full set is a permutation of all columns, whose Gram matrix is sigma_full.
        const Matrix<Scalar> sigma_m = m == x.cols() ? sigma_full : gram_columns(x, sample_columns(x.cols(), m, rng));
        auto& cell = cells[job];
        cell.epsilon =
            static_cast<double>(spectral_norm(Matrix<Scalar>(sigma_m - sigma_full), opt.norm_tolerance)) /
            out.reference.sigma_full_norm;
        try {
            const auto spec = detect_bulk(eigenvalues(sigma_m, m), opt.bulk);
            cell.Delta = std::abs(static_cast<double>(fit_power_law(spec).alpha) - out.reference.alpha_full);
            cell.entropy = static_cast<double>(spectral_entropy(spec));
            const double r = r_statistics(spec).mean;
            cell.delta = std::abs(r - kGoeMeanR) / kGoeMeanR;
        } catch (const InsufficientSpectrum&) {
            // leave the bulk metrics marked as skipped
        }
    });

    auto resize = [&](std::vector<double>& v) { v.assign(points, kSkipped); };
    for (auto* v : {&out.delta, &out.Delta, &out.epsilon, &out.entropy, &out.delta_se, &out.Delta_se,
                    &out.epsilon_se, &out.entropy_se}) {
        resize(*v);
    }
    out.skipped.assign(points, 0);
    for (std::size_t p = 0; p < points; ++p) {
        std::vector<double> de, De, ep, en;
        for (std::size_t s = 0; s < seeds; ++s) {
            const auto& c = cells[p * seeds + s];
            de.push_back(c.delta);
            De.push_back(c.Delta);
            ep.push_back(c.epsilon);
            en.push_back(c.entropy);
            if (is_skipped(c.delta) || is_skipped(c.Delta) || is_skipped(c.entropy)) {
                ++out.skipped[p];
            }
        }
        detail::summarize(de, out.delta[p], out.delta_se[p]);
        detail::summarize(De, out.Delta[p], out.Delta_se[p]);
        detail::summarize(ep, out.epsilon[p], out.epsilon_se[p]);
        detail::summarize(en, out.entropy[p], out.entropy_se[p]);
    }
    return out;
}

/// n log-spaced integers in [lo, hi], deduplicated.
inline std::vector<Eigen::Index> log_grid(Eigen::Index lo, Eigen::Index hi, int n) {
    if (lo < 1 || hi < lo || n < 2) {
        throw InvalidArgument("log_grid: need 1 <= lo <= hi and n >= 2");
    }
    std::vector<Eigen::Index> g;
    const double a = std::log(static_cast<double>(lo)), b = std::log(static_cast<double>(hi));
    for (int k = 0; k < n; ++k) {
        const auto v = static_cast<Eigen::Index>(std::llround(std::exp(a + (b - a) * k / (n - 1))));
        if (g.empty() || v > g.back()) {
            g.push_back(v);
        }
    }
    g.back() = hi;
    return g;
}

enum class SweepMetric { delta, Delta };

struct McritResult {
    bool converged = false;
    Eigen::Index m_crit = 0;
    double plateau = 0.0;
    std::string reason;
};

struct McritOptions {
    double band = 0.2;
    int plateau_points = 3;
};

/// Smallest M whose metric lies within `band` of the plateau (mean of the
/// last points). Not converged when the tail is not flat or the head does
/// not come down onto the plateau.
inline McritResult locate_mcrit(std::span<const Eigen::Index> m_values, std::span<const double> metric,
                                const McritOptions& opt = {}) {
    std::vector<Eigen::Index> m;
    std::vector<double> v;
    for (std::size_t k = 0; k < metric.size(); ++k) {
        if (!is_skipped(metric[k])) {
            m.push_back(m_values[k]);
            v.push_back(metric[k]);
        }
    }
    McritResult out;
    if (v.size() < 5) {
        out.reason = "fewer than 5 usable points";
        return out;
    }
    const auto tail = static_cast<std::size_t>(opt.plateau_points);
    double plateau = 0.0;
    for (std::size_t k = v.size() - tail; k < v.size(); ++k) {
        plateau += v[k];
    }
    plateau /= static_cast<double>(tail);
    out.plateau = plateau;
    for (std::size_t k = v.size() - tail; k < v.size(); ++k) {
        if (std::abs(v[k] - plateau) > opt.band * std::abs(plateau)) {
            out.reason = "no plateau: the last points are not within the band of their mean";
            return out;
        }
    }
    if (!(v.front() > plateau * (1 + opt.band))) {
        out.reason = "head is not decreasing onto the plateau";
        return out;
    }
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (std::abs(v[k] - plateau) <= opt.band * std::abs(plateau)) {
            out.converged = true;
            out.m_crit = m[k];
            return out;
        }
    }
    out.reason = "no point inside the plateau band";
    return out;
}

inline McritResult locate_mcrit(const ConvergenceSweep& s, SweepMetric metric, const McritOptions& opt = {}) {
    return locate_mcrit(s.m_values, metric == SweepMetric::delta ? s.delta : s.Delta, opt);
}

struct EntropyTrajectory {
    std::vector<double> normalized_entropy;  // H_M / H_full
    std::vector<double> normalized_delta;    // delta_M / delta at the first usable M
    std::vector<double> normalized_Delta;    // Delta_M / Delta at the first usable M
};

inline EntropyTrajectory entropy_trajectory(const ConvergenceSweep& s) {
    EntropyTrajectory t;
    auto normalize = [](const std::vector<double>& v, double ref) {
        std::vector<double> out(v.size(), kSkipped);
        if (is_skipped(ref) || ref == 0.0) {
            return out;
        }
        for (std::size_t k = 0; k < v.size(); ++k) {
            out[k] = is_skipped(v[k]) ? kSkipped : v[k] / ref;
        }
        return out;
    };
    auto first_usable = [](const std::vector<double>& v) {
        for (double x : v) {
            if (!is_skipped(x)) {
                return x;
            }
        }
        return kSkipped;
    };
    t.normalized_entropy = normalize(s.entropy, s.reference.entropy_full);
    t.normalized_delta = normalize(s.delta, first_usable(s.delta));
    t.normalized_Delta = normalize(s.Delta, first_usable(s.Delta));
    return t;
}

}  // namespace spectralens
