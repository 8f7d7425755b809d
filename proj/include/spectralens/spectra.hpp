#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spectralens/datamatrix.hpp"
#include "spectralens/errors.hpp"
#include "spectralens/log.hpp"
#include "spectralens/stats.hpp"

namespace spectralens {

/// Closed index range, 1-based, as used for eigenvalue ranks.
struct IndexRange {
    Eigen::Index start = 0;
    Eigen::Index end = 0;

    [[nodiscard]] Eigen::Index size() const { return end - start + 1; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Minimum bulk length accepted by fits and entropy.
inline constexpr Eigen::Index kMinBulkSpan = 30;

/// Descending eigenvalues plus the sample count they came from and an
/// optional bulk range. Gram spectra are nonnegative; reference ensembles
/// such as GOE samples may carry signed values.
template <typename Scalar = double>
class Spectrum {
public:
    Spectrum() = default;

    explicit Spectrum(Vector<Scalar> values, Eigen::Index M = 0, std::optional<IndexRange> bulk = std::nullopt)
        : values_(std::move(values)), M_(M) {
        if (!values_.allFinite()) {
            throw InvalidArgument("spectrum contains non-finite values");
        }
        std::sort(values_.data(), values_.data() + values_.size(), std::greater<Scalar>());
        if (bulk) {
            set_bulk(*bulk);
        }
    }

    [[nodiscard]] const Vector<Scalar>& eigenvalues() const { return values_; }
    [[nodiscard]] Eigen::Index d() const { return values_.size(); }
    [[nodiscard]] Eigen::Index M() const { return M_; }
    [[nodiscard]] Scalar max() const { return values_.size() ? values_(0) : Scalar(0); }
    /// i-th largest eigenvalue, 1-based.
    [[nodiscard]] Scalar operator[](Eigen::Index i) const { return values_(i - 1); }

    [[nodiscard]] const std::optional<IndexRange>& bulk_range() const { return bulk_; }
    [[nodiscard]] bool has_bulk() const { return bulk_.has_value(); }

    [[nodiscard]] Spectrum with_bulk(IndexRange range) const {
        Spectrum out = *this;
        out.set_bulk(range);
        return out;
    }

    /// Bulk eigenvalues, descending.
    [[nodiscard]] Vector<Scalar> bulk() const {
        const IndexRange r = require_bulk("bulk");
        return values_.segment(r.start - 1, r.size());
    }

    [[nodiscard]] IndexRange require_bulk(const char* what) const {
        if (!bulk_) {
            throw InvalidArgument(std::string(what) + ": bulk range is not set");
        }
        return *bulk_;
    }

private:
    void set_bulk(IndexRange r) {
        if (r.start < 1 || r.end > values_.size() || r.end < r.start) {
            throw InvalidArgument("bulk range [" + std::to_string(r.start) + ", " + std::to_string(r.end) +
                                  "] is outside 1.." + std::to_string(values_.size()));
        }
        bulk_ = r;
    }

    Vector<Scalar> values_;
    Eigen::Index M_ = 0;
    std::optional<IndexRange> bulk_;
};

using SpectrumD = Spectrum<double>;

/// (1/M) X X^T for a d x M matrix expression.
template <typename Derived>
Matrix<typename Derived::Scalar> gram(const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index d = x.rows();
    if (x.cols() < 1) {
        throw DimensionError("gram: no samples");
    }
    Matrix<Scalar> g = Matrix<Scalar>::Zero(d, d);
    g.template selfadjointView<Eigen::Lower>().rankUpdate(x.derived(), Scalar(1) / static_cast<Scalar>(x.cols()));
    g.template triangularView<Eigen::StrictlyUpper>() = g.transpose();
    return g;
}

template <typename Scalar>
Matrix<Scalar> gram(const DataMatrix<Scalar>& x) {
    if (!x.preprocessing().centered) {
        warn("gram: input '" + x.source() + "' is not centered");
    }
    return gram(x.values());
}

namespace detail {
template <typename Scalar>
void check_symmetric_input(const Matrix<Scalar>& a) {
    if (a.rows() != a.cols()) {
        throw DimensionError("expected a square matrix, got " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()));
    }
    if (!a.allFinite()) {
        throw InvalidArgument("matrix has non-finite entries");
    }
}

// Clamp numerical negatives of a PSD matrix to zero; leave genuinely
// indefinite spectra alone.
template <typename Scalar>
void clamp_psd(Vector<Scalar>& v) {
    if (v.size() == 0) {
        return;
    }
    const Scalar scale = v.cwiseAbs().maxCoeff();
    const Scalar floor = -Scalar(1e-10) * scale;
    if ((v.array() >= floor).all()) {
        v = v.cwiseMax(Scalar(0));
    }
}
}  // namespace detail

/// Eigenvalues of a symmetric matrix, descending. M is carried as metadata.
template <typename Scalar>
Spectrum<Scalar> eigenvalues(const Matrix<Scalar>& sym, Eigen::Index M = 0) {
    detail::check_symmetric_input(sym);
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("symmetric eigensolver failed");
    }
    Vector<Scalar> v = solver.eigenvalues();
    detail::clamp_psd(v);
    return Spectrum<Scalar>(std::move(v), M);
}

template <typename Scalar>
struct EigenPairs {
    Vector<Scalar> values;   // descending
    Matrix<Scalar> vectors;  // column k pairs with values(k)
};

template <typename Scalar>
EigenPairs<Scalar> eigen_decomposition(const Matrix<Scalar>& sym) {
    detail::check_symmetric_input(sym);
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("symmetric eigensolver failed");
    }
    return {solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};
}

struct BulkOptions {
    Eigen::Index i_start = 10;
    Eigen::Index window = 21;
    double max_slope_deviation = 0.5;
    double floor = 1e-12;
    Eigen::Index min_usable = 50;
    int max_passes = 20;
};

/// Locate the power-law bulk [i_start, d_bulk]. Local log-log slopes over a
/// centered window are compared with the slope fitted over the current
/// bulk. The scan stops at the first cliff, a window whose slope magnitude
/// is at least twice the fitted one, or at the numerical floor. d_bulk is
/// the last window centre before that point whose slope stays within
/// max_slope_deviation of the fit; a clean run to the end keeps every index.
template <typename Scalar>
Spectrum<Scalar> detect_bulk(const Spectrum<Scalar>& s, const BulkOptions& opt = {}) {
    const auto& v = s.eigenvalues();
    if (opt.i_start < 1 || opt.window < 3 || opt.window % 2 == 0) {
        throw InvalidArgument("detect_bulk: i_start must be >= 1 and the window odd and >= 3");
    }
    const double top = v.size() ? static_cast<double>(v(0)) : 0.0;
    Eigen::Index usable = 0;
    while (usable < v.size() && top > 0 && static_cast<double>(v(usable)) > opt.floor * top) {
        ++usable;
    }
    if (usable < opt.min_usable) {
        throw InsufficientSpectrum("detect_bulk: only " + std::to_string(usable) + " eigenvalues above the floor, need " +
                                   std::to_string(opt.min_usable));
    }
    const Eigen::Index half = opt.window / 2;
    if (usable < opt.i_start + 2 * half) {
        throw InsufficientSpectrum("detect_bulk: spectrum too short for the slope window");
    }
    std::vector<double> lx(static_cast<std::size_t>(usable)), ly(lx.size());
    for (Eigen::Index i = 0; i < usable; ++i) {
        lx[static_cast<std::size_t>(i)] = std::log(static_cast<double>(i + 1));
        ly[static_cast<std::size_t>(i)] = std::log(static_cast<double>(v(i)));
    }
    auto slope_over = [&](Eigen::Index a, Eigen::Index b) {  // 1-based inclusive
        const auto off = static_cast<std::size_t>(a - 1);
        const auto len = static_cast<std::size_t>(b - a + 1);
        return linear_fit(std::span(lx).subspan(off, len), std::span(ly).subspan(off, len)).slope;
    };
    // local[c] for window centres c = i_start + half .. usable - half
    const Eigen::Index first_centre = opt.i_start + half;
    const Eigen::Index last_centre = usable - half;
    std::vector<double> local;
    for (Eigen::Index c = first_centre; c <= last_centre; ++c) {
        local.push_back(slope_over(c - half, c + half));
    }
    // shortest bulk a power-law fit accepts
    const Eigen::Index min_end = std::min(usable, opt.i_start + kMinBulkSpan - 1);
    Eigen::Index end = usable;
    for (int pass = 0; pass < opt.max_passes; ++pass) {
        const double fitted = slope_over(opt.i_start, end);
        Eigen::Index next = min_end;
        for (Eigen::Index c = first_centre; c <= last_centre; ++c) {
            const double l = local[static_cast<std::size_t>(c - first_centre)];
            if (std::abs(l) >= 2.0 * std::abs(fitted)) {
                break;
            }
            if (std::abs(l - fitted) < opt.max_slope_deviation) {
                next = c == last_centre ? usable : c;
            }
        }
        next = std::max(next, min_end);
        if (next == end) {
            break;
        }
        end = next;
    }
    return s.with_bulk({opt.i_start, end});
}

template <typename Scalar = double>
struct PowerLawFit {
    Scalar alpha = 0;
    Scalar amplitude = 0;
    Scalar r_squared = 0;
    IndexRange fit_range;
};

/// OLS of log(lambda_i) on log(i) over the bulk; lambda_i ~ amplitude i^{-1-alpha}.
template <typename Scalar>
PowerLawFit<Scalar> fit_power_law(const Spectrum<Scalar>& s) {
    const IndexRange r = s.require_bulk("fit_power_law");
    if (r.size() < kMinBulkSpan) {
        throw InsufficientSpectrum("fit_power_law: bulk spans " + std::to_string(r.size()) + " indices, need " +
                                   std::to_string(kMinBulkSpan));
    }
    std::vector<double> lx, ly;
    lx.reserve(static_cast<std::size_t>(r.size()));
    ly.reserve(lx.capacity());
    for (Eigen::Index i = r.start; i <= r.end; ++i) {
        const double lam = static_cast<double>(s[i]);
        if (!(lam > 0)) {
            throw NumericError("fit_power_law: eigenvalue " + std::to_string(i) + " is not positive");
        }
        lx.push_back(std::log(static_cast<double>(i)));
        ly.push_back(std::log(lam));
    }
    const LinearFit f = linear_fit(lx, ly);
    return {static_cast<Scalar>(-f.slope - 1.0), static_cast<Scalar>(std::exp(f.intercept)),
            static_cast<Scalar>(f.r_squared), r};
}

/// Shannon entropy (natural log) of p_i = lambda_i / sum(lambda) over the bulk.
template <typename Scalar>
Scalar spectral_entropy(const Spectrum<Scalar>& s) {
    const IndexRange r = s.require_bulk("spectral_entropy");
    if (r.size() < kMinBulkSpan) {
        throw InsufficientSpectrum("spectral_entropy: bulk spans " + std::to_string(r.size()) + " indices, need " +
                                   std::to_string(kMinBulkSpan));
    }
    const Vector<Scalar> b = s.bulk();
    if ((b.array() <= 0).any()) {
        throw NumericError("spectral_entropy: bulk contains a nonpositive eigenvalue");
    }
    const double total = static_cast<double>(b.sum());
    double h = 0.0;
    for (Eigen::Index k = 0; k < b.size(); ++k) {
        const double p = static_cast<double>(b(k)) / total;
        h -= p * std::log(p);
    }
    return static_cast<Scalar>(h);
}

enum class HistogramNormalization { MaxScaled, Raw };

/// Bin masses on ascending edges; masses sum to 1.
struct DensityHistogram {
    std::vector<double> edges;
    std::vector<double> masses;
    HistogramNormalization normalization = HistogramNormalization::Raw;

    [[nodiscard]] std::size_t bins() const { return masses.size(); }
    [[nodiscard]] double width(std::size_t k) const { return edges[k + 1] - edges[k]; }
    [[nodiscard]] double center(std::size_t k) const { return 0.5 * (edges[k] + edges[k + 1]); }
    [[nodiscard]] double density(std::size_t k) const { return masses[k] / width(k); }
};

inline std::vector<double> linear_edges(double lo, double hi, std::size_t bins) {
    std::vector<double> e(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k) {
        e[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
    }
    e.back() = hi;
    return e;
}

/// Bin values on the given edges. The last bin is closed on the right;
/// values outside [edges.front(), edges.back()] are dropped and the masses
/// are normalized over the values that landed.
inline DensityHistogram histogram_on_edges(std::span<const double> values, std::vector<double> edges,
                                           HistogramNormalization norm = HistogramNormalization::Raw) {
    if (edges.size() < 3) {
        throw InvalidArgument("histogram needs at least 2 bins");
    }
    if (!std::is_sorted(edges.begin(), edges.end()) || !(edges.back() > edges.front())) {
        throw InvalidArgument("histogram edges must be ascending");
    }
    DensityHistogram h;
    h.normalization = norm;
    h.masses.assign(edges.size() - 1, 0.0);
    std::size_t landed = 0;
    for (double x : values) {
        if (x < edges.front() || x > edges.back()) {
            continue;
        }
        auto it = std::upper_bound(edges.begin(), edges.end(), x);
        std::size_t k = static_cast<std::size_t>(it - edges.begin());
        k = k == 0 ? 0 : std::min(k - 1, h.masses.size() - 1);
        h.masses[k] += 1.0;
        ++landed;
    }
    if (landed == 0) {
        throw InsufficientSpectrum("histogram: no values inside the bin range");
    }
    for (double& m : h.masses) {
        m /= static_cast<double>(landed);
    }
    h.edges = std::move(edges);
    return h;
}

/// Histogram of the bulk. MaxScaled divides by the largest bulk eigenvalue
/// and bins on [0, 1]; Raw bins on [min, max] of the bulk.
template <typename Scalar>
DensityHistogram histogram(const Spectrum<Scalar>& s, std::size_t bins = 64,
                           HistogramNormalization norm = HistogramNormalization::MaxScaled) {
    if (bins < 2) {
        throw InvalidArgument("histogram: bins must be >= 2");
    }
    const Vector<Scalar> b = s.bulk();
    std::vector<double> vals(static_cast<std::size_t>(b.size()));
    for (Eigen::Index k = 0; k < b.size(); ++k) {
        vals[static_cast<std::size_t>(k)] = static_cast<double>(b(k));
    }
    if (norm == HistogramNormalization::MaxScaled) {
        const double top = vals.front();
        if (!(top > 0)) {
            throw NumericError("histogram: largest bulk eigenvalue is not positive");
        }
        for (double& x : vals) {
            x /= top;
        }
        return histogram_on_edges(vals, linear_edges(0.0, 1.0, bins), norm);
    }
    double lo = vals.back(), hi = vals.front();
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    return histogram_on_edges(vals, linear_edges(lo, hi, bins), norm);
}

/// Relative KL divergence sum p ln(p/q); q gets 1e-10 mass per bin and is
/// renormalized before use.
inline double kl_divergence(const DensityHistogram& p, const DensityHistogram& q, double smoothing = 1e-10) {
    if (p.edges.size() != q.edges.size()) {
        throw InvalidArgument("kl_divergence: histograms have different bin counts");
    }
    for (std::size_t k = 0; k < p.edges.size(); ++k) {
        const double tol = 1e-12 * std::max({1.0, std::abs(p.edges[k]), std::abs(q.edges[k])});
        if (std::abs(p.edges[k] - q.edges[k]) > tol) {
            throw InvalidArgument("kl_divergence: bin edges differ");
        }
    }
    double qsum = 0.0;
    for (double m : q.masses) {
        qsum += m + smoothing;
    }
    double kl = 0.0;
    for (std::size_t k = 0; k < p.masses.size(); ++k) {
        if (p.masses[k] > 0) {
            kl += p.masses[k] * std::log(p.masses[k] / ((q.masses[k] + smoothing) / qsum));
        }
    }
    return kl;
}

}  // namespace spectralens
