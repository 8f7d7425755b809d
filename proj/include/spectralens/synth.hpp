#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "spectralens/datamatrix.hpp"
#include "spectralens/errors.hpp"
#include "spectralens/parallel.hpp"
#include "spectralens/rng.hpp"
#include "spectralens/special.hpp"

namespace spectralens {

/// Largest Toeplitz size handled by the dense eigensolver path.
inline constexpr Eigen::Index kDenseToeplitzLimit = 4096;

/// Dense singular values of T_ij = delta_ij + c |i - j|^alpha, descending.
/// The power term is zero on the diagonal. T is symmetric, so its singular
/// values are the absolute eigenvalues.
template <typename Scalar = double>
Vector<Scalar> toeplitz_singular_values(Eigen::Index d, Scalar c, Scalar alpha) {
    if (d < 2) {
        throw InvalidArgument("toeplitz_singular_values: d must be >= 2");
    }
    if (!(c > 0)) {
        throw InvalidArgument("toeplitz_singular_values: c must be positive");
    }
    if (d > kDenseToeplitzLimit) {
        throw CapabilityError("toeplitz_singular_values: d=" + std::to_string(d) + " exceeds the dense limit " +
                              std::to_string(kDenseToeplitzLimit) + "; use laplace_singular_values");
    }
    Matrix<Scalar> t(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            t(i, j) = i == j ? Scalar(1) : c * std::pow(static_cast<Scalar>(std::abs(i - j)), alpha);
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(t, Eigen::EigenvaluesOnly);
    Vector<Scalar> sv = solver.eigenvalues().cwiseAbs();
    std::sort(sv.data(), sv.data() + sv.size(), std::greater<Scalar>());
    return sv;
}

enum class LaplaceMode {
    /// 1 + c Li_{-alpha}(e^{-s/d}) - c e^{-s} Phi(e^{-s/d}, -alpha, d)
    FullSeries,
    /// c Gamma(1 + alpha) (d / s)^{1 + alpha}; requires alpha > -1.
    Asymptotic,
};

/// Laplace-transform estimate of the Toeplitz singular values, indexed by
/// s = 1..d (entry s-1). Both modes are decreasing in s.
template <typename Scalar = double>
Vector<Scalar> laplace_singular_values(Eigen::Index d, Scalar c, Scalar alpha,
                                       LaplaceMode mode = LaplaceMode::FullSeries) {
    if (d < 2) {
        throw InvalidArgument("laplace_singular_values: d must be >= 2");
    }
    if (!(c > 0)) {
        throw InvalidArgument("laplace_singular_values: c must be positive");
    }
    Vector<Scalar> out(d);
    const double dd = static_cast<double>(d);
    if (mode == LaplaceMode::Asymptotic) {
        if (!(alpha > -1)) {
            throw InvalidArgument("laplace_singular_values: the asymptotic form needs alpha > -1");
        }
        const double amp = static_cast<double>(c) * std::tgamma(1.0 + static_cast<double>(alpha));
        for (Eigen::Index s = 1; s <= d; ++s) {
            out(s - 1) = static_cast<Scalar>(amp * std::pow(dd / static_cast<double>(s), 1.0 + alpha));
        }
        return out;
    }
    for (Eigen::Index s = 1; s <= d; ++s) {
        const double x = std::exp(-static_cast<double>(s) / dd);
        const double li = special::polylog_neg_order(static_cast<double>(alpha), x);
        const double phi = special::lerch_phi_neg_order(x, static_cast<double>(alpha), dd);
        out(s - 1) = static_cast<Scalar>(1.0 + static_cast<double>(c) * (li - std::exp(-static_cast<double>(s)) * phi));
    }
    return out;
}

enum class CovarianceKind { Identity, ToeplitzSingular };

/// Where the diagonal of a ToeplitzSingular covariance comes from.
enum class ToeplitzSpectrum {
    /// c Gamma(1+alpha) (d/s)^{1+alpha}, the bulk law the CGD is meant to carry.
    PowerLaw,
    /// Full Laplace series including the identity offset.
    LaplaceSeries,
    /// Exact dense singular values of the Toeplitz matrix.
    DenseSvd,
};

/// Diagonal population covariance: sigma^2 I, or a Toeplitz-derived spectrum.
/// The diagonal is computed once at construction and cached.
template <typename Scalar = double>
class PopulationCovariance {
public:
    static PopulationCovariance identity(Eigen::Index d, Scalar sigma2) {
        if (d < 1) {
            throw InvalidArgument("covariance dimension must be positive");
        }
        if (!(sigma2 > 0)) {
            throw InvalidArgument("identity covariance needs sigma^2 > 0");
        }
        PopulationCovariance cov(CovarianceKind::Identity, d);
        cov.sigma2_ = sigma2;
        cov.diagonal_ = Vector<Scalar>::Constant(d, sigma2);
        return cov;
    }

    static PopulationCovariance toeplitz(Eigen::Index d, Scalar c, Scalar alpha,
                                         ToeplitzSpectrum source = ToeplitzSpectrum::PowerLaw) {
        PopulationCovariance cov(CovarianceKind::ToeplitzSingular, d);
        cov.c_ = c;
        cov.alpha_ = alpha;
        cov.source_ = source;
        switch (source) {
            case ToeplitzSpectrum::PowerLaw:
                cov.diagonal_ = laplace_singular_values<Scalar>(d, c, alpha, LaplaceMode::Asymptotic);
                break;
            case ToeplitzSpectrum::LaplaceSeries:
                cov.diagonal_ = laplace_singular_values<Scalar>(d, c, alpha, LaplaceMode::FullSeries);
                break;
            case ToeplitzSpectrum::DenseSvd:
                cov.diagonal_ = toeplitz_singular_values<Scalar>(d, c, alpha);
                break;
        }
        std::sort(cov.diagonal_.data(), cov.diagonal_.data() + d, std::greater<Scalar>());
        if ((cov.diagonal_.array() < 0).any()) {
            throw NumericError("Toeplitz spectrum produced negative entries");
        }
        return cov;
    }

    [[nodiscard]] CovarianceKind kind() const { return kind_; }
    [[nodiscard]] Eigen::Index d() const { return d_; }
    [[nodiscard]] Scalar sigma2() const { return sigma2_; }
    [[nodiscard]] Scalar c() const { return c_; }
    [[nodiscard]] Scalar alpha() const { return alpha_; }
    [[nodiscard]] ToeplitzSpectrum source() const { return source_; }
    /// Descending population eigenvalues (the diagonal of Sigma).
    [[nodiscard]] const Vector<Scalar>& singular_values() const { return diagonal_; }
    [[nodiscard]] Scalar trace() const { return diagonal_.sum(); }

    /// Same shape, diagonal scaled so that trace / d == 1.
    [[nodiscard]] PopulationCovariance trace_normalized() const {
        PopulationCovariance out = *this;
        const Scalar mean = diagonal_.mean();
        out.diagonal_ /= mean;
        out.sigma2_ = sigma2_ / mean;
        out.scale_ = scale_ / mean;
        return out;
    }
    /// Factor applied by trace_normalized(), 1 otherwise.
    [[nodiscard]] Scalar scale() const { return scale_; }

    [[nodiscard]] std::string describe() const {
        if (kind_ == CovarianceKind::Identity) {
            return "identity(sigma2=" + std::to_string(static_cast<double>(sigma2_)) + ")";
        }
        const char* src = source_ == ToeplitzSpectrum::PowerLaw        ? "power-law"
                          : source_ == ToeplitzSpectrum::LaplaceSeries ? "laplace-series"
                                                                       : "dense-svd";
        return std::string("toeplitz(c=") + std::to_string(static_cast<double>(c_)) +
               ", alpha=" + std::to_string(static_cast<double>(alpha_)) + ", spectrum=" + src + ")";
    }

private:
    PopulationCovariance(CovarianceKind kind, Eigen::Index d) : kind_(kind), d_(d) {}

    CovarianceKind kind_;
    Eigen::Index d_;
    Scalar sigma2_ = 1;
    Scalar c_ = 0;
    Scalar alpha_ = 0;
    Scalar scale_ = 1;
    ToeplitzSpectrum source_ = ToeplitzSpectrum::PowerLaw;
    Vector<Scalar> diagonal_;
};

/// Draw M iid columns from N(0, Sigma) with diagonal Sigma: x = Sigma^{1/2} z.
/// Column a uses substream a of the seed, so the result does not depend on
/// the thread schedule.
template <typename Scalar>
DataMatrix<Scalar> sample_gaussian(const PopulationCovariance<Scalar>& cov, Eigen::Index M, RngSeed seed) {
    if (M < 1) {
        throw InvalidArgument("sample_gaussian: M must be >= 1");
    }
    const Eigen::Index d = cov.d();
    const Vector<Scalar> scale = cov.singular_values().cwiseSqrt();
    Matrix<Scalar> x(d, M);
    parallel_for(static_cast<std::size_t>(M), [&](std::size_t a) {
        Philox rng(seed, a);
        auto col = x.col(static_cast<Eigen::Index>(a));
        for (Eigen::Index i = 0; i < d; ++i) {
            col(i) = scale(i) * static_cast<Scalar>(rng.normal());
        }
    });
    return DataMatrix<Scalar>(std::move(x), {}, "gaussian:" + cov.describe());
}

/// Variance-matched noise mixing: sqrt(1-f) x + sqrt(f) N, where N is iid
/// normal with the global standard deviation of x.
template <typename Scalar>
DataMatrix<Scalar> corrupt_with_noise(const DataMatrix<Scalar>& x, Scalar fraction, RngSeed seed) {
    if (!(fraction >= 0 && fraction <= 1)) {
        throw InvalidArgument("noise fraction must lie in [0, 1]");
    }
    if (fraction == 0) {
        return x;
    }
    const auto& v = x.values();
    const double n = static_cast<double>(v.size());
    const double mean = static_cast<double>(v.sum()) / n;
    const double var = static_cast<double>((v.array() - static_cast<Scalar>(mean)).square().sum()) / (n - 1);
    const Scalar sd = static_cast<Scalar>(std::sqrt(var));
    const Scalar keep = std::sqrt(Scalar(1) - fraction);
    const Scalar mix = std::sqrt(fraction);
    Matrix<Scalar> out(v.rows(), v.cols());
    parallel_for(static_cast<std::size_t>(v.cols()), [&](std::size_t a) {
        Philox rng(seed, a);
        const auto j = static_cast<Eigen::Index>(a);
        for (Eigen::Index i = 0; i < v.rows(); ++i) {
            out(i, j) = keep * v(i, j) + mix * sd * static_cast<Scalar>(rng.normal());
        }
    });
    return DataMatrix<Scalar>(std::move(out), {},
                              x.source() + "+noise(" + std::to_string(static_cast<double>(fraction)) + ")");
}

}  // namespace spectralens
