#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "spectralens/errors.hpp"

namespace spectralens {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct Preprocessing {
    bool centered = false;
    bool standardized = false;

    friend bool operator==(const Preprocessing&, const Preprocessing&) = default;
};

/// A d x M data matrix: one column per sample, one row per feature.
///
/// Immutable after construction. The constructor validates the shape,
/// finiteness, and whatever the preprocessing flags claim about the rows.
template <typename Scalar>
class DataMatrix {
public:
    using MatrixType = Matrix<Scalar>;

    DataMatrix(MatrixType values, Preprocessing preprocessing = {}, std::string source = {})
        : values_(std::move(values)), preprocessing_(preprocessing), source_(std::move(source)) {
        validate();
    }

    [[nodiscard]] const MatrixType& values() const { return values_; }
    [[nodiscard]] Eigen::Index d() const { return values_.rows(); }
    [[nodiscard]] Eigen::Index M() const { return values_.cols(); }
    [[nodiscard]] const Preprocessing& preprocessing() const { return preprocessing_; }
    [[nodiscard]] const std::string& source() const { return source_; }

private:
    void validate() const {
        if (values_.rows() < 2 || values_.cols() < 2) {
            throw DimensionError("data matrix must be at least 2x2, got " + std::to_string(values_.rows()) +
                                 "x" + std::to_string(values_.cols()));
        }
        if (!values_.allFinite()) {
            throw InvalidArgument("data matrix contains non-finite entries");
        }
        if (!preprocessing_.centered && !preprocessing_.standardized) {
            return;
        }
        const Scalar m = static_cast<Scalar>(values_.cols());
        for (Eigen::Index i = 0; i < values_.rows(); ++i) {
            const auto row = values_.row(i);
            const Scalar mean = row.mean();
            const Scalar sd = std::sqrt((row.array() - mean).square().sum() / (m - 1));
            if (preprocessing_.centered) {
                const Scalar tol = sd > 0 ? centering_tolerance() * sd : Scalar(1e-12);
                if (std::abs(mean) > tol) {
                    throw InvalidArgument("row " + std::to_string(i) + " is flagged centered but has mean " +
                                          std::to_string(static_cast<double>(mean)));
                }
            }
            if (preprocessing_.standardized && sd > zero_variance_threshold() &&
                std::abs(sd - Scalar(1)) > centering_tolerance()) {
                throw InvalidArgument("row " + std::to_string(i) + " is flagged standardized but has sd " +
                                      std::to_string(static_cast<double>(sd)));
            }
        }
    }

    static constexpr Scalar centering_tolerance() {
        return sizeof(Scalar) >= 8 ? Scalar(1e-10) : Scalar(1e-4);
    }
    static constexpr Scalar zero_variance_threshold() {
        return sizeof(Scalar) >= 8 ? Scalar(1e-12) : Scalar(1e-6);
    }

    MatrixType values_;
    Preprocessing preprocessing_;
    std::string source_;
};

using DataMatrixD = DataMatrix<double>;

/// Center every feature row; optionally divide by its sample standard
/// deviation (M - 1 denominator). Rows with zero variance end up exactly 0.
template <typename Scalar>
DataMatrix<Scalar> preprocess(const DataMatrix<Scalar>& x, bool standardize) {
    Matrix<Scalar> v = x.values();
    const Scalar m = static_cast<Scalar>(v.cols());
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        auto row = v.row(i);
        const Scalar mean = row.mean();
        const Scalar scale = std::max(Scalar(1), std::abs(mean));
        row.array() -= mean;
        const Scalar sd = std::sqrt(row.squaredNorm() / (m - 1));
        if (sd <= std::numeric_limits<Scalar>::epsilon() * 64 * scale) {
            row.setZero();
        } else if (standardize) {
            row /= sd;
        }
    }
    const Preprocessing flags{true, standardize};
    return DataMatrix<Scalar>(std::move(v), flags, x.source());
}

}  // namespace spectralens
