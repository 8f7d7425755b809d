#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <type_traits>
#include <vector>

namespace spectralens {

template <typename Value>
struct QuadratureResult {
    Value value{};
    double error_estimate = 0.0;
    int intervals = 0;
    bool converged = false;
};

namespace detail {

// Gauss-Kronrod 7-15 nodes on [-1, 1] (QUADPACK qk15).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename Value>
double magnitude(const Value& v) {
    return std::abs(v);
}

template <typename Value, typename F>
std::pair<Value, double> gauss_kronrod_15(F&& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const Value fc = f(center);
    Value kronrod = fc * kKronrodWeights[7];
    Value gauss = fc * kGaussWeights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        const Value sum = f(center - dx) + f(center + dx);
        kronrod += sum * kKronrodWeights[j];
        if (j % 2 == 1) {
            gauss += sum * kGaussWeights[j / 2];
        }
    }
    kronrod *= half;
    gauss *= half;
    return {kronrod, magnitude(kronrod - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7-15) integration of a real- or
/// complex-valued function over [a, b]. Bisects the interval with the
/// largest error estimate until the total estimate meets
/// max(abs_tol, rel_tol * |integral|) or max_intervals is reached.
template <typename F>
auto integrate(F&& f, double a, double b, double abs_tol = 1e-10, double rel_tol = 1e-10,
               int max_intervals = 4000) {
    using Value = std::decay_t<decltype(f(a))>;
    struct Piece {
        double a, b;
        Value value;
        double error;
        bool operator<(const Piece& other) const { return error < other.error; }
    };
    std::priority_queue<Piece> pieces;
    auto [v0, e0] = detail::gauss_kronrod_15<Value>(f, a, b);
    pieces.push({a, b, v0, e0});
    Value total = v0;
    double total_error = e0;
    int count = 1;
    while (total_error > std::max(abs_tol, rel_tol * detail::magnitude(total)) && count < max_intervals) {
        const Piece worst = pieces.top();
        pieces.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            pieces.push(worst);
            break;
        }
        auto [vl, el] = detail::gauss_kronrod_15<Value>(f, worst.a, mid);
        auto [vr, er] = detail::gauss_kronrod_15<Value>(f, mid, worst.b);
        total += vl + vr - worst.value;
        total_error += el + er - worst.error;
        pieces.push({worst.a, mid, vl, el});
        pieces.push({mid, worst.b, vr, er});
        ++count;
    }
    // Re-sum to shed the drift of the incremental updates.
    Value sum{};
    double err = 0.0;
    while (!pieces.empty()) {
        sum += pieces.top().value;
        err += pieces.top().error;
        pieces.pop();
    }
    return QuadratureResult<Value>{sum, err, count, err <= std::max(abs_tol, rel_tol * detail::magnitude(sum))};
}

}  // namespace spectralens
