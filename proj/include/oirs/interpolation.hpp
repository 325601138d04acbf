#pragma once
// Separable interpolation weights on scattered 1-D knots: piecewise linear or
// not-a-knot cubic spline, with a choice of extrapolation rule.

#include "oirs/linalg.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cstddef>
#include <vector>

namespace oirs {

enum class InterpKind { linear, cubic };
enum class ExtrapPolicy {
    end_segment,  ///< continue the first/last polynomial piece
    linear,       ///< continue the secant through the two outermost knots
    quadratic,    ///< continue the parabola through the three outermost knots
    hold,         ///< repeat the boundary sample
};

struct AxisWeights {
    Matrix W;                     ///< targets x knots; each row sums to 1
    std::size_t extrapolated = 0; ///< targets outside [knots.front(), knots.back()]
};

namespace detail {

inline std::size_t segment_of(const std::vector<double>& x, double t)
{
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    const auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - x.begin()) - 1));
    return std::min(k, x.size() - 2);
}

/// Second derivatives of the not-a-knot spline through (x, y); needs at least 4 knots.
inline std::vector<double> not_a_knot_moments(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = x.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    auto h = [&](std::size_t i) { return x[i + 1] - x[i]; };
    const auto I = [](std::size_t i) { return static_cast<Eigen::Index>(i); };
    // third derivative continuous across knots 1 and n-2
    A(0, 0) = -1.0 / h(0);
    A(0, 1) = 1.0 / h(0) + 1.0 / h(1);
    A(0, 2) = -1.0 / h(1);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        A(I(i), I(i - 1)) = h(i - 1);
        A(I(i), I(i)) = 2.0 * (h(i - 1) + h(i));
        A(I(i), I(i + 1)) = h(i);
        b(I(i)) = 6.0 * ((y[i + 1] - y[i]) / h(i) - (y[i] - y[i - 1]) / h(i - 1));
    }
    A(I(n - 1), I(n - 3)) = -1.0 / h(n - 3);
    A(I(n - 1), I(n - 2)) = 1.0 / h(n - 3) + 1.0 / h(n - 2);
    A(I(n - 1), I(n - 1)) = -1.0 / h(n - 2);
    const Eigen::VectorXd M = A.partialPivLu().solve(b);
    return {M.data(), M.data() + M.size()};
}

inline double eval_cubic(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& M,
                         double t)
{
    const std::size_t i = segment_of(x, t);
    const double h = x[i + 1] - x[i];
    const double a = x[i + 1] - t, b = t - x[i];
    return M[i] * a * a * a / (6.0 * h) + M[i + 1] * b * b * b / (6.0 * h) + (y[i] / h - M[i] * h / 6.0) * a +
           (y[i + 1] / h - M[i + 1] * h / 6.0) * b;
}

/// Value at t of the interpolant through (x, y) for the given kind (x strictly increasing).
inline double interpolant(const std::vector<double>& x, const std::vector<double>& y, InterpKind kind, double t)
{
    const std::size_t n = x.size();
    if (n == 1)
        return y[0];
    if (n == 2 || kind == InterpKind::linear) {
        const std::size_t i = segment_of(x, t);
        const double u = (t - x[i]) / (x[i + 1] - x[i]);
        return y[i] * (1.0 - u) + y[i + 1] * u;
    }
    if (n == 3) {
        double s = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            double li = 1.0;
            for (std::size_t j = 0; j < 3; ++j)
                if (j != i)
                    li *= (t - x[j]) / (x[i] - x[j]);
            s += li * y[i];
        }
        return s;
    }
    return eval_cubic(x, y, not_a_knot_moments(x, y), t);
}

/// Parabola through the three knots nearest the end closest to t.
inline double end_parabola(const std::vector<double>& x, const std::vector<double>& y, double t)
{
    const std::size_t n = x.size();
    const std::size_t b = t < x.front() ? 0 : n - 3;
    const std::vector<double> xs(x.begin() + static_cast<std::ptrdiff_t>(b), x.begin() + static_cast<std::ptrdiff_t>(b + 3));
    const std::vector<double> ys(y.begin() + static_cast<std::ptrdiff_t>(b), y.begin() + static_cast<std::ptrdiff_t>(b + 3));
    return interpolant(xs, ys, InterpKind::cubic, t);
}

} // namespace detail

/**
 * @brief Weight matrix mapping knot values to target values.
 *
 * The interpolant is linear in the data, so row r holds the interpolant of the
 * unit vectors evaluated at targets[r]. Knots must be strictly increasing.
 */
inline AxisWeights axis_weights(const std::vector<double>& knots, const std::vector<double>& targets, InterpKind kind,
                                ExtrapPolicy policy = ExtrapPolicy::end_segment)
{
    if (knots.empty())
        throw DimensionError("axis_weights: no knots");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i] > knots[i - 1]))
            throw DimensionError("axis_weights: knots must be strictly increasing");
    const std::size_t k = knots.size();
    AxisWeights out{Matrix(targets.size(), k), 0};
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<double> e(k, 0.0);
        e[c] = 1.0;
        std::vector<double> M;
        const bool spline = kind == InterpKind::cubic && k >= 4;
        if (spline)
            M = detail::not_a_knot_moments(knots, e);
        for (std::size_t r = 0; r < targets.size(); ++r) {
            double t = targets[r];
            const bool outside = t < knots.front() || t > knots.back();
            if (outside && policy == ExtrapPolicy::hold)
                t = std::clamp(t, knots.front(), knots.back());
            if (outside && policy == ExtrapPolicy::linear)
                out.W(r, c) = detail::interpolant(knots, e, InterpKind::linear, t);
            else if (outside && policy == ExtrapPolicy::quadratic && k >= 3)
                out.W(r, c) = detail::end_parabola(knots, e, t);
            else
                out.W(r, c) = spline ? detail::eval_cubic(knots, e, M, t) : detail::interpolant(knots, e, kind, t);
        }
    }
    for (double t : targets)
        if (t < knots.front() || t > knots.back())
            ++out.extrapolated;
    return out;
}

/// rows.W * samples * cols.W^T
inline Matrix interpolate_grid(const Matrix& samples, const AxisWeights& rows, const AxisWeights& cols)
{
    return matmul(matmul(rows.W, samples), transpose(cols.W));
}

} // namespace oirs
