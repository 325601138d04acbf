#pragma once
/**
 * @file coherence.hpp
 * @brief Second-order growth rates of the reflected Lambertian gain under
 *        element displacement and receiver motion, and the resulting
 *        coherence distance and coherence time.
 *
 * The gain model is h(R, U) = cos^m(theta) cos(phi) / (d1 + d2)^2 with
 * d1 = |R - L|, d2 = |R - U|. The expansions approximate the relative change
 * h(R + dR) / h(R) - 1 = w.dR + dR^T W dR + O(|dR|^3).
 */

#include "oirs/geometry.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

namespace oirs {

/// Dense symmetric-capable 3 x 3 matrix.
struct Mat3 {
    std::array<std::array<double, 3>, 3> a{};

    double operator()(int i, int j) const { return a[i][j]; }
    double& operator()(int i, int j) { return a[i][j]; }

    static Mat3 identity()
    {
        Mat3 m;
        for (int i = 0; i < 3; ++i)
            m.a[i][i] = 1.0;
        return m;
    }
    static Mat3 outer(const Vec3& x, const Vec3& y)
    {
        Mat3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                m.a[i][j] = x[i] * y[j];
        return m;
    }

    Mat3 operator+(const Mat3& o) const
    {
        Mat3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                m.a[i][j] = a[i][j] + o.a[i][j];
        return m;
    }
    Mat3 operator-(const Mat3& o) const { return *this + o * -1.0; }
    Mat3 operator*(double s) const
    {
        Mat3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                m.a[i][j] = a[i][j] * s;
        return m;
    }

    /// x^T M x
    double quad(const Vec3& x) const
    {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                s += x[i] * a[i][j] * x[j];
        return s;
    }
};

/// Geometry of one LED -> element -> PD path with derived distances and cosines.
struct CoherenceGeometry {
    Vec3 L, R, U;
    UnitVec3 N1, N2;
    double m = 1.0;
    double d1 = 0.0, d2 = 0.0;
    double cos_theta = 0.0, cos_phi = 0.0;

    static CoherenceGeometry make(const Vec3& L, const Vec3& R, const Vec3& U, const UnitVec3& N1,
                                  const UnitVec3& N2, double m = 1.0)
    {
        CoherenceGeometry g{L, R, U, N1, N2, m};
        g.d1 = distance(L, R);
        g.d2 = distance(U, R);
        if (!(g.d1 > 0.0) || !(g.d2 > 0.0))
            throw GeometryError("coherence geometry: coincident points");
        const auto [ct, cp] = incidence_cosines(L, R, U, N1, N2);
        if (!(ct > 0.0) || !(cp > 0.0))
            throw GeometryError("coherence geometry: element outside the LED or PD hemisphere");
        g.cos_theta = ct;
        g.cos_phi = cp;
        return g;
    }

    Vec3 l() const { return (R - L) / d1; }
    Vec3 u() const { return (R - U) / d2; }
};

/// Gain kernel cos^m(theta) cos(phi) / (d1 + d2)^2 without a field-of-view cut.
inline double lambertian_kernel(const Vec3& L, const Vec3& R, const Vec3& U, const UnitVec3& N1, const UnitVec3& N2,
                                double m)
{
    const Vec3 lr = R - L, ur = R - U;
    const double d1 = norm(lr), d2 = norm(ur);
    const double s = d1 + d2;
    return std::pow(dot(N1.vec(), lr) / d1, m) * (dot(N2.vec(), ur) / d2) / (s * s);
}

/// Exact relative change h(R + dR, U) / h(R, U) - 1.
inline double exact_spatial_change(const CoherenceGeometry& g, const Vec3& dR)
{
    return lambertian_kernel(g.L, g.R + dR, g.U, g.N1, g.N2, g.m) / lambertian_kernel(g.L, g.R, g.U, g.N1, g.N2, g.m) -
           1.0;
}

/// Exact relative change h(R, U + v dt) / h(R, U) - 1.
inline double exact_temporal_change(const CoherenceGeometry& g, const Vec3& v, double dt)
{
    return lambertian_kernel(g.L, g.R, g.U + v * dt, g.N1, g.N2, g.m) /
               lambertian_kernel(g.L, g.R, g.U, g.N1, g.N2, g.m) -
           1.0;
}

struct GrowthExpansion {
    Vec3 w;  ///< 1/m
    Mat3 W;  ///< 1/m^2, symmetric

    double operator()(const Vec3& dR) const { return dot(w, dR) + W.quad(dR); }
};

/**
 * @brief Second-order expansion of the relative gain change under an element shift dR.
 *
 * w is the gradient of log h. W = (Hess(log h) + w w^T) / 2, which is the
 * exact second-order coefficient of h(R + dR) / h(R) - 1.
 */
inline GrowthExpansion spatial_expansion(const CoherenceGeometry& g)
{
    const Vec3 l = g.l(), u = g.u();
    const Vec3& N1 = g.N1.vec();
    const Vec3& N2 = g.N2.vec();
    const double s = g.d1 + g.d2;
    const double m = g.m;
    const Vec3 lu = l + u;

    const Vec3 w = (N1 / g.cos_theta - l) * (m / g.d1) + (N2 / g.cos_phi - u) * (1.0 / g.d2) - lu * (2.0 / s);

    const Mat3 I = Mat3::identity();
    const Mat3 H = (Mat3::outer(N1, N1) * (-1.0 / (g.cos_theta * g.cos_theta)) - I + Mat3::outer(l, l) * 2.0) *
                       (m / (g.d1 * g.d1)) +
                   (Mat3::outer(N2, N2) * (-1.0 / (g.cos_phi * g.cos_phi)) - I + Mat3::outer(u, u) * 2.0) *
                       (1.0 / (g.d2 * g.d2)) -
                   (I - Mat3::outer(l, l)) * (2.0 / (g.d1 * s)) - (I - Mat3::outer(u, u)) * (2.0 / (g.d2 * s)) +
                   Mat3::outer(lu, lu) * (2.0 / (s * s));
    return {w, (H + Mat3::outer(w, w)) * 0.5};
}

/// xi_t(dt) = c1 dt + c2 dt^2 for a receiver moving with velocity v.
struct TemporalExpansion {
    double c1 = 0.0;  ///< 1/s
    double c2 = 0.0;  ///< 1/s^2

    double operator()(double dt) const { return c1 * dt + c2 * dt * dt; }
};

inline TemporalExpansion temporal_expansion(const CoherenceGeometry& g, const Vec3& v)
{
    const Vec3 u = g.u();
    const Vec3& N2 = g.N2.vec();
    const double s = g.d1 + g.d2;
    // gradient and Hessian of log h with respect to R - U
    const Vec3 gb = (N2 / g.cos_phi - u) * (1.0 / g.d2) - u * (2.0 / s);
    const Mat3 I = Mat3::identity();
    const Mat3 Hb = (Mat3::outer(N2, N2) * (-1.0 / (g.cos_phi * g.cos_phi)) - I + Mat3::outer(u, u) * 2.0) *
                        (1.0 / (g.d2 * g.d2)) -
                    (I - Mat3::outer(u, u)) * (2.0 / (g.d2 * s)) + Mat3::outer(u, u) * (2.0 / (s * s));
    return {-dot(gb, v), 0.5 * (Hb + Mat3::outer(gb, gb)).quad(v)};
}

enum class CoherenceBranch { quadratic, linear_bound, unbounded };

inline const char* to_string(CoherenceBranch b)
{
    switch (b) {
    case CoherenceBranch::quadratic: return "quadratic";
    case CoherenceBranch::linear_bound: return "linear_bound";
    case CoherenceBranch::unbounded: return "unbounded";
    }
    return "unknown";
}

/// Coherent interval of xi(x) = c1 x + c2 x^2 around x = 0.
struct CoherenceInterval {
    std::optional<double> width;  ///< nullopt when xi is identically zero
    double root = std::numeric_limits<double>::quiet_NaN();  ///< nonzero root -c1/c2 (Delta_2)
    CoherenceBranch branch = CoherenceBranch::unbounded;
    bool linear_term_vanishes = false;
    double c1 = 0.0;
    double c2 = 0.0;
};

/**
 * @brief Length of the interval around 0 on which |c1 x + c2 x^2| <= xi_c.
 *
 * Square-root branch when the vertex of the parabola stays inside the band,
 * otherwise the linear bound 2 xi_c / |c1|.
 */
inline CoherenceInterval coherence_interval(double c1, double c2, double xi_c)
{
    if (!(xi_c > 0.0 && xi_c < 1.0))
        throw DomainError("xi_c must lie in (0, 1)");
    CoherenceInterval r;
    r.c1 = c1;
    r.c2 = c2;
    const double scale = std::abs(c1) + std::abs(c2);
    r.linear_term_vanishes = std::abs(c1) <= 1e-14 * scale || c1 == 0.0;
    if (scale == 0.0)
        return r;
    if (c2 != 0.0)
        r.root = -c1 / c2;
    const double ac2 = std::abs(c2);
    if (ac2 > 0.0 && c1 * c1 / (4.0 * ac2) <= xi_c) {
        r.branch = CoherenceBranch::quadratic;
        r.width = std::sqrt(c1 * c1 + 4.0 * ac2 * xi_c) / ac2;
    } else {
        r.branch = CoherenceBranch::linear_bound;
        r.width = 2.0 * xi_c / std::abs(c1);
    }
    return r;
}

/// Coherence time for receiver velocity v; width is nullopt when v does not change the gain.
inline CoherenceInterval coherence_time(const CoherenceGeometry& g, const Vec3& v, double xi_c)
{
    const TemporalExpansion t = temporal_expansion(g, v);
    return coherence_interval(t.c1, t.c2, xi_c);
}

struct DirectionCoherence {
    Vec3 direction;
    CoherenceInterval interval;
};

struct CoherenceDistance {
    double d_c = 0.0;  ///< min over directions, m (infinity when every direction is unbounded)
    std::vector<DirectionCoherence> directions;
};

/// Default direction set: the horizontal and vertical axes of a wall-mounted surface.
inline std::vector<Vec3> wall_axes() { return {{1.0, 0.0, 0.0}, {0.0, 0.0, 1.0}}; }

/// `count` unit directions spanning half a turn in the plane of `a` and `b`.
inline std::vector<Vec3> in_plane_directions(const Vec3& a, const Vec3& b, std::size_t count)
{
    std::vector<Vec3> dirs;
    for (std::size_t k = 0; k < count; ++k) {
        const double t = std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
        dirs.push_back(a * std::cos(t) + b * std::sin(t));
    }
    return dirs;
}

/// Coherence distance as the minimum coherent length over `directions` (unit vectors).
inline CoherenceDistance coherence_distance(const CoherenceGeometry& g, double xi_c,
                                            const std::vector<Vec3>& directions = wall_axes())
{
    const GrowthExpansion e = spatial_expansion(g);
    CoherenceDistance out;
    out.d_c = std::numeric_limits<double>::infinity();
    for (const Vec3& d : directions) {
        const Vec3 dh = normalize(d).vec();
        const CoherenceInterval iv = coherence_interval(dot(e.w, dh), e.W.quad(dh), xi_c);
        if (iv.width)
            out.d_c = std::min(out.d_c, *iv.width);
        out.directions.push_back({dh, iv});
    }
    return out;
}

/**
 * @brief Length of the connected set around 0 where |f(x)| <= xi_c, by grid search.
 *
 * Walks outwards from 0 in steps of `step` on each side and stops at the
 * first violation or at `limit`.
 */
inline double grid_search_width(const std::function<double(double)>& f, double xi_c, double step, double limit)
{
    auto walk = [&](double sign) {
        double x = 0.0;
        while (x + step <= limit && std::abs(f(sign * (x + step))) <= xi_c)
            x += step;
        return x;
    };
    return walk(1.0) + walk(-1.0);
}

} // namespace oirs
