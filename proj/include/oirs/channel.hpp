#pragma once
/**
 * @file channel.hpp
 * @brief Physical-optics and Lambertian gains of the LED -> mirror -> PD path,
 *        alignment matrices and the multi-patch channel / received-signal model.
 */

#include "oirs/geometry.hpp"
#include "oirs/linalg.hpp"
#include "oirs/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace oirs {

/// Thrown when a configuration or matrix violates a documented invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr UnitVec3 kDown = UnitVec3::unchecked({0.0, 0.0, -1.0});
inline constexpr UnitVec3 kUp = UnitVec3::unchecked({0.0, 0.0, 1.0});

struct Led {
    Vec3 center;
    UnitVec3 normal = kDown;
    double radius = 0.1;            ///< circular aperture radius, m
    double lambertian_index = 1.0;  ///< m
    double power = 1.0;             ///< E0, W

    double area() const { return std::numbers::pi * radius * radius; }

    void validate() const
    {
        if (!(radius > 0.0))
            throw ValidationError("led.radius must be positive");
        if (!(lambertian_index >= 1.0))
            throw ValidationError("led.lambertian_index must be >= 1");
        if (!(power >= 0.0))
            throw ValidationError("led.power must be nonnegative");
    }
};

struct Pd {
    Vec3 center;
    UnitVec3 normal = kUp;
    double side = 0.1;                  ///< square aperture side, m
    double fov = deg2rad(70.0);         ///< semi-angle of the field of view, rad
    double filter_gain = 1.0;

    void validate() const
    {
        if (!(side > 0.0))
            throw ValidationError("pd.side must be positive");
        if (!(fov > 0.0 && fov < kHalfPi))
            throw ValidationError("pd.fov must lie in (0, pi/2)");
        if (!(filter_gain >= 0.0))
            throw ValidationError("pd.filter_gain must be nonnegative");
    }
};

struct OirsElement {
    Vec3 center;
    double roll = 0.0;
    double yaw = 0.0;
    double side = 0.05;
    double reflectivity = 0.9;

    UnitVec3 normal() const { return normal_from_angles(roll, yaw); }

    /// In-plane unit axes (u, v) of the mirror; (0, 0) gives world X and Z.
    std::pair<UnitVec3, UnitVec3> axes() const
    {
        const double sw = std::sin(roll), cw = std::cos(roll);
        const double sg = std::sin(yaw), cg = std::cos(yaw);
        return {UnitVec3::unchecked({cg, -sg, 0.0}), UnitVec3::unchecked({sw * sg, sw * cg, cw})};
    }

    void validate() const
    {
        if (!(side > 0.0))
            throw ValidationError("element.side must be positive");
        if (!(reflectivity > 0.0 && reflectivity <= 1.0))
            throw ValidationError("element.reflectivity must lie in (0, 1]");
        if (!in_angle_domain(roll) || !in_angle_domain(yaw))
            throw ValidationError("element angles must lie in [-pi/2, pi/2)");
    }
};

/// Element whose normal bisects the directions towards `L` and `U`, i.e. the specular path L-R-U closes.
inline OirsElement aligned_element(const Vec3& R, const Vec3& L, const Vec3& U, double side = 0.05,
                                   double reflectivity = 0.9)
{
    const UnitVec3 n = normalize(normalize(L - R).vec() + normalize(U - R).vec());
    const auto [roll, yaw] = angles_from_normal(n);
    return {R, roll, yaw, side, reflectivity};
}

/**
 * @brief N_v x N_h mirror grid on a wall plane.
 *
 * Element (i, j) has linear index n = i * N_h + j; row i runs along the
 * vertical in-plane axis, column j along the horizontal one (both ascending).
 */
struct OirsArray {
    std::size_t rows = 1;         ///< N_v
    std::size_t cols = 1;         ///< N_h
    double spacing = 0.1;         ///< b, m
    double side = 0.05;           ///< a, m
    double reflectivity = 0.9;
    Vec3 center{2.0, 0.0, 1.5};
    UnitVec3 normal = UnitVec3::unchecked({0.0, 1.0, 0.0});

    std::size_t size() const { return rows * cols; }
    Plane plane() const { return {center, normal}; }

    UnitVec3 horizontal_axis() const { return normalize(cross(normal.vec(), {0.0, 0.0, 1.0})); }
    UnitVec3 vertical_axis() const { return UnitVec3::unchecked(cross(horizontal_axis().vec(), normal.vec())); }

    Vec3 element_center(std::size_t i, std::size_t j) const
    {
        const double di = (static_cast<double>(i) - (static_cast<double>(rows) - 1.0) / 2.0) * spacing;
        const double dj = (static_cast<double>(j) - (static_cast<double>(cols) - 1.0) / 2.0) * spacing;
        return center + horizontal_axis().vec() * dj + vertical_axis().vec() * di;
    }

    Vec3 element_center(std::size_t n) const { return element_center(n / cols, n % cols); }

    void validate() const
    {
        if (rows == 0 || cols == 0)
            throw ValidationError("oirs array must have at least one element");
        if (!(side > 0.0) || !(spacing >= side))
            throw ValidationError("oirs spacing must be at least the element side");
        if (!(reflectivity > 0.0 && reflectivity <= 1.0))
            throw ValidationError("oirs reflectivity must lie in (0, 1]");
    }
};

namespace detail {

struct MirrorFrame {
    Vec3 center;
    UnitVec3 n;
    UnitVec3 u;
    UnitVec3 v;
    double half;
};

struct DensityContext {
    Vec3 P;
    UnitVec3 detector_normal;
    const Led* led;
    Plane source_plane;
    double prefactor;  ///< E0 delta (m+1) / (2 pi |L|)
};

inline double density_integrand(const DensityContext& c, const MirrorFrame& f, const Vec3& R)
{
    const Vec3 d = R - c.P;
    const double d2 = dot(d, d);
    if (d2 == 0.0)
        throw DomainError("power_density: detection point coincides with a mirror node");
    const Vec3 pr = d / std::sqrt(d2);
    const double c_det = dot(c.detector_normal.vec(), pr);
    const double c_mirror = -dot(f.n.vec(), pr);
    if (c_det <= 0.0 || c_mirror <= 0.0)
        return 0.0;
    double emit = 1.0;
    const double m = c.led->lambertian_index;
    if (m != 1.0) {
        const double ct = dot(c.led->normal.vec(), (R - c.led->center) / norm(R - c.led->center));
        if (ct <= 0.0)
            return 0.0;
        emit = std::pow(ct, m - 1.0);
    }
    return c.prefactor * emit * c_det * c_mirror / d2;
}

inline bool lit(const DensityContext& c, const MirrorFrame& f, const Vec3& R)
{
    const auto I = source_image_point(R, f.n, c.P, c.source_plane);
    if (!I)
        return false;
    const Vec3 off = *I - c.led->center;
    return dot(off, off) <= c.led->radius * c.led->radius;
}

/// Up to two real roots, stored inline.
struct Roots {
    std::array<double, 2> r{};
    std::size_t n = 0;
    const double* begin() const { return r.data(); }
    const double* end() const { return r.data() + n; }
};

/// Real roots of a v^2 + b v + c = 0 (degree drops when leading terms vanish).
inline Roots real_roots(double a, double b, double c)
{
    Roots out;
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    if (scale == 0.0)
        return out;
    if (std::abs(a) <= 1e-14 * scale) {
        if (std::abs(b) <= 1e-14 * scale)
            return out;
        out.r[out.n++] = -c / b;
        return out;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0)
        return out;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(sq, b));
    out.r[out.n++] = q / a;
    if (q != 0.0)
        out.r[out.n++] = c / q;
    return out;
}

/// Integral over the mirror row R(v) = origin + v * f.v, v in [-half, half], restricted to the lit set.
inline double clipped_row(const DensityContext& c, const MirrorFrame& f, const Vec3& origin, const GaussLegendre& rule)
{
    // Image of P behind the mirror; the source point lies on the line P' -> R.
    const Vec3 Pi = c.P - f.n.vec() * (2.0 * dot(c.P - f.center, f.n.vec()));
    const Vec3& N1 = c.led->normal.vec();
    const Vec3 D0 = origin - Pi;
    const double cc = dot(c.led->center - Pi, N1);
    const double den0 = dot(D0, N1);
    const double k = dot(f.v.vec(), N1);
    const Vec3 PL = Pi - c.led->center;
    const Vec3 A = PL * den0 + D0 * cc;
    const Vec3 B = PL * k + f.v.vec() * cc;
    const double rho2 = c.led->radius * c.led->radius;

    std::array<double, 5> cuts{-f.half, f.half};
    std::size_t n_cuts = 2;
    for (double r : real_roots(dot(B, B) - rho2 * k * k, 2.0 * (dot(A, B) - rho2 * den0 * k), dot(A, A) - rho2 * den0 * den0))
        if (r > -f.half && r < f.half)
            cuts[n_cuts++] = r;
    if (k != 0.0) {
        const double r = -den0 / k;
        if (r > -f.half && r < f.half)
            cuts[n_cuts++] = r;
    }
    std::sort(cuts.begin(), cuts.begin() + n_cuts);

    double total = 0.0;
    for (std::size_t s = 0; s + 1 < n_cuts; ++s) {
        const double lo = cuts[s], hi = cuts[s + 1];
        if (hi - lo <= 0.0)
            continue;
        const double mid = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
        if (!lit(c, f, origin + f.v.vec() * mid))
            continue;
        double seg = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q)
            seg += rule.weights[q] * density_integrand(c, f, origin + f.v.vec() * (mid + hw * rule.nodes[q]));
        total += seg * hw;
    }
    return total;
}

} // namespace detail

/**
 * @brief Power density (W/m^2) at detection point `P` reflected by one mirror element.
 *
 * Integrates the image-source physical-optics integrand over the element
 * aperture. `detector_normal` is the receiving surface normal at P.
 */
inline double power_density(const Vec3& P, const UnitVec3& detector_normal, const detail::MirrorFrame& f,
                            const Led& led, double reflectivity, const QuadratureSpec& quad)
{
    const detail::DensityContext c{P, detector_normal, &led, Plane{led.center, led.normal},
                                   led.power * reflectivity * (led.lambertian_index + 1.0) /
                                       (2.0 * std::numbers::pi * led.area())};
    const GaussLegendre& rule = quad.mirror();
    double total = 0.0;
    for (std::size_t a = 0; a < rule.size(); ++a) {
        const Vec3 row = f.center + f.u.vec() * (f.half * rule.nodes[a]);
        double acc = 0.0;
        if (quad.rule() == IndicatorRule::clipped) {
            acc = detail::clipped_row(c, f, row, rule) / f.half;
        } else {
            for (std::size_t b = 0; b < rule.size(); ++b) {
                const Vec3 R = row + f.v.vec() * (f.half * rule.nodes[b]);
                if (detail::lit(c, f, R))
                    acc += rule.weights[b] * detail::density_integrand(c, f, R);
            }
        }
        total += rule.weights[a] * acc;
    }
    return total * f.half * f.half;
}

inline detail::MirrorFrame mirror_frame(const OirsElement& elem)
{
    const auto [u, v] = elem.axes();
    return {elem.center, elem.normal(), u, v, elem.side / 2.0};
}

inline double power_density(const Vec3& P, const UnitVec3& detector_normal, const OirsElement& elem, const Led& led,
                            const QuadratureSpec& quad = {})
{
    return power_density(P, detector_normal, mirror_frame(elem), led, elem.reflectivity, quad);
}

/// Received gain of one element: power density integrated over the PD aperture, times the filter gain.
inline double patch_gain(const OirsElement& elem, const Led& led, const Pd& pd, const QuadratureSpec& quad = {})
{
    const auto [t1, t2] = tangent_frame(pd.normal);
    const double half = pd.side / 2.0;
    const GaussLegendre& rule = quad.pd();
    const detail::MirrorFrame f = mirror_frame(elem);
    double total = 0.0;
    for (std::size_t a = 0; a < rule.size(); ++a)
        for (std::size_t b = 0; b < rule.size(); ++b) {
            const Vec3 P = pd.center + t1.vec() * (half * rule.nodes[a]) + t2.vec() * (half * rule.nodes[b]);
            total += rule.weights[a] * rule.weights[b] * power_density(P, pd.normal, f, led, elem.reflectivity, quad);
        }
    return total * half * half * pd.filter_gain;
}

/// Point-source gain k cos^m(theta) cos(phi) / (d1 + d2)^2; zero outside the FOV.
inline double lambertian_gain(const Vec3& R, const Vec3& U, const Led& led, const Pd& pd, double k = 1.0)
{
    const auto [ct, cp] = incidence_cosines(led.center, R, U, led.normal, pd.normal);
    if (ct <= 0.0 || cp < std::cos(pd.fov))
        return 0.0;
    const double s = distance(led.center, R) + distance(U, R);
    return k * std::pow(ct, led.lambertian_index) * cp / (s * s);
}

/**
 * @brief Least-squares scale k such that lambertian_gain * k matches patch_gain.
 *
 * Each sample moves the PD by one of `offsets` and re-aligns the element at R
 * to the displaced PD before evaluating the physical-optics gain.
 */
inline double calibrate_lambertian_scale(const Vec3& R, const Led& led, const Pd& pd, double element_side,
                                         double reflectivity, const QuadratureSpec& quad = {},
                                         const std::vector<Vec3>& offsets = {{0, 0, 0},
                                                                             {0.1, 0, 0},
                                                                             {-0.1, 0, 0},
                                                                             {0, 0.1, 0},
                                                                             {0, -0.1, 0}})
{
    double num = 0.0, den = 0.0;
    for (const Vec3& off : offsets) {
        Pd p = pd;
        p.center = pd.center + off;
        const OirsElement e = aligned_element(R, led.center, p.center, element_side, reflectivity);
        const double g = patch_gain(e, led, p, quad);
        const double l = lambertian_gain(R, p.center, led, p, 1.0);
        num += g * l;
        den += l * l;
    }
    if (!(den > 0.0))
        throw DomainError("calibrate_lambertian_scale: all samples outside the field of view");
    return num / den;
}

/**
 * @brief Binary alignment of N elements to N_t LEDs (G) and N_r PDs (F).
 *
 * V has column n_r + n_t * N_r (0-based) equal to F[:, n_r] .* G[:, n_t].
 */
struct AlignmentConfig {
    Matrix G;  ///< N x N_t
    Matrix F;  ///< N x N_r
    Matrix V;  ///< N x (N_t N_r)

    std::size_t elements() const { return G.rows(); }
    std::size_t leds() const { return G.cols(); }
    std::size_t pds() const { return F.cols(); }

    static AlignmentConfig from(const Matrix& F, const Matrix& G)
    {
        if (F.rows() != G.rows())
            throw DimensionError("alignment: F and G must have one row per element");
        AlignmentConfig a{G, F, Matrix(G.rows(), G.cols() * F.cols())};
        for (std::size_t t = 0; t < G.cols(); ++t)
            for (std::size_t r = 0; r < F.cols(); ++r)
                for (std::size_t n = 0; n < G.rows(); ++n)
                    a.V(n, r + t * F.cols()) = F(n, r) * G(n, t);
        a.validate();
        return a;
    }

    /// Element n aligned to (n_r, n_t), or no alignment.
    static AlignmentConfig single_pairs(std::size_t n_elements, std::size_t nt, std::size_t nr,
                                        const std::vector<std::array<std::size_t, 2>>& pair_of_element)
    {
        Matrix F(n_elements, nr), G(n_elements, nt);
        for (std::size_t n = 0; n < pair_of_element.size() && n < n_elements; ++n) {
            const auto [r, t] = pair_of_element[n];
            if (r >= nr || t >= nt)
                continue;
            F(n, r) = 1.0;
            G(n, t) = 1.0;
        }
        return from(F, G);
    }

    void validate() const
    {
        auto check = [](const Matrix& M, const char* name) {
            for (std::size_t n = 0; n < M.rows(); ++n) {
                double s = 0.0;
                for (std::size_t c = 0; c < M.cols(); ++c) {
                    const double x = M(n, c);
                    if (x != 0.0 && x != 1.0)
                        throw ValidationError(std::string("alignment ") + name + " must be binary");
                    s += x;
                }
                if (s > 1.0)
                    throw ValidationError(std::string("alignment ") + name + " row " + std::to_string(n) +
                                          " aligns an element to more than one target");
            }
        };
        check(G, "G");
        check(F, "F");
        check(V, "V");
        if (F.rows() != G.rows() || V.rows() != G.rows() || V.cols() != G.cols() * F.cols())
            throw ValidationError("alignment: inconsistent matrix shapes");
        for (std::size_t t = 0; t < G.cols(); ++t)
            for (std::size_t r = 0; r < F.cols(); ++r)
                for (std::size_t n = 0; n < G.rows(); ++n)
                    if (V(n, r + t * F.cols()) != F(n, r) * G(n, t))
                        throw ValidationError("alignment: V is not the per-pair product of F and G");
    }
};

/// Per-element, per-pair cascaded gains; column n_r + n_t * N_r holds h_{n_r, n_t}.
struct CascadedChannel {
    Matrix H;
    std::size_t nt = 1;
    std::size_t nr = 1;

    static std::size_t column(std::size_t n_r, std::size_t n_t, std::size_t nr) { return n_r + n_t * nr; }
    std::size_t elements() const { return H.rows(); }

    void validate() const
    {
        if (H.cols() != nt * nr)
            throw DimensionError("cascaded channel must have N_t * N_r columns");
        for (double x : H.data())
            if (!(x >= 0.0) || !std::isfinite(x))
                throw ValidationError("cascaded channel entries must be finite and nonnegative");
    }
};

/// N_r x N_t channel H[n_r, n_t] = sum_n f[n, n_r] g[n, n_t] h_{n_r, n_t}[n].
inline Matrix assemble_channel(const CascadedChannel& hc, const AlignmentConfig& align)
{
    align.validate();
    if (align.elements() != hc.elements() || align.leds() != hc.nt || align.pds() != hc.nr)
        throw DimensionError("assemble_channel: alignment and channel dimensions differ");
    Matrix H(hc.nr, hc.nt);
    for (std::size_t t = 0; t < hc.nt; ++t)
        for (std::size_t r = 0; r < hc.nr; ++r) {
            double s = 0.0;
            const std::size_t col = CascadedChannel::column(r, t, hc.nr);
            for (std::size_t n = 0; n < hc.elements(); ++n)
                if (align.F(n, r) * align.G(n, t) != 0.0)
                    s += align.F(n, r) * align.G(n, t) * hc.H(n, col);
            H(r, t) = s;
        }
    return H;
}

/// Same channel through vec(H) = blkdiag(V)^T vec(H_c).
inline Matrix assemble_channel_vectorized(const CascadedChannel& hc, const AlignmentConfig& align)
{
    align.validate();
    if (align.V.rows() != hc.H.rows() || align.V.cols() != hc.H.cols())
        throw DimensionError("assemble_channel_vectorized: V and H_c shapes differ");
    return unvec(matmul(transpose(blkdiag_columns(align.V)), vec(hc.H)), hc.nr, hc.nt);
}

/// Y = H X + Z, Z i.i.d. N(0, sigma^2), drawn from `rng`.
template <class Engine>
Matrix simulate_received(const Matrix& H, const Matrix& X, double sigma, Engine& rng)
{
    for (double x : X.data())
        if (x < 0.0)
            throw ValidationError("pilot entries must be nonnegative (intensity modulation)");
    if (!(sigma >= 0.0))
        throw ValidationError("noise standard deviation must be nonnegative");
    Matrix Y = matmul(H, X);
    if (sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, sigma);
        for (std::size_t i = 0; i < Y.rows(); ++i)
            for (std::size_t j = 0; j < Y.cols(); ++j)
                Y(i, j) += noise(rng);
    }
    return Y;
}

inline Matrix simulate_received(const Matrix& H, const Matrix& X, double sigma, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    return simulate_received(H, X, sigma, rng);
}

} // namespace oirs
