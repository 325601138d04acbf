#pragma once
/**
 * @file geometry.hpp
 * @brief 3-D Cartesian primitives for the OIRS channel model.
 *
 * Positions are in meters, directions are dimensionless. The room frame is
 * right-handed with Z pointing up (floor at z = 0, ceiling at z = height) and
 * the reflecting surface mounted on the XoZ wall, facing +Y.
 */

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace oirs {

/// Thrown when an argument lies outside the domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Thrown when a configuration of points and normals is degenerate for an operation.
class GeometryError : public DomainError {
public:
    using DomainError::DomainError;
};

struct Vec3 {
    double x{0.0};
    double y{0.0};
    double z{0.0};

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr Vec3 operator+(const Vec3& r) const { return {x + r.x, y + r.y, z + r.z}; }
    constexpr Vec3 operator-(const Vec3& r) const { return {x - r.x, y - r.y, z - r.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3& operator+=(const Vec3& r) { x += r.x; y += r.y; z += r.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& r) { x -= r.x; y -= r.y; z -= r.z; return *this; }

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

/**
 * @brief A direction with unit Euclidean norm.
 *
 * Construction normalizes its input; a zero vector cannot be a direction and
 * raises DomainError. The stored components are immutable.
 */
class UnitVec3 {
public:
    /// Normalizes `v`. Throws DomainError when ||v|| is zero or not finite.
    static UnitVec3 from(const Vec3& v)
    {
        const double n = norm(v);
        if (!(n > 0.0) || !std::isfinite(n))
            throw DomainError("cannot normalize a zero or non-finite vector");
        return UnitVec3(v / n);
    }

    /// Wraps a vector the caller knows to be unit length (no renormalization).
    static constexpr UnitVec3 unchecked(const Vec3& v) { return UnitVec3(v); }

    constexpr const Vec3& vec() const { return v_; }
    constexpr operator const Vec3&() const { return v_; }
    constexpr double x() const { return v_.x; }
    constexpr double y() const { return v_.y; }
    constexpr double z() const { return v_.z; }
    constexpr UnitVec3 operator-() const { return UnitVec3(-v_); }

    constexpr bool operator==(const UnitVec3&) const = default;

private:
    constexpr explicit UnitVec3(const Vec3& v) : v_(v) {}
    Vec3 v_;
};

inline UnitVec3 normalize(const Vec3& v) { return UnitVec3::from(v); }

struct Plane {
    Vec3 point;
    UnitVec3 normal;
};

/// Right-handed orthonormal frame; the room frame is the default.
struct Basis {
    UnitVec3 e1 = UnitVec3::unchecked({1.0, 0.0, 0.0});
    UnitVec3 e2 = UnitVec3::unchecked({0.0, 1.0, 0.0});
    UnitVec3 e3 = UnitVec3::unchecked({0.0, 0.0, 1.0});

    static constexpr Basis world() { return {}; }
};

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// True when `angle` lies in the rotation domain [-pi/2, pi/2).
inline constexpr bool in_angle_domain(double angle) { return angle >= -kHalfPi && angle < kHalfPi; }

/// Clamps a cosine into [-1, 1] before arccos.
inline double safe_acos(double c) { return std::acos(std::clamp(c, -1.0, 1.0)); }

/**
 * @brief Mirror normal for roll `roll` and yaw `yaw`.
 *
 * Returns (cos w sin g, cos w cos g, -sin w). At (0, 0) the normal is +Y,
 * i.e. perpendicular to the wall the surface is mounted on.
 */
inline UnitVec3 normal_from_angles(double roll, double yaw)
{
    if (!in_angle_domain(roll) || !in_angle_domain(yaw))
        throw DomainError("rotation angles must lie in [-pi/2, pi/2)");
    const double cw = std::cos(roll);
    return UnitVec3::unchecked({cw * std::sin(yaw), cw * std::cos(yaw), -std::sin(roll)});
}

/// Roll and yaw of a mirror normal; inverse of normal_from_angles. Requires n.y > 0 or a vertical normal.
inline std::pair<double, double> angles_from_normal(const UnitVec3& n)
{
    const double roll = -std::asin(std::clamp(n.z(), -1.0, 1.0));
    const double horiz = std::hypot(n.x(), n.y());
    const double yaw = horiz < 1e-15 ? 0.0 : std::atan2(n.x(), n.y());
    if (!in_angle_domain(roll) || !in_angle_domain(yaw))
        throw DomainError("normal is not reachable by roll/yaw in [-pi/2, pi/2)");
    return {roll, yaw};
}

/// Specular reflection of direction `d` about a mirror with unit normal `n`.
inline UnitVec3 reflect(const UnitVec3& d, const UnitVec3& n)
{
    const Vec3& dv = d.vec();
    const Vec3& nv = n.vec();
    return UnitVec3::unchecked(dv - nv * (2.0 * dot(nv, dv)));
}

/**
 * @brief Point on `plane` from which light reaches `P` via a specular bounce at `R`.
 *
 * Traces the ray P -> R backwards through the reflection at R. Returns nullopt
 * when the back-traced ray is parallel to the plane or leaves it behind R.
 */
inline std::optional<Vec3> source_image_point(const Vec3& R, const UnitVec3& mirror_normal, const Vec3& P,
                                              const Plane& transmission_plane)
{
    const Vec3 out = R - P;
    const double len = norm(out);
    if (len == 0.0)
        return std::nullopt;
    // incident direction d_in satisfies reflect(d_in) = normalize(P - R)
    const UnitVec3 towards_p = UnitVec3::unchecked((P - R) / len);
    const Vec3 d_in = reflect(towards_p, mirror_normal).vec();
    const Vec3& np = transmission_plane.normal.vec();
    const double denom = dot(d_in, np);
    if (std::abs(denom) < 1e-12)
        return std::nullopt;
    // I = R - t d_in with (I - p0) . np = 0
    const double t = dot(R - transmission_plane.point, np) / denom;
    if (!(t > 0.0))
        return std::nullopt;
    return R - d_in * t;
}

struct IncidenceCosines {
    double cos_irradiance;  ///< N1 . normalize(R - L)
    double cos_incidence;   ///< N2 . normalize(R - U)
};

/// Irradiance cosine at the LED and incidence cosine at the PD for the path L - R - U.
inline IncidenceCosines incidence_cosines(const Vec3& L, const Vec3& R, const Vec3& U, const UnitVec3& N1,
                                          const UnitVec3& N2)
{
    if (L == R || U == R)
        throw DomainError("incidence_cosines: coincident points");
    const double ct = std::clamp(dot(N1.vec(), normalize(R - L).vec()), -1.0, 1.0);
    const double cp = std::clamp(dot(N2.vec(), normalize(R - U).vec()), -1.0, 1.0);
    return {ct, cp};
}

/// Two unit tangents spanning the plane orthogonal to `n` (right-handed with n).
inline std::pair<UnitVec3, UnitVec3> tangent_frame(const UnitVec3& n)
{
    const Vec3& nv = n.vec();
    const Vec3 helper = std::abs(nv.z) < 0.9 ? Vec3{0.0, 0.0, 1.0} : Vec3{1.0, 0.0, 0.0};
    const UnitVec3 t1 = normalize(cross(helper, nv));
    const UnitVec3 t2 = UnitVec3::unchecked(cross(nv, t1.vec()));
    return {t1, t2};
}

} // namespace oirs
