#pragma once
/**
 * @file codebook.hpp
 * @brief Rotation-angle codebooks (uniform grid and geometric-optics
 *        non-uniform rings) and beam sweeping under positioning uncertainty.
 *
 * Conventions: the incident direction is l = normalize(R - L). The yaw centre
 * gamma_c puts N(omega, gamma_c) in the vertical plane through L and R, the
 * elevation alpha = arccos(e3 . normalize(L - R)) is the angle of the LED seen
 * from the element, measured from the zenith. A codeword's reflected central
 * ray then leaves at beta = sigma alpha - 2 omega from the nadir, where sigma
 * is +1 when the LED sits in front of the element.
 */

#include "oirs/channel.hpp"
#include "oirs/format.hpp"
#include "oirs/geometry.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace oirs {

/// Axis-aligned room [0, x] x [0, y] x [0, z]; the floor is the detection plane.
struct Room {
    double x = 4.0;
    double y = 4.0;
    double z = 3.0;

    bool floor_contains(const Vec3& p, double tol = 1e-9) const
    {
        return p.x >= -tol && p.x <= x + tol && p.y >= -tol && p.y <= y + tol;
    }
    bool contains(const Vec3& p, double tol = 1e-9) const
    {
        return floor_contains(p, tol) && p.z >= -tol && p.z <= z + tol;
    }
};

enum class CodebookKind { uniform, go_nonuniform };

inline const char* to_string(CodebookKind k) { return k == CodebookKind::uniform ? "uniform" : "go_nonuniform"; }

struct Codeword {
    double roll = 0.0;
    double yaw = 0.0;
};

/**
 * @brief Roll set and per-roll yaw sets.
 *
 * yaw_rings[i] holds the yaws combined with rolls[i]; for the uniform kind
 * every ring is the same set.
 */
struct Codebook {
    CodebookKind kind = CodebookKind::uniform;
    double d_roll = 0.0;
    double d_yaw = 0.0;
    std::vector<double> rolls;
    std::vector<std::vector<double>> yaw_rings;

    std::size_t size() const
    {
        std::size_t n = 0;
        for (const auto& r : yaw_rings)
            n += r.size();
        return n;
    }

    std::vector<Codeword> codewords() const
    {
        std::vector<Codeword> out;
        out.reserve(size());
        for (std::size_t i = 0; i < rolls.size() && i < yaw_rings.size(); ++i)
            for (double g : yaw_rings[i])
                out.push_back({rolls[i], g});
        return out;
    }
};

namespace detail {
inline constexpr double kAngleTol = 1e-12;
inline bool strictly_inside_half_pi(double a) { return std::abs(a) < kHalfPi - kAngleTol; }
} // namespace detail

/// Symmetric grid k * step with |k * step| < pi/2, including 0.
inline std::vector<double> uniform_angles(double step)
{
    if (!(step > 0.0 && step < kHalfPi))
        throw DomainError("uniform codebook spacing must lie in (0, pi/2)");
    const auto n = static_cast<long>(std::floor(kHalfPi / step + 1e-9));
    std::vector<double> out;
    for (long k = -n; k <= n; ++k) {
        const double a = static_cast<double>(k) * step;
        if (detail::strictly_inside_half_pi(a))
            out.push_back(a);
    }
    return out;
}

inline Codebook uniform_codebook(double d_roll, double d_yaw)
{
    Codebook cb;
    cb.kind = CodebookKind::uniform;
    cb.d_roll = d_roll;
    cb.d_yaw = d_yaw;
    cb.rolls = uniform_angles(d_roll);
    cb.yaw_rings.assign(cb.rolls.size(), uniform_angles(d_yaw));
    return cb;
}

/// Yaw that makes the element normal coplanar with the vertical plane through L and R.
inline double gamma_center(const Vec3& L, const Vec3& R, const Basis& basis = Basis::world())
{
    const Vec3 to_led = normalize(L - R).vec();
    const double a = dot(basis.e1.vec(), to_led);
    const double b = dot(basis.e2.vec(), to_led);
    if (std::abs(a) < 1e-15 && std::abs(b) < 1e-15)
        throw GeometryError("gamma_center: LED lies on the vertical through the element");
    double g = std::atan2(a, b);
    if (g >= kHalfPi)
        g -= std::numbers::pi;
    else if (g < -kHalfPi)
        g += std::numbers::pi;
    return g;
}

/// Zenith angle of the LED seen from the element.
inline double incidence_elevation(const Vec3& L, const Vec3& R, const Basis& basis = Basis::world())
{
    return safe_acos(dot(basis.e3.vec(), normalize(L - R).vec()));
}

/// +1 when the LED is in front of N(0, gamma_c), -1 otherwise.
inline double roll_sign(const Vec3& L, const Vec3& R, double gamma_c, const Basis& basis = Basis::world())
{
    const Vec3 h = basis.e1.vec() * std::sin(gamma_c) + basis.e2.vec() * std::cos(gamma_c);
    return dot(h, L - R) >= 0.0 ? 1.0 : -1.0;
}

/// Roll that sends the central ray from L via R straight down.
inline double first_roll(const Vec3& L, const Vec3& R, double gamma_c, const Basis& basis = Basis::world())
{
    const Vec3 to_led = normalize(L - R).vec();
    if (dot(to_led, basis.e3.vec()) <= -1.0 + 1e-15)
        throw GeometryError("first_roll: LED directly below the element");
    return roll_sign(L, R, gamma_c, basis) * incidence_elevation(L, R, basis) / 2.0;
}

/**
 * @brief Next roll so that footprint radii keep a constant increment.
 *
 * With beta(omega) = alpha + 2 kappa omega the result solves
 * tan(beta_{i+1}) - tan(beta_i) = tan(beta_i) - tan(beta_{i-1}). Returns
 * nullopt when an argument or the result leaves (-pi/2, pi/2).
 */
inline std::optional<double> next_roll(double roll_i, double roll_prev, double alpha, double kappa = 1.0)
{
    const double bi = alpha + 2.0 * kappa * roll_i;
    const double bp = alpha + 2.0 * kappa * roll_prev;
    if (!detail::strictly_inside_half_pi(bi) || !detail::strictly_inside_half_pi(bp))
        return std::nullopt;
    const double t = 2.0 * std::tan(bi) - std::tan(bp);
    const double next = (std::atan(t) - alpha) / (2.0 * kappa);
    if (!in_angle_domain(next))
        return std::nullopt;
    return next;
}

/// Yaw set of ring i: gamma_c and gamma_c +- j d_yaw / i inside (-pi/2, pi/2); ring 1 is {gamma_c} unless `full_first_ring`.
inline std::vector<double> yaw_ring(std::size_t i, double gamma_c, double d_yaw, bool full_first_ring = false)
{
    if (i == 0)
        throw DomainError("yaw_ring: ring index starts at 1");
    std::vector<double> out{gamma_c};
    if (i == 1 && !full_first_ring)
        return out;
    const double step = d_yaw / static_cast<double>(i);
    for (std::size_t j = 1;; ++j) {
        const double a = gamma_c + static_cast<double>(j) * step;
        const double b = gamma_c - static_cast<double>(j) * step;
        const bool ina = detail::strictly_inside_half_pi(a);
        const bool inb = detail::strictly_inside_half_pi(b);
        if (!ina && !inb)
            break;
        if (ina)
            out.push_back(a);
        if (inb)
            out.push_back(b);
    }
    return out;
}

/// Floor hit of the central ray L -> R reflected by N(roll, yaw); nullopt when it misses the floor or hits the back face.
inline std::optional<Vec3> footprint(const Vec3& L, const Vec3& R, double roll, double yaw, double floor_z = 0.0)
{
    if (!in_angle_domain(roll) || !in_angle_domain(yaw))
        return std::nullopt;
    const UnitVec3 n = normal_from_angles(roll, yaw);
    const UnitVec3 in = normalize(R - L);
    if (dot(n.vec(), in.vec()) >= 0.0)
        return std::nullopt;
    const UnitVec3 d = reflect(in, n);
    if (d.z() >= -1e-12)
        return std::nullopt;
    return R + d.vec() * ((R.z - floor_z) / -d.z());
}

struct NonuniformOptions {
    bool full_first_ring = false;
    std::size_t max_rings = 100000;
    double min_step = 0.01;  ///< stop once a roll step is below min_step * d_roll
};

/**
 * @brief Geometric-optics non-uniform codebook.
 *
 * Roll 1 sends the beam straight down, roll 2 steps the beam outwards by
 * d_roll, later rolls keep a constant footprint-radius increment. Ring i
 * samples yaw at d_yaw / i. Ring yaws whose footprint leaves the floor are
 * dropped; construction stops at the first ring with no yaw left, when the
 * beam reaches the horizon, or when the roll step shrinks below
 * opt.min_step * d_roll (low elements on a wall, where the footprints pile
 * up at a limit point on the floor).
 */
inline Codebook build_nonuniform(const Vec3& L, const Vec3& R, double d_roll, double d_yaw, const Room& room,
                                 const NonuniformOptions& opt = {}, const Basis& basis = Basis::world())
{
    if (!(d_roll > 0.0) || !(d_yaw > 0.0))
        throw DomainError("non-uniform codebook spacings must be positive");
    const double gc = gamma_center(L, R, basis);
    const double alpha = incidence_elevation(L, R, basis);
    const double kappa = -roll_sign(L, R, gc, basis);

    Codebook cb;
    cb.kind = CodebookKind::go_nonuniform;
    cb.d_roll = d_roll;
    cb.d_yaw = d_yaw;

    auto usable = [&](double roll, double yaw) {
        const auto f = footprint(L, R, roll, yaw);
        return f && room.floor_contains(*f);
    };
    auto ring = [&](std::size_t i, double roll) {
        std::vector<double> ys;
        for (double y : yaw_ring(i, gc, d_yaw, opt.full_first_ring))
            if (usable(roll, y))
                ys.push_back(y);
        return ys;
    };

    const double w1 = first_roll(L, R, gc, basis);
    if (!usable(w1, gc))
        return cb;
    cb.rolls.push_back(w1);
    cb.yaw_rings.push_back(ring(1, w1));

    std::vector<double> w{w1, w1 + kappa * d_roll};
    for (std::size_t i = 2; i <= opt.max_rings; ++i) {
        const double wi = w.back();
        const double beta = alpha + 2.0 * kappa * wi;
        if (!detail::strictly_inside_half_pi(beta) || !in_angle_domain(wi))
            break;
        auto ys = ring(i, wi);
        if (ys.empty())
            break;
        cb.rolls.push_back(wi);
        cb.yaw_rings.push_back(std::move(ys));
        const auto nxt = next_roll(wi, w[w.size() - 2], alpha, kappa);
        if (!nxt || std::abs(*nxt - wi) < opt.min_step * d_roll)
            break;
        w.push_back(*nxt);
    }
    return cb;
}

/// Codebook as {kind, params, rolls[], yaw_rings[][]} with 17 significant digits (radians).
inline std::string to_json(const Codebook& cb)
{
    std::string s = "{\"kind\":\"";
    s += to_string(cb.kind);
    s += "\",\"params\":{\"d_roll\":" + json_number(cb.d_roll) + ",\"d_yaw\":" + json_number(cb.d_yaw) + "},";
    s += "\"rolls\":[";
    for (std::size_t i = 0; i < cb.rolls.size(); ++i)
        s += (i ? "," : "") + json_number(cb.rolls[i]);
    s += "],\"yaw_rings\":[";
    for (std::size_t i = 0; i < cb.yaw_rings.size(); ++i) {
        s += i ? ",[" : "[";
        for (std::size_t j = 0; j < cb.yaw_rings[i].size(); ++j)
            s += (j ? "," : "") + json_number(cb.yaw_rings[i][j]);
        s += "]";
    }
    s += "]}";
    return s;
}

inline Codebook codebook_from_json(const std::string& text)
{
    const auto j = nlohmann::json::parse(text);
    Codebook cb;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "uniform")
        cb.kind = CodebookKind::uniform;
    else if (kind == "go_nonuniform")
        cb.kind = CodebookKind::go_nonuniform;
    else
        throw ValidationError("codebook.kind: unknown value '" + kind + "'");
    cb.d_roll = j.at("params").at("d_roll").get<double>();
    cb.d_yaw = j.at("params").at("d_yaw").get<double>();
    cb.rolls = j.at("rolls").get<std::vector<double>>();
    cb.yaw_rings = j.at("yaw_rings").get<std::vector<std::vector<double>>>();
    return cb;
}

/// Footprint and spot support of one codeword.
struct CodewordFootprint {
    Codeword cw;
    Vec3 center;     ///< floor hit of the central ray
    double support;  ///< radius around `center` outside which the spot carries no power
};

/**
 * @brief Radius of the lit spot around the central footprint.
 *
 * Traces rays from the LED rim through the element corners to the floor and
 * adds a 30% margin. Infinite when any such ray misses the floor.
 */
inline double spot_support(const Vec3& center, const OirsElement& elem, const Led& led, double floor_z = 0.0)
{
    const UnitVec3 n = elem.normal();
    const auto [u, v] = elem.axes();
    const auto [ea, eb] = tangent_frame(led.normal);
    const double h = elem.side / 2.0;
    double worst = 0.0;
    for (int k = 0; k < 16; ++k) {
        const double t = 2.0 * std::numbers::pi * k / 16.0;
        const Vec3 I = led.center + (ea.vec() * std::cos(t) + eb.vec() * std::sin(t)) * led.radius;
        for (double su : {-1.0, 1.0})
            for (double sv : {-1.0, 1.0}) {
                const Vec3 Rc = elem.center + u.vec() * (su * h) + v.vec() * (sv * h);
                const UnitVec3 d = reflect(normalize(Rc - I), n);
                if (d.z() >= -1e-12)
                    return std::numeric_limits<double>::infinity();
                const Vec3 hit = Rc + d.vec() * ((Rc.z - floor_z) / -d.z());
                worst = std::max(worst, distance(hit, center));
            }
    }
    return 1.3 * worst;
}

/// Footprints of every codeword that lands on the floor.
inline std::vector<CodewordFootprint> footprint_table(const Codebook& cb, const OirsElement& elem, const Led& led,
                                                      double floor_z = 0.0)
{
    std::vector<CodewordFootprint> out;
    for (const Codeword& c : cb.codewords()) {
        const auto f = footprint(led.center, elem.center, c.roll, c.yaw, floor_z);
        if (!f)
            continue;
        OirsElement e = elem;
        e.roll = c.roll;
        e.yaw = c.yaw;
        out.push_back({c, *f, spot_support(*f, e, led, floor_z)});
    }
    return out;
}

struct SweepResult {
    Codeword chosen;
    std::size_t swept_count = 0;
    double achieved_gain = 0.0;
    std::optional<double> best_possible_gain;
    bool fallback_nearest = false;  ///< no footprint within r; the nearest codeword was used
};

/**
 * @brief Sweeps the codewords whose footprint lies within `r` of `estimate` and keeps the best.
 *
 * `gain` maps a configured element to a gain. Codewords whose spot cannot
 * reach `reach_of` (a point and a radius) are counted as swept but scored 0
 * without evaluating `gain`.
 */
template <class GainFn>
SweepResult beam_sweep(const std::vector<CodewordFootprint>& table, const OirsElement& elem, const Vec3& estimate,
                       double r, GainFn&& gain, std::optional<std::pair<Vec3, double>> reach_of = std::nullopt)
{
    if (!(r > 0.0))
        throw DomainError("beam_sweep: radius must be positive");
    if (table.empty())
        throw DomainError("beam_sweep: no codeword reaches the detection plane");
    SweepResult res;
    bool any = false;
    OirsElement e = elem;
    for (const CodewordFootprint& c : table) {
        if (distance(c.center, estimate) > r)
            continue;
        ++res.swept_count;
        double g = 0.0;
        if (!reach_of || distance(c.center, reach_of->first) <= c.support + reach_of->second) {
            e.roll = c.cw.roll;
            e.yaw = c.cw.yaw;
            g = gain(static_cast<const OirsElement&>(e));
        }
        if (!any || g > res.achieved_gain) {
            res.achieved_gain = g;
            res.chosen = c.cw;
            any = true;
        }
    }
    if (!any) {
        const auto it = std::min_element(table.begin(), table.end(), [&](const auto& a, const auto& b) {
            return distance(a.center, estimate) < distance(b.center, estimate);
        });
        e.roll = it->cw.roll;
        e.yaw = it->cw.yaw;
        res.chosen = it->cw;
        res.achieved_gain = gain(static_cast<const OirsElement&>(e));
        res.swept_count = 1;
        res.fallback_nearest = true;
    }
    return res;
}

template <class GainFn>
SweepResult beam_sweep(const Codebook& cb, const OirsElement& elem, const Led& led, const Vec3& estimate, double r,
                       GainFn&& gain)
{
    return beam_sweep(footprint_table(cb, elem, led), elem, estimate, r, std::forward<GainFn>(gain));
}

struct Alignment {
    Codeword cw;
    double gain = 0.0;
};

/**
 * @brief Continuous optimum of patch_gain over (roll, yaw).
 *
 * Compass search started from the specular bisector towards the PD centre.
 */
inline Alignment optimal_alignment(const OirsElement& elem, const Led& led, const Pd& pd, const QuadratureSpec& quad,
                                   double initial_step = deg2rad(0.5), double final_step = deg2rad(0.002))
{
    OirsElement e = aligned_element(elem.center, led.center, pd.center, elem.side, elem.reflectivity);
    auto eval = [&](double roll, double yaw) {
        if (!in_angle_domain(roll) || !in_angle_domain(yaw))
            return -1.0;
        OirsElement t = e;
        t.roll = roll;
        t.yaw = yaw;
        return patch_gain(t, led, pd, quad);
    };
    Alignment best{{e.roll, e.yaw}, eval(e.roll, e.yaw)};
    double step = initial_step;
    int came_from = -1;  // neighbour at the current step that is the previous best
    while (step >= final_step) {
        bool moved = false;
        const double dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (int i = 0; i < 4; ++i) {
            if (i == came_from)
                continue;
            const double r = best.cw.roll + dirs[i][0] * step;
            const double y = best.cw.yaw + dirs[i][1] * step;
            const double g = eval(r, y);
            if (g > best.gain) {
                best = {{r, y}, g};
                came_from = i ^ 1;
                moved = true;
                break;
            }
        }
        if (!moved) {
            step /= 2.0;
            came_from = -1;
        }
    }
    return best;
}

/// Cell-centred grid over the room floor.
struct DetectionGrid {
    double spacing = 0.05;
    std::size_t nx = 0;
    std::size_t ny = 0;
    double floor_z = 0.0;

    static DetectionGrid over(const Room& room, double spacing)
    {
        if (!(spacing > 0.0))
            throw DomainError("detection grid spacing must be positive");
        DetectionGrid g;
        g.spacing = spacing;
        g.nx = static_cast<std::size_t>(std::floor(room.x / spacing + 1e-9));
        g.ny = static_cast<std::size_t>(std::floor(room.y / spacing + 1e-9));
        return g;
    }
    std::size_t size() const { return nx * ny; }
    Vec3 point(std::size_t k) const
    {
        return {(static_cast<double>(k % nx) + 0.5) * spacing, (static_cast<double>(k / nx) + 0.5) * spacing, floor_z};
    }
};

/// Optimal gain at each grid point (row-major, y outer).
struct OptimalGainMap {
    DetectionGrid grid;
    std::vector<double> gain;
};

inline OptimalGainMap optimal_gain_map(const DetectionGrid& grid, const OirsElement& elem, const Led& led,
                                       const Pd& pd_template, const QuadratureSpec& quad)
{
    OptimalGainMap m{grid, std::vector<double>(grid.size())};
    for (std::size_t k = 0; k < grid.size(); ++k) {
        Pd pd = pd_template;
        pd.center = grid.point(k);
        m.gain[k] = optimal_alignment(elem, led, pd, quad).gain;
    }
    return m;
}

struct ErrorNormResult {
    double frobenius = 0.0;        ///< ||achieved - optimal||_F over the grid
    double mean_abs_error = 0.0;
    double mean_true_gain = 0.0;
    double mean_achieved_gain = 0.0;
    double mean_swept = 0.0;
    std::size_t points = 0;
    std::size_t fallbacks = 0;
    std::vector<double> errors;    ///< per grid point, row-major
};

/**
 * @brief Frobenius norm of the beam-alignment error matrix over the detection grid.
 *
 * At every grid point the PD (template moved there) is swept with the
 * codewords within `r` of its position, and the chosen gain is compared with
 * the continuous optimum from `optimum`.
 */
inline ErrorNormResult codebook_error_norm(const Codebook& cb, const OirsElement& elem, const Led& led,
                                           const Pd& pd_template, const OptimalGainMap& optimum, double r,
                                           const QuadratureSpec& quad)
{
    const auto table = footprint_table(cb, elem, led, optimum.grid.floor_z);
    const double reach = pd_template.side * std::numbers::sqrt2 / 2.0;
    ErrorNormResult res;
    res.points = optimum.grid.size();
    res.errors.resize(res.points);
    double sq = 0.0;
    for (std::size_t k = 0; k < res.points; ++k) {
        Pd pd = pd_template;
        pd.center = optimum.grid.point(k);
        const auto sw = beam_sweep(table, elem, pd.center, r,
                                   [&](const OirsElement& e) { return patch_gain(e, led, pd, quad); },
                                   std::make_pair(pd.center, reach));
        const double err = std::abs(sw.achieved_gain - optimum.gain[k]);
        res.errors[k] = err;
        sq += err * err;
        res.mean_abs_error += err;
        res.mean_true_gain += optimum.gain[k];
        res.mean_achieved_gain += sw.achieved_gain;
        res.mean_swept += static_cast<double>(sw.swept_count);
        res.fallbacks += sw.fallback_nearest ? 1 : 0;
    }
    const double n = static_cast<double>(std::max<std::size_t>(res.points, 1));
    res.frobenius = std::sqrt(sq);
    res.mean_abs_error /= n;
    res.mean_true_gain /= n;
    res.mean_achieved_gain /= n;
    res.mean_swept /= n;
    return res;
}

inline ErrorNormResult codebook_error_norm(const Codebook& cb, const OirsElement& elem, const Led& led,
                                           const Pd& pd_template, const Room& room, double grid_spacing, double r,
                                           const QuadratureSpec& quad)
{
    const auto optimum = optimal_gain_map(DetectionGrid::over(room, grid_spacing), elem, led, pd_template, quad);
    return codebook_error_norm(cb, elem, led, pd_template, optimum, r, quad);
}

/// Number of codewords whose footprint lies within r of `estimate`.
inline std::size_t sweep_count(const std::vector<CodewordFootprint>& table, const Vec3& estimate, double r)
{
    std::size_t n = 0;
    for (const auto& c : table)
        if (distance(c.center, estimate) <= r)
            ++n;
    return n;
}

} // namespace oirs
