#pragma once
/**
 * @file scenario.hpp
 * @brief Schema-versioned scenario files.
 *
 * A scenario may name a preset ("paper-siso" or "paper-mimo"); fields given
 * next to it override the preset (JSON merge patch). Unknown keys and bad
 * values raise ConfigError with the offending field path.
 */

#include "oirs/channel.hpp"
#include "oirs/codebook.hpp"
#include "oirs/estimator.hpp"
#include "oirs/interpolation.hpp"
#include "oirs/quadrature.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace oirs {

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& what)
        : std::runtime_error(path.empty() ? what : path + ": " + what), path_(path)
    {
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct LedSpec {
    Vec3 center{2.0, 2.0, 3.0};
    Vec3 normal{0.0, 0.0, -1.0};
    double radius = 0.1;
    double lambertian_index = 1.0;
    double power = 1.0;
    bool operator==(const LedSpec&) const = default;

    Led to_led() const { return {center, normalize(normal), radius, lambertian_index, power}; }
};

struct PdSpec {
    Vec3 center{2.0, 2.0, 0.0};
    Vec3 normal{0.0, 0.0, 1.0};
    double side = 0.1;
    double fov_deg = 70.0;
    double filter_gain = 1.0;
    bool operator==(const PdSpec&) const = default;

    Pd to_pd() const { return {center, normalize(normal), side, deg2rad(fov_deg), filter_gain}; }
};

struct OirsSpec {
    Vec3 center{2.0, 0.0, 1.5};
    Vec3 normal{0.0, 1.0, 0.0};
    std::size_t rows = 24;
    std::size_t cols = 24;
    double side = 0.05;
    double spacing = 0.1;
    double reflectivity = 0.9;
    bool operator==(const OirsSpec&) const = default;

    OirsArray to_array() const { return {rows, cols, spacing, side, reflectivity, center, normalize(normal)}; }
};

struct QuadSpec {
    std::size_t mirror = 16;
    std::size_t pd = 16;
    IndicatorRule rule = IndicatorRule::clipped;
    bool operator==(const QuadSpec&) const = default;

    QuadratureSpec to_quadrature() const { return QuadratureSpec(mirror, pd, rule); }
};

struct CodebookSettings {
    double uniform_roll_deg = 0.6;
    double uniform_yaw_deg = 0.6;
    double roll_deg = 1.5;   ///< non-uniform roll step
    double yaw_deg = 15.0;   ///< non-uniform yaw step
    Vec3 pd_estimate{2.0, 0.5, 0.0};
    double grid_spacing = 0.05;
    std::vector<double> roll_sweep_deg{0.5, 1.0, 1.5, 2.0, 3.0};
    std::vector<double> yaw_sweep_deg{5.0, 10.0, 15.0, 20.0, 30.0};
    std::vector<double> radii{0.25, 0.5, 0.75, 1.0};
    QuadSpec quadrature{8, 8, IndicatorRule::clipped};
    bool operator==(const CodebookSettings&) const = default;
};

struct EstimationSettings {
    TruthModel truth = TruthModel::physical;
    InterpKind interpolation = InterpKind::cubic;
    ExtrapPolicy extrapolation = ExtrapPolicy::quadratic;
    bool activated_only = false;
    double lambertian_k = 0.0;
    std::size_t pilot_slots = 100;
    double pilot_amplitude = 1.0;
    std::vector<double> sigma{1e-7, 3.1622776601683795e-7, 1e-6, 3.1622776601683795e-6, 1e-5, 3.1622776601683795e-5,
                              1e-4};
    std::vector<std::size_t> spacings{1, 2, 3, 4};
    std::size_t trials = 50;
    QuadSpec quadrature{16, 16, IndicatorRule::clipped};
    bool operator==(const EstimationSettings&) const = default;
};

struct Scenario {
    int schema_version = kSchemaVersion;
    std::string preset;
    Room room;
    std::vector<LedSpec> leds{LedSpec{}};
    std::vector<PdSpec> pds{PdSpec{}};
    OirsSpec oirs;
    Vec3 velocity{0.5, 0.0, 0.0};
    double duration = 0.0;
    double target_time = 0.0;
    double xi_c = 0.04;
    double radius = 0.5;
    CodebookSettings codebook;
    EstimationSettings estimation;

    bool operator==(const Scenario& o) const
    {
        return schema_version == o.schema_version && preset == o.preset && room.x == o.room.x &&
               room.y == o.room.y && room.z == o.room.z && leds == o.leds && pds == o.pds && oirs == o.oirs &&
               velocity == o.velocity && duration == o.duration && target_time == o.target_time && xi_c == o.xi_c &&
               radius == o.radius && codebook == o.codebook && estimation == o.estimation;
    }

    std::vector<Led> led_models() const
    {
        std::vector<Led> out;
        for (const auto& l : leds)
            out.push_back(l.to_led());
        return out;
    }
    std::vector<Pd> pd_models() const
    {
        std::vector<Pd> out;
        for (const auto& p : pds)
            out.push_back(p.to_pd());
        return out;
    }

    /// Estimation problem for this scenario.
    JstsScenario jsts() const
    {
        JstsScenario j;
        j.array = oirs.to_array();
        j.leds = led_models();
        j.pds = pd_models();
        j.room = room;
        j.velocity = velocity;
        j.duration = duration;
        j.target_time = target_time;
        j.xi_c = xi_c;
        j.radius = radius;
        j.truth = estimation.truth;
        j.lambertian_k = estimation.lambertian_k;
        j.quad = estimation.quadrature.to_quadrature();
        return j;
    }
};

// ---------------------------------------------------------------------------
// presets

inline Scenario paper_siso()
{
    Scenario s;
    s.preset = "paper-siso";
    return s;
}

/// 2 LEDs and 2 PDs, 0.4 m apart along x, centred on the SISO positions.
inline Scenario paper_mimo()
{
    Scenario s;
    s.preset = "paper-mimo";
    s.leds = {LedSpec{{1.8, 2.0, 3.0}}, LedSpec{{2.2, 2.0, 3.0}}};
    s.pds = {PdSpec{{1.8, 2.0, 0.0}}, PdSpec{{2.2, 2.0, 0.0}}};
    return s;
}

inline Scenario preset(const std::string& name)
{
    if (name == "paper-siso")
        return paper_siso();
    if (name == "paper-mimo")
        return paper_mimo();
    throw ConfigError("preset", "unknown preset '" + name + "' (expected paper-siso or paper-mimo)");
}

// ---------------------------------------------------------------------------
// serialization

using Json = nlohmann::ordered_json;

namespace detail {

inline const char* to_key(IndicatorRule r) { return r == IndicatorRule::clipped ? "clipped" : "per_node"; }
inline const char* to_key(InterpKind k) { return k == InterpKind::cubic ? "cubic" : "linear"; }
inline const char* to_key(ExtrapPolicy p)
{
    switch (p) {
    case ExtrapPolicy::end_segment: return "end_segment";
    case ExtrapPolicy::linear: return "linear";
    case ExtrapPolicy::quadratic: return "quadratic";
    case ExtrapPolicy::hold: return "hold";
    }
    return "hold";
}

inline Json vec_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

inline Json quad_json(const QuadSpec& q) { return {{"mirror", q.mirror}, {"pd", q.pd}, {"rule", to_key(q.rule)}}; }

/// Typed reader over a JSON object that remembers its path and rejects unknown keys.
class Reader {
public:
    Reader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw ConfigError(path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }
    const nlohmann::json& raw(const std::string& key) const { return j_.at(key); }

    void allow(std::initializer_list<const char*> keys) const
    {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& [k, v] : j_.items())
            if (!ok.count(k))
                throw ConfigError(at(k), "unknown field");
    }

    void number(const std::string& key, double& out) const
    {
        if (!has(key))
            return;
        if (!j_[key].is_number())
            throw ConfigError(at(key), "expected a number");
        out = j_[key].get<double>();
        if (!std::isfinite(out))
            throw ConfigError(at(key), "must be finite");
    }

    template <class Int>
    void count(const std::string& key, Int& out) const
    {
        if (!has(key))
            return;
        if (!j_[key].is_number_integer() || j_[key].get<long long>() < 0)
            throw ConfigError(at(key), "expected a nonnegative integer");
        out = static_cast<Int>(j_[key].get<long long>());
    }

    void boolean(const std::string& key, bool& out) const
    {
        if (!has(key))
            return;
        if (!j_[key].is_boolean())
            throw ConfigError(at(key), "expected true or false");
        out = j_[key].get<bool>();
    }

    void text(const std::string& key, std::string& out) const
    {
        if (!has(key))
            return;
        if (!j_[key].is_string())
            throw ConfigError(at(key), "expected a string");
        out = j_[key].get<std::string>();
    }

    void vec3(const std::string& key, Vec3& out) const
    {
        if (!has(key))
            return;
        const auto& a = j_[key];
        if (!a.is_array() || a.size() != 3)
            throw ConfigError(at(key), "expected [x, y, z]");
        double c[3];
        for (std::size_t i = 0; i < 3; ++i) {
            if (!a[i].is_number())
                throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a number");
            c[i] = a[i].get<double>();
        }
        out = {c[0], c[1], c[2]};
    }

    template <class T>
    void list(const std::string& key, std::vector<T>& out) const
    {
        if (!has(key))
            return;
        const auto& a = j_[key];
        if (!a.is_array())
            throw ConfigError(at(key), "expected an array");
        out.clear();
        for (std::size_t i = 0; i < a.size(); ++i) {
            const std::string p = at(key) + "[" + std::to_string(i) + "]";
            if constexpr (std::is_floating_point_v<T>) {
                if (!a[i].is_number())
                    throw ConfigError(p, "expected a number");
            } else {
                if (!a[i].is_number_integer() || a[i].get<long long>() < 0)
                    throw ConfigError(p, "expected a nonnegative integer");
            }
            out.push_back(a[i].get<T>());
        }
    }

    template <class E>
    void choice(const std::string& key, E& out, const std::map<std::string, E>& options) const
    {
        if (!has(key))
            return;
        std::string v;
        text(key, v);
        const auto it = options.find(v);
        if (it == options.end()) {
            std::string names;
            for (const auto& [k, e] : options)
                names += (names.empty() ? "" : ", ") + k;
            throw ConfigError(at(key), "unknown value '" + v + "' (expected one of " + names + ")");
        }
        out = it->second;
    }

    Reader child(const std::string& key) const { return Reader(j_.at(key), at(key)); }

private:
    const nlohmann::json& j_;
    std::string path_;
};

inline void read_quad(const Reader& r, QuadSpec& q)
{
    r.allow({"mirror", "pd", "rule"});
    r.count("mirror", q.mirror);
    r.count("pd", q.pd);
    r.choice<IndicatorRule>("rule", q.rule, {{"clipped", IndicatorRule::clipped}, {"per_node", IndicatorRule::per_node}});
}

} // namespace detail

/// Canonical JSON (fixed key order); angles in degrees.
inline Json to_json(const Scenario& s)
{
    using detail::vec_json;
    Json j;
    j["schema_version"] = s.schema_version;
    if (!s.preset.empty())
        j["preset"] = s.preset;
    j["room"] = {{"x", s.room.x}, {"y", s.room.y}, {"z", s.room.z}};
    Json leds = Json::array();
    for (const auto& l : s.leds)
        leds.push_back({{"center", vec_json(l.center)},
                        {"normal", vec_json(l.normal)},
                        {"radius", l.radius},
                        {"lambertian_index", l.lambertian_index},
                        {"power", l.power}});
    j["leds"] = leds;
    Json pds = Json::array();
    for (const auto& p : s.pds)
        pds.push_back({{"center", vec_json(p.center)},
                       {"normal", vec_json(p.normal)},
                       {"side", p.side},
                       {"fov_deg", p.fov_deg},
                       {"filter_gain", p.filter_gain}});
    j["pds"] = pds;
    j["oirs"] = {{"center", vec_json(s.oirs.center)}, {"normal", vec_json(s.oirs.normal)},
                 {"rows", s.oirs.rows},               {"cols", s.oirs.cols},
                 {"side", s.oirs.side},               {"spacing", s.oirs.spacing},
                 {"reflectivity", s.oirs.reflectivity}};
    j["receiver"] = {{"velocity", vec_json(s.velocity)}, {"duration", s.duration}, {"target_time", s.target_time}};
    j["xi_c"] = s.xi_c;
    j["radius"] = s.radius;
    const auto& c = s.codebook;
    j["codebook"] = {{"uniform_roll_deg", c.uniform_roll_deg},
                     {"uniform_yaw_deg", c.uniform_yaw_deg},
                     {"roll_deg", c.roll_deg},
                     {"yaw_deg", c.yaw_deg},
                     {"pd_estimate", vec_json(c.pd_estimate)},
                     {"grid_spacing", c.grid_spacing},
                     {"roll_sweep_deg", c.roll_sweep_deg},
                     {"yaw_sweep_deg", c.yaw_sweep_deg},
                     {"radii", c.radii},
                     {"quadrature", detail::quad_json(c.quadrature)}};
    const auto& e = s.estimation;
    j["estimation"] = {{"truth", to_string(e.truth)},
                       {"interpolation", detail::to_key(e.interpolation)},
                       {"extrapolation", detail::to_key(e.extrapolation)},
                       {"activated_only", e.activated_only},
                       {"lambertian_k", e.lambertian_k},
                       {"pilot_slots", e.pilot_slots},
                       {"pilot_amplitude", e.pilot_amplitude},
                       {"sigma", e.sigma},
                       {"spacings", e.spacings},
                       {"trials", e.trials},
                       {"quadrature", detail::quad_json(e.quadrature)}};
    return j;
}

/// Throws ConfigError on the first invalid field.
inline void validate(const Scenario& s)
{
    auto inside = [&](const Vec3& p, const std::string& path) {
        const double tol = 1e-9;
        if (p.x < -tol || p.y < -tol || p.z < -tol || p.x > s.room.x + tol || p.y > s.room.y + tol ||
            p.z > s.room.z + tol)
            throw ConfigError(path, "lies outside the room");
    };
    auto positive = [](double x, const std::string& path) {
        if (!(x > 0.0))
            throw ConfigError(path, "must be positive");
    };
    auto direction = [](const Vec3& v, const std::string& path) {
        if (!(norm(v) > 0.0))
            throw ConfigError(path, "must be a nonzero vector");
    };
    if (s.schema_version != kSchemaVersion)
        throw ConfigError("schema_version", "unsupported version " + std::to_string(s.schema_version) +
                                                " (this build reads " + std::to_string(kSchemaVersion) + ")");
    positive(s.room.x, "room.x");
    positive(s.room.y, "room.y");
    positive(s.room.z, "room.z");
    if (s.leds.empty())
        throw ConfigError("leds", "at least one LED is required");
    if (s.pds.empty())
        throw ConfigError("pds", "at least one PD is required");
    for (std::size_t i = 0; i < s.leds.size(); ++i) {
        const std::string p = "leds[" + std::to_string(i) + "]";
        inside(s.leds[i].center, p + ".center");
        direction(s.leds[i].normal, p + ".normal");
        positive(s.leds[i].radius, p + ".radius");
        if (!(s.leds[i].lambertian_index >= 1.0))
            throw ConfigError(p + ".lambertian_index", "must be at least 1");
        if (!(s.leds[i].power >= 0.0))
            throw ConfigError(p + ".power", "must be nonnegative");
    }
    for (std::size_t i = 0; i < s.pds.size(); ++i) {
        const std::string p = "pds[" + std::to_string(i) + "]";
        inside(s.pds[i].center, p + ".center");
        direction(s.pds[i].normal, p + ".normal");
        positive(s.pds[i].side, p + ".side");
        if (!(s.pds[i].fov_deg > 0.0 && s.pds[i].fov_deg < 90.0))
            throw ConfigError(p + ".fov_deg", "must lie in (0, 90) degrees");
        if (!(s.pds[i].filter_gain >= 0.0))
            throw ConfigError(p + ".filter_gain", "must be nonnegative");
    }
    const auto& o = s.oirs;
    if (o.rows == 0 || o.cols == 0)
        throw ConfigError("oirs.rows", "array must have at least one element");
    positive(o.side, "oirs.side");
    if (!(o.spacing >= o.side))
        throw ConfigError("oirs.spacing", "must be at least oirs.side");
    if (!(o.reflectivity > 0.0 && o.reflectivity <= 1.0))
        throw ConfigError("oirs.reflectivity", "must lie in (0, 1]");
    direction(o.normal, "oirs.normal");
    if (std::abs(normalize(o.normal).z()) > 1.0 - 1e-9)
        throw ConfigError("oirs.normal", "must not be vertical (the array is wall mounted)");
    const OirsArray arr = o.to_array();
    inside(arr.element_center(0, 0), "oirs");
    inside(arr.element_center(o.rows - 1, o.cols - 1), "oirs");
    if (!(s.duration >= 0.0))
        throw ConfigError("receiver.duration", "must be nonnegative");
    if (!(s.xi_c > 0.0 && s.xi_c < 1.0))
        throw ConfigError("xi_c", "must lie in (0, 1)");
    positive(s.radius, "radius");
    const auto& c = s.codebook;
    positive(c.uniform_roll_deg, "codebook.uniform_roll_deg");
    positive(c.uniform_yaw_deg, "codebook.uniform_yaw_deg");
    positive(c.roll_deg, "codebook.roll_deg");
    positive(c.yaw_deg, "codebook.yaw_deg");
    positive(c.grid_spacing, "codebook.grid_spacing");
    inside(c.pd_estimate, "codebook.pd_estimate");
    for (std::size_t i = 0; i < c.roll_sweep_deg.size(); ++i)
        positive(c.roll_sweep_deg[i], "codebook.roll_sweep_deg[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < c.yaw_sweep_deg.size(); ++i)
        positive(c.yaw_sweep_deg[i], "codebook.yaw_sweep_deg[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < c.radii.size(); ++i)
        positive(c.radii[i], "codebook.radii[" + std::to_string(i) + "]");
    if (c.quadrature.mirror < 2 || c.quadrature.pd < 1)
        throw ConfigError("codebook.quadrature", "needs at least 2 mirror nodes and 1 PD node");
    const auto& e = s.estimation;
    if (e.pilot_slots < s.leds.size())
        throw ConfigError("estimation.pilot_slots", "must be at least the number of LEDs");
    positive(e.pilot_amplitude, "estimation.pilot_amplitude");
    if (e.trials == 0)
        throw ConfigError("estimation.trials", "must be at least 1");
    for (std::size_t i = 0; i < e.sigma.size(); ++i)
        if (!(e.sigma[i] >= 0.0))
            throw ConfigError("estimation.sigma[" + std::to_string(i) + "]", "must be nonnegative");
    for (std::size_t i = 0; i < e.spacings.size(); ++i)
        if (e.spacings[i] == 0)
            throw ConfigError("estimation.spacings[" + std::to_string(i) + "]", "must be at least 1");
    if (e.quadrature.mirror < 2 || e.quadrature.pd < 1)
        throw ConfigError("estimation.quadrature", "needs at least 2 mirror nodes and 1 PD node");
}

/// Parses a scenario document. A "preset" key seeds the defaults; other keys override it.
inline Scenario scenario_from_json(const nlohmann::json& doc)
{
    using detail::Reader;
    if (!doc.is_object())
        throw ConfigError("", "scenario must be a JSON object");
    Scenario s;
    if (doc.contains("preset")) {
        if (!doc["preset"].is_string())
            throw ConfigError("preset", "expected a string");
        s = preset(doc["preset"].get<std::string>());
    }
    const Reader r(doc, "");
    r.allow({"schema_version", "preset", "room", "leds", "pds", "oirs", "receiver", "xi_c", "radius", "codebook",
             "estimation"});
    if (r.has("schema_version")) {
        if (!doc["schema_version"].is_number_integer())
            throw ConfigError("schema_version", "expected an integer");
        s.schema_version = doc["schema_version"].get<int>();
    }
    if (r.has("room")) {
        const Reader c = r.child("room");
        c.allow({"x", "y", "z"});
        c.number("x", s.room.x);
        c.number("y", s.room.y);
        c.number("z", s.room.z);
    }
    if (r.has("leds")) {
        if (!doc["leds"].is_array())
            throw ConfigError("leds", "expected an array");
        s.leds.clear();
        for (std::size_t i = 0; i < doc["leds"].size(); ++i) {
            const Reader c(doc["leds"][i], "leds[" + std::to_string(i) + "]");
            c.allow({"center", "normal", "radius", "lambertian_index", "power"});
            LedSpec l;
            c.vec3("center", l.center);
            c.vec3("normal", l.normal);
            c.number("radius", l.radius);
            c.number("lambertian_index", l.lambertian_index);
            c.number("power", l.power);
            s.leds.push_back(l);
        }
    }
    if (r.has("pds")) {
        if (!doc["pds"].is_array())
            throw ConfigError("pds", "expected an array");
        s.pds.clear();
        for (std::size_t i = 0; i < doc["pds"].size(); ++i) {
            const Reader c(doc["pds"][i], "pds[" + std::to_string(i) + "]");
            c.allow({"center", "normal", "side", "fov_deg", "filter_gain"});
            PdSpec p;
            c.vec3("center", p.center);
            c.vec3("normal", p.normal);
            c.number("side", p.side);
            c.number("fov_deg", p.fov_deg);
            c.number("filter_gain", p.filter_gain);
            s.pds.push_back(p);
        }
    }
    if (r.has("oirs")) {
        const Reader c = r.child("oirs");
        c.allow({"center", "normal", "rows", "cols", "side", "spacing", "reflectivity"});
        c.vec3("center", s.oirs.center);
        c.vec3("normal", s.oirs.normal);
        c.count("rows", s.oirs.rows);
        c.count("cols", s.oirs.cols);
        c.number("side", s.oirs.side);
        c.number("spacing", s.oirs.spacing);
        c.number("reflectivity", s.oirs.reflectivity);
    }
    if (r.has("receiver")) {
        const Reader c = r.child("receiver");
        c.allow({"velocity", "duration", "target_time"});
        c.vec3("velocity", s.velocity);
        c.number("duration", s.duration);
        c.number("target_time", s.target_time);
    }
    r.number("xi_c", s.xi_c);
    r.number("radius", s.radius);
    if (r.has("codebook")) {
        const Reader c = r.child("codebook");
        c.allow({"uniform_roll_deg", "uniform_yaw_deg", "roll_deg", "yaw_deg", "pd_estimate", "grid_spacing",
                 "roll_sweep_deg", "yaw_sweep_deg", "radii", "quadrature"});
        auto& cb = s.codebook;
        c.number("uniform_roll_deg", cb.uniform_roll_deg);
        c.number("uniform_yaw_deg", cb.uniform_yaw_deg);
        c.number("roll_deg", cb.roll_deg);
        c.number("yaw_deg", cb.yaw_deg);
        c.vec3("pd_estimate", cb.pd_estimate);
        c.number("grid_spacing", cb.grid_spacing);
        c.list("roll_sweep_deg", cb.roll_sweep_deg);
        c.list("yaw_sweep_deg", cb.yaw_sweep_deg);
        c.list("radii", cb.radii);
        if (c.has("quadrature"))
            detail::read_quad(c.child("quadrature"), cb.quadrature);
    }
    if (r.has("estimation")) {
        const Reader c = r.child("estimation");
        c.allow({"truth", "interpolation", "extrapolation", "activated_only", "lambertian_k", "pilot_slots",
                 "pilot_amplitude", "sigma", "spacings", "trials", "quadrature"});
        auto& e = s.estimation;
        c.choice<TruthModel>("truth", e.truth, {{"physical", TruthModel::physical}, {"lambertian", TruthModel::lambertian}});
        c.choice<InterpKind>("interpolation", e.interpolation, {{"cubic", InterpKind::cubic}, {"linear", InterpKind::linear}});
        c.choice<ExtrapPolicy>("extrapolation", e.extrapolation,
                               {{"end_segment", ExtrapPolicy::end_segment},
                                {"linear", ExtrapPolicy::linear},
                                {"quadratic", ExtrapPolicy::quadratic},
                                {"hold", ExtrapPolicy::hold}});
        c.boolean("activated_only", e.activated_only);
        c.number("lambertian_k", e.lambertian_k);
        c.count("pilot_slots", e.pilot_slots);
        c.number("pilot_amplitude", e.pilot_amplitude);
        c.list("sigma", e.sigma);
        c.list("spacings", e.spacings);
        c.count("trials", e.trials);
        if (c.has("quadrature"))
            detail::read_quad(c.child("quadrature"), e.quadrature);
    }
    validate(s);
    return s;
}

inline Scenario scenario_from_string(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    return scenario_from_json(doc);
}

inline Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("", "cannot open scenario file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return scenario_from_string(ss.str());
}

inline std::string scenario_text(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

inline void save_scenario(const Scenario& s, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("", "cannot write scenario file '" + path + "'");
    out << scenario_text(s);
}

/// FNV-1a 64 of `bytes`.
inline std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// 16 hex digits of the hash of the canonical compact JSON.
inline std::string scenario_hash(const Scenario& s)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(s).dump())));
    return buf;
}

} // namespace oirs
