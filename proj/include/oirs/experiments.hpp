#pragma once
/**
 * @file experiments.hpp
 * @brief Experiment runners behind the oirs-sim command line.
 *
 * Each runner turns a Scenario into tables (written as CSV) plus a summary
 * object; write_experiment() emits them with a manifest.
 */

#include "oirs/channel.hpp"
#include "oirs/codebook.hpp"
#include "oirs/coherence.hpp"
#include "oirs/estimator.hpp"
#include "oirs/io.hpp"
#include "oirs/scenario.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oirs {

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RunOptions {
    std::uint64_t seed = 1;
    std::optional<std::size_t> spacing;
    std::optional<std::vector<double>> sigma;
    std::optional<double> radius;
    std::optional<std::size_t> trials;
};

struct ExperimentResult {
    std::string name;
    std::vector<Table> tables;
    std::vector<std::pair<std::string, Json>> documents;  ///< extra JSON files (stem, body)
    Json summary = Json::object();

    const Table& table(const std::string& stem) const
    {
        for (const Table& t : tables)
            if (t.name == stem)
                return t;
        throw UsageError("experiment " + name + " has no table " + stem);
    }
};

inline const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> names{"angle-selectivity", "coherence-space", "coherence-time",
                                                "codebook-omega",    "codebook-gamma",  "codebook-compare",
                                                "codebook-count",    "nmse-siso",       "nmse-mimo",
                                                "overhead"};
    return names;
}

namespace detail {

inline Json nullable(double x) { return std::isfinite(x) ? Json(x) : Json(); }

inline Json width_json(const std::optional<double>& w) { return w ? nullable(*w) : Json(); }

/// Rotation of v about the unit axis k by angle t (Rodrigues).
inline Vec3 rotate(const Vec3& v, const Vec3& k, double t)
{
    return v * std::cos(t) + cross(k, v) * std::sin(t) + k * (dot(k, v) * (1.0 - std::cos(t)));
}

inline CoherenceGeometry centre_geometry(const Scenario& s)
{
    const Led led = s.leds.at(0).to_led();
    const Pd pd = s.pds.at(0).to_pd();
    return CoherenceGeometry::make(led.center, s.oirs.center, pd.center, led.normal, pd.normal, led.lambertian_index);
}

/// Trial seed k of a Monte-Carlo run; the same across spacings and noise levels.
inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t k) { return block_seed(seed, 0x7472u, k); }

// ---------------------------------------------------------------------------

inline ExperimentResult angle_selectivity(const Scenario& s, const RunOptions&)
{
    ExperimentResult res;
    Led led = s.leds.at(0).to_led();
    led.radius = 0.05;
    Pd pd = s.pds.at(0).to_pd();
    pd.side = 0.02;
    const Vec3 R = s.oirs.center;
    const OirsElement elem = aligned_element(R, led.center, pd.center, 0.02, s.oirs.reflectivity);
    const Vec3 spec = normalize(pd.center - R).vec();
    const Vec3 axis = normalize(cross(led.center - R, pd.center - R)).vec();
    const double d2 = distance(pd.center, R);
    const QuadratureSpec quad{};

    Table t{"angle_selectivity", {"aod_deg", "gain", "normalized_magnitude", "relative_to_peak"}, {}};
    std::vector<double> aod, gain;
    for (int k = -400; k <= 400; ++k) {
        const double a = 0.05 * k;
        const Vec3 dir = rotate(spec, axis, deg2rad(a));
        Pd p = pd;
        p.center = R + dir * d2;
        p.normal = UnitVec3::from(-dir);
        aod.push_back(a);
        gain.push_back(patch_gain(elem, led, p, quad));
    }
    double area = 0.0, peak = 0.0;
    std::size_t ipk = 0;
    for (std::size_t i = 0; i < gain.size(); ++i) {
        if (i > 0)
            area += 0.5 * (gain[i] + gain[i - 1]) * deg2rad(aod[i] - aod[i - 1]);
        if (gain[i] > peak) {
            peak = gain[i];
            ipk = i;
        }
    }
    for (std::size_t i = 0; i < gain.size(); ++i)
        t.add({aod[i], gain[i], area > 0.0 ? gain[i] / area : 0.0, peak > 0.0 ? gain[i] / peak : 0.0});
    // mainlobe: monotone descent on both sides of the peak
    std::size_t lo = ipk, hi = ipk;
    while (lo > 0 && gain[lo - 1] <= gain[lo])
        --lo;
    while (hi + 1 < gain.size() && gain[hi + 1] <= gain[hi])
        ++hi;
    double side = 0.0;
    for (std::size_t i = 0; i < gain.size(); ++i)
        if (i < lo || i > hi)
            side = std::max(side, gain[i]);
    double half_lo = aod[ipk], half_hi = aod[ipk];
    for (std::size_t i = ipk; i-- > 0 && gain[i] >= peak / 2.0;)
        half_lo = aod[i];
    for (std::size_t i = ipk; i < gain.size() && gain[i] >= peak / 2.0; ++i)
        half_hi = aod[i];
    res.tables.push_back(std::move(t));
    res.summary = {{"peak_gain", peak},
                   {"peak_aod_deg", aod[ipk]},
                   {"fwhm_deg", half_hi - half_lo},
                   {"max_sidelobe_ratio", peak > 0.0 ? side / peak : 0.0}};
    return res;
}

inline ExperimentResult coherence_space(const Scenario& s, const RunOptions&)
{
    ExperimentResult res;
    const CoherenceGeometry g = centre_geometry(s);
    const GrowthExpansion e = spatial_expansion(g);
    const OirsArray arr = s.oirs.to_array();
    const std::vector<std::pair<std::string, Vec3>> axes{{"horizontal", arr.horizontal_axis().vec()},
                                                         {"vertical", arr.vertical_axis().vec()}};
    std::vector<Vec3> dirs;
    for (const auto& a : axes)
        dirs.push_back(a.second);
    const CoherenceDistance dc = coherence_distance(g, s.xi_c, dirs);

    Table t{"coherence_space", {"direction", "delta_r", "exact", "linear", "quadratic"}, {}};
    Json per = Json::array();
    double grid_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < axes.size(); ++k) {
        const Vec3 d = axes[k].second;
        for (int i = -150; i <= 150; ++i) {
            const double x = 0.01 * i;
            t.add({axes[k].first, x, exact_spatial_change(g, d * x), dot(e.w, d) * x, e(d * x)});
        }
        const double grid = grid_search_width([&](double x) { return exact_spatial_change(g, d * x); }, s.xi_c,
                                              1e-4, 10.0);
        grid_min = std::min(grid_min, grid);
        const auto& iv = dc.directions[k].interval;
        per.push_back({{"direction", axes[k].first},
                       {"analytic_width", width_json(iv.width)},
                       {"branch", to_string(iv.branch)},
                       {"c1", iv.c1},
                       {"c2", iv.c2},
                       {"grid_width", grid}});
    }
    const CoherenceDistance dense =
        coherence_distance(g, s.xi_c, in_plane_directions(dirs[0], dirs[1], 64));
    res.tables.push_back(std::move(t));
    res.summary = {{"xi_c", s.xi_c},
                   {"d_c", nullable(dc.d_c)},
                   {"d_c_grid", nullable(grid_min)},
                   {"relative_difference", nullable(std::abs(dc.d_c - grid_min) / grid_min)},
                   {"d_c_64_directions", nullable(dense.d_c)},
                   {"directions", per}};
    return res;
}

inline ExperimentResult coherence_time_experiment(const Scenario& s, const RunOptions&)
{
    ExperimentResult res;
    const CoherenceGeometry g = centre_geometry(s);
    const TemporalExpansion te = temporal_expansion(g, s.velocity);
    const CoherenceInterval iv = coherence_interval(te.c1, te.c2, s.xi_c);
    const double span = iv.width ? 2.0 * *iv.width : 10.0;
    Table t{"coherence_time", {"dt", "exact", "linear", "quadratic"}, {}};
    for (int i = -200; i <= 200; ++i) {
        const double dt = span * i / 200.0;
        t.add({dt, exact_temporal_change(g, s.velocity, dt), te.c1 * dt, te(dt)});
    }
    const double grid = grid_search_width([&](double dt) { return exact_temporal_change(g, s.velocity, dt); },
                                          s.xi_c, span * 1e-4, 100.0 * span);
    res.tables.push_back(std::move(t));
    res.summary = {{"xi_c", s.xi_c},
                   {"speed", norm(s.velocity)},
                   {"t_c", width_json(iv.width)},
                   {"branch", to_string(iv.branch)},
                   {"linear_term_vanishes", iv.linear_term_vanishes},
                   {"c1", te.c1},
                   {"c2", te.c2},
                   {"t_c_grid", grid}};
    return res;
}

/// Inputs shared by the codebook experiments: element at the array centre, first LED and PD.
struct CodebookBench {
    OirsElement elem;
    Led led;
    Pd pd;
    Room room;
    QuadratureSpec quad;
    OptimalGainMap optimum;

    static CodebookBench make(const Scenario& s, bool with_optimum)
    {
        CodebookBench b;
        b.led = s.leds.at(0).to_led();
        b.pd = s.pds.at(0).to_pd();
        b.room = s.room;
        b.quad = s.codebook.quadrature.to_quadrature();
        b.elem = OirsElement{s.oirs.center, 0.0, 0.0, s.oirs.side, s.oirs.reflectivity};
        if (with_optimum)
            b.optimum = optimal_gain_map(DetectionGrid::over(s.room, s.codebook.grid_spacing), b.elem, b.led, b.pd,
                                         b.quad);
        return b;
    }

    Codebook nonuniform(double roll_deg, double yaw_deg) const
    {
        return build_nonuniform(led.center, elem.center, deg2rad(roll_deg), deg2rad(yaw_deg), room);
    }
};

inline const std::vector<std::string>& error_columns()
{
    static const std::vector<std::string> c{"kind",           "roll_step_deg",  "yaw_step_deg",  "radius",
                                            "codewords",      "frobenius",      "mean_abs_error", "mean_true_gain",
                                            "relative_error", "mean_swept",     "fallbacks",     "grid_points"};
    return c;
}

inline std::vector<Cell> error_row(const Codebook& cb, double roll_deg, double yaw_deg, double r,
                                   const ErrorNormResult& e)
{
    return {std::string(to_string(cb.kind)),
            roll_deg,
            yaw_deg,
            r,
            static_cast<long long>(cb.size()),
            e.frobenius,
            e.mean_abs_error,
            e.mean_true_gain,
            e.mean_true_gain > 0.0 ? e.mean_abs_error / e.mean_true_gain : 0.0,
            e.mean_swept,
            static_cast<long long>(e.fallbacks),
            static_cast<long long>(e.points)};
}

inline Json error_json(const Codebook& cb, const ErrorNormResult& e)
{
    return {{"kind", to_string(cb.kind)},
            {"codewords", cb.size()},
            {"frobenius", e.frobenius},
            {"mean_abs_error", e.mean_abs_error},
            {"mean_true_gain", e.mean_true_gain},
            {"relative_error", e.mean_true_gain > 0.0 ? e.mean_abs_error / e.mean_true_gain : 0.0},
            {"mean_swept", e.mean_swept}};
}

/// Frobenius error versus one non-uniform step, the other held at its scenario value.
inline ExperimentResult codebook_sweep(const Scenario& s, const RunOptions& opt, bool over_roll)
{
    ExperimentResult res;
    const double r = opt.radius.value_or(s.radius);
    const CodebookBench b = CodebookBench::make(s, true);
    Table t{over_roll ? "codebook_omega" : "codebook_gamma", error_columns(), {}};
    Json pts = Json::array();
    const auto& steps = over_roll ? s.codebook.roll_sweep_deg : s.codebook.yaw_sweep_deg;
    for (double step : steps) {
        const double rd = over_roll ? step : s.codebook.roll_deg;
        const double yd = over_roll ? s.codebook.yaw_deg : step;
        const Codebook cb = b.nonuniform(rd, yd);
        const ErrorNormResult e = codebook_error_norm(cb, b.elem, b.led, b.pd, b.optimum, r, b.quad);
        t.add(error_row(cb, rd, yd, r, e));
        Json j = error_json(cb, e);
        j["step_deg"] = step;
        pts.push_back(j);
    }
    const Codebook u = uniform_codebook(deg2rad(s.codebook.uniform_roll_deg), deg2rad(s.codebook.uniform_yaw_deg));
    const ErrorNormResult eu = codebook_error_norm(u, b.elem, b.led, b.pd, b.optimum, r, b.quad);
    t.add(error_row(u, s.codebook.uniform_roll_deg, s.codebook.uniform_yaw_deg, r, eu));
    res.tables.push_back(std::move(t));
    res.summary = {{"radius", r}, {"grid_spacing", s.codebook.grid_spacing}, {"nonuniform", pts},
                   {"uniform", error_json(u, eu)}};
    return res;
}

inline ExperimentResult codebook_compare(const Scenario& s, const RunOptions& opt)
{
    ExperimentResult res;
    const std::vector<double> radii = opt.radius ? std::vector<double>{*opt.radius} : s.codebook.radii;
    const CodebookBench b = CodebookBench::make(s, true);
    const Codebook u = uniform_codebook(deg2rad(s.codebook.uniform_roll_deg), deg2rad(s.codebook.uniform_yaw_deg));
    const Codebook n = b.nonuniform(s.codebook.roll_deg, s.codebook.yaw_deg);
    Table t{"codebook_compare", error_columns(), {}};
    Table map{"codebook_error_map", {"radius", "x", "y", "optimal_gain", "uniform_error", "nonuniform_error"}, {}};
    Json per = Json::array();
    for (double r : radii) {
        const ErrorNormResult eu = codebook_error_norm(u, b.elem, b.led, b.pd, b.optimum, r, b.quad);
        const ErrorNormResult en = codebook_error_norm(n, b.elem, b.led, b.pd, b.optimum, r, b.quad);
        t.add(error_row(u, s.codebook.uniform_roll_deg, s.codebook.uniform_yaw_deg, r, eu));
        t.add(error_row(n, s.codebook.roll_deg, s.codebook.yaw_deg, r, en));
        for (std::size_t k = 0; k < b.optimum.grid.size(); ++k) {
            const Vec3 p = b.optimum.grid.point(k);
            map.add({r, p.x, p.y, b.optimum.gain[k], eu.errors[k], en.errors[k]});
        }
        const double hi = std::max(eu.frobenius, en.frobenius);
        per.push_back({{"radius", r},
                       {"uniform", error_json(u, eu)},
                       {"nonuniform", error_json(n, en)},
                       {"frobenius_relative_difference", hi > 0.0 ? std::abs(eu.frobenius - en.frobenius) / hi : 0.0}});
    }
    res.tables.push_back(std::move(t));
    res.tables.push_back(std::move(map));
    res.summary = {{"grid_spacing", s.codebook.grid_spacing}, {"radii", per}};
    return res;
}

inline ExperimentResult codebook_count(const Scenario& s, const RunOptions& opt)
{
    ExperimentResult res;
    const CodebookBench b = CodebookBench::make(s, false);
    const Codebook u = uniform_codebook(deg2rad(s.codebook.uniform_roll_deg), deg2rad(s.codebook.uniform_yaw_deg));
    const Codebook n = b.nonuniform(s.codebook.roll_deg, s.codebook.yaw_deg);
    const auto tu = footprint_table(u, b.elem, b.led);
    const auto tn = footprint_table(n, b.elem, b.led);
    std::vector<double> radii = s.codebook.radii;
    const double r0 = opt.radius.value_or(s.radius);
    if (std::find(radii.begin(), radii.end(), r0) == radii.end())
        radii.push_back(r0);
    std::sort(radii.begin(), radii.end());
    Table t{"codebook_count",
            {"radius", "pd_x", "pd_y", "uniform_count", "nonuniform_count", "ratio", "uniform_total",
             "nonuniform_total"},
            {}};
    Json at_r;
    for (double r : radii) {
        const std::size_t cu = sweep_count(tu, s.codebook.pd_estimate, r);
        const std::size_t cn = sweep_count(tn, s.codebook.pd_estimate, r);
        const double ratio = cu > 0 ? static_cast<double>(cn) / static_cast<double>(cu) : 0.0;
        t.add({r, s.codebook.pd_estimate.x, s.codebook.pd_estimate.y, static_cast<long long>(cu),
               static_cast<long long>(cn), ratio, static_cast<long long>(u.size()), static_cast<long long>(n.size())});
        if (r == r0)
            at_r = {{"radius", r}, {"uniform_count", cu}, {"nonuniform_count", cn}, {"ratio", ratio}};
    }
    res.tables.push_back(std::move(t));
    res.documents.emplace_back("codebook_uniform", Json::parse(to_json(u)));
    res.documents.emplace_back("codebook_nonuniform", Json::parse(to_json(n)));
    res.summary = {{"pd_estimate", Json::array({s.codebook.pd_estimate.x, s.codebook.pd_estimate.y,
                                                s.codebook.pd_estimate.z})},
                   {"uniform_total", u.size()},
                   {"nonuniform_total", n.size()},
                   {"at_radius", at_r}};
    return res;
}

inline ExperimentResult nmse_experiment(const Scenario& s, const RunOptions& opt, bool mimo)
{
    ExperimentResult res;
    JstsScenario js = s.jsts();
    if (!mimo) {
        js.leds.resize(1);
        js.pds.resize(1);
    } else if (js.leds.size() * js.pds.size() < 2) {
        throw UsageError("nmse-mimo needs more than one LED or PD (use the paper-mimo preset)");
    }
    js.codebook = CodebookSpec{CodebookKind::go_nonuniform, deg2rad(s.codebook.roll_deg),
                               deg2rad(s.codebook.yaw_deg)};
    if (opt.radius)
        js.radius = *opt.radius;
    const std::vector<std::size_t> spacings =
        opt.spacing ? std::vector<std::size_t>{*opt.spacing} : s.estimation.spacings;
    const std::vector<double> sigma = opt.sigma.value_or(s.estimation.sigma);
    if (sigma.empty() || spacings.empty())
        throw UsageError("need at least one noise level and one spacing");
    const std::size_t trials = opt.trials.value_or(s.estimation.trials);
    const PilotConfig pilot{s.estimation.pilot_slots, s.estimation.pilot_amplitude};

    const std::string tag = mimo ? "nmse_mimo" : "nmse_siso";
    Table mean{tag,
               {"s", "sigma", "trials", "mean_nmse", "mean_nmse_db", "stderr_nmse", "min_nmse", "max_nmse", "params",
                "blocks", "swept"},
               {}};
    Table per{tag + "_trials", {"s", "sigma", "trial", "trial_seed", "nmse"}, {}};
    Json summary = Json::array();
    for (std::size_t sp : spacings) {
        JstsOptions jo;
        jo.spacing = sp;
        jo.interp.kind = s.estimation.interpolation;
        jo.interp.extrapolation = s.estimation.extrapolation;
        jo.activated_only = s.estimation.activated_only;
        const JstsSetup setup = prepare_jsts(js, jo);
        Json curve = Json::array();
        for (std::size_t si = 0; si < sigma.size(); ++si) {
            double sum = 0.0, sq = 0.0, lo = std::numeric_limits<double>::infinity(), hi = 0.0;
            JstsDiagnostics last;
            for (std::size_t k = 0; k < trials; ++k) {
                const std::uint64_t ts = trial_seed(opt.seed, k);
                JstsResult r = run_jsts(setup, pilot, sigma[si], ts);
                const double v = r.diagnostics.nmse;
                sum += v;
                sq += v * v;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                per.add({static_cast<long long>(setup.plan.s), sigma[si], static_cast<long long>(k),
                         std::to_string(ts), v});
                if (si == 0 && k == 0) {
                    Table est{"estimation_s" + std::to_string(setup.plan.s),
                              {"n", "n_t", "n_r", "true_gain", "estimated_gain", "block"},
                              {}};
                    for (const EstimateRow& row : estimate_rows(setup, r.estimate))
                        est.add({static_cast<long long>(row.n), static_cast<long long>(row.n_t),
                                 static_cast<long long>(row.n_r), row.true_gain, row.estimated_gain,
                                 static_cast<long long>(row.block)});
                    res.tables.push_back(std::move(est));
                    res.documents.emplace_back("diagnostics_s" + std::to_string(setup.plan.s),
                                               Json(diagnostics_json(r.diagnostics)));
                }
                last = std::move(r.diagnostics);
            }
            const double n = static_cast<double>(trials);
            const double m = sum / n;
            const double var = trials > 1 ? std::max(0.0, (sq - n * m * m) / (n - 1.0)) : 0.0;
            mean.add({static_cast<long long>(setup.plan.s), sigma[si], static_cast<long long>(trials), m,
                      10.0 * std::log10(m), std::sqrt(var / n), lo, hi, static_cast<long long>(last.params),
                      static_cast<long long>(last.blocks), static_cast<long long>(last.swept)});
            curve.push_back({{"sigma", sigma[si]}, {"mean_nmse", m}});
        }
        summary.push_back({{"s", setup.plan.s},
                           {"d_c", nullable(setup.d_c)},
                           {"lambertian_k", setup.k},
                           {"warning", setup.plan.warning},
                           {"curve", curve}});
    }
    res.tables.insert(res.tables.begin(), std::move(per));
    res.tables.insert(res.tables.begin(), std::move(mean));
    res.summary = {{"nt", js.leds.size()}, {"nr", js.pds.size()}, {"trials", trials}, {"truth", to_string(js.truth)},
                   {"spacings", summary}};
    return res;
}

inline ExperimentResult overhead(const Scenario& s, const RunOptions& opt)
{
    ExperimentResult res;
    const std::vector<std::size_t> spacings =
        opt.spacing ? std::vector<std::size_t>{*opt.spacing} : s.estimation.spacings;
    Table t{"overhead",
            {"s", "nt", "nr", "qv", "qh", "blocks", "params", "baseline_params", "reduction", "flops_per_block",
             "flops", "baseline_flops"},
            {}};
    std::vector<std::pair<std::size_t, std::size_t>> links{{1, 1}};
    if (s.leds.size() * s.pds.size() > 1)
        links.emplace_back(s.leds.size(), s.pds.size());
    Json rows = Json::array();
    for (const auto& [nt, nr] : links)
        for (std::size_t sp : spacings) {
            const SubarrayPlan plan = partition_with_spacing(s.oirs.rows, s.oirs.cols, sp);
            const OverheadReport o = overhead_report(plan, nt, nr, s.estimation.pilot_slots);
            t.add({static_cast<long long>(o.s), static_cast<long long>(nt), static_cast<long long>(nr),
                   static_cast<long long>(o.qv), static_cast<long long>(o.qh), static_cast<long long>(o.blocks),
                   static_cast<long long>(o.params), static_cast<long long>(o.baseline_params), o.reduction,
                   o.flops_per_block, o.flops, o.baseline_flops});
            rows.push_back({{"s", o.s}, {"nt", nt}, {"nr", nr}, {"qv", o.qv}, {"qh", o.qh}, {"params", o.params},
                            {"reduction", o.reduction}});
        }
    res.tables.push_back(std::move(t));
    res.summary = {{"rows", rows}};
    return res;
}

} // namespace detail

inline ExperimentResult run_experiment(const std::string& name, const Scenario& s, const RunOptions& opt = {})
{
    validate(s);
    ExperimentResult r;
    if (name == "angle-selectivity")
        r = detail::angle_selectivity(s, opt);
    else if (name == "coherence-space")
        r = detail::coherence_space(s, opt);
    else if (name == "coherence-time")
        r = detail::coherence_time_experiment(s, opt);
    else if (name == "codebook-omega")
        r = detail::codebook_sweep(s, opt, true);
    else if (name == "codebook-gamma")
        r = detail::codebook_sweep(s, opt, false);
    else if (name == "codebook-compare")
        r = detail::codebook_compare(s, opt);
    else if (name == "codebook-count")
        r = detail::codebook_count(s, opt);
    else if (name == "nmse-siso")
        r = detail::nmse_experiment(s, opt, false);
    else if (name == "nmse-mimo")
        r = detail::nmse_experiment(s, opt, true);
    else if (name == "overhead")
        r = detail::overhead(s, opt);
    else {
        std::string names;
        for (const auto& n : experiment_names())
            names += (names.empty() ? "" : ", ") + n;
        throw UsageError("unknown experiment '" + name + "' (expected one of " + names + ")");
    }
    r.name = name;
    return r;
}

/// Writes <table>.csv, <document>.json, scenario.json and manifest.json into out_dir.
inline std::vector<std::filesystem::path> write_experiment(const ExperimentResult& r, const Scenario& s,
                                                           const RunOptions& opt,
                                                           const std::filesystem::path& out_dir)
{
    std::filesystem::create_directories(out_dir);
    const Provenance prov{opt.seed, scenario_hash(s)};
    std::vector<std::filesystem::path> files;
    for (const Table& t : r.tables) {
        files.push_back(out_dir / (t.name + ".csv"));
        write_text(files.back(), csv_text(t, prov));
    }
    for (const auto& [stem, body] : r.documents) {
        files.push_back(out_dir / (stem + ".json"));
        write_text(files.back(), body.dump(2) + "\n");
    }
    files.push_back(out_dir / "scenario.json");
    write_text(files.back(), scenario_text(s));

    Json m;
    m["tool"] = kToolName;
    m["version"] = kToolVersion;
    m["experiment"] = r.name;
    m["scenario_hash"] = prov.scenario_hash;
    m["schema_version"] = s.schema_version;
    m["seed"] = opt.seed;
    const std::size_t trials = opt.trials.value_or(s.estimation.trials);
    if (r.name == "nmse-siso" || r.name == "nmse-mimo") {
        Json seeds = Json::array();
        for (std::size_t k = 0; k < trials; ++k)
            seeds.push_back(std::to_string(detail::trial_seed(opt.seed, k)));
        m["trial_seeds"] = seeds;
    }
    Json overrides = Json::object();
    if (opt.spacing)
        overrides["spacing"] = *opt.spacing;
    if (opt.sigma)
        overrides["sigma"] = *opt.sigma;
    if (opt.radius)
        overrides["radius"] = *opt.radius;
    if (opt.trials)
        overrides["trials"] = *opt.trials;
    m["overrides"] = overrides;
    m["timestamp"] = utc_timestamp();
    Json names = Json::array();
    for (const auto& f : files)
        names.push_back(f.filename().string());
    m["files"] = names;
    m["summary"] = r.summary;
    files.push_back(out_dir / "manifest.json");
    write_text(files.back(), m.dump(2) + "\n");
    return files;
}

} // namespace oirs
