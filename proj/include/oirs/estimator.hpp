#pragma once
/**
 * @file estimator.hpp
 * @brief Joint space-time sampling (JSTS) channel estimation.
 *
 * The array is cut into s x s subarrays. Within a subarray the element at
 * local offset (n_r, n_t) is aligned to PD n_r and LED n_t, so one pilot
 * block per subarray measures one sample of every cascaded channel. The
 * samples form a coarse grid per LED/PD pair that is interpolated back to
 * every element (and across coherence windows when the receiver moves).
 */

#include "oirs/channel.hpp"
#include "oirs/codebook.hpp"
#include "oirs/coherence.hpp"
#include "oirs/format.hpp"
#include "oirs/interpolation.hpp"
#include "oirs/linalg.hpp"

#include "json.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace oirs {

/// A schedule or estimate store that does not cover every block it should.
class ScheduleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SubarrayPlan {
    std::size_t nv = 1;
    std::size_t nh = 1;
    std::size_t s = 1;   ///< elements per subarray side
    std::size_t qv = 1;  ///< subarray rows
    std::size_t qh = 1;  ///< subarray columns
    bool degenerate = false;
    std::string warning;

    std::size_t elements() const { return nv * nh; }
    std::size_t blocks() const { return qv * qh; }
    std::size_t block_index(std::size_t q_v, std::size_t q_h) const { return q_v * qh + q_h; }
    std::size_t element(std::size_t i, std::size_t j) const { return i * nh + j; }

    /// Element at local offset (lr, lc) of subarray (q_v, q_h), if it exists.
    std::optional<std::size_t> element_at(std::size_t q_v, std::size_t q_h, std::size_t lr, std::size_t lc) const
    {
        const std::size_t i = q_v * s + lr, j = q_h * s + lc;
        if (lr >= s || lc >= s || i >= nv || j >= nh)
            return std::nullopt;
        return element(i, j);
    }

    /// Subarray (q_v, q_h) that holds element n.
    std::pair<std::size_t, std::size_t> subarray_of(std::size_t n) const { return {(n / nh) / s, (n % nh) / s}; }
};

/// Plan with an explicit spacing s.
inline SubarrayPlan partition_with_spacing(std::size_t nv, std::size_t nh, std::size_t s)
{
    if (nv == 0 || nh == 0)
        throw DomainError("partition: empty array");
    if (s == 0)
        throw DomainError("partition: spacing must be at least one element");
    SubarrayPlan p;
    p.nv = nv;
    p.nh = nh;
    if (s > std::min(nv, nh)) {
        p.degenerate = true;
        p.warning = "spacing " + std::to_string(s) + " exceeds the array; using a single subarray";
        s = std::max(nv, nh);
    }
    p.s = s;
    p.qv = (nv + s - 1) / s;
    p.qh = (nh + s - 1) / s;
    return p;
}

/// s = ceil(d_c / b).
inline std::size_t spacing_from_coherence(double d_c, double b)
{
    if (!(d_c > 0.0) || !(b > 0.0))
        throw DomainError("partition: coherence distance and element spacing must be positive");
    const double r = std::ceil(d_c / b - 1e-9);
    if (!std::isfinite(r) || r > 1e9)
        return std::numeric_limits<std::size_t>::max();
    return std::max<std::size_t>(1, static_cast<std::size_t>(r));
}

inline SubarrayPlan partition_subarrays(std::size_t nv, std::size_t nh, double d_c, double b)
{
    return partition_with_spacing(nv, nh, spacing_from_coherence(d_c, b));
}

struct Assignment {
    std::size_t n;
    std::size_t n_r;
    std::size_t n_t;
};

struct ScheduledBlock {
    std::size_t id = 0;
    std::size_t q = 0;
    std::size_t q_v = 0;
    std::size_t q_h = 0;
    std::size_t pass = 0;
    std::vector<Assignment> assignments;
};

/**
 * @brief Base reflection patterns and their per-subarray activations.
 *
 * When s is smaller than N_r or N_t one pattern cannot host every pair, so
 * the pairs are cycled over ceil(N_r/s) * ceil(N_t/s) passes.
 */
struct ReflectionSchedule {
    std::size_t nt = 1;
    std::size_t nr = 1;
    std::size_t passes_r = 1;
    std::size_t passes_t = 1;
    std::size_t subarrays = 1;
    std::vector<AlignmentConfig> base;  ///< V* of each pass
    std::vector<ScheduledBlock> blocks; ///< pass-major, then subarray
    std::size_t rank = 0;               ///< rank of the base patterns stacked over passes

    std::size_t passes() const { return passes_r * passes_t; }
    std::size_t block_id(std::size_t pass, std::size_t q) const { return pass * subarrays + q; }
    bool full_rank() const { return rank == nt * nr; }
};

inline ReflectionSchedule build_schedule(const SubarrayPlan& plan, std::size_t nt, std::size_t nr)
{
    if (nt == 0 || nr == 0)
        throw DomainError("build_schedule: need at least one LED and one PD");
    ReflectionSchedule sc;
    sc.nt = nt;
    sc.nr = nr;
    sc.passes_r = (nr + plan.s - 1) / plan.s;
    sc.passes_t = (nt + plan.s - 1) / plan.s;
    sc.subarrays = plan.blocks();
    const std::size_t N = plan.elements();
    Matrix all(N * sc.passes(), nt * nr);
    for (std::size_t pr = 0; pr < sc.passes_r; ++pr)
        for (std::size_t pt = 0; pt < sc.passes_t; ++pt) {
            const std::size_t pass = pr * sc.passes_t + pt;
            std::vector<std::array<std::size_t, 2>> pair_of(N, {nr, nt});
            for (std::size_t qv = 0; qv < plan.qv; ++qv)
                for (std::size_t qh = 0; qh < plan.qh; ++qh) {
                    ScheduledBlock b;
                    b.q = plan.block_index(qv, qh);
                    b.q_v = qv;
                    b.q_h = qh;
                    b.pass = pass;
                    b.id = sc.block_id(pass, b.q);
                    for (std::size_t lr = 0; lr < plan.s; ++lr)
                        for (std::size_t lc = 0; lc < plan.s; ++lc) {
                            const std::size_t r = pr * plan.s + lr, t = pt * plan.s + lc;
                            const auto n = plan.element_at(qv, qh, lr, lc);
                            if (!n || r >= nr || t >= nt)
                                continue;
                            b.assignments.push_back({*n, r, t});
                            pair_of[*n] = {r, t};
                        }
                    sc.blocks.push_back(std::move(b));
                }
            sc.base.push_back(AlignmentConfig::single_pairs(N, nt, nr, pair_of));
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t c = 0; c < nt * nr; ++c)
                    all(pass * N + n, c) = sc.base.back().V(n, c);
        }
    sc.rank = numerical_rank(all);
    return sc;
}

/// V*_q: the base pattern of the block's pass with every row outside its subarray zeroed.
inline AlignmentConfig block_pattern(const SubarrayPlan& plan, const ReflectionSchedule& sc, const ScheduledBlock& b)
{
    const AlignmentConfig& base = sc.base.at(b.pass);
    Matrix F = base.F, G = base.G;
    for (std::size_t n = 0; n < plan.elements(); ++n) {
        const auto [qv, qh] = plan.subarray_of(n);
        if (qv == b.q_v && qh == b.q_h)
            continue;
        for (std::size_t c = 0; c < F.cols(); ++c)
            F(n, c) = 0.0;
        for (std::size_t c = 0; c < G.cols(); ++c)
            G(n, c) = 0.0;
    }
    return AlignmentConfig::from(F, G);
}

struct PilotConfig {
    std::size_t slots = 100;  ///< P
    double amplitude = 1.0;   ///< c
};

/// X = c * [I I ... ] truncated to P columns.
inline Matrix pilot_matrix(std::size_t nt, const PilotConfig& cfg = {})
{
    if (cfg.slots < nt)
        throw DomainError("pilot: need at least N_t slots");
    if (!(cfg.amplitude > 0.0))
        throw DomainError("pilot: amplitude must be positive");
    Matrix X(nt, cfg.slots);
    for (std::size_t p = 0; p < cfg.slots; ++p)
        X(p % nt, p) = cfg.amplitude;
    return X;
}

/// H = Y X^T (X X^T + sigma^2 I)^-1, the ridge-form MMSE estimate.
inline Matrix mmse_estimate(const Matrix& Y, const Matrix& X, double sigma)
{
    if (Y.cols() != X.cols())
        throw DimensionError("mmse_estimate: Y and X must have the same number of slots");
    if (!(sigma >= 0.0))
        throw DomainError("mmse_estimate: sigma must be nonnegative");
    Matrix gram = matmul(X, transpose(X));
    for (std::size_t i = 0; i < gram.rows(); ++i)
        gram(i, i) += sigma * sigma;
    return transpose(solve_spd(gram, matmul(X, transpose(Y))));
}

/// Channel seen by one block: H_q[n_r, n_t] summed over its assignments.
inline Matrix block_channel(const CascadedChannel& hc, const ScheduledBlock& b)
{
    Matrix H(hc.nr, hc.nt);
    for (const Assignment& a : b.assignments)
        H(a.n_r, a.n_t) += hc.H(a.n, CascadedChannel::column(a.n_r, a.n_t, hc.nr));
    return H;
}

/// Independent stream per (seed, window, block).
inline std::uint64_t block_seed(std::uint64_t seed, std::size_t window, std::size_t block)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(window), static_cast<std::uint32_t>(block)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

/// Samples of one LED/PD pair's cascaded channel on the subarray grid.
struct ClusterGrid {
    std::size_t n_r = 0;
    std::size_t n_t = 0;
    std::vector<std::size_t> rows;       ///< element row of each grid row
    std::vector<std::size_t> cols;       ///< element column of each grid column
    Matrix values;                       ///< rows.size() x cols.size()
    std::vector<std::size_t> block_ids;  ///< row-major, same shape as values

    /// Element indices sampled for this pair (the set Omega).
    std::vector<std::size_t> omega(const SubarrayPlan& plan) const
    {
        std::vector<std::size_t> out;
        for (std::size_t i : rows)
            for (std::size_t j : cols)
                out.push_back(plan.element(i, j));
        return out;
    }
};

/**
 * @brief Gathers per-block estimates into one grid per pair.
 *
 * `estimates[id]` is the N_r x N_t estimate of block `id`; a missing entry
 * for a block the grid needs raises ScheduleError.
 */
inline std::vector<ClusterGrid> collect_clusters(const std::vector<std::optional<Matrix>>& estimates,
                                                 const SubarrayPlan& plan, const ReflectionSchedule& sc)
{
    std::vector<ClusterGrid> out;
    for (std::size_t t = 0; t < sc.nt; ++t)
        for (std::size_t r = 0; r < sc.nr; ++r) {
            ClusterGrid g;
            g.n_r = r;
            g.n_t = t;
            const std::size_t lr = r % plan.s, lc = t % plan.s;
            const std::size_t pass = (r / plan.s) * sc.passes_t + t / plan.s;
            std::vector<std::size_t> qvs, qhs;
            for (std::size_t qv = 0; qv < plan.qv; ++qv)
                if (qv * plan.s + lr < plan.nv) {
                    qvs.push_back(qv);
                    g.rows.push_back(qv * plan.s + lr);
                }
            for (std::size_t qh = 0; qh < plan.qh; ++qh)
                if (qh * plan.s + lc < plan.nh) {
                    qhs.push_back(qh);
                    g.cols.push_back(qh * plan.s + lc);
                }
            if (g.rows.empty() || g.cols.empty())
                throw ScheduleError("pair (" + std::to_string(r) + ", " + std::to_string(t) +
                                    ") has no element in any subarray");
            g.values = Matrix(g.rows.size(), g.cols.size());
            for (std::size_t a = 0; a < qvs.size(); ++a)
                for (std::size_t b = 0; b < qhs.size(); ++b) {
                    const std::size_t id = sc.block_id(pass, plan.block_index(qvs[a], qhs[b]));
                    if (id >= estimates.size() || !estimates[id])
                        throw ScheduleError("incomplete schedule: block " + std::to_string(id) + " not estimated");
                    g.values(a, b) = (*estimates[id])(r, t);
                    g.block_ids.push_back(id);
                }
            out.push_back(std::move(g));
        }
    return out;
}

struct InterpolationOptions {
    InterpKind kind = InterpKind::cubic;
    ExtrapPolicy extrapolation = ExtrapPolicy::quadratic;
    bool clamp_negative = true;
};

struct InterpolatedChannel {
    CascadedChannel hc;
    std::size_t extrapolated = 0;  ///< (element, pair) entries outside the sampled hull
    bool time_extrapolated = false;
    std::size_t clamped = 0;       ///< negative values set to zero
};

/**
 * @brief Full cascaded channel at `target_time` from cluster grids over time windows.
 *
 * Spatial weights are separable in element row and column; the windows are
 * then combined with linear weights in time.
 */
inline InterpolatedChannel interpolate_full(const std::vector<std::vector<ClusterGrid>>& windows,
                                            const std::vector<double>& times, const SubarrayPlan& plan,
                                            std::size_t nt, std::size_t nr, double target_time,
                                            const InterpolationOptions& opt = {})
{
    if (windows.empty() || windows.size() != times.size())
        throw DimensionError("interpolate_full: need one time stamp per window");
    InterpolatedChannel out;
    out.hc = {Matrix(plan.elements(), nt * nr), nt, nr};
    const AxisWeights tw = axis_weights(times, {target_time}, InterpKind::linear, opt.extrapolation);
    out.time_extrapolated = tw.extrapolated > 0;
    std::vector<double> all_rows(plan.nv), all_cols(plan.nh);
    for (std::size_t i = 0; i < plan.nv; ++i)
        all_rows[i] = static_cast<double>(i);
    for (std::size_t j = 0; j < plan.nh; ++j)
        all_cols[j] = static_cast<double>(j);
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const double a = tw.W(0, w);
        if (a == 0.0)
            continue;
        if (windows[w].size() != nt * nr)
            throw DimensionError("interpolate_full: expected one grid per pair");
        for (const ClusterGrid& g : windows[w]) {
            std::vector<double> kr(g.rows.begin(), g.rows.end()), kc(g.cols.begin(), g.cols.end());
            const AxisWeights rw = axis_weights(kr, all_rows, opt.kind, opt.extrapolation);
            const AxisWeights cw = axis_weights(kc, all_cols, opt.kind, opt.extrapolation);
            const Matrix full = interpolate_grid(g.values, rw, cw);
            const std::size_t col = CascadedChannel::column(g.n_r, g.n_t, nr);
            for (std::size_t i = 0; i < plan.nv; ++i)
                for (std::size_t j = 0; j < plan.nh; ++j)
                    out.hc.H(plan.element(i, j), col) += a * full(i, j);
            if (w == 0)
                out.extrapolated += rw.extrapolated * plan.nh + cw.extrapolated * plan.nv -
                                    rw.extrapolated * cw.extrapolated;
        }
    }
    if (opt.clamp_negative)
        for (double& x : out.hc.H.data())
            if (x < 0.0) {
                x = 0.0;
                ++out.clamped;
            }
    return out;
}

/// ||est - truth||_F^2 / ||truth||_F^2
inline double nmse(const Matrix& est, const Matrix& truth)
{
    if (est.rows() != truth.rows() || est.cols() != truth.cols())
        throw DimensionError("nmse: shapes differ");
    const double den = frobenius_norm(truth);
    if (!(den > 0.0))
        throw DomainError("nmse: reference has zero norm");
    const double num = frobenius_norm(est - truth);
    return (num * num) / (den * den);
}

/// NMSE restricted to entries where mask is nonzero.
inline double nmse(const Matrix& est, const Matrix& truth, const Matrix& mask)
{
    if (mask.rows() != truth.rows() || mask.cols() != truth.cols())
        throw DimensionError("nmse: mask shape differs");
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k)
        if (mask.data()[k] != 0.0) {
            const double d = est.data()[k] - truth.data()[k];
            num += d * d;
            den += truth.data()[k] * truth.data()[k];
        }
    if (!(den > 0.0))
        throw DomainError("nmse: reference has zero norm on the selected entries");
    return num / den;
}

struct OverheadReport {
    std::size_t s = 1;
    std::size_t qv = 1;
    std::size_t qh = 1;
    std::size_t blocks = 1;
    std::size_t params = 0;           ///< sampled (element, pair) entries
    std::size_t baseline_params = 0;  ///< N N_t N_r
    double reduction = 1.0;           ///< baseline_params / params
    double flops_per_block = 0.0;     ///< P N_t^2 (N_t + 2 N_r)
    double flops = 0.0;
    double baseline_flops = 0.0;
};

inline OverheadReport overhead_report(const SubarrayPlan& plan, std::size_t nt, std::size_t nr, std::size_t P)
{
    const ReflectionSchedule sc = build_schedule(plan, nt, nr);
    OverheadReport r;
    r.s = plan.s;
    r.qv = plan.qv;
    r.qh = plan.qh;
    r.blocks = sc.blocks.size();
    for (const auto& b : sc.blocks)
        r.params += b.assignments.size();
    r.baseline_params = plan.elements() * nt * nr;
    r.reduction = static_cast<double>(r.baseline_params) / static_cast<double>(r.params);
    const double fnt = static_cast<double>(nt), fnr = static_cast<double>(nr);
    r.flops_per_block = static_cast<double>(P) * fnt * fnt * (fnt + 2.0 * fnr);
    r.flops = r.flops_per_block * static_cast<double>(r.blocks);
    const ReflectionSchedule base = build_schedule(partition_with_spacing(plan.nv, plan.nh, 1), nt, nr);
    r.baseline_flops = r.flops_per_block * static_cast<double>(base.blocks.size());
    return r;
}

// ---------------------------------------------------------------------------
// End-to-end pipeline

enum class TruthModel { lambertian, physical };

inline const char* to_string(TruthModel m) { return m == TruthModel::lambertian ? "lambertian" : "physical"; }

struct CodebookSpec {
    CodebookKind kind = CodebookKind::go_nonuniform;
    double d_roll = deg2rad(1.5);
    double d_yaw = deg2rad(15.0);
};

struct JstsScenario {
    OirsArray array{24, 24};
    std::vector<Led> leds;
    std::vector<Pd> pds;
    Room room;
    Vec3 velocity{};         ///< receiver velocity, m/s
    double duration = 0.0;   ///< observation time, s
    double target_time = 0.0;
    double xi_c = 0.04;
    double radius = 0.5;     ///< positioning error radius r, m
    TruthModel truth = TruthModel::physical;
    double lambertian_k = 0.0;  ///< 0: calibrate against the physical model at the array centre
    QuadratureSpec quad{16, 16, IndicatorRule::clipped};
    std::optional<CodebookSpec> codebook;
};

struct JstsOptions {
    std::size_t spacing = 0;  ///< 0: derive s from the coherence distance
    InterpolationOptions interp{};
    bool activated_only = false;
};

/// PD positions at time t.
inline std::vector<Pd> pds_at(const JstsScenario& sc, double t)
{
    std::vector<Pd> out = sc.pds;
    for (Pd& p : out)
        p.center = p.center + sc.velocity * t;
    return out;
}

/// Cascaded channel of every element and pair; elements are aligned to each pair in turn.
inline CascadedChannel cascaded_truth(const JstsScenario& sc, const std::vector<Pd>& pds, double k)
{
    const std::size_t nt = sc.leds.size(), nr = pds.size();
    CascadedChannel hc{Matrix(sc.array.size(), nt * nr), nt, nr};
    for (std::size_t n = 0; n < sc.array.size(); ++n) {
        const Vec3 R = sc.array.element_center(n);
        for (std::size_t t = 0; t < nt; ++t)
            for (std::size_t r = 0; r < nr; ++r) {
                double g;
                if (sc.truth == TruthModel::lambertian) {
                    g = lambertian_gain(R, pds[r].center, sc.leds[t], pds[r], k);
                } else {
                    const OirsElement e =
                        aligned_element(R, sc.leds[t].center, pds[r].center, sc.array.side, sc.array.reflectivity);
                    g = patch_gain(e, sc.leds[t], pds[r], sc.quad);
                }
                hc.H(n, CascadedChannel::column(r, t, nr)) = g;
            }
    }
    return hc;
}

/// Everything about a run that does not depend on the noise draw.
struct JstsSetup {
    JstsScenario scenario;
    JstsOptions options;
    double k = 1.0;
    double d_c = 0.0;
    std::optional<double> t_c;
    SubarrayPlan plan;
    ReflectionSchedule schedule;
    std::vector<double> times;
    std::vector<CascadedChannel> window_truth;
    CascadedChannel target_truth;
    Matrix activated;            ///< 1 where an (element, pair) entry is measured directly
    std::vector<long> block_of;  ///< measuring block per H_c entry (row-major), -1 if interpolated
    std::size_t swept = 0;       ///< codewords swept over all elements and pairs
};

inline void validate(const JstsScenario& sc)
{
    sc.array.validate();
    if (sc.leds.empty() || sc.pds.empty())
        throw ValidationError("scenario needs at least one LED and one PD");
    for (const Led& l : sc.leds)
        l.validate();
    for (const Pd& p : sc.pds)
        p.validate();
    if (!(sc.xi_c > 0.0 && sc.xi_c < 1.0))
        throw ValidationError("xi_c must lie in (0, 1)");
    if (!(sc.duration >= 0.0))
        throw ValidationError("duration must be nonnegative");
}

/**
 * @brief Coherence analysis, partition, schedule, truth channels and beam sweep counts.
 *
 * d_c and t_c are the minima over LED/PD pairs at the array centre. With a
 * moving receiver the observation time is split into windows of length t_c.
 */
inline JstsSetup prepare_jsts(const JstsScenario& scn, const JstsOptions& opt = {})
{
    validate(scn);
    JstsSetup s;
    s.scenario = scn;
    s.options = opt;
    const std::size_t nt = scn.leds.size(), nr = scn.pds.size();

    s.d_c = std::numeric_limits<double>::infinity();
    for (const Led& l : scn.leds)
        for (const Pd& p : scn.pds) {
            const auto g = CoherenceGeometry::make(l.center, scn.array.center, p.center, l.normal, p.normal,
                                                   l.lambertian_index);
            s.d_c = std::min(s.d_c, coherence_distance(g, scn.xi_c).d_c);
            const auto tc = coherence_time(g, scn.velocity, scn.xi_c);
            if (tc.width && (!s.t_c || *tc.width < *s.t_c))
                s.t_c = *tc.width;
        }

    const std::size_t sp = opt.spacing ? opt.spacing
                                       : (std::isfinite(s.d_c) ? spacing_from_coherence(s.d_c, scn.array.spacing)
                                                               : std::max(scn.array.rows, scn.array.cols));
    s.plan = partition_with_spacing(scn.array.rows, scn.array.cols, sp);
    s.schedule = build_schedule(s.plan, nt, nr);

    s.k = scn.lambertian_k;
    if (scn.truth == TruthModel::lambertian && !(s.k > 0.0))
        s.k = calibrate_lambertian_scale(scn.array.center, scn.leds[0], scn.pds[0], scn.array.side,
                                         scn.array.reflectivity, scn.quad);

    const bool moving = s.t_c && scn.duration > 0.0;
    const std::size_t W = moving ? static_cast<std::size_t>(std::floor(scn.duration / *s.t_c)) + 1 : 1;
    for (std::size_t w = 0; w < W; ++w) {
        const double t = moving ? static_cast<double>(w) * *s.t_c : 0.0;
        s.times.push_back(t);
        s.window_truth.push_back(cascaded_truth(scn, pds_at(scn, t), s.k));
    }
    s.target_truth = (W == 1 && scn.target_time == 0.0) ? s.window_truth[0]
                                                        : cascaded_truth(scn, pds_at(scn, scn.target_time), s.k);

    s.activated = Matrix(s.plan.elements(), nt * nr);
    s.block_of.assign(s.activated.size(), -1);
    for (const auto& b : s.schedule.blocks)
        for (const Assignment& a : b.assignments) {
            const std::size_t col = CascadedChannel::column(a.n_r, a.n_t, nr);
            s.activated(a.n, col) = 1.0;
            s.block_of[a.n * nt * nr + col] = static_cast<long>(b.id);
        }

    if (scn.codebook) {
        const CodebookSpec& cs = *scn.codebook;
        for (std::size_t n = 0; n < scn.array.size(); ++n) {
            const Vec3 R = scn.array.element_center(n);
            for (const Led& l : scn.leds) {
                const Codebook cb = cs.kind == CodebookKind::uniform
                                        ? uniform_codebook(cs.d_roll, cs.d_yaw)
                                        : build_nonuniform(l.center, R, cs.d_roll, cs.d_yaw, scn.room);
                std::vector<Vec3> centers;
                for (const Codeword& c : cb.codewords())
                    if (const auto f = footprint(l.center, R, c.roll, c.yaw))
                        centers.push_back(*f);
                for (const Pd& p : scn.pds)
                    for (const Vec3& c : centers)
                        if (distance(c, p.center) <= scn.radius)
                            ++s.swept;
            }
        }
    }
    return s;
}

struct JstsDiagnostics {
    double nmse = 0.0;
    std::size_t params = 0;
    std::size_t swept = 0;
    std::size_t s = 1;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::size_t blocks = 0;
    std::size_t windows = 1;
    double d_c = 0.0;
    std::optional<double> t_c;
    std::size_t extrapolated = 0;
    bool time_extrapolated = false;
    std::size_t clamped = 0;
    std::vector<double> block_nmse;  ///< per block of the first window; NaN for an all-zero block
};

struct JstsResult {
    CascadedChannel estimate;
    JstsDiagnostics diagnostics;
};

/// One noisy realisation of the full pipeline.
inline JstsResult run_jsts(const JstsSetup& s, const PilotConfig& pilot, double sigma, std::uint64_t seed)
{
    const std::size_t nt = s.scenario.leds.size(), nr = s.scenario.pds.size();
    const Matrix X = pilot_matrix(nt, pilot);
    JstsDiagnostics d;
    d.sigma = sigma;
    d.seed = seed;
    d.s = s.plan.s;
    d.swept = s.swept;
    d.blocks = s.schedule.blocks.size();
    d.windows = s.times.size();
    d.d_c = s.d_c;
    d.t_c = s.t_c;

    std::vector<std::vector<ClusterGrid>> grids;
    for (std::size_t w = 0; w < s.times.size(); ++w) {
        std::vector<std::optional<Matrix>> est(s.schedule.blocks.size());
        for (const ScheduledBlock& b : s.schedule.blocks) {
            const Matrix Hq = block_channel(s.window_truth[w], b);
            std::mt19937_64 rng(block_seed(seed, w, b.id));
            const Matrix Y = simulate_received(Hq, X, sigma, rng);
            est[b.id] = mmse_estimate(Y, X, sigma);
            if (w == 0) {
                const double den = frobenius_norm(Hq);
                const double num = frobenius_norm(*est[b.id] - Hq);
                d.block_nmse.push_back(den > 0.0 ? num * num / (den * den)
                                                 : std::numeric_limits<double>::quiet_NaN());
            }
        }
        grids.push_back(collect_clusters(est, s.plan, s.schedule));
    }
    for (const ClusterGrid& g : grids[0])
        d.params += g.rows.size() * g.cols.size();

    InterpolatedChannel full =
        interpolate_full(grids, s.times, s.plan, nt, nr, s.scenario.target_time, s.options.interp);
    d.extrapolated = full.extrapolated;
    d.time_extrapolated = full.time_extrapolated;
    d.clamped = full.clamped;
    d.nmse = s.options.activated_only ? nmse(full.hc.H, s.target_truth.H, s.activated)
                                      : nmse(full.hc.H, s.target_truth.H);
    return {std::move(full.hc), std::move(d)};
}

inline JstsResult jsts_run(const JstsScenario& scn, const PilotConfig& pilot, double sigma, std::uint64_t seed,
                           const JstsOptions& opt = {})
{
    return run_jsts(prepare_jsts(scn, opt), pilot, sigma, seed);
}

/// Summary object {nmse, params, swept, s, sigma, seed, ...}.
inline nlohmann::ordered_json diagnostics_json(const JstsDiagnostics& d)
{
    auto num = [](double x) { return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(); };
    nlohmann::ordered_json j;
    j["nmse"] = num(d.nmse);
    j["params"] = d.params;
    j["swept"] = d.swept;
    j["s"] = d.s;
    j["sigma"] = d.sigma;
    j["seed"] = d.seed;
    j["blocks"] = d.blocks;
    j["windows"] = d.windows;
    j["d_c"] = num(d.d_c);
    j["t_c"] = d.t_c ? num(*d.t_c) : nlohmann::ordered_json();
    j["extrapolated_entries"] = d.extrapolated;
    j["time_extrapolated"] = d.time_extrapolated;
    j["clamped_entries"] = d.clamped;
    auto blocks = nlohmann::ordered_json::array();
    for (double x : d.block_nmse)
        blocks.push_back(num(x));
    j["block_nmse"] = blocks;
    return j;
}

struct EstimateRow {
    std::size_t n;
    std::size_t n_t;
    std::size_t n_r;
    double true_gain;
    double estimated_gain;
    long block;  ///< -1 when the entry was interpolated
};

/// One row per (n, n_t, n_r), element-major.
inline std::vector<EstimateRow> estimate_rows(const JstsSetup& s, const CascadedChannel& est)
{
    std::vector<EstimateRow> rows;
    const std::size_t nt = est.nt, nr = est.nr;
    for (std::size_t n = 0; n < est.elements(); ++n)
        for (std::size_t t = 0; t < nt; ++t)
            for (std::size_t r = 0; r < nr; ++r) {
                const std::size_t col = CascadedChannel::column(r, t, nr);
                rows.push_back({n, t, r, s.target_truth.H(n, col), est.H(n, col), s.block_of[n * nt * nr + col]});
            }
    return rows;
}

} // namespace oirs
