#include "catch_amalgamated.hpp"

#include "oirs/estimator.hpp"
#include "oirs/scenario.hpp"

#include <functional>
#include <random>
#include <set>

using namespace oirs;
using Catch::Approx;

namespace {

JstsScenario lambertian_siso()
{
    JstsScenario s = paper_siso().jsts();
    s.truth = TruthModel::lambertian;
    return s;
}

std::vector<std::optional<Matrix>> exact_estimates(const ReflectionSchedule& sc, const CascadedChannel& hc)
{
    std::vector<std::optional<Matrix>> est(sc.blocks.size());
    for (const auto& b : sc.blocks)
        est[b.id] = block_channel(hc, b);
    return est;
}

Matrix random_positive(std::size_t r, std::size_t c, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.1, 1.0);
    Matrix m(r, c);
    for (double& x : m.data())
        x = u(rng);
    return m;
}

} // namespace

TEST_CASE("Estimator - subarray partition")
{
    const std::size_t expect[][3] = {{1, 24, 24}, {2, 12, 12}, {3, 8, 8}, {4, 6, 6}};
    for (const auto& e : expect) {
        const SubarrayPlan p = partition_with_spacing(24, 24, e[0]);
        CHECK(p.qv == e[1]);
        CHECK(p.qh == e[2]);
        CHECK_FALSE(p.degenerate);
    }
    CHECK(spacing_from_coherence(0.4, 0.1) == 4);
    CHECK(spacing_from_coherence(0.52, 0.1) == 6);
    CHECK(spacing_from_coherence(0.05, 0.1) == 1);
    CHECK(partition_subarrays(24, 24, 0.4, 0.1).blocks() == 36);

    const SubarrayPlan big = partition_with_spacing(24, 24, 30);
    CHECK(big.degenerate);
    CHECK_FALSE(big.warning.empty());
    CHECK(big.blocks() == 1);

    // ragged edge: 10 = 4 + 4 + 2
    const SubarrayPlan rag = partition_with_spacing(10, 10, 4);
    CHECK(rag.qv == 3);
    CHECK_FALSE(rag.element_at(2, 2, 2, 0));
    CHECK(rag.element_at(2, 2, 1, 1) == std::optional<std::size_t>{99});

    CHECK_THROWS_AS(partition_with_spacing(24, 24, 0), DomainError);
    CHECK_THROWS_AS(spacing_from_coherence(0.0, 0.1), DomainError);

    // every element belongs to exactly the subarray that reports it
    const SubarrayPlan p = partition_with_spacing(7, 5, 3);
    for (std::size_t n = 0; n < p.elements(); ++n) {
        const auto [qv, qh] = p.subarray_of(n);
        const std::size_t i = n / p.nh, j = n % p.nh;
        CHECK(p.element_at(qv, qh, i - qv * p.s, j - qh * p.s) == std::optional<std::size_t>{n});
    }
}

TEST_CASE("Estimator - reflection schedule")
{
    for (std::size_t s : {1u, 2u, 3u, 4u})
        for (std::size_t nt : {1u, 2u, 3u})
            for (std::size_t nr : {1u, 2u}) {
                const SubarrayPlan p = partition_with_spacing(12, 12, s);
                const ReflectionSchedule sc = build_schedule(p, nt, nr);
                CHECK(sc.full_rank());
                CHECK(sc.rank == nt * nr);
                // every (element, pair) entry is measured at most once
                std::set<std::array<std::size_t, 3>> seen;
                for (const auto& b : sc.blocks)
                    for (const auto& a : b.assignments)
                        CHECK(seen.insert({a.n, a.n_r, a.n_t}).second);
            }

    // 2x2 at s = 2: every subarray hosts all four pairs in one pass
    const SubarrayPlan p = partition_with_spacing(4, 4, 2);
    const ReflectionSchedule sc = build_schedule(p, 2, 2);
    CHECK(sc.passes() == 1);
    REQUIRE(sc.blocks.size() == 4);
    for (const auto& b : sc.blocks) {
        std::set<std::pair<std::size_t, std::size_t>> pairs;
        for (const auto& a : b.assignments)
            pairs.insert({a.n_r, a.n_t});
        CHECK(pairs.size() == 4);

        // the block pattern is zero outside its subarray
        const AlignmentConfig V = block_pattern(p, sc, b);
        for (std::size_t n = 0; n < p.elements(); ++n) {
            const auto [qv, qh] = p.subarray_of(n);
            if (qv == b.q_v && qh == b.q_h)
                continue;
            for (std::size_t c = 0; c < V.V.cols(); ++c)
                CHECK(V.V(n, c) == 0.0);
        }
    }

    // 2x2 at s = 1 needs four passes
    CHECK(build_schedule(partition_with_spacing(4, 4, 1), 2, 2).passes() == 4);
    CHECK_THROWS_AS(build_schedule(p, 0, 1), DomainError);
}

TEST_CASE("Estimator - pilot matrix")
{
    for (std::size_t nt : {1u, 2u, 3u, 5u}) {
        const Matrix X = pilot_matrix(nt, {20, 1.5});
        const Matrix G = matmul(X, transpose(X));
        for (std::size_t i = 0; i < nt; ++i)
            CHECK(G(i, i) > 0.0);
        CHECK(numerical_rank(G) == nt);
        for (double x : X.data())
            CHECK(x >= 0.0);
    }
    CHECK_THROWS_AS(pilot_matrix(3, {2, 1.0}), DomainError);
    CHECK_THROWS_AS(pilot_matrix(1, {4, 0.0}), DomainError);
}

TEST_CASE("Estimator - MMSE estimate")
{
    const Matrix X = pilot_matrix(2, {4, 1.0});
    const Matrix H{{1.0, 2.0}};
    const Matrix Y = matmul(H, X);
    const Matrix E0 = mmse_estimate(Y, X, 0.0);
    CHECK(E0(0, 0) == Approx(1.0));
    CHECK(E0(0, 1) == Approx(2.0));
    // ridge shrinkage: X X^T = 2 I, so the scale is 2 / (2 + sigma^2)
    const Matrix E1 = mmse_estimate(Y, X, 1.0);
    CHECK(E1(0, 0) == Approx(2.0 / 3.0));
    CHECK(E1(0, 1) == Approx(4.0 / 3.0));

    CHECK_THROWS_AS(mmse_estimate(Matrix(1, 3), X, 0.1), DimensionError);
    CHECK_THROWS_AS(mmse_estimate(Y, X, -1.0), DomainError);

    // in the noise-dominated regime the ridge estimate beats least squares
    std::mt19937_64 rng(51);
    const Matrix Hs{{0.5, 0.4}, {0.3, 0.2}};
    const double sigma = 2.0;
    double mse_mmse = 0.0, mse_ls = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
        const Matrix Yn = simulate_received(Hs, X, sigma, rng);
        const double a = frobenius_norm(mmse_estimate(Yn, X, sigma) - Hs);
        const double b = frobenius_norm(mmse_estimate(Yn, X, 0.0) - Hs);
        mse_mmse += a * a;
        mse_ls += b * b;
    }
    CHECK(mse_mmse <= mse_ls);

    // relabelling the LEDs permutes the estimate columns
    const Matrix Xr = random_positive(3, 9, rng);
    const Matrix Hr = random_positive(2, 3, rng);
    const Matrix Yr = simulate_received(Hr, Xr, 0.05, 7u);
    const std::array<std::size_t, 3> perm{2, 0, 1};
    Matrix Xp(3, 9);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t p = 0; p < 9; ++p)
            Xp(i, p) = Xr(perm[i], p);
    const Matrix Ea = mmse_estimate(Yr, Xr, 0.05), Eb = mmse_estimate(Yr, Xp, 0.05);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(Eb(r, i) == Approx(Ea(r, perm[i])).epsilon(1e-10));
}

TEST_CASE("Estimator - cluster grids")
{
    std::mt19937_64 rng(52);

    // SISO, 4x4 array, s = 2: four blocks land on rows/cols {0, 2}
    const SubarrayPlan p = partition_with_spacing(4, 4, 2);
    const ReflectionSchedule sc = build_schedule(p, 1, 1);
    const CascadedChannel hc{random_positive(16, 1, rng), 1, 1};
    const auto grids = collect_clusters(exact_estimates(sc, hc), p, sc);
    REQUIRE(grids.size() == 1);
    CHECK(grids[0].rows == std::vector<std::size_t>{0, 2});
    CHECK(grids[0].cols == std::vector<std::size_t>{0, 2});
    CHECK(grids[0].block_ids == std::vector<std::size_t>{0, 1, 2, 3});
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
            CHECK(grids[0].values(a, b) == hc.H(p.element(2 * a, 2 * b), 0));

    // MIMO 2x2, s = 2: four grids on disjoint element sets that cover the array
    const ReflectionSchedule sm = build_schedule(p, 2, 2);
    const CascadedChannel hm{random_positive(16, 4, rng), 2, 2};
    const auto gm = collect_clusters(exact_estimates(sm, hm), p, sm);
    REQUIRE(gm.size() == 4);
    std::set<std::size_t> all;
    std::size_t total = 0;
    for (const auto& g : gm) {
        const auto om = g.omega(p);
        total += om.size();
        all.insert(om.begin(), om.end());
        for (std::size_t a = 0; a < g.rows.size(); ++a)
            for (std::size_t b = 0; b < g.cols.size(); ++b)
                CHECK(g.values(a, b) ==
                      hm.H(p.element(g.rows[a], g.cols[b]), CascadedChannel::column(g.n_r, g.n_t, 2)));
    }
    CHECK(total == 16);
    CHECK(all.size() == 16);

    auto missing = exact_estimates(sm, hm);
    missing[2].reset();
    CHECK_THROWS_AS(collect_clusters(missing, p, sm), ScheduleError);
}

TEST_CASE("Estimator - interpolation weights")
{
    const std::vector<double> knots{0, 4, 8, 12, 16, 20};
    std::vector<double> targets;
    for (double t = -3.0; t <= 23.0; t += 0.5)
        targets.push_back(t);
    for (InterpKind kind : {InterpKind::linear, InterpKind::cubic})
        for (ExtrapPolicy pol :
             {ExtrapPolicy::end_segment, ExtrapPolicy::linear, ExtrapPolicy::quadratic, ExtrapPolicy::hold}) {
            const AxisWeights w = axis_weights(knots, targets, kind, pol);
            CHECK(w.extrapolated == 12);
            for (std::size_t r = 0; r < targets.size(); ++r) {
                double sum = 0.0, lin = 0.0;
                for (std::size_t c = 0; c < knots.size(); ++c) {
                    sum += w.W(r, c);
                    lin += w.W(r, c) * (3.0 - 0.25 * knots[c]);
                }
                CHECK(sum == Approx(1.0).margin(1e-12));
                const bool inside = targets[r] >= knots.front() && targets[r] <= knots.back();
                if (inside || pol != ExtrapPolicy::hold)
                    CHECK(lin == Approx(3.0 - 0.25 * targets[r]).margin(1e-11));
            }
        }

    // the spline reproduces cubics inside the knot span
    const AxisWeights c = axis_weights(knots, targets, InterpKind::cubic, ExtrapPolicy::end_segment);
    auto f = [](double t) { return 1.0 - 0.5 * t + 0.1 * t * t - 0.003 * t * t * t; };
    for (std::size_t r = 0; r < targets.size(); ++r) {
        double v = 0.0;
        for (std::size_t k = 0; k < knots.size(); ++k)
            v += c.W(r, k) * f(knots[k]);
        CHECK(v == Approx(f(targets[r])).margin(1e-9));
    }

    // interpolation reproduces the samples at the knots
    const AxisWeights at = axis_weights(knots, knots, InterpKind::cubic);
    for (std::size_t r = 0; r < knots.size(); ++r)
        for (std::size_t k = 0; k < knots.size(); ++k)
            CHECK(at.W(r, k) == Approx(r == k ? 1.0 : 0.0).margin(1e-12));

    CHECK_THROWS_AS(axis_weights({}, {1.0}, InterpKind::linear), DimensionError);
    CHECK_THROWS_AS(axis_weights({0.0, 0.0}, {1.0}, InterpKind::linear), DimensionError);

    // separable grid interpolation of a bilinear field is exact
    const std::vector<double> kr{0, 2, 4}, kc{1, 3};
    Matrix S(3, 2);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 2; ++b)
            S(a, b) = 1.0 + kr[a] + 2.0 * kc[b] + 0.5 * kr[a] * kc[b];
    const std::vector<double> tr{0, 1, 2, 3, 4, 5}, tc{0, 1, 2, 3};
    const Matrix full = interpolate_grid(S, axis_weights(kr, tr, InterpKind::linear, ExtrapPolicy::linear),
                                         axis_weights(kc, tc, InterpKind::linear, ExtrapPolicy::linear));
    for (std::size_t a = 0; a < tr.size(); ++a)
        for (std::size_t b = 0; b < tc.size(); ++b)
            CHECK(full(a, b) == Approx(1.0 + tr[a] + 2.0 * tc[b] + 0.5 * tr[a] * tc[b]).margin(1e-12));
}

TEST_CASE("Estimator - NMSE")
{
    const Matrix H{{1.0, 2.0}, {2.0, 0.0}};
    CHECK(nmse(H, H) == 0.0);
    CHECK(nmse(Matrix(2, 2), H) == Approx(1.0));
    Matrix E = H;
    E(1, 1) = 0.3;
    CHECK(nmse(E, H) == Approx(0.09 / 9.0));
    CHECK_THROWS_AS(nmse(H, Matrix(2, 2)), DomainError);
    CHECK_THROWS_AS(nmse(H, Matrix(2, 3)), DimensionError);

    Matrix mask(2, 2);
    mask(0, 0) = 1.0;
    E(0, 0) = 1.5;
    CHECK(nmse(E, H, mask) == Approx(0.25));
}

TEST_CASE("Estimator - overhead")
{
    const double expect[] = {1, 4, 9, 16};
    for (std::size_t s = 1; s <= 4; ++s) {
        const OverheadReport r = overhead_report(partition_with_spacing(24, 24, s), 1, 1, 100);
        CHECK(r.reduction == Approx(expect[s - 1]));
        CHECK(r.params * s * s == 576);
        CHECK(r.qv == 24 / s);
    }
    for (std::size_t nt : {1u, 2u, 3u})
        for (std::size_t nr : {1u, 2u, 3u}) {
            const OverheadReport r = overhead_report(partition_with_spacing(24, 24, 4), nt, nr, 100);
            CHECK(r.params == 36 * nt * nr);
            CHECK(r.baseline_params == 576 * nt * nr);
            CHECK(r.flops_per_block == Approx(100.0 * nt * nt * (nt + 2.0 * nr)));
        }
}

TEST_CASE("Estimator - noiseless full sampling is exact")
{
    JstsOptions opt;
    opt.spacing = 1;
    const JstsResult r = jsts_run(lambertian_siso(), {}, 0.0, 1u, opt);
    CHECK(r.diagnostics.nmse <= 1e-20);
    CHECK(r.diagnostics.params == 576);
    CHECK(r.diagnostics.blocks == 576);
    CHECK(r.diagnostics.extrapolated == 0);
}

TEST_CASE("Estimator - block estimates are local")
{
    const SubarrayPlan p = partition_with_spacing(6, 6, 3);
    const ReflectionSchedule sc = build_schedule(p, 2, 2);
    std::mt19937_64 rng(53);
    CascadedChannel hc{random_positive(36, 4, rng), 2, 2};
    const Matrix X = pilot_matrix(2, {10, 1.0});
    auto estimates = [&](const CascadedChannel& h) {
        std::vector<Matrix> out;
        for (const auto& b : sc.blocks) {
            std::mt19937_64 g(block_seed(9, 0, b.id));
            out.push_back(mmse_estimate(simulate_received(block_channel(h, b), X, 0.01, g), X, 0.01));
        }
        return out;
    };
    const auto before = estimates(hc);
    // perturb one element inside the first block
    const std::size_t n = sc.blocks[0].assignments[0].n;
    for (std::size_t c = 0; c < 4; ++c)
        hc.H(n, c) += 0.5;
    const auto after = estimates(hc);
    CHECK_FALSE(after[0] == before[0]);
    for (std::size_t b = 1; b < sc.blocks.size(); ++b)
        CHECK(after[b] == before[b]);

    // the noise streams differ across blocks and windows
    CHECK(block_seed(9, 0, 0) != block_seed(9, 0, 1));
    CHECK(block_seed(9, 0, 0) != block_seed(9, 1, 0));
    CHECK(block_seed(9, 0, 0) == block_seed(9, 0, 0));
}

TEST_CASE("Estimator - end-to-end behaviour")
{
    const JstsScenario scn = lambertian_siso();
    JstsOptions opt;
    opt.spacing = 2;
    const JstsSetup setup = prepare_jsts(scn, opt);
    CHECK(setup.plan.s == 2);
    CHECK(setup.d_c > 0.0);

    // reruns are identical
    const JstsResult a = run_jsts(setup, {}, 1e-6, 5u);
    const JstsResult b = run_jsts(setup, {}, 1e-6, 5u);
    CHECK(a.estimate.H == b.estimate.H);
    CHECK(a.diagnostics.params == 144);

    // mean NMSE grows with the noise level
    double prev = 0.0;
    for (double sigma : {1e-7, 1e-6, 1e-5, 1e-4}) {
        double mean = 0.0;
        for (std::uint64_t seed = 0; seed < 5; ++seed)
            mean += run_jsts(setup, {}, sigma, seed).diagnostics.nmse / 5.0;
        CHECK(mean >= prev);
        prev = mean;
    }

    // the derived spacing follows the coherence distance
    const JstsSetup derived = prepare_jsts(scn);
    CHECK(derived.plan.s == spacing_from_coherence(derived.d_c, scn.array.spacing));

    JstsScenario bad = scn;
    bad.xi_c = 1.5;
    CHECK_THROWS_AS(prepare_jsts(bad), ValidationError);
    bad = scn;
    bad.pds.clear();
    CHECK_THROWS_AS(prepare_jsts(bad), ValidationError);
}
