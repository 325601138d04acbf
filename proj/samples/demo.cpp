// Walk through one JSTS estimate on the reference room: coherence distance,
// subarray plan, one noisy run and the overhead it saves.

#include "oirs/oirs.hpp"

#include <cstdio>

int main()
{
    using namespace oirs;
    const Scenario scn = paper_siso();

    const auto g = CoherenceGeometry::make(scn.leds[0].center, scn.oirs.center, scn.pds[0].center,
                                           normalize(scn.leds[0].normal), normalize(scn.pds[0].normal));
    const CoherenceDistance dc = coherence_distance(g, scn.xi_c);
    std::printf("coherence distance at xi_c = %.2f: %.3f m\n", scn.xi_c, dc.d_c);

    JstsOptions opt;
    opt.spacing = 2;
    const JstsSetup setup = prepare_jsts(scn.jsts(), opt);
    std::printf("spacing s = %zu -> %zu x %zu subarrays, %zu pilot blocks\n", setup.plan.s, setup.plan.qv,
                setup.plan.qh, setup.schedule.blocks.size());

    for (double sigma : {1e-7, 1e-6, 1e-5}) {
        const JstsResult r = run_jsts(setup, {100, 1.0}, sigma, 42);
        std::printf("sigma = %.0e  NMSE = %.3e\n", sigma, r.diagnostics.nmse);
    }

    const OverheadReport o = overhead_report(setup.plan, 1, 1, 100);
    std::printf("parameters: %zu of %zu (reduction %.0fx)\n", o.params, o.baseline_params, o.reduction);
    return 0;
}
