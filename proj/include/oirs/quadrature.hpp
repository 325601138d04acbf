#pragma once
// Tensor-product Gauss-Legendre rules for the aperture integrals.

#include "oirs/geometry.hpp"

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace oirs {

/// n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    static GaussLegendre make(std::size_t n)
    {
        if (n == 0)
            throw DomainError("Gauss-Legendre rule needs at least one node");
        GaussLegendre r;
        r.nodes.resize(n);
        r.weights.resize(n);
        for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
            // Chebyshev initial guess, then Newton on P_n
            double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0;
                double p1 = x;
                for (std::size_t k = 2; k <= n; ++k) {
                    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                    p0 = p1;
                    p1 = pk;
                }
                if (n == 1) {
                    p1 = x;
                    p0 = 1.0;
                }
                dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15)
                    break;
            }
            if (n == 1) {
                r.nodes[0] = 0.0;
                r.weights[0] = 2.0;
                break;
            }
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            r.nodes[i] = -x;
            r.nodes[n - 1 - i] = x;
            r.weights[i] = w;
            r.weights[n - 1 - i] = w;
        }
        return r;
    }

    std::size_t size() const { return nodes.size(); }
};

/// How the source-disk indicator is resolved inside the mirror integral.
enum class IndicatorRule {
    per_node,  ///< indicator evaluated at every quadrature node
    clipped,   ///< each mirror row is clipped to the exact lit interval before integrating
};

/**
 * @brief Resolution of the mirror (inner) and detector (outer) integrals.
 *
 * Defaults: 16 x 16 nodes on the mirror, 8 x 8 on the detector.
 */
class QuadratureSpec {
public:
    QuadratureSpec() : QuadratureSpec(16, 8) {}
    QuadratureSpec(std::size_t mirror_nodes, std::size_t pd_nodes, IndicatorRule rule = IndicatorRule::per_node)
        : mirror_(GaussLegendre::make(mirror_nodes)), pd_(GaussLegendre::make(pd_nodes)), rule_(rule)
    {
        if (mirror_nodes < 2 || pd_nodes < 1)
            throw DomainError("quadrature resolution must be at least 2 x 2 on the mirror");
    }

    const GaussLegendre& mirror() const { return mirror_; }
    const GaussLegendre& pd() const { return pd_; }
    IndicatorRule rule() const { return rule_; }

    /// Same rule with the node counts doubled, for refinement checks.
    QuadratureSpec refined() const { return QuadratureSpec(2 * mirror_.size(), 2 * pd_.size(), rule_); }

private:
    GaussLegendre mirror_;
    GaussLegendre pd_;
    IndicatorRule rule_;
};

} // namespace oirs
