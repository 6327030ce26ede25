#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "hyperdisc/discount.hpp"
#include "hyperdisc/errors.hpp"
#include "hyperdisc/hazard.hpp"
#include "hyperdisc/ladder.hpp"
#include "hyperdisc/weighting.hpp"

namespace hyperdisc {

/// How the weighting integral is discretized.
///   ExponentFolded: substitute x = gamma^(1/k) so the integrand becomes
///       x^(kt); rectangles live in x-space. Default, and numerically the
///       tamer of the two (the explicit density is sharply peaked near 1).
///   ExplicitWeight: rectangles (gamma_{i+1} - gamma_i) * w(gamma_i) directly
///       in gamma-space.
enum class WeightForm { ExponentFolded, ExplicitWeight };

enum class RiemannRule { Lower, Midpoint };

/// Quadrature coefficients c_i over a ladder. aggregate() computes
/// sum_i c_i q(node_i); for the Lower rule nodes coincide with the ladder
/// gammas, so a vector of per-head Q-values aligned to the ladder works
/// directly. The Midpoint rule places nodes between ladder points and is
/// meant for convergence studies where q is an evaluable function.
struct AggregationWeights {
    GammaLadder ladder;
    std::vector<double> coefficients; // aligned to nodes, size = ladder.size()
    std::vector<double> nodes;        // size = ladder.size()
    bool nodes_on_ladder = true;
    bool one_hot = false;
    int one_hot_index = -1;
    bool snap_warning = false;
    double snap_distance = 0.0;
};

inline AggregationWeights riemann_weights(const GammaLadder& ladder,
                                          const HazardPrior& prior,
                                          WeightForm form = WeightForm::ExponentFolded,
                                          RiemannRule rule = RiemannRule::Lower) {
    AggregationWeights w;
    w.ladder = ladder;
    const std::size_t n = ladder.size() - 1;
    w.coefficients.assign(ladder.size(), 0.0);
    w.nodes = ladder.gammas;

    if (prior.kind == PriorKind::Delta) {
        // exponential discounting is the single-gamma special case: select the
        // ladder point nearest exp(-k)
        const double target = std::exp(-prior.k);
        std::size_t best = 0;
        double best_dist = std::fabs(ladder.gammas[0] - target);
        for (std::size_t i = 1; i < ladder.size(); ++i) {
            const double dist = std::fabs(ladder.gammas[i] - target);
            if (dist < best_dist) {
                best = i;
                best_dist = dist;
            }
        }
        double local_gap = 0.0;
        if (best > 0) local_gap = std::max(local_gap, ladder.gammas[best] - ladder.gammas[best - 1]);
        if (best < n) local_gap = std::max(local_gap, ladder.gammas[best + 1] - ladder.gammas[best]);
        w.one_hot = true;
        w.one_hot_index = static_cast<int>(best);
        w.snap_distance = best_dist;
        w.snap_warning = best_dist > local_gap;
        w.coefficients[best] = 1.0;
        return w;
    }

    if (prior.kind == PriorKind::Uniform) {
        // support is [exp(-k), 1] in gamma space
        if (std::exp(-prior.k) > ladder.gamma_max)
            throw config_error("uniform prior support lies entirely above gamma_max");
        form = WeightForm::ExplicitWeight; // no useful folded substitution here
    }

    const WeightDensity density{prior};
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = ladder.gammas[i];
        const double hi = ladder.gammas[i + 1];
        if (form == WeightForm::ExponentFolded) {
            const double xl = std::pow(lo, 1.0 / prior.k);
            const double xh = std::pow(hi, 1.0 / prior.k);
            w.coefficients[i] = xh - xl;
            if (rule == RiemannRule::Midpoint) {
                w.nodes[i] = std::pow(0.5 * (xl + xh), prior.k);
                w.nodes_on_ladder = false;
            }
        } else {
            double node = lo;
            if (rule == RiemannRule::Midpoint) {
                node = 0.5 * (lo + hi);
                w.nodes[i] = node;
                w.nodes_on_ladder = false;
            }
            const double wd = density(node);
            // the density may be unbounded at gamma = 0; a zero rectangle
            // there still lower-bounds the integral
            w.coefficients[i] = std::isfinite(wd) ? (hi - lo) * wd : 0.0;
        }
    }
    return w;
}

/// sum_i c_i q_i for q aligned to the ladder. Linear in q.
inline double aggregate(std::span<const double> q_per_gamma, const AggregationWeights& w) {
    if (q_per_gamma.size() != w.ladder.size())
        throw std::invalid_argument("q vector length does not match ladder length");
    if (!w.nodes_on_ladder)
        throw std::invalid_argument("midpoint weights need aggregate_fn, not ladder-aligned q");
    double acc = 0.0;
    for (std::size_t i = 0; i < q_per_gamma.size(); ++i)
        acc += w.coefficients[i] * q_per_gamma[i];
    return acc;
}

inline double aggregate(const std::vector<double>& q, const AggregationWeights& w) {
    return aggregate(std::span<const double>(q), w);
}

/// sum_i c_i q(node_i) for an evaluable per-gamma value function.
inline double aggregate_fn(const std::function<double(double)>& q_of_gamma,
                           const AggregationWeights& w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.nodes.size(); ++i) {
        if (w.coefficients[i] != 0.0) acc += w.coefficients[i] * q_of_gamma(w.nodes[i]);
    }
    return acc;
}

struct TruncationError {
    double truncated_value = 0.0;
    double error = 0.0;
};

/// Effect of integrating the hyperbolic weighting only up to gamma_max:
/// truncated value gamma_max^(kt) / (1 + kt), error against 1 / (1 + kt).
inline TruncationError truncation_error(double gamma_max, double k, double t) {
    if (!(gamma_max > 0.0 && gamma_max < 1.0))
        throw std::domain_error("gamma_max must be in (0, 1)");
    TruncationError r;
    const double denom = 1.0 + k * t;
    r.truncated_value = std::pow(gamma_max, k * t) / denom;
    r.error = 1.0 / denom - r.truncated_value;
    return r;
}

/// Approximated discount curve d_hat(0..horizon), d_hat(t) = sum_i c_i node_i^t.
inline std::vector<double> discount_curve(const GammaLadder& ladder, const HazardPrior& prior,
                                          int horizon,
                                          WeightForm form = WeightForm::ExponentFolded,
                                          RiemannRule rule = RiemannRule::Lower) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    const AggregationWeights w = riemann_weights(ladder, prior, form, rule);
    std::vector<double> curve(static_cast<std::size_t>(horizon) + 1, 0.0);
    for (int t = 0; t <= horizon; ++t) {
        curve[static_cast<std::size_t>(t)] =
            aggregate_fn([t](double g) { return std::pow(g, t); }, w);
    }
    return curve;
}

} // namespace hyperdisc
