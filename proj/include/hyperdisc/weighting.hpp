#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hyperdisc/hazard.hpp"

namespace hyperdisc {

/// Density w(gamma) satisfying d(t) = integral_0^1 w(gamma) gamma^t dgamma
/// for the discount implied by the prior.
///
///   exponential(k): (1/k) gamma^(1/k - 1)
///   uniform(k):     1/(k gamma) on [exp(-k), 1], 0 elsewhere
///   delta(k):       point mass at gamma = exp(-k); never evaluated as a
///                   finite density (throws), use is_delta()/delta_gamma().
struct WeightDensity {
    HazardPrior prior;

    bool is_delta() const { return prior.kind == PriorKind::Delta; }

    /// Location of the delta point mass in gamma space.
    double delta_gamma() const {
        if (!is_delta()) throw std::logic_error("not a delta weighting");
        return std::exp(-prior.k);
    }

    double operator()(double gamma) const {
        if (!(gamma >= 0.0 && gamma <= 1.0))
            throw std::domain_error("gamma must be in [0, 1]");
        switch (prior.kind) {
            case PriorKind::Delta:
                throw std::logic_error("delta weighting is symbolic, not a finite density");
            case PriorKind::Exponential: {
                const double e = 1.0 / prior.k - 1.0;
                if (gamma == 0.0) {
                    if (e > 0.0) return 0.0;
                    if (e == 0.0) return 1.0 / prior.k;
                    return std::numeric_limits<double>::infinity();
                }
                return std::pow(gamma, e) / prior.k;
            }
            case PriorKind::Uniform: {
                if (gamma < std::exp(-prior.k)) return 0.0;
                return 1.0 / (prior.k * gamma);
            }
        }
        return 0.0;
    }
};

inline double weight_density(const HazardPrior& prior, double gamma) {
    return WeightDensity{prior}(gamma);
}

} // namespace hyperdisc
