#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hyperdisc/hazard.hpp"

namespace hyperdisc {

enum class DiscountKind { Exponential, Hyperbolic, UniformHazard, Tabulated };

/// A discount function d(t) with d(0) = 1, nonincreasing, d(t) in (0, 1].
struct DiscountSpec {
    DiscountKind kind = DiscountKind::Exponential;
    double gamma = 1.0;          // exponential
    double k = 0.0;              // hyperbolic / uniform_hazard
    std::vector<double> table;   // tabulated, indexed by integer t

    static DiscountSpec exponential(double gamma) {
        if (!(gamma > 0.0 && gamma <= 1.0))
            throw std::invalid_argument("exponential discount requires gamma in (0, 1]");
        DiscountSpec s;
        s.kind = DiscountKind::Exponential;
        s.gamma = gamma;
        return s;
    }
    static DiscountSpec hyperbolic(double k) {
        if (!(k > 0.0)) throw std::invalid_argument("hyperbolic discount requires k > 0");
        DiscountSpec s;
        s.kind = DiscountKind::Hyperbolic;
        s.k = k;
        return s;
    }
    static DiscountSpec uniform_hazard(double k) {
        if (!(k > 0.0)) throw std::invalid_argument("uniform-hazard discount requires k > 0");
        DiscountSpec s;
        s.kind = DiscountKind::UniformHazard;
        s.k = k;
        return s;
    }
    static DiscountSpec tabulated(std::vector<double> values) {
        if (values.empty() || values[0] != 1.0)
            throw std::invalid_argument("tabulated discount must start at d(0) = 1");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(values[i] > 0.0 && values[i] <= 1.0))
                throw std::invalid_argument("tabulated discount values must lie in (0, 1]");
            if (i > 0 && values[i] > values[i - 1])
                throw std::invalid_argument("tabulated discount must be nonincreasing");
        }
        DiscountSpec s;
        s.kind = DiscountKind::Tabulated;
        s.table = std::move(values);
        return s;
    }
};

/// Evaluate d(t). t is real-valued for the closed forms; the tabulated kind
/// requires an integer index inside the table.
inline double discount_value(const DiscountSpec& spec, double t) {
    if (!(t >= 0.0)) throw std::domain_error("time must be >= 0");
    switch (spec.kind) {
        case DiscountKind::Exponential:
            return std::pow(spec.gamma, t);
        case DiscountKind::Hyperbolic:
            return 1.0 / (1.0 + spec.k * t);
        case DiscountKind::UniformHazard: {
            // (1 - exp(-kt)) / (kt), with the removable singularity at t = 0
            const double x = spec.k * t;
            if (x == 0.0) return 1.0;
            return -std::expm1(-x) / x;
        }
        case DiscountKind::Tabulated: {
            const auto idx = static_cast<std::size_t>(t);
            if (static_cast<double>(idx) != t || idx >= spec.table.size())
                throw std::out_of_range("tabulated discount has no entry for this t");
            return spec.table[idx];
        }
    }
    return 0.0;
}

/// Discount function implied by a hazard prior (Laplace-transform pairing).
inline DiscountSpec discount_for_prior(const HazardPrior& prior) {
    switch (prior.kind) {
        case PriorKind::Delta:
            return DiscountSpec::exponential(std::exp(-prior.k));
        case PriorKind::Exponential:
            return DiscountSpec::hyperbolic(prior.k);
        case PriorKind::Uniform:
            return DiscountSpec::uniform_hazard(prior.k);
    }
    throw std::logic_error("unreachable");
}

} // namespace hyperdisc
