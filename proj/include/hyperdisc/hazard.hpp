#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "hyperdisc/errors.hpp"
#include "hyperdisc/quadrature.hpp"

namespace hyperdisc {

enum class PriorKind { Delta, Exponential, Uniform };

inline const char* to_string(PriorKind kind) {
    switch (kind) {
        case PriorKind::Delta: return "delta";
        case PriorKind::Exponential: return "exponential";
        case PriorKind::Uniform: return "uniform";
    }
    return "?";
}

/// Distribution over the per-episode hazard rate lambda.
///   delta(k)       point mass at lambda = k
///   exponential(k) density (1/k) exp(-lambda/k), mean k
///   uniform(k)     density 1/k on [0, k]
struct HazardPrior {
    PriorKind kind = PriorKind::Delta;
    double k = 0.0;

    static HazardPrior delta(double k) {
        check_nonnegative(k);
        return {PriorKind::Delta, k};
    }
    static HazardPrior exponential(double k) {
        check_positive(k, "exponential");
        return {PriorKind::Exponential, k};
    }
    static HazardPrior uniform(double k) {
        check_positive(k, "uniform");
        return {PriorKind::Uniform, k};
    }

    /// Density p(lambda). Not defined for the delta kind, which is handled
    /// symbolically everywhere.
    double density(double lambda) const {
        switch (kind) {
            case PriorKind::Delta:
                throw std::logic_error("delta prior has no finite density");
            case PriorKind::Exponential:
                return lambda < 0.0 ? 0.0 : std::exp(-lambda / k) / k;
            case PriorKind::Uniform:
                return (lambda >= 0.0 && lambda <= k) ? 1.0 / k : 0.0;
        }
        return 0.0;
    }

private:
    static void check_nonnegative(double k) {
        if (!(k >= 0.0)) throw std::invalid_argument("hazard parameter must be >= 0");
    }
    static void check_positive(double k, const std::string& kind) {
        if (!(k > 0.0))
            throw std::invalid_argument(kind + " hazard prior requires k > 0");
    }
};

/// Per-step continuing probability for a fixed hazard rate.
/// lambda = +inf maps to 0 by convention (certain death each step).
inline double hazard_to_gamma(double lambda) {
    if (!(lambda >= 0.0)) throw std::domain_error("hazard rate must be >= 0");
    return std::exp(-lambda);
}

inline double gamma_to_hazard(double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::domain_error("gamma must be in (0, 1]");
    return -std::log(gamma);
}

/// Survival probability s(t) = E_lambda[exp(-lambda t)], the Laplace transform
/// of the prior density. The delta kind is dispatched to the closed form; the
/// other kinds go through adaptive quadrature with absolute tolerance 1e-9,
/// truncating the exponential tail where the integrand falls below 1e-15.
inline double survival_from_prior(const HazardPrior& prior, double t) {
    if (!(t >= 0.0)) throw std::domain_error("time must be >= 0");
    switch (prior.kind) {
        case PriorKind::Delta:
            return std::exp(-prior.k * t);
        case PriorKind::Exponential: {
            // integrand (1/k) exp(-lambda (1/k + t)) drops below 1e-15 at lambda_max
            const double rate = 1.0 / prior.k + t;
            const double lambda_max = std::log(1.0 / (prior.k * 1e-15)) / rate;
            const auto f = [&](double lambda) { return prior.density(lambda) * std::exp(-lambda * t); };
            return integrate(f, 0.0, lambda_max, 1e-9);
        }
        case PriorKind::Uniform: {
            const auto f = [&](double lambda) { return prior.density(lambda) * std::exp(-lambda * t); };
            return integrate(f, 0.0, prior.k, 1e-9);
        }
    }
    return 0.0;
}

/// Draw a hazard rate from the prior. Deterministic for a fixed seed.
inline double sample_hazard(const HazardPrior& prior, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (prior.kind) {
        case PriorKind::Delta:
            return prior.k;
        case PriorKind::Exponential: {
            // inverse CDF; guard against log(0)
            double u = unit(rng);
            while (u <= 0.0) u = unit(rng);
            return -prior.k * std::log(u);
        }
        case PriorKind::Uniform:
            return prior.k * unit(rng);
    }
    return 0.0;
}

inline double sample_hazard(const HazardPrior& prior, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_hazard(prior, rng);
}

} // namespace hyperdisc
