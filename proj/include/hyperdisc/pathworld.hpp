#pragma once

#include <stdexcept>
#include <vector>

#include "hyperdisc/hazard.hpp"
#include "hyperdisc/mdp.hpp"

namespace hyperdisc {

/// Single-decision environment: from the start state, action i-1 commits to
/// path i, a deterministic chain of i*i states with reward i delivered on the
/// final transition. Path lengths grow quadratically, rewards linearly.
struct PathworldConfig {
    int n_paths = 10;
    double k_true = 0.05;
    PriorKind prior_kind = PriorKind::Exponential;

    HazardPrior environment_prior() const {
        switch (prior_kind) {
            case PriorKind::Exponential: return HazardPrior::exponential(k_true);
            case PriorKind::Uniform: return HazardPrior::uniform(k_true);
            case PriorKind::Delta: return HazardPrior::delta(k_true);
        }
        throw std::logic_error("unreachable");
    }
};

inline int pathworld_length(int path) { return path * path; }
inline double pathworld_reward(int path) { return static_cast<double>(path); }

/// States: 0 is the start; path i occupies a contiguous block of i*i chain
/// states. Every action in a chain state follows the chain, so the only
/// decision is the first one. The final chain state's action pays the path
/// reward and has no successors.
inline Mdp pathworld_build(const PathworldConfig& config) {
    if (config.n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
    const int n_paths = config.n_paths;
    int n_states = 1;
    for (int i = 1; i <= n_paths; ++i) n_states += pathworld_length(i);

    Mdp m;
    m.n_states = n_states;
    m.n_actions = n_paths;
    m.r_min = 0.0;
    m.r_max = pathworld_reward(n_paths);
    m.terminal.assign(static_cast<std::size_t>(n_states), 0);
    m.kernel.resize(static_cast<std::size_t>(n_states) * n_paths);
    m.reward.assign(static_cast<std::size_t>(n_states) * n_paths, 0.0);

    int next_state = 1;
    for (int i = 1; i <= n_paths; ++i) {
        const int first = next_state;
        const int len = pathworld_length(i);
        next_state += len;
        m.kernel[m.row(0, i - 1)].push_back({first, 1.0});
        for (int j = 0; j < len; ++j) {
            const int s = first + j;
            const bool last = j == len - 1;
            for (int a = 0; a < n_paths; ++a) {
                if (!last) m.kernel[m.row(s, a)].push_back({s + 1, 1.0});
                else m.reward[m.row(s, a)] = pathworld_reward(i);
            }
        }
    }
    m.validate();
    return m;
}

/// Undiscounted expected return of committing to a path under the hazard
/// prior: r(i) * s(i^2), the survival-weighted terminal reward.
inline double pathworld_true_value(const HazardPrior& prior, int path) {
    if (path < 1) throw std::invalid_argument("path index must be >= 1");
    return pathworld_reward(path) *
           survival_from_prior(prior, static_cast<double>(pathworld_length(path)));
}

/// First chain state of a path, for trace inspection.
inline int pathworld_path_start(int path) {
    int s = 1;
    for (int i = 1; i < path; ++i) s += pathworld_length(i);
    return s;
}

} // namespace hyperdisc
