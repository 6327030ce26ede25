#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperdisc/discount.hpp"
#include "hyperdisc/hazard.hpp"

namespace hyperdisc {

struct SparseTransition {
    int s_next = 0;
    double p = 0.0;
};

/// Episodic MDP with a sub-stochastic kernel: each (s, a) row may sum to less
/// than 1, the missing mass terminating the episode.
struct Mdp {
    int n_states = 0;
    int n_actions = 0;
    std::vector<std::vector<SparseTransition>> kernel; // index s * n_actions + a
    std::vector<double> reward;                        // index s * n_actions + a
    std::vector<std::uint8_t> terminal;                // per state
    double r_min = 0.0;
    double r_max = 1.0;

    std::size_t row(int s, int a) const {
        return static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions) +
               static_cast<std::size_t>(a);
    }

    void validate() const {
        if (n_states <= 0 || n_actions <= 0)
            throw std::invalid_argument("MDP needs positive state and action counts");
        const std::size_t rows = static_cast<std::size_t>(n_states) * n_actions;
        if (kernel.size() != rows || reward.size() != rows ||
            terminal.size() != static_cast<std::size_t>(n_states))
            throw std::invalid_argument("MDP field sizes are inconsistent");
        for (std::size_t r = 0; r < rows; ++r) {
            double sum = 0.0;
            for (const auto& tr : kernel[r]) {
                if (tr.s_next < 0 || tr.s_next >= n_states)
                    throw std::invalid_argument("transition target out of range");
                if (tr.p < 0.0) throw std::invalid_argument("negative transition probability");
                sum += tr.p;
            }
            if (sum > 1.0 + 1e-12)
                throw std::invalid_argument("kernel row sums above 1 (must be sub-stochastic)");
            if (!(reward[r] >= r_min - 1e-12 && reward[r] <= r_max + 1e-12))
                throw std::invalid_argument("reward outside declared [r_min, r_max]");
        }
    }
};

inline void to_json(nlohmann::json& j, const Mdp& m) {
    nlohmann::json triplets = nlohmann::json::array();
    for (int s = 0; s < m.n_states; ++s)
        for (int a = 0; a < m.n_actions; ++a)
            for (const auto& tr : m.kernel[m.row(s, a)])
                triplets.push_back({s, a, tr.s_next, tr.p});
    j = nlohmann::json{{"n_states", m.n_states},   {"n_actions", m.n_actions},
                       {"transitions", triplets},  {"rewards", m.reward},
                       {"terminal", m.terminal},   {"r_min", m.r_min},
                       {"r_max", m.r_max}};
}

inline void from_json(const nlohmann::json& j, Mdp& m) {
    m.n_states = j.at("n_states").get<int>();
    m.n_actions = j.at("n_actions").get<int>();
    m.reward = j.at("rewards").get<std::vector<double>>();
    m.terminal = j.at("terminal").get<std::vector<std::uint8_t>>();
    m.r_min = j.at("r_min").get<double>();
    m.r_max = j.at("r_max").get<double>();
    m.kernel.assign(static_cast<std::size_t>(m.n_states) * m.n_actions, {});
    for (const auto& t : j.at("transitions"))
        m.kernel[m.row(t[0].get<int>(), t[1].get<int>())].push_back(
            {t[2].get<int>(), t[3].get<double>()});
    m.validate();
}

// ---------------------------------------------------------------------------
// Episode simulation
// ---------------------------------------------------------------------------

struct EpisodeStep {
    int s = 0;
    int a = 0;
    double r = 0.0;
    bool survived = true; // false if the hazard ended the episode on this step
};

/// One rollout with a hazard rate sampled once at episode start. The
/// continuation Bernoulli(eta) is applied independently before every
/// transition; a reward at depth t therefore requires surviving t checks.
struct HazardousEpisode {
    double lambda = 0.0;
    double eta = 1.0;
    std::vector<EpisodeStep> trace;

    double undiscounted_return() const {
        double acc = 0.0;
        for (const auto& st : trace) acc += st.r;
        return acc;
    }
};

template <typename PolicyFn>
HazardousEpisode simulate_episode(const Mdp& mdp, PolicyFn&& choose_action, double lambda,
                                  int start_state, std::mt19937_64& rng,
                                  int max_steps = 100000) {
    HazardousEpisode ep;
    ep.lambda = lambda;
    ep.eta = hazard_to_gamma(lambda);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int s = start_state;
    for (int step = 0; step < max_steps; ++step) {
        if (mdp.terminal[static_cast<std::size_t>(s)]) break;
        const int a = choose_action(s, rng);
        ep.trace.push_back({s, a, mdp.reward[mdp.row(s, a)], true});
        if (unit(rng) >= ep.eta) {
            ep.trace.back().survived = false;
            break;
        }
        // sample next state; leftover row mass terminates
        double u = unit(rng);
        int s_next = -1;
        for (const auto& tr : mdp.kernel[mdp.row(s, a)]) {
            if (u < tr.p) {
                s_next = tr.s_next;
                break;
            }
            u -= tr.p;
        }
        if (s_next < 0) break;
        s = s_next;
    }
    return ep;
}

// ---------------------------------------------------------------------------
// Exact dynamic-programming oracles
// ---------------------------------------------------------------------------

struct EvalPolicy {
    bool greedy = true;
    std::vector<double> pi; // pi(a|s), index s * n_actions + a, when !greedy

    static EvalPolicy make_greedy() { return {}; }
    static EvalPolicy uniform(const Mdp& mdp) {
        EvalPolicy p;
        p.greedy = false;
        p.pi.assign(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions,
                    1.0 / mdp.n_actions);
        return p;
    }
    static EvalPolicy fixed(std::vector<double> pi) {
        EvalPolicy p;
        p.greedy = false;
        p.pi = std::move(pi);
        return p;
    }
};

struct ExactQResult {
    std::vector<double> q; // index s * n_actions + a
    bool horizon_warning = false;
    double tail_bound = 0.0;
};

/// Finite-horizon DP for Q(s,a) = E[sum_t c_t r_t | s_0=s, a_0=a] where the
/// stage coefficients c_t fold the discount d(t) together with the hazard:
///   - delta(k) hazard is realized concretely by scaling the kernel by
///     exp(-k), keeping c_t = d(t) (the kernel-scaling route);
///   - other priors use c_t = d(t) * s(t) with s the prior's survival
///     function (per-lambda DP collapsed through linearity).
/// Backward induction with time-indexed coefficients; greedy policies take
/// the stage max, fixed policies mix by pi(a|s).
inline ExactQResult exact_q(const Mdp& mdp, const DiscountSpec& discount,
                            const HazardPrior& hazard, int horizon,
                            const EvalPolicy& policy = EvalPolicy::make_greedy(),
                            double tolerance = 1e-9) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    const std::size_t rows = static_cast<std::size_t>(mdp.n_states) * mdp.n_actions;

    const bool scale_kernel = hazard.kind == PriorKind::Delta;
    const double eta = scale_kernel ? std::exp(-hazard.k) : 1.0;

    std::vector<double> coef(static_cast<std::size_t>(horizon) + 1);
    for (int t = 0; t <= horizon; ++t) {
        double c = discount_value(discount, t);
        if (!scale_kernel) c *= survival_from_prior(hazard, t);
        coef[static_cast<std::size_t>(t)] = c;
    }

    ExactQResult result;
    result.tail_bound = coef[static_cast<std::size_t>(horizon)] *
                        std::max(std::fabs(mdp.r_min), std::fabs(mdp.r_max)) * horizon;
    result.horizon_warning = result.tail_bound >= tolerance;

    std::vector<double> q(rows, 0.0);
    std::vector<double> v(static_cast<std::size_t>(mdp.n_states), 0.0);
    for (int h = horizon; h >= 0; --h) {
        const double c = coef[static_cast<std::size_t>(h)];
        for (int s = 0; s < mdp.n_states; ++s) {
            if (mdp.terminal[static_cast<std::size_t>(s)]) continue;
            for (int a = 0; a < mdp.n_actions; ++a) {
                const std::size_t r = mdp.row(s, a);
                double acc = c * mdp.reward[r];
                for (const auto& tr : mdp.kernel[r])
                    acc += eta * tr.p * v[static_cast<std::size_t>(tr.s_next)];
                q[r] = acc;
            }
        }
        for (int s = 0; s < mdp.n_states; ++s) {
            if (mdp.terminal[static_cast<std::size_t>(s)]) {
                v[static_cast<std::size_t>(s)] = 0.0;
                continue;
            }
            if (policy.greedy) {
                double best = q[mdp.row(s, 0)];
                for (int a = 1; a < mdp.n_actions; ++a)
                    best = std::max(best, q[mdp.row(s, a)]);
                v[static_cast<std::size_t>(s)] = best;
            } else {
                double mix = 0.0;
                for (int a = 0; a < mdp.n_actions; ++a)
                    mix += policy.pi[mdp.row(s, a)] * q[mdp.row(s, a)];
                v[static_cast<std::size_t>(s)] = mix;
            }
        }
    }
    result.q = std::move(q);
    return result;
}

/// Infinite-horizon optimal Q under exponential discounting, iterated to a
/// sup-norm residual below tol.
inline std::vector<double> value_iteration(const Mdp& mdp, double gamma, double tol = 1e-12,
                                           int max_iters = 1000000) {
    const std::size_t rows = static_cast<std::size_t>(mdp.n_states) * mdp.n_actions;
    std::vector<double> q(rows, 0.0);
    std::vector<double> v(static_cast<std::size_t>(mdp.n_states), 0.0);
    for (int it = 0; it < max_iters; ++it) {
        double residual = 0.0;
        for (int s = 0; s < mdp.n_states; ++s) {
            if (mdp.terminal[static_cast<std::size_t>(s)]) continue;
            for (int a = 0; a < mdp.n_actions; ++a) {
                const std::size_t r = mdp.row(s, a);
                double acc = mdp.reward[r];
                for (const auto& tr : mdp.kernel[r])
                    acc += gamma * tr.p * v[static_cast<std::size_t>(tr.s_next)];
                residual = std::max(residual, std::fabs(acc - q[r]));
                q[r] = acc;
            }
        }
        for (int s = 0; s < mdp.n_states; ++s) {
            if (mdp.terminal[static_cast<std::size_t>(s)]) continue;
            double best = q[mdp.row(s, 0)];
            for (int a = 1; a < mdp.n_actions; ++a) best = std::max(best, q[mdp.row(s, a)]);
            v[static_cast<std::size_t>(s)] = best;
        }
        if (residual < tol) break;
    }
    return q;
}

/// Greedy action per state, ties broken toward the lowest index.
inline std::vector<int> greedy_policy(const Mdp& mdp, const std::vector<double>& q) {
    std::vector<int> pi(static_cast<std::size_t>(mdp.n_states), 0);
    for (int s = 0; s < mdp.n_states; ++s) {
        int best = 0;
        for (int a = 1; a < mdp.n_actions; ++a)
            if (q[mdp.row(s, a)] > q[mdp.row(s, best)]) best = a;
        pi[static_cast<std::size_t>(s)] = best;
    }
    return pi;
}

// ---------------------------------------------------------------------------
// Environment builders
// ---------------------------------------------------------------------------

/// Random episodic MDP with per-row termination mass in [term_min, term_max]
/// and rewards in [0, 1].
inline Mdp random_mdp(int n_states, int n_actions, std::mt19937_64& rng,
                      double term_min = 0.2, double term_max = 0.5) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Mdp m;
    m.n_states = n_states;
    m.n_actions = n_actions;
    m.terminal.assign(static_cast<std::size_t>(n_states), 0);
    const std::size_t rows = static_cast<std::size_t>(n_states) * n_actions;
    m.kernel.resize(rows);
    m.reward.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        m.reward[r] = unit(rng);
        const double stay = 1.0 - (term_min + (term_max - term_min) * unit(rng));
        std::vector<double> raw(static_cast<std::size_t>(n_states));
        double total = 0.0;
        for (auto& x : raw) {
            x = unit(rng);
            total += x;
        }
        for (int s2 = 0; s2 < n_states; ++s2)
            m.kernel[r].push_back({s2, stay * raw[static_cast<std::size_t>(s2)] / total});
    }
    m.validate();
    return m;
}

/// width x height gridworld with four move actions (up, down, left, right),
/// a terminal goal cell, and a set of hazard cells from which every
/// transition only continues with probability continue_prob.
inline Mdp gridworld_build(int width, int height, int goal_x, int goal_y,
                           const std::vector<std::pair<int, int>>& hazard_cells,
                           double continue_prob) {
    const int n = width * height;
    const auto idx = [&](int x, int y) { return y * width + x; };
    Mdp m;
    m.n_states = n;
    m.n_actions = 4;
    m.terminal.assign(static_cast<std::size_t>(n), 0);
    m.terminal[static_cast<std::size_t>(idx(goal_x, goal_y))] = 1;
    m.kernel.resize(static_cast<std::size_t>(n) * 4);
    m.reward.assign(static_cast<std::size_t>(n) * 4, 0.0);
    std::vector<std::uint8_t> hazardous(static_cast<std::size_t>(n), 0);
    for (const auto& [hx, hy] : hazard_cells) hazardous[static_cast<std::size_t>(idx(hx, hy))] = 1;

    const int dx[4] = {0, 0, -1, 1};
    const int dy[4] = {-1, 1, 0, 0};
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int s = idx(x, y);
            if (m.terminal[static_cast<std::size_t>(s)]) continue;
            for (int a = 0; a < 4; ++a) {
                const int nx = std::clamp(x + dx[a], 0, width - 1);
                const int ny = std::clamp(y + dy[a], 0, height - 1);
                const int s2 = idx(nx, ny);
                const double p = hazardous[static_cast<std::size_t>(s)] ? continue_prob : 1.0;
                m.kernel[m.row(s, a)].push_back({s2, p});
                if (s2 == idx(goal_x, goal_y)) m.reward[m.row(s, a)] = 1.0;
            }
        }
    }
    m.validate();
    return m;
}

} // namespace hyperdisc
