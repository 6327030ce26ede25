#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "hyperdisc/aggregation.hpp"
#include "hyperdisc/ladder.hpp"
#include "hyperdisc/mdp.hpp"

namespace hyperdisc {

struct AgentTransition {
    int s = 0;
    int a = 0;
    double r = 0.0;
    int s_next = -1;
    bool done = false;
};

/// Tabular multi-horizon Q: one head per ladder gamma over a shared
/// (state, action) index. Head 0 (gamma = 0) is the immediate-reward sanity
/// head. Learning rate is 1/(1 + visits(s,a)) unless a constant alpha is set.
struct MultiHorizonTable {
    GammaLadder ladder;
    int n_states = 0;
    int n_actions = 0;
    double alpha = -1.0; // < 0 selects the visit-decayed schedule
    double r_max = 1.0;
    std::vector<double> q;      // [s][a][head]
    std::vector<int> visits;    // [s][a]
    long bound_violations = 0;  // heads exceeding r_max / (1 - gamma_i)

    MultiHorizonTable(GammaLadder l, int states, int actions, double reward_max = 1.0)
        : ladder(std::move(l)), n_states(states), n_actions(actions), r_max(reward_max) {
        q.assign(static_cast<std::size_t>(states) * actions * heads(), 0.0);
        visits.assign(static_cast<std::size_t>(states) * actions, 0);
    }

    std::size_t heads() const { return ladder.size(); }

    std::size_t sa(int s, int a) const {
        return static_cast<std::size_t>(s) * n_actions + a;
    }
    double& at(int s, int a, std::size_t head) { return q[sa(s, a) * heads() + head]; }
    double at(int s, int a, std::size_t head) const { return q[sa(s, a) * heads() + head]; }

    /// Per-head values for one (state, action), aligned to the ladder.
    std::vector<double> head_values(int s, int a) const {
        const std::size_t base = sa(s, a) * heads();
        return {q.begin() + static_cast<std::ptrdiff_t>(base),
                q.begin() + static_cast<std::ptrdiff_t>(base + heads())};
    }
};

/// One Q-learning update applied to every head with its own gamma target.
/// Returns the per-head TD errors. Throws on non-finite inputs, leaving the
/// table untouched. alpha_scale multiplies the effective learning rate
/// (importance-sampling correction under prioritized replay).
inline std::vector<double> td_update(MultiHorizonTable& table, const AgentTransition& tr,
                                     double alpha_scale = 1.0) {
    if (!std::isfinite(tr.r)) throw std::invalid_argument("non-finite reward");
    if (tr.s < 0 || tr.s >= table.n_states || tr.a < 0 || tr.a >= table.n_actions)
        throw std::out_of_range("transition state/action outside table bounds");
    if (!tr.done && (tr.s_next < 0 || tr.s_next >= table.n_states))
        throw std::out_of_range("next state outside table bounds");

    const std::size_t heads = table.heads();
    const std::size_t sa = table.sa(tr.s, tr.a);
    const double alpha =
        alpha_scale * (table.alpha >= 0.0 ? table.alpha : 1.0 / (1.0 + table.visits[sa]));
    ++table.visits[sa];

    std::vector<double> deltas(heads, 0.0);
    for (std::size_t h = 0; h < heads; ++h) {
        double bootstrap = 0.0;
        if (!tr.done) {
            double best = table.at(tr.s_next, 0, h);
            for (int a2 = 1; a2 < table.n_actions; ++a2)
                best = std::max(best, table.at(tr.s_next, a2, h));
            bootstrap = table.ladder.gammas[h] * best;
        }
        const double delta = tr.r + bootstrap - table.at(tr.s, tr.a, h);
        deltas[h] = delta;
        double& cell = table.at(tr.s, tr.a, h);
        cell += alpha * delta;
        const double gamma = table.ladder.gammas[h];
        const double bound = gamma < 1.0 ? table.r_max / (1.0 - gamma) : 0.0;
        if (bound > 0.0 && std::fabs(cell) > bound * (1.0 + 1e-9)) ++table.bound_violations;
    }
    return deltas;
}

// ---------------------------------------------------------------------------
// Acting
// ---------------------------------------------------------------------------

struct ActingPolicy {
    enum class Kind { SingleGamma, Aggregated };
    Kind kind = Kind::SingleGamma;
    int head_index = 0;
    AggregationWeights weights; // Aggregated kind
    double epsilon = 0.0;

    static ActingPolicy single_gamma(int head, double eps = 0.0) {
        ActingPolicy p;
        p.kind = Kind::SingleGamma;
        p.head_index = head;
        p.epsilon = eps;
        return p;
    }
    static ActingPolicy aggregated(AggregationWeights w, double eps = 0.0) {
        ActingPolicy p;
        p.kind = Kind::Aggregated;
        p.weights = std::move(w);
        p.epsilon = eps;
        return p;
    }
};

inline double action_value(const ActingPolicy& policy, const MultiHorizonTable& table,
                           int state, int action) {
    if (policy.kind == ActingPolicy::Kind::SingleGamma)
        return table.at(state, action, static_cast<std::size_t>(policy.head_index));
    return aggregate(table.head_values(state, action), policy.weights);
}

/// Epsilon-greedy; ties break toward the lowest action index.
inline int act(const ActingPolicy& policy, const MultiHorizonTable& table, int state,
               std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (policy.epsilon > 0.0 && unit(rng) < policy.epsilon) {
        std::uniform_int_distribution<int> pick(0, table.n_actions - 1);
        return pick(rng);
    }
    int best = 0;
    double best_value = action_value(policy, table, state, 0);
    for (int a = 1; a < table.n_actions; ++a) {
        const double v = action_value(policy, table, state, a);
        if (v > best_value) {
            best = a;
            best_value = v;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Prioritized replay
// ---------------------------------------------------------------------------

enum class PriorityScheme { MeanTd, LargestGammaTd };

inline double priority_from_deltas(PriorityScheme scheme, const std::vector<double>& deltas) {
    if (scheme == PriorityScheme::LargestGammaTd) return std::fabs(deltas.back());
    double acc = 0.0;
    for (double d : deltas) acc += std::fabs(d);
    return acc / static_cast<double>(deltas.size());
}

namespace detail {

/// Flat binary sum tree for proportional sampling.
class SumTree {
public:
    explicit SumTree(std::size_t capacity) {
        leaves_ = 1;
        while (leaves_ < capacity) leaves_ <<= 1;
        tree_.assign(2 * leaves_, 0.0);
    }
    void set(std::size_t i, double p) {
        std::size_t node = leaves_ + i;
        tree_[node] = p;
        for (node >>= 1; node >= 1; node >>= 1)
            tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
    }
    double total() const { return tree_[1]; }
    /// Proportional draw over the first `filled` leaves. Floating-point edge
    /// cases (u at the total, zero-mass subtrees) are clamped into range.
    std::size_t sample(double u, std::size_t filled) const {
        std::size_t node = 1;
        while (node < leaves_) {
            node *= 2;
            if (u >= tree_[node] && tree_[node + 1] > 0.0) {
                u -= tree_[node];
                ++node;
            }
        }
        const std::size_t i = node - leaves_;
        return i < filled ? i : filled - 1;
    }

private:
    std::size_t leaves_ = 1;
    std::vector<double> tree_;
};

} // namespace detail

struct ReplayConfig {
    int capacity = 20000;
    int batch_size = 32;
    int min_fill = 500;
    int steps = 40000;
    double epsilon = 0.2;
    int eval_every = 2000;
    int eval_episodes = 32;
    int max_episode_steps = 200;
    std::uint64_t seed = 1;
    bool log_audit = false;
    int audit_batches = 50;
    double alpha = -1.0;       // < 0: visit-decayed 1/(1+visits); else constant
    double alpha_final = -1.0; // if >= 0 (with alpha >= 0): linear anneal target
    double priority_floor = 1e-3; // added to every stored priority so converged
                                  // transitions keep a nonzero sampling mass
    double is_beta = 1.0;      // importance-sampling exponent correcting the
                               // prioritized sampling bias; 0 disables
    bool random_start = false; // exploring starts: episodes begin at a uniform
                               // random non-terminal state
};

struct CurvePoint {
    int step = 0;
    double mean_return = 0.0;
};

struct AuditRecord {
    int step = 0;
    std::size_t buffer_index = 0;
    double priority = 0.0;
    std::vector<double> deltas;
};

struct TrainResult {
    MultiHorizonTable table;
    std::vector<CurvePoint> curve;
    std::vector<AuditRecord> audit;
};

/// Q-learning with a proportional prioritized replay buffer. Acting is
/// epsilon-greedy on the largest-gamma head; new transitions enter at the
/// current maximum priority; sampled transitions are re-prioritized from
/// their fresh TD errors per the chosen scheme. The curve records the greedy
/// policy's mean undiscounted return at each evaluation epoch (evaluation RNG
/// derived as seed * 0x9e3779b9 + step).
inline TrainResult train_with_replay(const Mdp& mdp, const GammaLadder& ladder,
                                     PriorityScheme scheme, const ReplayConfig& config,
                                     int start_state = 0) {
    MultiHorizonTable table(ladder, mdp.n_states, mdp.n_actions, mdp.r_max);
    const int last_head = static_cast<int>(table.heads()) - 1;
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<AgentTransition> buffer;
    std::vector<double> priorities;
    buffer.reserve(static_cast<std::size_t>(config.capacity));
    detail::SumTree tree(static_cast<std::size_t>(config.capacity));
    std::size_t write_pos = 0;
    double max_priority = 1.0;

    TrainResult result{std::move(table), {}, {}};
    MultiHorizonTable& t = result.table;
    t.alpha = config.alpha;
    const ActingPolicy explore = ActingPolicy::single_gamma(last_head, config.epsilon);

    const auto reset_state = [&](std::mt19937_64& r) {
        if (!config.random_start) return start_state;
        std::uniform_int_distribution<int> pick(0, mdp.n_states - 1);
        int cand = pick(r);
        while (mdp.terminal[static_cast<std::size_t>(cand)]) cand = pick(r);
        return cand;
    };

    int logged_batches = 0;
    int s = start_state;
    int episode_steps = 0;
    for (int step = 0; step < config.steps; ++step) {
        if (config.alpha >= 0.0 && config.alpha_final >= 0.0 && config.steps > 1) {
            const double frac = static_cast<double>(step) / (config.steps - 1);
            t.alpha = config.alpha + frac * (config.alpha_final - config.alpha);
        }
        if (mdp.terminal[static_cast<std::size_t>(s)] || episode_steps >= config.max_episode_steps) {
            s = reset_state(rng);
            episode_steps = 0;
        }
        const int a = act(explore, t, s, rng);
        AgentTransition tr;
        tr.s = s;
        tr.a = a;
        tr.r = mdp.reward[mdp.row(s, a)];
        double u = unit(rng);
        tr.s_next = -1;
        for (const auto& kt : mdp.kernel[mdp.row(s, a)]) {
            if (u < kt.p) {
                tr.s_next = kt.s_next;
                break;
            }
            u -= kt.p;
        }
        tr.done = tr.s_next < 0 || mdp.terminal[static_cast<std::size_t>(tr.s_next)] != 0;

        if (buffer.size() < static_cast<std::size_t>(config.capacity)) {
            buffer.push_back(tr);
            priorities.push_back(max_priority);
            tree.set(buffer.size() - 1, max_priority);
        } else {
            buffer[write_pos] = tr;
            priorities[write_pos] = max_priority;
            tree.set(write_pos, max_priority);
            write_pos = (write_pos + 1) % buffer.size();
        }

        if (buffer.size() >= static_cast<std::size_t>(config.min_fill)) {
            const bool log_this = config.log_audit && logged_batches < config.audit_batches;
            const std::size_t bsz = static_cast<std::size_t>(config.batch_size);
            std::vector<std::size_t> idxs(bsz);
            std::vector<double> is_w(bsz, 1.0);
            double w_max = 0.0;
            for (std::size_t b = 0; b < bsz; ++b) {
                // the priority floor keeps the total strictly positive; the
                // uniform fallback only guards a fully degenerate buffer
                idxs[b] =
                    tree.total() > 0.0
                        ? tree.sample(unit(rng) * tree.total(), buffer.size())
                        : std::uniform_int_distribution<std::size_t>(0, buffer.size() - 1)(rng);
                if (config.is_beta > 0.0 && tree.total() > 0.0) {
                    const double prob = priorities[idxs[b]] / tree.total();
                    is_w[b] = std::pow(static_cast<double>(buffer.size()) * prob,
                                       -config.is_beta);
                }
                w_max = std::max(w_max, is_w[b]);
            }
            for (std::size_t b = 0; b < bsz; ++b) {
                const std::size_t idx = idxs[b];
                const double scale = w_max > 0.0 ? is_w[b] / w_max : 1.0;
                const std::vector<double> deltas = td_update(t, buffer[idx], scale);
                const double p = priority_from_deltas(scheme, deltas);
                priorities[idx] = p + config.priority_floor;
                tree.set(idx, priorities[idx]);
                max_priority = std::max(max_priority, priorities[idx]);
                if (log_this) result.audit.push_back({step, idx, p, deltas});
            }
            if (log_this) ++logged_batches;
        }

        if ((step + 1) % config.eval_every == 0) {
            std::mt19937_64 eval_rng(config.seed * 0x9e3779b9ull + static_cast<std::uint64_t>(step));
            const ActingPolicy eval_policy = ActingPolicy::single_gamma(last_head, 0.0);
            double total = 0.0;
            for (int e = 0; e < config.eval_episodes; ++e) {
                const auto ep = simulate_episode(
                    mdp,
                    [&](int state, std::mt19937_64& r2) { return act(eval_policy, t, state, r2); },
                    0.0, start_state, eval_rng, config.max_episode_steps);
                total += ep.undiscounted_return();
            }
            result.curve.push_back({step + 1, total / config.eval_episodes});
        }

        if (tr.done) {
            s = reset_state(rng);
            episode_steps = 0;
        } else {
            s = tr.s_next;
            ++episode_steps;
        }
    }
    return result;
}

/// Synchronous sweeps over all (state, action) pairs of a deterministic MDP,
/// visiting states in reverse construction order so values propagate down a
/// chain in a single sweep.
inline void train_sweeps(MultiHorizonTable& table, const Mdp& mdp, int sweeps) {
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (int s = mdp.n_states - 1; s >= 0; --s) {
            if (mdp.terminal[static_cast<std::size_t>(s)]) continue;
            for (int a = 0; a < mdp.n_actions; ++a) {
                AgentTransition tr;
                tr.s = s;
                tr.a = a;
                tr.r = mdp.reward[mdp.row(s, a)];
                const auto& row = mdp.kernel[mdp.row(s, a)];
                if (row.empty()) {
                    tr.done = true;
                } else {
                    tr.s_next = row.front().s_next;
                    tr.done = mdp.terminal[static_cast<std::size_t>(tr.s_next)] != 0;
                }
                td_update(table, tr);
            }
        }
    }
}

} // namespace hyperdisc
