// Acceptance gate: ten checks, one PASS/FAIL line each, nonzero exit if any
// fail. Every tolerance and runtime bound is pinned here in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hyperdisc/aggregation.hpp"
#include "hyperdisc/agents.hpp"
#include "hyperdisc/experiment.hpp"
#include "hyperdisc/mdp.hpp"
#include "hyperdisc/pathworld.hpp"

namespace hd = hyperdisc;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << " [FAILED: " << what << ']';
        }
    }
};

int g_failures = 0;

void run(int number, const std::string& title, double time_limit_s,
         const std::function<void(Check&)>& body) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.detail << " [EXCEPTION: " << e.what() << ']';
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (elapsed > time_limit_s) {
        c.ok = false;
        c.detail << " [over time limit " << time_limit_s << "s]";
    }
    if (!c.ok) ++g_failures;
    std::printf("criterion %2d %-38s %s (%.2fs)%s\n", number, title.c_str(),
                c.ok ? "PASS" : "FAIL", elapsed, c.detail.str().c_str());
}

double profile_mse(hd::PriorKind agent_kind, double agent_k, hd::PriorKind env_kind,
                   double env_k, int n_paths, int n_gamma = 100,
                   double gamma_max = 0.9999) {
    hd::ExperimentConfig c;
    c.agent_kind = agent_kind;
    c.agent_k = agent_k;
    c.env_kind = env_kind;
    c.env_k = env_k;
    c.n_paths = n_paths;
    c.n_gamma = n_gamma;
    c.gamma_max = gamma_max;
    return hd::run_value_profile(c).mse;
}

double gamma_agent_mse(double gamma, hd::PriorKind env_kind, double env_k, int n_paths) {
    return profile_mse(hd::PriorKind::Delta, -std::log(gamma), env_kind, env_k, n_paths);
}

/// Per-(s,a) aggregated exact Q over the ladder's quadrature nodes under a
/// fixed uniform policy.
std::vector<double> aggregated_exact_q(const hd::Mdp& m, const hd::AggregationWeights& w,
                                       int horizon) {
    const hd::EvalPolicy uniform = hd::EvalPolicy::uniform(m);
    std::vector<double> acc(std::size_t(m.n_states) * m.n_actions, 0.0);
    for (std::size_t i = 0; i < w.nodes.size(); ++i) {
        if (w.coefficients[i] == 0.0) continue;
        const auto node_q = hd::exact_q(m, hd::DiscountSpec::exponential(w.nodes[i]),
                                        hd::HazardPrior::delta(0.0), horizon, uniform);
        for (std::size_t r = 0; r < acc.size(); ++r) acc[r] += w.coefficients[i] * node_q.q[r];
    }
    return acc;
}

double max_aggregation_gap(const std::vector<hd::Mdp>& mdps, int n_gamma, int horizon) {
    const hd::GammaLadder ladder = hd::build_ladder(1.0 - 1e-9, n_gamma, 1.0);
    const hd::AggregationWeights w =
        hd::riemann_weights(ladder, hd::HazardPrior::exponential(1.0),
                            hd::WeightForm::ExponentFolded, hd::RiemannRule::Midpoint);
    double worst = 0.0;
    for (const hd::Mdp& m : mdps) {
        const auto agg = aggregated_exact_q(m, w, horizon);
        const auto direct = hd::exact_q(m, hd::DiscountSpec::hyperbolic(1.0),
                                        hd::HazardPrior::delta(0.0), horizon,
                                        hd::EvalPolicy::uniform(m));
        for (std::size_t r = 0; r < agg.size(); ++r)
            worst = std::max(worst, std::fabs(agg[r] - direct.q[r]));
    }
    return worst;
}

} // namespace

int main() {
    int calibrated_n = 15;

    run(1, "matched-prior value profile", 1.0, [&](Check& c) {
        const hd::CalibrationResult cal = hd::calibrate_paths(hd::TargetTable::Table2);
        c.require(cal.ok, "calibration found no candidate inside tolerance");
        calibrated_n = cal.recommended_n_paths;
        const double mse = profile_mse(hd::PriorKind::Exponential, 0.05,
                                       hd::PriorKind::Exponential, 0.05, calibrated_n);
        c.detail << " n_paths=" << calibrated_n << " mse=" << mse;
        c.require(mse <= 0.01, "matched hyperbolic MSE above 0.01");
    });

    run(2, "single-gamma baseline ordering", 5.0, [&](Check& c) {
        const double hyp = profile_mse(hd::PriorKind::Exponential, 0.05,
                                       hd::PriorKind::Exponential, 0.05, calibrated_n);
        std::vector<double> mses;
        for (double g : {0.975, 0.95, 0.9, 0.99, 0.75})
            mses.push_back(gamma_agent_mse(g, hd::PriorKind::Exponential, 0.05, calibrated_n));
        c.detail << " mses:";
        for (double m : mses) c.detail << ' ' << m;
        for (std::size_t i = 0; i + 1 < mses.size(); ++i)
            c.require(mses[i] < mses[i + 1], "ordering 0.975 < 0.95 < 0.9 < 0.99 < 0.75 broken");
        for (double m : mses) c.require(m >= 10.0 * hyp, "single-gamma MSE not 10x hyperbolic");
    });

    run(3, "mismatched-k ordering", 5.0, [&](Check& c) {
        std::vector<double> mses;
        for (double k : {0.05, 0.1, 0.025, 0.2})
            mses.push_back(profile_mse(hd::PriorKind::Exponential, k,
                                       hd::PriorKind::Exponential, 0.05, calibrated_n));
        c.detail << " mses:";
        for (double m : mses) c.detail << ' ' << m;
        for (std::size_t i = 0; i + 1 < mses.size(); ++i)
            c.require(mses[i] < mses[i + 1], "ordering 0.05 < 0.1 < 0.025 < 0.2 broken");
        c.require(mses.back() < 2.0, "worst mismatched-k MSE not below 2.0");
    });

    run(4, "uniform-hazard robustness", 5.0, [&](Check& c) {
        // uniform environment on [0, 0.1]: same mean hazard 0.05
        const double hyp = profile_mse(hd::PriorKind::Exponential, 0.05,
                                       hd::PriorKind::Uniform, 0.1, calibrated_n);
        const double g975 = gamma_agent_mse(0.975, hd::PriorKind::Uniform, 0.1, calibrated_n);
        const double g95 = gamma_agent_mse(0.95, hd::PriorKind::Uniform, 0.1, calibrated_n);
        const double g99 = gamma_agent_mse(0.99, hd::PriorKind::Uniform, 0.1, calibrated_n);
        c.detail << " hyp=" << hyp << " g975=" << g975 << " g95=" << g95 << " g99=" << g99;
        c.require(hyp < g975 && g975 < g95 && g95 < g99,
                  "ordering hyperbolic < 0.975 < 0.95 < 0.99 broken");
        c.require(hyp >= 0.1 && hyp <= 0.5, "hyperbolic MSE outside [0.1, 0.5]");
    });

    run(5, "gamma_max truncation study", 5.0, [&](Check& c) {
        hd::ExperimentConfig base;
        base.n_paths = calibrated_n;
        base.n_gamma = 10000; // resolve quadrature so only truncation remains
        const auto sweep = hd::run_truncation_study(base, {0.9, 0.95, 0.99, 0.999, 0.9999});
        std::vector<double> m;
        for (const auto& e : sweep) m.push_back(e.result.mse);
        c.detail << " mses:";
        for (double x : m) c.detail << ' ' << x;
        // ordering {0.999, 0.9999} < 0.99 < 0.95 < 0.9
        c.require(m[3] < m[2] && m[4] < m[2], "0.999/0.9999 not below 0.99");
        c.require(m[2] < m[1] && m[1] < m[0], "0.99 < 0.95 < 0.9 ordering broken");
        c.require(m[0] / m[3] > 100.0, "MSE(0.9)/MSE(0.999) not above 100");
    });

    run(6, "aggregated vs direct DP convergence", 30.0, [&](Check& c) {
        std::mt19937_64 rng(20240203);
        std::vector<hd::Mdp> mdps;
        for (int i = 0; i < 20; ++i) mdps.push_back(hd::random_mdp(5, 2, rng));
        const int horizon = 300;
        const double coarse = max_aggregation_gap(mdps, 1000, horizon);
        const double fine = max_aggregation_gap(mdps, 4000, horizon);
        c.detail << " gap(1e3)=" << coarse << " gap(4e3)=" << fine;
        c.require(coarse < 1e-2, "max deviation at n_gamma=1e3 not below 1e-2");
        c.require(coarse / fine >= 4.0, "refining n_gamma 4x shrank the gap less than 4x");
    });

    run(7, "hazard / discount equivalence", 60.0, [&](Check& c) {
        std::mt19937_64 rng(7);
        const hd::Mdp m = hd::random_mdp(4, 2, rng);
        const hd::EvalPolicy uniform = hd::EvalPolicy::uniform(m);
        const int horizon = 400;

        // delta hazard: gamma discount == kernel-scaled hazard route, 1e-10
        const double gamma = 0.9;
        const auto by_discount = hd::exact_q(m, hd::DiscountSpec::exponential(gamma),
                                             hd::HazardPrior::delta(0.0), horizon, uniform);
        const auto by_hazard = hd::exact_q(m, hd::DiscountSpec::exponential(1.0),
                                           hd::HazardPrior::delta(-std::log(gamma)), horizon,
                                           uniform);
        double delta_gap = 0.0;
        for (std::size_t r = 0; r < by_discount.q.size(); ++r)
            delta_gap = std::max(delta_gap, std::fabs(by_discount.q[r] - by_hazard.q[r]));
        c.detail << " delta_gap=" << delta_gap;
        c.require(delta_gap < 1e-10, "delta-hazard equivalence above 1e-10");

        // exponential hazard: DP coefficients equal the hyperbolic discount...
        const double k = 0.1;
        const auto hyp_dp = hd::exact_q(m, hd::DiscountSpec::hyperbolic(k),
                                        hd::HazardPrior::delta(0.0), horizon, uniform);
        const auto exp_dp = hd::exact_q(m, hd::DiscountSpec::exponential(1.0),
                                        hd::HazardPrior::exponential(k), horizon, uniform);
        double coeff_gap = 0.0;
        for (std::size_t r = 0; r < hyp_dp.q.size(); ++r)
            coeff_gap = std::max(coeff_gap, std::fabs(hyp_dp.q[r] - exp_dp.q[r]));
        c.require(coeff_gap < 1e-6, "exponential-hazard DP differs from hyperbolic DP");

        // ...and Monte-Carlo rollouts under sampled hazards agree within 3 SE
        const hd::HazardPrior prior = hd::HazardPrior::exponential(k);
        const long episodes = 1000000;
        std::mt19937_64 mc_rng(99);
        std::uniform_int_distribution<int> act(0, m.n_actions - 1);
        double total = 0.0, total_sq = 0.0;
        for (long e = 0; e < episodes; ++e) {
            const double lambda = hd::sample_hazard(prior, mc_rng);
            const auto ep = hd::simulate_episode(
                m, [&](int, std::mt19937_64& r2) { return act(r2); }, lambda, 0, mc_rng,
                horizon);
            const double ret = ep.undiscounted_return();
            total += ret;
            total_sq += ret * ret;
        }
        const double mean = total / double(episodes);
        const double se =
            std::sqrt((total_sq / double(episodes) - mean * mean) / double(episodes));
        double v0 = 0.0;
        for (int a = 0; a < m.n_actions; ++a) v0 += hyp_dp.q[m.row(0, a)] / m.n_actions;
        c.detail << " mc=" << mean << " dp=" << v0 << " se=" << se;
        c.require(std::fabs(mean - v0) <= 3.0 * se, "Monte-Carlo outside 3 standard errors");
    });

    run(8, "discount-curve convergence", 1.0, [&](Check& c) {
        const hd::GammaLadder l = hd::build_ladder(0.9999, 1000, 1.0);
        const auto curve = hd::discount_curve(l, hd::HazardPrior::exponential(1.0), 3);
        c.detail << " d(1)=" << curve[1] << " d(2)=" << curve[2] << " d(3)=" << curve[3];
        c.require(std::fabs(curve[1] - 0.5) < 5e-3, "d(1) off 1/2 by 5e-3");
        c.require(std::fabs(curve[2] - 1.0 / 3.0) < 5e-3, "d(2) off 1/3 by 5e-3");
        c.require(std::fabs(curve[3] - 0.25) < 5e-3, "d(3) off 1/4 by 5e-3");
    });

    run(9, "TD convergence and greedy argmax", 60.0, [&](Check& c) {
        hd::PathworldConfig pw;
        pw.n_paths = calibrated_n;
        const hd::Mdp m = hd::pathworld_build(pw);
        const hd::GammaLadder l = hd::build_ladder(0.9999, 100, 0.05);
        hd::MultiHorizonTable table(l, m.n_states, m.n_actions, m.r_max);
        hd::train_sweeps(table, m, 10);

        double worst = 0.0;
        for (int i = 1; i <= calibrated_n; ++i) {
            const auto heads = table.head_values(0, i - 1);
            for (std::size_t h = 0; h < heads.size(); ++h)
                worst = std::max(worst, std::fabs(heads[h] -
                                                  std::pow(l.gammas[h], i * i) * double(i)));
        }
        c.detail << " max_head_residual=" << worst;
        c.require(worst <= 1e-3, "a head is further than 1e-3 from gamma^(i^2) * i");

        const hd::AggregationWeights w =
            hd::riemann_weights(l, hd::HazardPrior::exponential(0.05));
        int analytic_best = 0;
        double best_value = -1.0;
        for (int i = 1; i <= calibrated_n; ++i) {
            const double v = hd::aggregate_fn(
                [&](double g) { return std::pow(g, i * i) * double(i); }, w);
            if (v > best_value + 1e-12) {
                best_value = v;
                analytic_best = i - 1;
            }
        }
        std::mt19937_64 rng(1);
        const int greedy = hd::act(hd::ActingPolicy::aggregated(w), table, 0, rng);
        c.detail << " greedy=path" << greedy + 1 << " analytic=path" << analytic_best + 1;
        c.require(greedy == analytic_best, "greedy aggregated action != analytic argmax");
    });

    run(10, "replay audit and gridworld optimality", 120.0, [&](Check& c) {
        const hd::Mdp grid = hd::gridworld_build(5, 5, 4, 4, {{2, 2}, {3, 2}, {2, 3}}, 0.9);
        const hd::GammaLadder l = hd::build_ladder(0.99, 10, 0.01);
        const auto vi = hd::value_iteration(grid, l.gammas.back());

        for (const hd::PriorityScheme scheme :
             {hd::PriorityScheme::MeanTd, hd::PriorityScheme::LargestGammaTd}) {
            hd::ReplayConfig rc;
            rc.steps = 500000;
            rc.seed = 3;
            rc.alpha = 0.1;          // fast early tracking...
            rc.alpha_final = 0.001;  // ...annealed down to average out hazard noise
            rc.random_start = true;  // exploring starts cover every state
            rc.log_audit = true;
            rc.audit_batches = 50;
            const hd::TrainResult res = hd::train_with_replay(grid, l, scheme, rc);
            const char* name = scheme == hd::PriorityScheme::MeanTd ? "mean" : "largest";

            // audit: every logged priority equals the scheme applied to its deltas
            for (const auto& rec : res.audit)
                c.require(rec.priority == hd::priority_from_deltas(scheme, rec.deltas),
                          std::string("audited priority mismatch (") + name + ')');
            c.require(!res.audit.empty(), "no audit records logged");

            // optimality: on every well-visited state the greedy action's DP value
            // is within 1e-2 of the DP optimum
            int checked = 0;
            for (int s = 0; s < grid.n_states; ++s) {
                if (grid.terminal[std::size_t(s)]) continue;
                int visits = 0;
                for (int a = 0; a < grid.n_actions; ++a)
                    visits += res.table.visits[res.table.sa(s, a)];
                if (visits < 100) continue;
                ++checked;
                std::mt19937_64 rng(1);
                const int a_trained =
                    hd::act(hd::ActingPolicy::single_gamma(int(res.table.heads()) - 1),
                            res.table, s, rng);
                double v_best = vi[grid.row(s, 0)];
                for (int a = 1; a < grid.n_actions; ++a)
                    v_best = std::max(v_best, vi[grid.row(s, a)]);
                c.require(vi[grid.row(s, a_trained)] >= v_best - 1e-2,
                          std::string("suboptimal greedy action (") + name + ") at state " +
                              std::to_string(s));
            }
            c.detail << ' ' << name << ":checked=" << checked;
            c.require(checked >= 15, "too few well-visited states to certify the policy");
        }
    });

    if (g_failures) {
        std::printf("ACCEPTANCE: %d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("ACCEPTANCE: all criteria passed\n");
    return 0;
}
