#pragma once

#include <string>
#include <utility>
#include <vector>

#include "formline/graph.hpp"
#include "formline/rng.hpp"
#include "formline/types.hpp"

namespace formline {

struct TrainConfig {
    int max_iterations = 100;
    int restarts = 8;
    uint64_t seed = 1;
    int bp_cycles = 20;
    double convergence_tol = 1e-6;   // relative change in objective
    double monotonicity_tol = 1e-9;
    int emission_solver_iters = 500;
    int threads = 1;  // restart-level parallelism

    std::vector<std::string> validate() const;
};

struct TrainTrace {
    std::vector<std::vector<double>> objectives;  // per restart, per iteration
    std::vector<double> final_objective;          // per restart
    int selected_restart = -1;
};

struct EmFitResult {
    ModelParams params;
    TrainTrace trace;
    Posterior posterior;  // E-step output for the selected restart's final params
    double final_objective = 0.0;
};

enum class TransitionKind { kWithin, kBetween };

// Distance-decay Dirichlet rows: alpha[j][k] = 1 + c * w(|k-j|) / sum_m w(|m-j|)
// with w(d) = 8^-d within season and 2^-d between seasons. Every row sums to
// c + S and the diagonal entry is strictly largest.
Mat make_transition_alphas(int num_states, double c, TransitionKind kind);

// 1 + c * f_g per goal value; zero-frequency components yield a flat 1.
Vec make_emission_dirichlet(const Vec& goal_frequencies, double c);

// Capped goal frequencies observed in the schedule (index 0 = home goals,
// 1 = away goals).
std::pair<Vec, Vec> empirical_goal_frequencies(const Schedule& schedule, int num_goal_states);

// Full hyperparameter block from data: decay alphas plus emission Dirichlets
// built from the schedule's own goal frequencies.
Hyperparams default_hyperparams(const Schedule& schedule, const Cardinalities& card,
                                double c_transition = 87.0, double c_goal = 236.0);

// Per-parameter-block sufficient statistics from one E step.
struct SufficientStats {
    Vec head_gamma_o, head_gamma_d;  // summed chain-head marginals
    Mat xi_o_within, xi_o_between, xi_d_within, xi_d_between;
    Cpt psi_counts;    // zeta_home mass per (offense, defense, observed home goals)
    Cpt gamma_counts;  // zeta_away mass per (offense, defense, observed away goals)
};

SufficientStats accumulate_statistics(const FactorGraph& graph, const Posterior& posterior);

// pi from summed chain-head offense marginals, rho from defense.
std::pair<Vec, Vec> m_step_initial(const Posterior& posterior);

// Row k: (alpha[k][j] - 1 + xi_sums[k][j]) / row total. A row with zero
// denominator falls back to uniform (warning on stderr).
Mat m_step_transition(const Mat& xi_sums, const Mat& alpha);

// Maximizes sum (counts + dirichlet - 1) * ln cpt subject to per-(k,j) simplex
// rows and monotone expected goals (non-decreasing in offense state,
// non-increasing in defense state). Returns the analytic update when it is
// already feasible, otherwise a log-barrier interior-point solution.
Cpt m_step_emission_constrained(const Cpt& zeta_goal_counts, const Vec& dirichlet, double tol,
                                int max_iters = 500);

// Block objective of the emission update, used by tests and the GEM safeguard.
double emission_objective(const Cpt& cpt, const Cpt& counts, const Vec& dirichlet);

// One full M step (all six parameter blocks). Emission blocks keep the
// current CPT when the constrained solve does not improve its own objective,
// so a full EM sweep can never lower the bound.
ModelParams m_step_all(const ModelParams& current, const SufficientStats& stats,
                       const Posterior& posterior, const Hyperparams& hyper,
                       const TrainConfig& config);

// Random starting point per the documented initialization scheme.
ModelParams initial_params(Rng& rng, const Cardinalities& card, const Hyperparams& hyper);

// MAP coordinate ascent: E step = run_bp, M step = closed-form updates plus
// the constrained emission solve; best of `restarts` random initializations.
// The per-iteration objective is the expected complete-data log posterior
// plus the Bethe entropy of the beliefs, i.e. the free-energy estimate of
// ln P(X, theta | Lambda); on forest graphs this is the exact marginal log
// posterior (up to the dropped Dirichlet constant) and is non-decreasing.
EmFitResult em_fit(const Schedule& schedule, const Hyperparams& hyper,
                   const TrainConfig& config);

// CSV: restart,iteration,objective.
std::string trace_csv(const TrainTrace& trace);

}  // namespace formline
