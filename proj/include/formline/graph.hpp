#pragma once

#include <string>
#include <vector>

#include "formline/types.hpp"

namespace formline {

// Raised when message passing or marginal extraction hits an all-zero
// product (impossible observation or underflow).
struct ContradictoryEvidenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Coupled-chain factor graph: one offense and one defense variable per
// (team, presence entry), prior factors at chain heads, transition factors
// along chains (tagged within/between season), and per match one home-goal
// and one away-goal emission factor with the observed count folded in as
// evidence.
struct FactorGraph {
    enum Role { kOffense = 0, kDefense = 1 };
    enum FactorKind { kPrior, kTransition, kEmissionHome, kEmissionAway };

    struct Var {
        int team = 0;
        int week = 0;
        int presence_idx = 0;
        Role role = kOffense;
    };

    struct Factor {
        FactorKind kind = kPrior;
        int var_a = -1;          // kPrior: the only variable
        int var_b = -1;          // pairwise factors: second variable
        bool between = false;    // kTransition only
        int match_idx = -1;      // emission factors only
        int observed_goals = 0;  // emission factors only
        int edge_idx = -1;       // kTransition: per-team edge position
    };

    struct MatchInfo {
        int week = 0;
        int home = 0;
        int away = 0;
        int home_goals = 0;
        int away_goals = 0;
    };

    Cardinalities card;
    int num_teams = 0;
    int num_weeks = 0;
    std::vector<Var> vars;
    std::vector<Factor> factors;
    std::vector<std::vector<int>> adjacency;  // var -> factor ids
    std::vector<MatchInfo> matches;
    std::vector<std::vector<int>> presence_weeks;      // per team
    std::vector<std::vector<uint8_t>> presence_plays;  // per team
    std::vector<std::vector<uint8_t>> edge_between;    // per team, per chain edge

    // Sweep order helpers.
    std::vector<std::vector<int>> transition_factors_into_week;
    std::vector<std::vector<int>> emission_factors_at_week;

    bool is_forest = false;

    int var_count() const { return static_cast<int>(vars.size()); }
    int prior_factor_count() const;
    int transition_factor_count() const;
    int emission_factor_count() const;
    std::string var_name(int v) const;
};

FactorGraph build_graph(const Schedule& schedule, const Cardinalities& card);

struct BpOptions {
    int cycles = 20;
    double damping = 0.0;            // in [0,1); 0 disables
    bool early_stop = false;         // stop when max L1 message change < early_stop_delta
    double early_stop_delta = 1e-8;
};

// Runs the two-phase sweep schedule (forward week order, then backward) for
// `cycles` full sweeps and extracts all node, pairwise, and match marginals
// from the final messages. Exact on forest graphs once messages settle.
Posterior run_bp(const FactorGraph& graph, const ModelParams& params,
                 const BpOptions& options = {});

// out[i] proportional to sum_j defense_msg[j] * cpt[i][j][observed_g].
Vec emission_message_to_offense(const Cpt& cpt, const Vec& defense_msg, int observed_g);

// Element-wise product of incoming messages, renormalized.
Vec node_marginal(const std::vector<Vec>& incoming);

// out[i][j] proportional to left[i] * transition[i][j] * right[j].
Mat pairwise_marginal(const Vec& left_msg, const Vec& right_msg, const Mat& transition);

// out[i][j] proportional to offense[i] * defense[j] * cpt[i][j][observed_g].
Mat match_pair_marginal(const Vec& offense_msg, const Vec& defense_msg, const Cpt& cpt,
                        int observed_g);

struct LogJointResult {
    double value = 0.0;
    // Set when a zero parameter carried nonzero posterior weight (value is
    // then -infinity).
    bool zero_probability_term = false;
};

// Expected complete-data log posterior E_posterior[ln P(X,Z,theta|Lambda)]:
// gamma-weighted prior terms, xi-weighted transition terms, zeta-weighted
// emission terms, plus the Dirichlet exponents, dropping the normalization
// constant.
LogJointResult joint_log_posterior(const FactorGraph& graph, const ModelParams& params,
                                   const Hyperparams& hyper, const Posterior& posterior);

// Bethe entropy of the posterior beliefs; the exact posterior entropy when
// the graph is a forest.
double posterior_entropy(const FactorGraph& graph, const Posterior& posterior);

// CSV export: (team, week, kind, s0..s{S-1}) ordered by team, week, kind.
std::string posterior_csv(const Posterior& posterior, const Schedule& schedule);

}  // namespace formline
